//! Train a policy and write the run artifacts.
//!
//! The output directory receives four files:
//!
//! * `policy.json` — the best parameter set, in the versioned document form.
//! * `history.csv` — one line per training iteration.
//! * `summary.json` — final score estimate and stop condition.
//! * `manifest.json` — the resolved configuration and tool version, so a
//!   run can be reproduced from its artifacts alone.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::json;

use cepomdp_core::policy::POLICY_SCHEMA;
use cepomdp_core::{run_ce, serialize_policy, write_history_csv, GenerativeSource};

use crate::config::ExperimentConfig;

pub fn run(config: ExperimentConfig, out: &Path) -> Result<()> {
    let env = config.build_env()?;
    config.check_structure(&env)?;

    let result = run_ce(&GenerativeSource(env), &config.structure, &config.ce)?;

    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    fs::write(out.join("policy.json"), serialize_policy(&result.best_params))?;

    let mut history = Vec::new();
    write_history_csv(&result.history, &mut history)?;
    fs::write(out.join("history.csv"), history)?;

    let mut summary = json!({
        "best_mean_score": result.best_mean_score,
        "best_std_error": result.best_std_error,
        "evaluation_rollouts": config.ce.evaluation_rollouts,
        "iterations_run": result.iterations_run,
        "stop_reason": result.stop_reason,
    });
    if config.round_report {
        let rounded = (result.best_mean_score * 10.0).round() / 10.0;
        summary["best_mean_score_rounded"] = json!(rounded);
    }
    fs::write(
        out.join("summary.json"),
        format!("{:#}\n", summary),
    )?;

    let manifest = json!({
        "tool": "cepomdp",
        "version": env!("CARGO_PKG_VERSION"),
        "policy_schema": POLICY_SCHEMA,
        "config": config,
    });
    fs::write(
        out.join("manifest.json"),
        format!("{:#}\n", manifest),
    )?;

    println!(
        "best mean score {:.3} +- {:.3} after {} iterations ({:?})",
        result.best_mean_score,
        result.best_std_error,
        result.iterations_run,
        result.stop_reason,
    );
    println!("wrote policy.json, history.csv, summary.json, manifest.json");
    Ok(())
}
