//! Run both layered-generator interpreters on a spec file, compare their
//! sequence laws, and show a few sampled runs.

use std::path::Path;

use anyhow::{bail, Context, Result};

use cepomdp_core::hhmm::{bn_enumerate_sequences, bn_sample, enumerate_sequences, load_hhmm};
use cepomdp_core::rng::{episode_rng, StreamSpace};

fn show(seq: &[usize]) -> String {
    if seq.is_empty() {
        "(empty)".to_string()
    } else {
        seq.iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

pub fn run(spec_path: &Path, max_len: usize, samples: u64, seed: u64) -> Result<()> {
    let spec = load_hhmm(spec_path)
        .with_context(|| format!("loading spec {}", spec_path.display()))?;

    let recursive = enumerate_sequences(&spec, max_len)?;
    let columns = bn_enumerate_sequences(&spec, max_len)?;

    let mut worst: f64 = (recursive.overflow - columns.overflow).abs();
    let mut keys: Vec<&Vec<usize>> = recursive.probabilities.keys().collect();
    for k in columns.probabilities.keys() {
        if !recursive.probabilities.contains_key(k) {
            keys.push(k);
        }
    }
    for k in &keys {
        worst = worst.max((recursive.prob(k) - columns.prob(k)).abs());
    }

    let mut ranked: Vec<(&Vec<usize>, f64)> = recursive
        .probabilities
        .iter()
        .map(|(k, &p)| (k, p))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    println!("law over sequences up to length {max_len} (call/return vs columns):");
    for (seq, p) in ranked.iter().take(10) {
        println!("  {:<24} {:.6}   {:.6}", show(seq), p, columns.prob(seq));
    }
    println!(
        "  {:<24} {:.6}   {:.6}",
        "(longer or endless)", recursive.overflow, columns.overflow
    );
    println!("largest deviation {worst:.3e}");

    for i in 0..samples {
        let mut rng = episode_rng(seed, StreamSpace::Rollout, 0, i);
        let run = bn_sample(&spec, &mut rng, 10 * max_len.max(1));
        let mark = if run.truncated { " (truncated)" } else { "" };
        println!("sample {}: {}{}", i + 1, show(&run.outputs), mark);
    }

    if worst > 1e-9 {
        bail!("the interpreters disagree by {worst:e}");
    }
    Ok(())
}
