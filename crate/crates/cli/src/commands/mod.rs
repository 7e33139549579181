pub mod eval;
pub mod hhmm_demo;
pub mod oracle;
pub mod rollout;
pub mod train;
