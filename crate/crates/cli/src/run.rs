use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result, EXIT_NOT_CONVERGED, EXIT_OK};
use crate::experiments::dispatch;
use crate::formats::{Artifacts, Manifest};

/// Stored alongside the artifacts; re-running it reproduces them.
pub const CONFIG_NAME: &str = "config.toml";

/// Default output directory for a config without `out`.
pub fn default_out(cfg: &ExperimentConfig) -> PathBuf {
    let kind = cfg.kind.map(|k| k.name()).unwrap_or("run");
    PathBuf::from("runs").join(kind)
}

/// Validates, runs and writes the manifest. Solver non-convergence is not an
/// error here: it is recorded in the manifest flags.
pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<Manifest> {
    cfg.validate()?;
    let kind = cfg.kind()?;
    let mut art = Artifacts::create(out)?;
    let mut stored = cfg.clone();
    stored.out = None;
    art.bytes(CONFIG_NAME, stored.to_toml().as_bytes())?;
    let outcome = dispatch(kind, cfg, &mut art)?;
    let config = serde_json::to_value(&stored).expect("config serialises");
    art.finish(kind.name(), cfg.seed, config, outcome.metrics, outcome.flags)
}

pub fn exit_code(result: &Result<Manifest>) -> i32 {
    match result {
        Ok(m) if m.all_converged() => EXIT_OK,
        Ok(_) => EXIT_NOT_CONVERGED,
        Err(e) => e.exit_code(),
    }
}

/// Runs independent configs concurrently on the current rayon pool; results
/// keep the input order.
pub fn run_batch(jobs: &[(ExperimentConfig, PathBuf)]) -> Vec<Result<Manifest>> {
    jobs.par_iter().map(|(cfg, out)| run(cfg, out)).collect()
}

/// Worst exit code of a batch: validation beats non-convergence, which beats
/// success; other failures dominate.
pub fn batch_exit_code(results: &[Result<Manifest>]) -> i32 {
    let rank = |c: i32| match c {
        EXIT_OK => 0,
        EXIT_NOT_CONVERGED => 1,
        crate::error::EXIT_VALIDATION => 2,
        _ => 3,
    };
    results.iter().map(exit_code).max_by_key(|&c| rank(c)).unwrap_or(EXIT_OK)
}

/// Sets the global rayon pool size once per process.
pub fn init_threads(threads: usize) -> Result<()> {
    if threads == 0 {
        return Err(CliError::validation("--threads", "must be at least 1"));
    }
    // A second call in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}
