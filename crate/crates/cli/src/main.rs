use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mlcs::config::{ExperimentConfig, ExperimentKind};
use mlcs::error::CliError;
use mlcs::formats::Manifest;
use mlcs::run::{batch_exit_code, default_out, exit_code, init_threads, run, run_batch};

#[derive(Debug, Parser)]
#[command(name = "mlcs", version, about = "Multilevel compressed sensing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct RunArgs {
    /// TOML experiment config; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: the config's `out`, else runs/<kind>).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Global, local and tail coherence of an operator, with a heatmap.
    Coherence(RunArgs),
    /// Per-scale wavelet sparsity of an image and a noise control.
    Sparsity(RunArgs),
    /// Recover coefficients and their reversal from the same samples.
    Flip(RunArgs),
    /// TV recovery of an image and its permuted-gradient twin.
    Tvflip(RunArgs),
    /// One reconstruction with the configured map and regularizer.
    Recover(RunArgs),
    /// Fluorescence microscopy acquisition and recovery.
    Fmsim(RunArgs),
    /// Continuous Fourier samples recovered in a boundary wavelet basis.
    Infdim(RunArgs),
    /// Fixed sampling fraction over several resolutions.
    ResolutionSweep(RunArgs),
    /// Fixed sample count: full low resolution versus spread high resolution.
    FixedCountSweep(RunArgs),
    /// Run several configs concurrently, each into <out>/<config stem>.
    Batch {
        configs: Vec<PathBuf>,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Print the default config of a kind as TOML.
    DefaultConfig { kind: ExperimentKind },
}

fn load(kind: ExperimentKind, args: &RunArgs) -> Result<(ExperimentConfig, PathBuf), CliError> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::new(kind),
    };
    match cfg.kind {
        Some(k) if k != kind => {
            return Err(CliError::validation(
                "kind",
                format!("config is for `{}` but the subcommand is `{}`", k.name(), kind.name()),
            ))
        }
        _ => cfg.kind = Some(kind),
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let out = args.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| default_out(&cfg));
    Ok((cfg, out))
}

fn report(out: &std::path::Path, result: &Result<Manifest, CliError>) {
    match result {
        Ok(m) => {
            println!("{}", serde_json::to_string_pretty(&m.metrics).expect("metrics serialise"));
            eprintln!("manifest: {}", out.join("manifest.json").display());
            for flag in m.solver.iter().filter(|f| !f.converged) {
                eprintln!("warning: solver stage `{}` stopped before converging", flag.stage);
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::DefaultConfig { kind } => {
            print!("{}", ExperimentConfig::new(kind).to_toml());
            0
        }
        Command::Batch { configs, out, threads } => {
            if let Err(e) = init_threads(threads) {
                eprintln!("error: {e}");
                return ExitCode::from(e.exit_code() as u8);
            }
            let mut jobs = Vec::new();
            for p in &configs {
                match ExperimentConfig::load(p) {
                    Ok(c) => {
                        let stem = p.file_stem().map(|s| s.to_os_string()).unwrap_or_default();
                        jobs.push((c, out.join(stem)));
                    }
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(e.exit_code() as u8);
                    }
                }
            }
            let results = run_batch(&jobs);
            for ((_, dir), r) in jobs.iter().zip(&results) {
                report(dir, r);
            }
            batch_exit_code(&results)
        }
        cmd => {
            let (kind, args) = match cmd {
                Command::Coherence(a) => (ExperimentKind::Coherence, a),
                Command::Sparsity(a) => (ExperimentKind::Sparsity, a),
                Command::Flip(a) => (ExperimentKind::Flip, a),
                Command::Tvflip(a) => (ExperimentKind::Tvflip, a),
                Command::Recover(a) => (ExperimentKind::Recover, a),
                Command::Fmsim(a) => (ExperimentKind::Fmsim, a),
                Command::Infdim(a) => (ExperimentKind::Infdim, a),
                Command::ResolutionSweep(a) => (ExperimentKind::ResolutionSweep, a),
                Command::FixedCountSweep(a) => (ExperimentKind::FixedCountSweep, a),
                Command::Batch { .. } | Command::DefaultConfig { .. } => unreachable!("handled above"),
            };
            match init_threads(args.threads).and_then(|_| load(kind, &args)) {
                Ok((cfg, out)) => {
                    let result = run(&cfg, &out);
                    report(&out, &result);
                    exit_code(&result)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    e.exit_code()
                }
            }
        }
    };
    ExitCode::from(code as u8)
}
