use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use saddlelab::discrete::NoiseFamily;
use saddlelab::emit::{self, ResultsDocument};
use saddlelab::experiment::{self, ExperimentConfig, ExperimentKind, ModelKind, OutputFormat, Overrides, RunManifest, RunResults};
use saddlelab::{Error, Result};

/// Monte Carlo experiments on stochastic approximation near degenerate saddles.
#[derive(Parser)]
#[command(name = "saddlelab", version, allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured cells, optionally dumping trajectories.
    Simulate(Flags),
    /// Phase diagram over k and gamma.
    Sweep(Flags),
    /// Linear drift k|x| with gamma = 1.
    LinearDichotomy(Flags),
    /// Monomial drift in the power frame.
    MonomialDichotomy(Flags),
    /// The discrete recursion with step n^-gamma.
    DiscreteDichotomy(Flags),
    /// Distribution of the urn's final red fraction.
    Urn(Flags),
    /// Run the acceptance suite; exits nonzero if any check fails.
    Validate(Flags),
}

#[derive(Args, Clone, Default)]
struct Flags {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Re-run a recorded manifest and check its counts.
    #[arg(long, conflicts_with = "config")]
    replay: Option<PathBuf>,
    #[arg(long, value_parser = parse_model)]
    model: Option<ModelKind>,
    /// Comma-separated drift exponents (or linear coefficients).
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<f64>>,
    /// Comma-separated step-size exponents.
    #[arg(long, value_delimiter = ',')]
    gamma: Option<Vec<f64>>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    cap: Option<f64>,
    /// rademacher, uniform or off.
    #[arg(long, value_parser = parse_noise)]
    noise: Option<NoiseFamily>,
    #[arg(long)]
    noise_bound: Option<f64>,
    #[arg(long)]
    x0: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// End time, or last index for the discrete recursion and the urn.
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Base seed; falls back to SADDLELAB_SEED, then the config.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    eps_conv: Option<f64>,
    #[arg(long)]
    barrier: Option<f64>,
    #[arg(long, value_parser = parse_format)]
    format: Option<OutputFormat>,
    /// Output directory; without it results go to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Store this many trajectories of the first cell.
    #[arg(long)]
    dump_trajectories: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

fn parse_model(s: &str) -> std::result::Result<ModelKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_noise(s: &str) -> std::result::Result<NoiseFamily, String> {
    match s {
        "uniform" => Ok(NoiseFamily::UniformCentered),
        _ => s.parse().map_err(|e: Error| e.to_string()),
    }
}

fn parse_format(s: &str) -> std::result::Result<OutputFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides {
            model: self.model,
            k: self.k.clone(),
            gamma: self.gamma.clone(),
            c: self.c,
            cap: self.cap,
            noise: self.noise,
            noise_bound: self.noise_bound,
            x0: self.x0,
            dt: self.dt,
            horizon: self.horizon,
            trials: self.trials,
            seed: self.seed,
            eps_conv: self.eps_conv,
            barrier: self.barrier,
            format: self.format,
            out: self.out.clone(),
            dump_trajectories: self.dump_trajectories,
        }
    }
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var("SADDLELAB_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("SADDLELAB_SEED must be an unsigned integer, got {s:?}"))),
        Err(_) => Ok(None),
    }
}

fn execute(kind: ExperimentKind, flags: &Flags) -> Result<bool> {
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(j) = flags.jobs {
            b = b.num_threads(j.max(1));
        }
        b.build().map_err(|e| Error::Config(e.to_string()))?
    };
    let (output, cfg) = match &flags.replay {
        Some(path) => {
            let manifest = RunManifest::load(path)?;
            let mut cfg = manifest.config.clone();
            if flags.out.is_some() {
                cfg.out = flags.out.clone();
            }
            let out = pool.install(|| experiment::replay(&manifest))?;
            eprintln!("replay of {} reproduced every count", path.display());
            (out, cfg)
        }
        None => {
            let cfg = ExperimentConfig::resolve(Some(kind), flags.config.as_deref(), &flags.overrides(), env_seed()?)?;
            (pool.install(|| experiment::run(&cfg))?, cfg)
        }
    };

    match &cfg.out {
        Some(dir) => {
            for line in output.summary_lines() {
                println!("{line}");
            }
            for path in output.write(dir)? {
                eprintln!("wrote {}", path.display());
            }
        }
        None => {
            if matches!(output.results, RunResults::Cells(_)) {
                for line in output.summary_lines() {
                    eprintln!("{line}");
                }
                match cfg.format {
                    OutputFormat::Csv => print!("{}", emit::to_csv(&output.rows())),
                    OutputFormat::Json => println!(
                        "{}",
                        emit::to_json(&ResultsDocument {
                            manifest: output.manifest.clone(),
                            rows: output.rows(),
                        })?
                    ),
                }
            } else {
                for line in output.summary_lines() {
                    println!("{line}");
                }
            }
        }
    }
    Ok(output.succeeded())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, flags) = match &cli.command {
        Command::Simulate(f) => (ExperimentKind::Simulate, f),
        Command::Sweep(f) => (ExperimentKind::Sweep, f),
        Command::LinearDichotomy(f) => (ExperimentKind::LinearDichotomy, f),
        Command::MonomialDichotomy(f) => (ExperimentKind::MonomialDichotomy, f),
        Command::DiscreteDichotomy(f) => (ExperimentKind::DiscreteDichotomy, f),
        Command::Urn(f) => (ExperimentKind::Urn, f),
        Command::Validate(f) => (ExperimentKind::Validate, f),
    };
    match execute(kind, flags) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
