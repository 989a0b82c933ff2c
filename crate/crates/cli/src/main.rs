use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adaprod::experiment::seeded_stream;
use adaprod::{dep_round, run_active_learning, run_expert_comparison, Error, RunConfig, RunOptions, RunReport};
use clap::{Args, Parser, Subcommand};

/// Seeded active-learning simulations with sleeping-experts learners.
#[derive(Parser, Debug)]
#[command(name = "adaprod", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a config with exactly one learner.
    Run(RunArgs),
    /// Run every learner of a config on shared loss streams.
    Compare(RunArgs),
    /// Check a config and print its round plan without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Monte-Carlo check of dependent rounding inclusion frequencies.
    Marginals {
        /// Comma-separated inclusion probabilities summing to an integer.
        #[arg(long, value_delimiter = ',', required = true)]
        probs: Vec<f64>,
        #[arg(long, default_value_t = 200_000)]
        draws: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Per-round CSV path; the summary goes next to it as `<stem>.summary.json`.
    /// Defaults to the config's `output`, else CSV on stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replace the config's seeds with 0..K.
    #[arg(long)]
    seeds: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
}

/// Failures mapped onto exit codes.
enum Failure {
    Config(String),
    Numerical(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) => Failure::Io(e.to_string()),
            e if e.is_validation() => Failure::Config(e.to_string()),
            e => Failure::Numerical(e.to_string()),
        }
    }
}

impl Failure {
    fn report(self) -> ExitCode {
        let (code, msg) = match self {
            Failure::Io(m) => (1, m),
            Failure::Config(m) => (2, m),
            Failure::Numerical(m) => (3, m),
        };
        eprintln!("error: {msg}");
        ExitCode::from(code)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => execute(&args, true),
        Command::Compare(args) => execute(&args, false),
        Command::Validate { config } => validate(&config),
        Command::Marginals { probs, draws, seed } => marginals(&probs, draws, seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}

fn load(path: &Path) -> Result<RunConfig, Failure> {
    RunConfig::from_path(path).map_err(|e| match e {
        // An unreadable config file is a usage problem, not an output one.
        Error::Io(m) => Failure::Config(m),
        e => e.into(),
    })
}

fn execute(args: &RunArgs, single: bool) -> Result<(), Failure> {
    let mut config = load(&args.config)?;
    if let Some(k) = args.seeds {
        config.seeds = (0..k).collect();
    }
    let options = RunOptions {
        threads: args.threads,
        keep_trace: false,
    };
    let report = if single {
        run_active_learning(&config, options)?
    } else {
        run_expert_comparison(&config, options)?
    };
    for algo in &report.summary.algorithms {
        log::info!(
            "{}: mean regret {:.3} (best fixed), {:.3} (dynamic)",
            algo.algo,
            algo.mean_regret_best_fixed,
            algo.mean_regret_dynamic
        );
    }
    match args.out.clone().or_else(|| config.output.clone()) {
        Some(path) => write_outputs(&report, &path),
        None => {
            report.write_csv(std::io::stdout().lock())?;
            eprintln!("{}", report.summary_json()?);
            Ok(())
        }
    }
}

fn write_outputs(report: &RunReport, csv_path: &Path) -> Result<(), Failure> {
    if let Some(dir) = csv_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    }
    report.write_csv_file(csv_path)?;
    let stem = csv_path.file_stem().map_or("run".into(), |s| s.to_string_lossy());
    let summary_path = csv_path.with_file_name(format!("{stem}.summary.json"));
    std::fs::write(&summary_path, report.summary_json()?)
        .map_err(|e| Failure::Io(format!("{}: {e}", summary_path.display())))?;
    log::info!("wrote {} and {}", csv_path.display(), summary_path.display());
    Ok(())
}

fn validate(path: &Path) -> Result<(), Failure> {
    let config = load(path)?;
    let plan = config.plan()?;
    let learners: Vec<&str> = config.learners.iter().map(|l| l.name()).collect();
    let out = serde_json::json!({
        "run_id": config.run_id,
        "environment": config.env.kind(),
        "learners": learners,
        "n": plan.n,
        "rounds": plan.rounds(),
        "labels": config.n_start + if config.sleeping { plan.batches.iter().sum() } else { 0 },
        "seeds": config.seeds,
    });
    println!("{out:#}");
    Ok(())
}

fn marginals(probs: &[f64], draws: usize, seed: u64) -> Result<(), Failure> {
    if draws == 0 {
        return Err(Failure::Config("draws must be at least 1".into()));
    }
    let mut rng = seeded_stream(seed, 0);
    let mut counts = vec![0usize; probs.len()];
    for _ in 0..draws {
        for i in dep_round(probs, &mut rng).map_err(|e| match e {
            Error::Contract(m) => Failure::Config(m),
            e => e.into(),
        })? {
            counts[i] += 1;
        }
    }
    let freq: Vec<f64> = counts.iter().map(|c| *c as f64 / draws as f64).collect();
    let max_dev = freq
        .iter()
        .zip(probs)
        .map(|(f, p)| (f - p).abs())
        .fold(0.0, f64::max);
    let out = serde_json::json!({
        "draws": draws,
        "seed": seed,
        "target": probs,
        "frequency": freq,
        "max_abs_deviation": max_dev,
    });
    println!("{out:#}");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(e: Error) -> u8 {
        match Failure::from(e) {
            Failure::Io(_) => 1,
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    #[test]
    fn errors_map_to_exit_codes() {
        assert_eq!(code(Error::Validation("x".into())), 2);
        assert_eq!(code(Error::Ingestion { line: 3, message: "x".into() }), 2);
        assert_eq!(code(Error::Contract("x".into())), 3);
        assert_eq!(code(Error::Dimension { expected: 2, got: 3 }), 3);
        assert_eq!(code(Error::Numerical { message: "x".into(), residual: 1.0 }), 3);
        assert_eq!(code(Error::Io("x".into())), 1);
    }
}
