use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sparsedom::harness::{run, ExperimentConfig, ExperimentKind, Report};
use sparsedom::Error;

#[derive(Parser)]
#[command(name = "sparsedom", version, about = "Numerical checks of sparse domination bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pointwise sparse domination of the maximal truncated Hilbert transform.
    Domination(RunArgs),
    /// Weighted norm bound on Lebesgue, Lorentz and Orlicz spaces.
    Norm(RunArgs),
    /// Weighted modular inequality for an N-function.
    Modular(RunArgs),
    /// Bound and decay of medians of the maximal truncated operator.
    Median(RunArgs),
    /// Power-weight comparison of the A_2 / A_∞ bound shapes.
    HpCompare(RunArgs),
    /// Characteristic table and openness step for a weight family.
    Weights(RunArgs),
    /// Inequality kit for an N-function and its complementary function.
    Young(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment config.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory for report.json and rows.csv (defaults to `out` in the config, then out/<experiment>).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Overrides `seed`.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Overrides `trials`.
    #[arg(long, value_name = "N")]
    trials: Option<usize>,
    /// Overrides `domain.J`.
    #[arg(long, value_name = "J")]
    resolution: Option<u32>,
    /// Worker threads (defaults to all cores).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Suppress the summary on stdout.
    #[arg(long)]
    quiet: bool,
}

impl Command {
    fn split(self) -> (ExperimentKind, RunArgs) {
        match self {
            Self::Domination(a) => (ExperimentKind::Domination, a),
            Self::Norm(a) => (ExperimentKind::Norm, a),
            Self::Modular(a) => (ExperimentKind::Modular, a),
            Self::Median(a) => (ExperimentKind::Median, a),
            Self::HpCompare(a) => (ExperimentKind::HpCompare, a),
            Self::Weights(a) => (ExperimentKind::Weights, a),
            Self::Young(a) => (ExperimentKind::Young, a),
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::InvalidParameter { .. }
        | Error::InvalidDomain(_)
        | Error::NonIntegrablePower(_)
        | Error::NonPositiveWeight { .. } => 2,
        Error::Numerical { .. } | Error::NonFinite { .. } | Error::ConjugateUnbracketed { .. } => 3,
        _ => 1,
    }
}

fn load(kind: ExperimentKind, args: &RunArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::from_path(&args.config)?;
    if cfg.kind.is_none() {
        cfg.kind = Some(kind);
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if let Some(j) = args.resolution {
        cfg.domain.level = j;
    }
    if let Some(out) = &args.out {
        cfg.out = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(kind: ExperimentKind, args: &RunArgs) -> Result<Report, Error> {
    let cfg = load(kind, args)?;
    let report = match args.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("--threads: {e}")))?
            .install(|| run(kind, &cfg))?,
        None => run(kind, &cfg)?,
    };
    let out = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("out").join(kind.name()));
    report.write(&out)?;
    if !args.quiet {
        println!("{} -> {}", kind.name(), out.display());
        println!("  max_ratio   {}", report.summary.max_ratio);
        println!("  empirical_C {}", report.summary.empirical_c);
        for (name, ok) in &report.summary.acceptance {
            println!("  {:<28} {}", name, if *ok { "pass" } else { "FAIL" });
        }
    }
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = cli.command.split();
    match execute(kind, &args) {
        Ok(report) if report.passed() => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
