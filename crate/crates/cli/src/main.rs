//! Command-line entry point: experiment configuration, run orchestration,
//! report emission, acceptance-suite driver.

use clap::{Parser, Subcommand};
use heatlab_cli::accept::{self, CriterionResult, Ctx};
use heatlab_cli::baseline::Baseline;
use heatlab_cli::config::RunConfig;
use heatlab_cli::report::ReportBundle;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_RESOURCE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "heatlab",
    about = "Numerical laboratory for Besov-space heat estimates",
    version
)]
struct Cli {
    /// Experiment configuration file (flat key = value with [sections]).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; all randomness derives from it.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Output directory for CSV/JSON artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for suite parallelism.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Baseline file overriding the built-in frozen envelopes.
    #[arg(long, global = true)]
    baseline: Option<PathBuf>,
    /// Measure envelopes and write them to this path instead of comparing.
    #[arg(long, global = true)]
    freeze_baseline: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy, PartialEq)]
enum Command {
    /// Partition of unity and semigroup block decay (criteria 1-2).
    LpVerify,
    /// Besov norm suites: product, duality, interpolation, extension,
    /// composition, equivalence (criterion 11).
    BesovSuite,
    /// Maximal-regularity T-independence sweep (criterion 3).
    Maxreg,
    /// Half-space reflection solver checks (criterion 4).
    Halfspace,
    /// Whole-box kernel decay and bounded-domain rates (criteria 5-6).
    Decay,
    /// Exterior-proxy decay, localized norms, comparison and duality
    /// identities (criteria 7, 9, 10).
    Exterior,
    /// Absorption-integral criterion (criterion 8).
    Absorb,
    /// Nonlinear global-existence and blow-up experiments (criterion 12).
    Nonlinear,
    /// Standalone smallness-threshold search from the config file.
    Threshold,
    /// The full acceptance matrix.
    AcceptAll,
}

fn load_config(cli: &Cli) -> Result<RunConfig, String> {
    match &cli.config {
        None => Ok(RunConfig::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
            RunConfig::parse(&text).map_err(|e| e.to_string())
        }
    }
}

fn load_baseline(cli: &Cli) -> Result<Baseline, String> {
    if cli.freeze_baseline.is_some() {
        return Ok(Baseline::empty());
    }
    match &cli.baseline {
        None => Ok(Baseline::builtin()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read baseline {}: {e}", path.display()))?;
            Baseline::from_json(&text)
        }
    }
}

fn emit(results: &[CriterionResult], bundle: &mut ReportBundle, verbose: bool) -> bool {
    let mut all_pass = true;
    for result in results {
        println!("{}", result.line());
        if verbose || !result.passed {
            for d in &result.details {
                println!("    {d}");
            }
        }
        for table in &result.tables {
            bundle.push_csv(table.clone());
        }
        for (name, value) in &result.json {
            bundle.push_json(name, value.clone());
        }
        all_pass &= result.passed;
    }
    all_pass
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    let config = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let baseline = match load_baseline(&cli) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let mut ctx = Ctx::new(cli.seed, baseline, cli.freeze_baseline.is_some());

    let experiment = match cli.command {
        Command::LpVerify => "lp-verify",
        Command::BesovSuite => "besov-suite",
        Command::Maxreg => "maxreg",
        Command::Halfspace => "halfspace",
        Command::Decay => "decay",
        Command::Exterior => "exterior",
        Command::Absorb => "absorb",
        Command::Nonlinear => "nonlinear",
        Command::Threshold => "threshold",
        Command::AcceptAll => "accept",
    };
    let mut bundle = ReportBundle::new(experiment, cli.out.as_deref(), config.canonical(), cli.seed);

    let results: Vec<CriterionResult> = match cli.command {
        Command::LpVerify => vec![accept::criterion_1(&mut ctx), accept::criterion_2(&mut ctx)],
        Command::BesovSuite => vec![accept::criterion_11(&mut ctx)],
        Command::Maxreg => vec![accept::criterion_3(&mut ctx)],
        Command::Halfspace => vec![accept::criterion_4(&mut ctx)],
        Command::Decay => vec![accept::criterion_5(&mut ctx), accept::criterion_6(&mut ctx)],
        Command::Exterior => {
            let run = accept::exterior_run();
            vec![
                accept::criterion_7(&run),
                accept::criterion_9(&run),
                accept::criterion_10(&mut ctx),
            ]
        }
        Command::Absorb => vec![accept::criterion_8(&mut ctx)],
        Command::Nonlinear => vec![accept::criterion_12(&mut ctx)],
        Command::Threshold => match accept::threshold_experiment(&mut ctx, &config) {
            Ok(r) => vec![r],
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_CONFIG);
            }
        },
        Command::AcceptAll => accept::run_all(&mut ctx),
    };

    let all_pass = emit(&results, &mut bundle, cli.command == Command::AcceptAll);
    if cli.command == Command::AcceptAll {
        let passed = results.iter().filter(|r| r.passed).count();
        println!("---");
        println!("acceptance: {passed}/{} criteria passed", results.len());
    }

    if let Some(path) = &cli.freeze_baseline {
        if let Err(e) = std::fs::write(path, ctx.baseline.to_json()) {
            eprintln!("error writing baseline: {e}");
            return ExitCode::from(EXIT_RESOURCE);
        }
        println!("baseline frozen to {}", path.display());
    }
    if let Err(e) = bundle.finalize() {
        eprintln!("error writing reports: {e}");
        return ExitCode::from(EXIT_RESOURCE);
    }

    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_NUMERIC)
    }
}
