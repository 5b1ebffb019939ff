//! Command-line interface to entropy regularized belief reporting.
//!
//! Exit codes: 0 on success, 1 when the data are inconsistent with the model
//! (failed identification, no recovery root, degenerate input), 2 on input or
//! configuration errors.

mod commands;
mod config;
mod inputs;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use erbr_core::empirics::RecoveryMode;
use erbr_core::recovery::FamilyAggregation;
use erbr_core::Error;

use commands::{Ctx, SimKind, SimulateArgs, Status};
use config::RunConfig;
use output::Output;

#[derive(Parser, Debug)]
#[command(name = "erbr", version, about = "Entropy regularized belief reporting: simulate, fit, recover, identify")]
struct Cli {
    /// Emit JSON even on a terminal.
    #[arg(long, global = true)]
    json: bool,
    /// JSON run configuration; flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed for sampling and noise; echoed in every output.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Reported beliefs for a prior, a partition and lambda.
    Report {
        /// binomial:N:P, uniform:N, explicit:P0,P1,... or file:PATH (file:- for stdin).
        #[arg(long)]
        prior: String,
        /// Bins separated by `|`, states by `,`, ranges `a-b`, complement `~`.
        #[arg(long)]
        partition: String,
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        /// Cross-check against direct numerical minimization.
        #[arg(long)]
        oracle: bool,
    },
    /// Fit a single lambda and format-specific lambdas to a dataset.
    Fit {
        /// Dataset file (JSON or CSV); `-` reads JSON from stdin.
        #[arg(long)]
        data: PathBuf,
        /// Base prior when the dataset carries none.
        #[arg(long)]
        prior: Option<String>,
        #[arg(long, value_enum)]
        aggregation: Option<Aggregation>,
    },
    /// Recover lambda and the prior from singleton-vs-rest beliefs.
    Recover {
        /// Binary reports from `simulate --kind binary`, or a dataset.
        #[arg(long, default_value = "-")]
        input: PathBuf,
        /// Dataset format holding the binary family.
        #[arg(long)]
        family: Option<String>,
    },
    /// Run the identification pipeline on a belief collection.
    Identify {
        /// Collection from `simulate --kind collection`.
        #[arg(long, default_value = "-")]
        input: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        anchor: Option<usize>,
    },
    /// Conjunction fallacy condition for nested events B within C.
    CheckFallacy {
        #[arg(long = "piB")]
        pi_b: f64,
        #[arg(long = "piC")]
        pi_c: f64,
        #[arg(long = "lambdaB", allow_negative_numbers = true)]
        lambda_b: f64,
        #[arg(long = "lambdaC", allow_negative_numbers = true)]
        lambda_c: f64,
    },
    /// Generate model data as JSON.
    Simulate {
        #[arg(long, value_enum, default_value = "collection")]
        kind: SimKind,
        #[arg(long, default_value = "binomial:10:0.5")]
        prior: String,
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        /// Per-format lambda for datasets, NAME=VALUE; repeatable.
        #[arg(long = "lambda-for", value_name = "NAME=VALUE")]
        lambda_for: Vec<String>,
        /// Partition to generate; repeatable. Defaults depend on the kind.
        #[arg(long = "partition")]
        partitions: Vec<String>,
        /// Standard deviation of additive Gaussian noise.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
    },
    /// Reproduce the fit tables, prior recovery and figure data for a dataset.
    Replicate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        prior: Option<String>,
        /// Output directory; defaults to the config, then $ERBR_OUT_DIR, then ./erbr-output.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, value_enum)]
        recovery: Option<Recovery>,
        #[arg(long, value_enum)]
        aggregation: Option<Aggregation>,
        #[arg(long)]
        binary_family: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum Aggregation {
    Pooled,
    MeanOfMembers,
}

impl From<Aggregation> for FamilyAggregation {
    fn from(a: Aggregation) -> Self {
        match a {
            Aggregation::Pooled => FamilyAggregation::Pooled,
            Aggregation::MeanOfMembers => FamilyAggregation::MeanOfMembers,
        }
    }
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum Recovery {
    Auto,
    Required,
    Off,
}

impl From<Recovery> for RecoveryMode {
    fn from(r: Recovery) -> Self {
        match r {
            Recovery::Auto => RecoveryMode::Auto,
            Recovery::Required => RecoveryMode::Required,
            Recovery::Off => RecoveryMode::Off,
        }
    }
}

fn run(cli: Cli) -> Result<Status> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if cli.seed.is_some() {
        config.seed = cli.seed;
    }
    match &cli.command {
        Command::Fit { aggregation, .. } | Command::Replicate { aggregation, .. } => {
            if let Some(a) = aggregation {
                config.fit.aggregation = Some((*a).into());
            }
        }
        Command::Identify { tol, anchor, .. } => {
            config.tol = tol.or(config.tol);
            config.anchor = anchor.or(config.anchor);
        }
        _ => {}
    }
    if let Command::Replicate {
        recovery, binary_family, ..
    } = &cli.command
    {
        config.recovery_mode = recovery.map(Into::into).or(config.recovery_mode);
        config.binary_family = binary_family.clone().or(config.binary_family);
    }
    config.validate()?;
    let ctx = Ctx {
        config,
        out: Output::new(cli.json),
    };
    match cli.command {
        Command::Report {
            prior,
            partition,
            lambda,
            oracle,
        } => commands::report(&ctx, &prior, &partition, lambda, oracle),
        Command::Fit { data, prior, .. } => commands::fit(&ctx, &data, prior.as_deref()),
        Command::Recover { input, family } => commands::recover(&ctx, &input, family.as_deref()),
        Command::Identify { input, .. } => commands::identify(&ctx, &input),
        Command::CheckFallacy {
            pi_b,
            pi_c,
            lambda_b,
            lambda_c,
        } => commands::check_fallacy(&ctx, pi_b, pi_c, lambda_b, lambda_c),
        Command::Simulate {
            kind,
            prior,
            lambda,
            lambda_for,
            partitions,
            noise,
        } => commands::simulate(
            &ctx,
            &SimulateArgs {
                kind,
                prior: &prior,
                lambda,
                lambda_for: &lambda_for,
                partitions: &partitions,
                noise,
            },
        ),
        Command::Replicate {
            data, prior, out_dir, ..
        } => commands::replicate_cmd(&ctx, &data, prior.as_deref(), out_dir),
    }
}

/// 1 for model-side outcomes, 2 for everything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        Some(
            Error::NoSolution { .. }
            | Error::Degenerate(_)
            | Error::Inconsistent { .. }
            | Error::NoExactFit { .. }
            | Error::Convergence { .. },
        ) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Inconsistent) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
