use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use walklab_cli::config::{default_workers, parse_law, parse_n_grid, EventArg, KindArg};
use walklab_cli::{
    cmd_construct_params, cmd_estimate, cmd_simulate, cmd_verify, ConstructArgs, EstimateArgs,
    Outcome, SimulateArgs, VerifyArgs,
};
use walklab_core::drw::SwitchRule;

/// Random-walk simulation and verification laboratory.
#[derive(Parser)]
#[command(name = "walklab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Master seed; recorded in every output.
    #[arg(long, default_value_t = 20240401)]
    seed: u64,
    /// Worker threads (default: WALKLAB_WORKERS or all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Confidence level for intervals.
    #[arg(long, default_value_t = 0.99)]
    confidence: f64,
    /// Output directory.
    #[arg(long, default_value = "walklab-out")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Runs the recursive parameter construction and validates every
    /// constraint.
    ConstructParams {
        /// The balance constant; defaults to the derived value.
        #[arg(long)]
        a: Option<f64>,
        /// Number of hierarchy levels to construct (at least 2).
        #[arg(long, default_value_t = 5)]
        k_max: u32,
        /// Validate an existing parameter file instead of constructing.
        #[arg(long)]
        params_file: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Simulates walk paths or reinforced-walk traces to CSV.
    Simulate {
        /// `walk` or `drw`.
        #[arg(long, default_value = "walk")]
        model: String,
        /// Inline law `p1:y1,p2:y2,...` with rational weights.
        #[arg(long, default_value = "3/4:1,1/4:3")]
        law: String,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        /// Steps per path (walk) or phases per trace (drw).
        #[arg(long, default_value_t = 100)]
        length: usize,
        #[arg(long, default_value_t = 1)]
        replicas: u64,
        /// Coupling truncation level for walk increments.
        #[arg(long)]
        trunc: Option<usize>,
        /// Direction rule for drw: `full` or `perpendicular`.
        #[arg(long, default_value = "full")]
        rule: String,
        /// Also emit detected events (sign changes; V_n in dimension 2).
        #[arg(long, default_value_t = false)]
        events: bool,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Estimates event probabilities over an n-grid and fits the decay
    /// exponent.
    Estimate {
        /// Walk kind: `unit`, `lazy`, or `law`.
        #[arg(long, value_enum, default_value_t = KindArg::Lazy)]
        kind: KindArg,
        /// Inline law for `--kind law`.
        #[arg(long)]
        law: Option<String>,
        #[arg(long)]
        trunc: Option<usize>,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        /// Event: return, sign-change, level-crossing, box-visit,
        /// segment-hit, vn.
        #[arg(long, value_enum, default_value_t = EventArg::Return)]
        event: EventArg,
        /// Level for level-crossing events.
        #[arg(long, default_value_t = 1.0)]
        level: f64,
        /// Half-width of the centered box for box/segment events.
        #[arg(long, default_value_t = 1.0)]
        half: f64,
        /// Comma-separated strictly increasing step counts.
        #[arg(long, default_value = "16,32,64,128,256,512,1024")]
        n_grid: String,
        #[arg(long, default_value_t = 100_000)]
        replicas: u64,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Runs a verification suite; exits 1 on any failed check.
    Verify {
        /// One of lemmas, coupling, qkn2, quantile, series, calibration,
        /// all.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Replica override for the statistical suites.
        #[arg(long)]
        replicas: Option<u64>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn run() -> anyhow::Result<Outcome> {
    let cli = Cli::parse();
    match cli.command {
        Command::ConstructParams {
            a,
            k_max,
            params_file,
            common,
        } => cmd_construct_params(&ConstructArgs {
            a,
            k_max,
            params_file,
            out_dir: common.out_dir,
        }),
        Command::Simulate {
            model,
            law,
            dim,
            length,
            replicas,
            trunc,
            rule,
            events,
            common,
        } => {
            let rule = match rule.as_str() {
                "full" => SwitchRule::Full,
                "perpendicular" => SwitchRule::Perpendicular,
                other => anyhow::bail!("unknown rule {other:?}"),
            };
            cmd_simulate(&SimulateArgs {
                model,
                law: parse_law(&law)?,
                dim,
                length,
                replicas,
                trunc,
                rule,
                seed: common.seed,
                workers: common.workers.unwrap_or_else(default_workers),
                emit_events: events,
                out_dir: common.out_dir,
            })
        }
        Command::Estimate {
            kind,
            law,
            trunc,
            dim,
            event,
            level,
            half,
            n_grid,
            replicas,
            common,
        } => cmd_estimate(&EstimateArgs {
            kind,
            law,
            trunc,
            dim,
            event,
            level,
            half,
            n_grid: parse_n_grid(&n_grid)?,
            replicas,
            seed: common.seed,
            workers: common.workers.unwrap_or_else(default_workers),
            confidence: common.confidence,
            out_dir: common.out_dir,
        }),
        Command::Verify {
            suite,
            replicas,
            common,
        } => cmd_verify(&VerifyArgs {
            suite,
            seed: common.seed,
            replicas,
            workers: common.workers.unwrap_or_else(default_workers),
            confidence: common.confidence,
            out_dir: common.out_dir,
        }),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
