//! The four batch commands: parameter construction, simulation, event
//! estimation, and verification.

use std::path::Path;

use anyhow::Context;
use serde_json::json;
use walklab_core::drw::{simulate_drw, DrwConfig, InitialDirection, SwitchRule};
use walklab_core::hierarchy::params::{construct_params, parse_params, validate_params};
use walklab_core::hierarchy::{compute_a, WaitingTimeLaw};
use walklab_core::stream::StreamKey;
use walklab_core::verify::{
    checks_to_csv, estimate_event_prob, fit_exponent, CheckRow, EstimateRequest, EstimateWithCI,
};
use walklab_core::walks::{detect_sign_change, detect_vn, events_to_csv, simulate_walk, EventRecord};

use crate::config::{EventArg, KindArg};
use crate::output::{fmt, RunWriter};
use crate::suites::{run_suite, ALL_SUITES};

/// Exit status of a command: `Ok` maps to 0, `CheckFailed` to 1. Usage
/// errors surface as `anyhow` errors and map to 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    CheckFailed,
}

/// Domain separators for stream derivation, one per command.
mod domain {
    pub const SIMULATE: u64 = 1;
    pub const ESTIMATE: u64 = 2;
}

fn install_pool(workers: usize) -> anyhow::Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .context("building worker pool")
}

// ── construct-params ──────────────────────────────────────────────────────────

pub struct ConstructArgs {
    pub a: Option<f64>,
    pub k_max: u32,
    /// When given, validate this existing parameter file instead of
    /// constructing a fresh one.
    pub params_file: Option<std::path::PathBuf>,
    pub out_dir: std::path::PathBuf,
}

pub fn cmd_construct_params(args: &ConstructArgs) -> anyhow::Result<Outcome> {
    let params = match &args.params_file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            parse_params(&text)?
        }
        None => construct_params(args.a.unwrap_or_else(compute_a), args.k_max)?,
    };
    let report = validate_params(&params);

    let mut writer = RunWriter::new(
        &args.out_dir,
        "construct-params",
        json!({
            "a": params.a,
            "k_max": params.k_max,
            "params_file": args.params_file.as_ref().map(|p| p.display().to_string()),
        }),
    )?;
    writer.write("params.txt", &params.to_text())?;

    let mut csv = String::from("constraint,k,holds,slack_ln\n");
    println!("{:<10} {:>3} {:>6} {:>18}", "constraint", "k", "holds", "slack_ln");
    for row in &report.rows {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            row.constraint, row.k, row.holds, row.slack_ln
        ));
        println!(
            "{:<10} {:>3} {:>6} {:>18.6e}",
            row.constraint, row.k, row.holds, row.slack_ln
        );
        writer.record_check(&format!("{}-k{}", row.constraint, row.k), row.holds);
    }
    for (k, ratio) in &report.growth {
        println!("growth     k={k}: ln(y_next)/y = {ratio:.3e}");
    }
    writer.write("validation.csv", &csv)?;
    let ok = writer.finalize()?;
    Ok(if ok { Outcome::Ok } else { Outcome::CheckFailed })
}

// ── simulate ──────────────────────────────────────────────────────────────────

pub struct SimulateArgs {
    pub model: String, // "walk" or "drw"
    pub law: WaitingTimeLaw,
    pub dim: usize,
    /// Steps per walk replica or phases per trace.
    pub length: usize,
    pub replicas: u64,
    pub trunc: Option<usize>,
    pub rule: SwitchRule,
    pub seed: u64,
    pub workers: usize,
    pub emit_events: bool,
    pub out_dir: std::path::PathBuf,
}

pub fn cmd_simulate(args: &SimulateArgs) -> anyhow::Result<Outcome> {
    let pool = install_pool(args.workers)?;
    let key = StreamKey::new(args.seed, domain::SIMULATE);
    let config = json!({
        "model": args.model,
        "dim": args.dim,
        "length": args.length,
        "replicas": args.replicas,
        "seed": args.seed,
        "trunc": args.trunc,
    });
    let mut writer = RunWriter::new(&args.out_dir, "simulate", config)?;

    match args.model.as_str() {
        "walk" => {
            // Replicas simulate on independent streams in parallel; output
            // is assembled in replica order, so the worker count cannot
            // change the bytes.
            let paths: Vec<anyhow::Result<String>> = pool.install(|| {
                use rayon::prelude::*;
                (0..args.replicas)
                    .into_par_iter()
                    .map(|i| {
                        let mut rng = key.stream(i);
                        let path =
                            simulate_walk(args.dim, &args.law, args.trunc, args.length, &mut rng)?;
                        let mut out = String::new();
                        for s in 0..=path.steps() {
                            out.push_str(&format!("{i},{s}"));
                            for d in 0..args.dim {
                                out.push_str(&format!(",{}", path.coord(d, s)));
                            }
                            out.push('\n');
                        }
                        Ok(out)
                    })
                    .collect()
            });
            let mut csv = String::from("replica,step");
            for d in 0..args.dim {
                csv.push_str(&format!(",x{d}"));
            }
            csv.push('\n');
            let mut events: Vec<(u64, EventRecord)> = Vec::new();
            for (i, block) in paths.into_iter().enumerate() {
                csv.push_str(&block?);
                if args.emit_events {
                    let mut rng = key.stream(i as u64);
                    let path =
                        simulate_walk(args.dim, &args.law, args.trunc, args.length, &mut rng)?;
                    for ev in detect_sign_change(&path, 0, true) {
                        events.push((i as u64, ev));
                    }
                    if args.dim == 2 {
                        for ev in detect_vn(&path)? {
                            events.push((i as u64, ev));
                        }
                    }
                }
            }
            writer.write("paths.csv", &csv)?;
            if args.emit_events {
                let recs: Vec<EventRecord> = events.iter().map(|(_, e)| e.clone()).collect();
                writer.write("events.csv", &events_to_csv(&recs))?;
            }
        }
        "drw" => {
            let traces: Vec<anyhow::Result<String>> = pool.install(|| {
                use rayon::prelude::*;
                (0..args.replicas)
                    .into_par_iter()
                    .map(|i| {
                        let mut rng = key.stream(i);
                        let cfg = DrwConfig {
                            dim: args.dim,
                            law: args.law.clone(),
                            rule: args.rule,
                            phases: args.length,
                            initial: InitialDirection::RandomHorizontal,
                        };
                        let trace = simulate_drw(&cfg, &mut rng)?;
                        let mut out = String::new();
                        for (pi, p) in trace.phases.iter().enumerate() {
                            out.push_str(&format!("{i},{pi},{},{}", p.dir.code(), p.duration));
                            for d in 0..args.dim {
                                out.push_str(&format!(",{}", p.start[d]));
                            }
                            out.push('\n');
                        }
                        Ok(out)
                    })
                    .collect()
            });
            let mut csv = String::from("replica,phase_index,direction,duration");
            for d in 0..args.dim {
                csv.push_str(&format!(",start_x{d}"));
            }
            csv.push('\n');
            for block in traces {
                csv.push_str(&block?);
            }
            writer.write("traces.csv", &csv)?;
        }
        other => anyhow::bail!("unknown model {other:?} (expected walk or drw)"),
    }
    writer.finalize()?;
    Ok(Outcome::Ok)
}

// ── estimate ──────────────────────────────────────────────────────────────────

pub struct EstimateArgs {
    pub kind: KindArg,
    pub law: Option<String>,
    pub trunc: Option<usize>,
    pub dim: usize,
    pub event: EventArg,
    pub level: f64,
    pub half: f64,
    pub n_grid: Vec<u64>,
    pub replicas: u64,
    pub seed: u64,
    pub workers: usize,
    pub confidence: f64,
    pub out_dir: std::path::PathBuf,
}

pub fn cmd_estimate(args: &EstimateArgs) -> anyhow::Result<Outcome> {
    let pool = install_pool(args.workers)?;
    let kind = args.kind.to_walk_kind(args.law.as_deref(), args.trunc)?;
    let event = args.event.to_event_spec(args.level, args.half);
    let config = json!({
        "kind": args.kind,
        "law": args.law,
        "trunc": args.trunc,
        "dim": args.dim,
        "event": args.event,
        "level": args.level,
        "half": args.half,
        "n_grid": args.n_grid,
        "replicas": args.replicas,
        "seed": args.seed,
        "confidence": args.confidence,
    });
    let mut writer = RunWriter::new(&args.out_dir, "estimate", config.clone())?;

    let key = StreamKey::new(args.seed, domain::ESTIMATE);
    let mut estimates: Vec<(u64, EstimateWithCI)> = Vec::new();
    for (gi, &n) in args.n_grid.iter().enumerate() {
        let req = EstimateRequest {
            kind: kind.clone(),
            dim: args.dim,
            event: event.clone(),
            n,
            replicas: args.replicas,
            confidence: args.confidence,
        };
        let est = pool.install(|| estimate_event_prob(&req, key.sub(gi as u64)))?;
        println!(
            "n={n}: p = {:.6e}  [{:.6e}, {:.6e}]",
            est.point, est.ci_lo, est.ci_hi
        );
        estimates.push((n, est));
    }

    let mut csv = String::from("n,point,ci_lo,ci_hi,replicas\n");
    for (n, e) in &estimates {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            n,
            fmt(e.point),
            fmt(e.ci_lo),
            fmt(e.ci_hi),
            e.replicas
        ));
    }
    writer.write("estimates.csv", &csv)?;

    // Plot data: log n vs log p with interval columns.
    let mut plot = String::from("log_n,log_p,log_p_lo,log_p_hi\n");
    for (n, e) in &estimates {
        if e.point > 0.0 {
            plot.push_str(&format!(
                "{},{},{},{}\n",
                fmt((*n as f64).ln()),
                fmt(e.point.ln()),
                fmt(e.ci_lo.max(1e-300).ln()),
                fmt(e.ci_hi.max(1e-300).ln()),
            ));
        }
    }
    writer.write("loglog.csv", &plot)?;

    let samples: Vec<(f64, EstimateWithCI)> = estimates
        .iter()
        .map(|(n, e)| (*n as f64, e.clone()))
        .collect();
    match fit_exponent(&samples, args.confidence) {
        Ok(fit) => {
            println!(
                "fitted slope {:.4} [{:.4}, {:.4}]",
                fit.slope, fit.slope_ci_lo, fit.slope_ci_hi
            );
            let fit_json = json!({
                "config": config,
                "slope": fit.slope,
                "intercept": fit.intercept,
                "slope_ci_lo": fit.slope_ci_lo,
                "slope_ci_hi": fit.slope_ci_hi,
                "excluded": fit.excluded,
            });
            writer.write("fit.json", &serde_json::to_string_pretty(&fit_json)?)?;
        }
        Err(e) => {
            println!("exponent fit skipped: {e}");
            writer.write(
                "fit.json",
                &serde_json::to_string_pretty(&json!({"config": config, "error": e.to_string()}))?,
            )?;
        }
    }
    writer.finalize()?;
    Ok(Outcome::Ok)
}

// ── verify ────────────────────────────────────────────────────────────────────

pub struct VerifyArgs {
    pub suite: String,
    pub seed: u64,
    pub replicas: Option<u64>,
    pub workers: usize,
    pub confidence: f64,
    pub out_dir: std::path::PathBuf,
}

pub fn cmd_verify(args: &VerifyArgs) -> anyhow::Result<Outcome> {
    let pool = install_pool(args.workers)?;
    let suites: Vec<&str> = if args.suite == "all" {
        ALL_SUITES.to_vec()
    } else {
        if !ALL_SUITES.contains(&args.suite.as_str()) {
            anyhow::bail!(
                "unknown suite {:?} (expected one of {:?} or all)",
                args.suite,
                ALL_SUITES
            );
        }
        vec![args.suite.as_str()]
    };
    let config = json!({
        "suite": args.suite,
        "seed": args.seed,
        "replicas": args.replicas,
        "confidence": args.confidence,
    });
    let mut writer = RunWriter::new(&args.out_dir, "verify", config)?;
    let mut all_rows: Vec<CheckRow> = Vec::new();
    for suite in suites {
        let result =
            pool.install(|| run_suite(suite, args.seed, args.replicas, args.confidence))?;
        for (name, contents) in &result.artifacts {
            writer.write(name, contents)?;
        }
        for row in &result.rows {
            println!(
                "[{}] {:<24} {:<44} {}",
                suite,
                row.check,
                row.params,
                if row.holds { "pass" } else { "FAIL" }
            );
            writer.record_check(&format!("{}:{}", row.check, row.params), row.holds);
        }
        all_rows.extend(result.rows);
    }
    writer.write("report.csv", &checks_to_csv(&all_rows))?;
    let summary = json!({
        "seed": args.seed,
        "replicas": args.replicas,
        "confidence": args.confidence,
        "checks": all_rows.iter().map(|r| json!({
            "check": r.check,
            "params": r.params,
            "holds": r.holds,
        })).collect::<Vec<_>>(),
        "all_hold": all_rows.iter().all(|r| r.holds),
    });
    writer.write("summary.json", &serde_json::to_string_pretty(&summary)?)?;
    let ok = writer.finalize()?;
    Ok(if ok { Outcome::Ok } else { Outcome::CheckFailed })
}

/// Ensures an out-dir argument is usable.
pub fn check_out_dir(path: &Path) -> anyhow::Result<()> {
    if path.as_os_str().is_empty() {
        anyhow::bail!("--out-dir must not be empty");
    }
    Ok(())
}
