//! Run configuration shared by the subcommands.

use anyhow::{bail, Context};
use serde::Serialize;
use walklab_core::hierarchy::WaitingTimeLaw;
use walklab_core::verify::{EventSpec, WalkKind};

/// Parses an inline law spec `p1:y1,p2:y2,...` with rational weights,
/// e.g. `3/4:1,1/4:3`.
pub fn parse_law(spec: &str) -> anyhow::Result<WaitingTimeLaw> {
    let mut levels = Vec::new();
    for part in spec.split(',') {
        let (p, y) = part
            .split_once(':')
            .with_context(|| format!("level {part:?} is not of the form p:y"))?;
        let (num, den) = match p.split_once('/') {
            Some((n, d)) => (
                n.trim().parse::<i64>().context("bad weight numerator")?,
                d.trim().parse::<i64>().context("bad weight denominator")?,
            ),
            None => (p.trim().parse::<i64>().context("bad weight")?, 1),
        };
        let y: u64 = y.trim().parse().context("bad interval length y")?;
        levels.push((num, den, y));
    }
    Ok(WaitingTimeLaw::from_ratios(&levels)?)
}

/// Parses a comma-separated strictly increasing grid.
pub fn parse_n_grid(spec: &str) -> anyhow::Result<Vec<u64>> {
    let grid: Vec<u64> = spec
        .split(',')
        .map(|s| s.trim().parse::<u64>().context("bad n-grid entry"))
        .collect::<anyhow::Result<_>>()?;
    if grid.is_empty() {
        bail!("empty n-grid");
    }
    for w in grid.windows(2) {
        if w[1] <= w[0] {
            bail!("n-grid must be strictly increasing");
        }
    }
    Ok(grid)
}

/// Walk selector for estimates and simulations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KindArg {
    Unit,
    Lazy,
    Law,
}

impl KindArg {
    pub fn to_walk_kind(
        self,
        law: Option<&str>,
        trunc: Option<usize>,
    ) -> anyhow::Result<WalkKind> {
        Ok(match self {
            KindArg::Unit => WalkKind::Unit,
            KindArg::Lazy => WalkKind::Lazy,
            KindArg::Law => {
                let spec = law.context("--law is required for --kind law")?;
                WalkKind::Waiting {
                    law: parse_law(spec)?,
                    trunc,
                }
            }
        })
    }
}

/// Event selector for estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventArg {
    Return,
    SignChange,
    LevelCrossing,
    BoxVisit,
    SegmentHit,
    Vn,
}

impl EventArg {
    pub fn to_event_spec(self, level: f64, half: f64) -> EventSpec {
        match self {
            EventArg::Return => EventSpec::ReturnToZero,
            EventArg::SignChange => EventSpec::SignChange,
            EventArg::LevelCrossing => EventSpec::LevelCrossing { level },
            EventArg::BoxVisit => EventSpec::BoxVisit { half },
            EventArg::SegmentHit => EventSpec::SegmentHit { half },
            EventArg::Vn => EventSpec::Vn,
        }
    }
}

/// Default worker count: `WALKLAB_WORKERS`, else all cores.
pub fn default_workers() -> usize {
    std::env::var("WALKLAB_WORKERS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&w| w >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}
