//! Directionally reinforced random walks on the lattice.
//!
//! A particle moves in unit steps along coordinate axes, holding each
//! direction for an iid waiting time from a [`WaitingTimeLaw`] (duration 0
//! is allowed and still counts as a phase), then switches direction:
//! uniformly among the other `2d - 1` directions under the full rule, or
//! among the `2d - 2` perpendicular ones under the perpendicular rule.

use rand::Rng;

use crate::error::{Error, Result};
use crate::hierarchy::WaitingTimeLaw;
use crate::walks::WalkPath;

/// How the next direction is drawn at a phase boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwitchRule {
    /// Uniform over the `2d - 1` directions other than the current one.
    Full,
    /// Uniform over the `2d - 2` directions perpendicular to the current
    /// axis.
    Perpendicular,
}

/// Starting direction of the first phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialDirection {
    Axis { axis: usize, positive: bool },
    /// Axis 0 with a fair sign.
    RandomHorizontal,
}

/// Signed axis direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dir {
    pub axis: usize,
    pub positive: bool,
}

impl Dir {
    /// Signed integer code `±(axis + 1)` for CSV output.
    pub fn code(&self) -> i64 {
        let a = self.axis as i64 + 1;
        if self.positive {
            a
        } else {
            -a
        }
    }
}

/// Simulation configuration.
#[derive(Debug, Clone)]
pub struct DrwConfig {
    pub dim: usize,
    pub law: WaitingTimeLaw,
    pub rule: SwitchRule,
    /// Number of direction segments to simulate.
    pub phases: usize,
    pub initial: InitialDirection,
}

/// One phase: a direction held for `duration` unit steps from `start`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Phase {
    pub dir: Dir,
    pub duration: u64,
    pub start: Vec<i64>,
}

/// Phase record of a reinforced walk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DrwTrace {
    pub dim: usize,
    pub phases: Vec<Phase>,
    pub final_position: Vec<i64>,
}

impl DrwTrace {
    /// CSV export: `phase_index,direction,duration,start_x,start_y[,...]`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("phase_index,direction,duration");
        for d in 0..self.dim {
            out.push_str(&format!(",start_x{d}"));
        }
        out.push('\n');
        for (i, p) in self.phases.iter().enumerate() {
            out.push_str(&format!("{},{},{}", i, p.dir.code(), p.duration));
            for d in 0..self.dim {
                out.push_str(&format!(",{}", p.start[d]));
            }
            out.push('\n');
        }
        out
    }
}

fn draw_direction<R: Rng + ?Sized>(
    current: Dir,
    dim: usize,
    rule: SwitchRule,
    rng: &mut R,
) -> Dir {
    match rule {
        SwitchRule::Full => {
            // Directions are indexed 0..2d; skip the current one.
            let cur = current.axis * 2 + usize::from(current.positive);
            let mut pick = rng.random_range(0..2 * dim - 1);
            if pick >= cur {
                pick += 1;
            }
            Dir {
                axis: pick / 2,
                positive: pick % 2 == 1,
            }
        }
        SwitchRule::Perpendicular => {
            // Any signed direction on another axis.
            let pick = rng.random_range(0..2 * (dim - 1));
            let mut axis = pick / 2;
            if axis >= current.axis {
                axis += 1;
            }
            Dir {
                axis,
                positive: pick % 2 == 1,
            }
        }
    }
}

/// Simulates `config.phases` phases of the reinforced walk.
pub fn simulate_drw<R: Rng + ?Sized>(config: &DrwConfig, rng: &mut R) -> Result<DrwTrace> {
    if config.dim == 0 {
        return Err(Error::Precondition("dimension must be at least 1".into()));
    }
    if config.rule == SwitchRule::Perpendicular && config.dim < 2 {
        return Err(Error::Precondition(
            "perpendicular rule requires dimension at least 2".into(),
        ));
    }
    if config.phases == 0 {
        return Err(Error::Precondition("at least one phase is required".into()));
    }
    let sampler = config.law.sampler()?;
    let mut dir = match config.initial {
        InitialDirection::Axis { axis, positive } => {
            if axis >= config.dim {
                return Err(Error::Precondition(format!(
                    "initial axis {axis} out of range for dimension {}",
                    config.dim
                )));
            }
            Dir { axis, positive }
        }
        InitialDirection::RandomHorizontal => Dir {
            axis: 0,
            positive: rng.random::<bool>(),
        },
    };
    let mut pos = vec![0i64; config.dim];
    let mut phases = Vec::with_capacity(config.phases);
    for i in 0..config.phases {
        let duration = sampler.sample_t(rng);
        phases.push(Phase {
            dir,
            duration,
            start: pos.clone(),
        });
        let delta = if dir.positive { 1 } else { -1 };
        pos[dir.axis] += delta * duration as i64;
        if i + 1 < config.phases {
            dir = draw_direction(dir, config.dim, config.rule, rng);
        }
    }
    Ok(DrwTrace {
        dim: config.dim,
        phases,
        final_position: pos,
    })
}

/// Positions at which the walk changes from vertical (axis 1) back to
/// horizontal (axis 0) movement, prefixed by the origin. A trailing
/// vertical phase contributes its endpoint. Dimension 2 only.
///
/// Returns a path with just the origin when the trace contains no such
/// change.
pub fn embedded_walk(trace: &DrwTrace) -> Result<WalkPath> {
    if trace.dim != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: trace.dim,
        });
    }
    let mut flat: Vec<i64> = vec![0, 0];
    for i in 0..trace.phases.len() {
        let vertical = trace.phases[i].dir.axis == 1;
        if !vertical {
            continue;
        }
        let followed_by_horizontal = trace
            .phases
            .get(i + 1)
            .map(|next| next.dir.axis == 0)
            .unwrap_or(true);
        if followed_by_horizontal {
            let end = match trace.phases.get(i + 1) {
                Some(next) => next.start.clone(),
                None => trace.final_position.clone(),
            };
            flat.extend_from_slice(&end);
        }
    }
    WalkPath::from_positions(2, flat)
}

/// Per-point tallies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PointEvents {
    /// Per-phase position matches, endpoints inclusive (boundary instants
    /// belong to both adjacent phases; a zero-duration phase counts its
    /// single position).
    pub visits: u64,
    /// Distinct unit-time instants at the point.
    pub time_visits: u64,
    /// Phase boundaries located exactly at the point.
    pub direction_changes: u64,
}

/// Counts visits of `point` and direction changes occurring at it.
pub fn point_events(trace: &DrwTrace, point: &[i64]) -> Result<PointEvents> {
    if point.len() != trace.dim {
        return Err(Error::DimensionMismatch {
            expected: trace.dim,
            got: point.len(),
        });
    }
    let mut visits = 0u64;
    let mut time_visits = 0u64;
    let mut direction_changes = 0u64;
    for (i, phase) in trace.phases.iter().enumerate() {
        // The phase occupies start + j·dir for j = 0..=duration; only the
        // moving axis varies.
        let on_line = (0..trace.dim)
            .all(|d| d == phase.dir.axis || phase.start[d] == point[d]);
        if on_line {
            let delta = point[phase.dir.axis] - phase.start[phase.dir.axis];
            let j = if phase.dir.positive { delta } else { -delta };
            if (0..=phase.duration as i64).contains(&j) {
                visits += 1;
                // Time instants: count j in 0..duration, plus the very last
                // instant of the trace.
                if (j as u64) < phase.duration || i + 1 == trace.phases.len() {
                    time_visits += 1;
                }
            }
        }
        if i >= 1 && phase.start == point {
            direction_changes += 1;
        }
    }
    Ok(PointEvents {
        visits,
        time_visits,
        direction_changes,
    })
}

#[cfg(test)]
mod tests;
