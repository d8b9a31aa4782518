//! Lattice walk simulation and geometric event detection.

pub mod geometry;

use rand::Rng;

use crate::error::{Error, Result};
use crate::hierarchy::{BundleSampler, WaitingTimeLaw};
pub use geometry::{interval_hits, segment_hits_box, AxisBox};

/// Integer path of a `dim`-dimensional walk, starting at the origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkPath {
    dim: usize,
    /// `(steps + 1) * dim` coordinates, row per time index.
    flat: Vec<i64>,
}

impl WalkPath {
    pub fn from_increments(dim: usize, increments: &[i64]) -> Self {
        assert_eq!(increments.len() % dim, 0);
        let steps = increments.len() / dim;
        let mut flat = vec![0i64; (steps + 1) * dim];
        for s in 0..steps {
            for d in 0..dim {
                flat[(s + 1) * dim + d] = flat[s * dim + d] + increments[s * dim + d];
            }
        }
        WalkPath { dim, flat }
    }

    pub fn from_positions(dim: usize, positions: Vec<i64>) -> Result<Self> {
        if positions.len() % dim != 0 || positions.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: positions.len(),
            });
        }
        if positions[..dim].iter().any(|&x| x != 0) {
            return Err(Error::Precondition("path must start at the origin".into()));
        }
        Ok(WalkPath {
            dim,
            flat: positions,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of steps `n`; the path holds `n + 1` positions.
    pub fn steps(&self) -> usize {
        self.flat.len() / self.dim - 1
    }

    pub fn position(&self, i: usize) -> &[i64] {
        &self.flat[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coord(&self, c: usize, i: usize) -> i64 {
        self.flat[i * self.dim + c]
    }

    /// Negates every increment (reflection through the origin).
    pub fn negated(&self) -> WalkPath {
        WalkPath {
            dim: self.dim,
            flat: self.flat.iter().map(|&x| -x).collect(),
        }
    }

    /// CSV dump, one row per time index.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step");
        for d in 0..self.dim {
            out.push_str(&format!(",x{d}"));
        }
        out.push('\n');
        for i in 0..=self.steps() {
            out.push_str(&format!("{i}"));
            for d in 0..self.dim {
                out.push_str(&format!(",{}", self.coord(d, i)));
            }
            out.push('\n');
        }
        out
    }
}

/// Geometric event classes detected on paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Return,
    SignChange,
    LevelCrossing,
    Vn,
    SegmentHit,
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::Return => "return",
            EventKind::SignChange => "sign_change",
            EventKind::LevelCrossing => "level_crossing",
            EventKind::Vn => "v_n",
            EventKind::SegmentHit => "segment_hit",
        }
    }
}

/// One detected event at step index `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventRecord {
    pub kind: EventKind,
    pub n: usize,
    pub coord: usize,
    pub payload: i64,
}

/// CSV emission for event streams: `kind,n,coord,payload`.
pub fn events_to_csv(events: &[EventRecord]) -> String {
    let mut out = String::from("kind,n,coord,payload\n");
    for e in events {
        out.push_str(&format!("{},{},{},{}\n", e.kind.name(), e.n, e.coord, e.payload));
    }
    out
}

/// Strict sign changes `S_n · S_{n+1} < 0` of one coordinate. The
/// non-strict form compares `sgn(S_n) = -sgn(S_{n+1})` with `sgn(0) = 0`
/// and excludes zero endpoints, which makes it coincide with the strict
/// product form; both are kept for the record.
pub fn detect_sign_change(path: &WalkPath, coord: usize, strict: bool) -> Vec<EventRecord> {
    let mut out = Vec::new();
    for n in 0..path.steps() {
        let a = path.coord(coord, n).signum();
        let b = path.coord(coord, n + 1).signum();
        let hit = if strict {
            a * b < 0
        } else {
            a == -b && a != 0 && b != 0
        };
        if hit {
            out.push(EventRecord {
                kind: EventKind::SignChange,
                n,
                coord,
                payload: b,
            });
        }
    }
    out
}

/// Steps at which the closed interval between consecutive positions
/// contains `level`.
pub fn detect_level_crossing(path: &WalkPath, coord: usize, level: f64) -> Vec<EventRecord> {
    let mut out = Vec::new();
    for n in 0..path.steps() {
        let a = path.coord(coord, n);
        let b = path.coord(coord, n + 1);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        if lo as f64 <= level && level <= hi as f64 {
            out.push(EventRecord {
                kind: EventKind::LevelCrossing,
                n,
                coord,
                payload: (b - a).signum(),
            });
        }
    }
    out
}

/// Events where coordinate 0 strictly flips sign while coordinate 1 sits
/// at zero at both endpoints.
pub fn detect_vn(path: &WalkPath) -> Result<Vec<EventRecord>> {
    if path.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: path.dim(),
        });
    }
    let mut out = Vec::new();
    for n in 0..path.steps() {
        let s0 = path.coord(0, n).signum();
        let s1 = path.coord(0, n + 1).signum();
        if s0 * s1 < 0 && path.coord(1, n) == 0 && path.coord(1, n + 1) == 0 {
            out.push(EventRecord {
                kind: EventKind::Vn,
                n,
                coord: 0,
                payload: s1,
            });
        }
    }
    Ok(out)
}

/// Counts steps whose straight segment meets the box.
pub fn count_polygonal_hits(path: &WalkPath, bounds: &AxisBox) -> Result<(u64, Vec<usize>)> {
    if path.dim() != bounds.dim() {
        return Err(Error::DimensionMismatch {
            expected: bounds.dim(),
            got: path.dim(),
        });
    }
    let mut indices = Vec::new();
    for n in 0..path.steps() {
        if segment_hits_box(path.position(n), path.position(n + 1), bounds)? {
            indices.push(n);
        }
    }
    Ok((indices.len() as u64, indices))
}

// ── Increments ────────────────────────────────────────────────────────────────

/// Geometric draw with parameter 2/3 on `{1, 2, ...}`.
pub fn sample_geometric_23<R: Rng + ?Sized>(rng: &mut R) -> u32 {
    let mut g = 1u32;
    while rng.random::<f64>() < 1.0 / 3.0 {
        g += 1;
    }
    g
}

/// One sampled walk increment with diagnostics.
#[derive(Debug, Clone)]
pub struct Increment {
    /// `ε · Σ_{i=1..G} (-1)^i T_i` at the requested truncation.
    pub value: i64,
    pub g: u32,
    /// Hierarchy level κ of each waiting-time draw.
    pub kappas: Vec<u32>,
}

/// Draws one increment. `trunc = Some(K)` uses the κ-truncated coupling
/// (waiting times distributed as the level-`K` truncated law); `None` uses
/// the full law.
pub fn sample_increment<R: Rng + ?Sized>(
    sampler: &BundleSampler,
    trunc: Option<usize>,
    rng: &mut R,
) -> Result<Increment> {
    if let Some(k) = trunc {
        if k == 0 || k > sampler.num_levels() {
            return Err(Error::SamplingRange(format!(
                "truncation level {k} out of range 1..={}",
                sampler.num_levels()
            )));
        }
    }
    let eps: i64 = if rng.random::<bool>() { 1 } else { -1 };
    let g = sample_geometric_23(rng);
    let mut sum = 0i64;
    let mut kappas = Vec::with_capacity(g as usize);
    for i in 1..=g {
        let (t, kappa) = match trunc {
            Some(k) => {
                let b = sampler.sample_truncated_bundle(k, rng);
                (b.t, b.kappa)
            }
            None => {
                let b = sampler.sample_bundle(0, rng);
                (b.t, b.kappa)
            }
        };
        let signed = if i % 2 == 0 { t as i64 } else { -(t as i64) };
        sum += signed;
        kappas.push(kappa as u32);
    }
    Ok(Increment {
        value: eps * sum,
        g,
        kappas,
    })
}

/// Allocation-free increment draw for bulk simulation.
pub fn sample_increment_value<R: Rng + ?Sized>(
    sampler: &BundleSampler,
    trunc: Option<usize>,
    rng: &mut R,
) -> i64 {
    let eps: i64 = if rng.random::<bool>() { 1 } else { -1 };
    let g = sample_geometric_23(rng);
    let mut sum = 0i64;
    for i in 1..=g {
        let t = match trunc {
            Some(k) => sampler.sample_truncated_bundle(k, rng).t,
            None => sampler.sample_t(rng),
        };
        sum += if i % 2 == 0 { t as i64 } else { -(t as i64) };
    }
    eps * sum
}

/// Simulates `dim` independent coordinate walks of `n` steps driven by the
/// waiting-time law at the given truncation.
pub fn simulate_walk<R: Rng + ?Sized>(
    dim: usize,
    law: &WaitingTimeLaw,
    trunc: Option<usize>,
    n: usize,
    rng: &mut R,
) -> Result<WalkPath> {
    if n == 0 {
        return Err(Error::Precondition("walk length must be at least 1".into()));
    }
    let sampler = law.sampler()?;
    if let Some(k) = trunc {
        if k == 0 || k > sampler.num_levels() {
            return Err(Error::SamplingRange(format!(
                "truncation level {k} out of range 1..={}",
                sampler.num_levels()
            )));
        }
    }
    let mut increments = vec![0i64; n * dim];
    for step in increments.iter_mut() {
        *step = sample_increment_value(&sampler, trunc, rng);
    }
    Ok(WalkPath::from_increments(dim, &increments))
}

/// Simulates a walk from an arbitrary per-coordinate step function.
pub fn simulate_with_steps<R: Rng + ?Sized>(
    dim: usize,
    n: usize,
    rng: &mut R,
    mut step: impl FnMut(&mut R) -> i64,
) -> WalkPath {
    let mut increments = vec![0i64; n * dim];
    for s in increments.iter_mut() {
        *s = step(rng);
    }
    WalkPath::from_increments(dim, &increments)
}

// ── Simple lattice step laws ──────────────────────────────────────────────────

/// ±1 with equal probability.
pub fn unit_step<R: Rng + ?Sized>(rng: &mut R) -> i64 {
    if rng.random::<bool>() {
        1
    } else {
        -1
    }
}

/// 0 with probability 1/2, ±1 with probability 1/4 each.
pub fn lazy_step<R: Rng + ?Sized>(rng: &mut R) -> i64 {
    match rng.random_range(0u8..4) {
        0 => 1,
        1 => -1,
        _ => 0,
    }
}

/// Samples `S_n` of the ±1 walk directly: `2·Bin(n, 1/2) − n`.
pub fn unit_position<R: Rng + ?Sized>(n: u64, rng: &mut R) -> i64 {
    let heads = binomial_half(n, rng);
    2 * heads as i64 - n as i64
}

/// Samples `S_n` of the lazy walk directly: `M ~ Bin(n, 1/2)` moves, then
/// `2·Bin(M, 1/2) − M`.
pub fn lazy_position<R: Rng + ?Sized>(n: u64, rng: &mut R) -> i64 {
    let moves = binomial_half(n, rng);
    let ups = binomial_half(moves, rng);
    2 * ups as i64 - moves as i64
}

fn binomial_half<R: Rng + ?Sized>(n: u64, rng: &mut R) -> u64 {
    use rand_distr::{Binomial, Distribution};
    if n == 0 {
        return 0;
    }
    Binomial::new(n, 0.5).expect("valid binomial").sample(rng)
}

/// Exact single-step law of the unit walk.
pub fn unit_step_pmf() -> crate::pmf::ExactPmf {
    use crate::pmf::Weight;
    use num::BigRational;
    crate::pmf::ExactPmf::new(
        -1,
        vec![
            <BigRational as Weight>::from_ratio(1, 2),
            <BigRational as Weight>::from_ratio(0, 1),
            <BigRational as Weight>::from_ratio(1, 2),
        ],
    )
    .expect("valid pmf")
}

/// Exact single-step law of the lazy walk.
pub fn lazy_step_pmf() -> crate::pmf::ExactPmf {
    use crate::pmf::Weight;
    use num::BigRational;
    crate::pmf::ExactPmf::new(
        -1,
        vec![
            <BigRational as Weight>::from_ratio(1, 4),
            <BigRational as Weight>::from_ratio(1, 2),
            <BigRational as Weight>::from_ratio(1, 4),
        ],
    )
    .expect("valid pmf")
}

#[cfg(test)]
mod tests;
