//! Monte Carlo estimators with Wilson intervals, exponent fitting, and the
//! statistical checks that pair simulated quantities with exact oracles.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hierarchy::WaitingTimeLaw;
use crate::pmf::{ExactPmf, FloatPmf, LatticePmf, Weight};
use crate::stream::StreamKey;
use crate::verify::stats::{normal_quantile, wilson_interval};
use crate::walks::geometry::segment_hits_centered_cube;
use crate::walks::{lazy_position, lazy_step, sample_increment_value, unit_position, unit_step};

/// A Monte Carlo proportion with its Wilson interval.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateWithCI {
    pub point: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub replicas: u64,
    pub seed: u64,
}

impl EstimateWithCI {
    pub fn from_hits(hits: u64, replicas: u64, confidence: f64, seed: u64) -> Self {
        let (ci_lo, ci_hi) = wilson_interval(hits, replicas, confidence);
        EstimateWithCI {
            point: hits as f64 / replicas as f64,
            ci_lo,
            ci_hi,
            replicas,
            seed,
        }
    }

    fn exact(point: f64, replicas: u64, seed: u64) -> Self {
        EstimateWithCI {
            point,
            ci_lo: point,
            ci_hi: point,
            replicas,
            seed,
        }
    }
}

/// The walk driving an estimate.
#[derive(Debug, Clone)]
pub enum WalkKind {
    /// ±1 steps.
    Unit,
    /// 0 with probability 1/2, ±1 with 1/4 each.
    Lazy,
    /// Alternating-sum increments from a waiting-time law.
    Waiting {
        law: WaitingTimeLaw,
        trunc: Option<usize>,
    },
}

/// The event whose probability at step `n` is estimated.
#[derive(Debug, Clone)]
pub enum EventSpec {
    /// `S_n = 0` in every coordinate.
    ReturnToZero,
    /// `S_n · S_{n+1} < 0` (one dimension).
    SignChange,
    /// `level` inside the closed interval between `S_n` and `S_{n+1}`.
    LevelCrossing { level: f64 },
    /// `S_n ∈ [-half, half]^dim`.
    BoxVisit { half: f64 },
    /// The segment from `S_n` to `S_{n+1}` meets `[-half, half]^dim`.
    SegmentHit { half: f64 },
    /// Strict sign change of coordinate 0 with coordinate 1 pinned at 0.
    Vn,
}

impl EventSpec {
    pub fn name(&self) -> &'static str {
        match self {
            EventSpec::ReturnToZero => "return",
            EventSpec::SignChange => "sign_change",
            EventSpec::LevelCrossing { .. } => "level_crossing",
            EventSpec::BoxVisit { .. } => "box_visit",
            EventSpec::SegmentHit { .. } => "segment_hit",
            EventSpec::Vn => "v_n",
        }
    }

    fn evaluate(&self, s_n: &[i64], s_next: &[i64]) -> bool {
        match self {
            EventSpec::ReturnToZero => s_n.iter().all(|&x| x == 0),
            EventSpec::SignChange => s_n[0].signum() * s_next[0].signum() < 0,
            EventSpec::LevelCrossing { level } => {
                let (a, b) = (s_n[0], s_next[0]);
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                lo as f64 <= *level && *level <= hi as f64
            }
            EventSpec::BoxVisit { half } => {
                s_n.iter().all(|&x| (x.abs() as f64) <= *half)
            }
            EventSpec::SegmentHit { half } => {
                segment_hits_centered_cube(s_n, s_next, *half)
            }
            EventSpec::Vn => {
                s_n[0].signum() * s_next[0].signum() < 0 && s_n[1] == 0 && s_next[1] == 0
            }
        }
    }
}

/// A fully specified estimation task.
#[derive(Debug, Clone)]
pub struct EstimateRequest {
    pub kind: WalkKind,
    pub dim: usize,
    pub event: EventSpec,
    pub n: u64,
    pub replicas: u64,
    pub confidence: f64,
}

fn validate_request(req: &EstimateRequest) -> Result<()> {
    if req.replicas < 100 {
        return Err(Error::Precondition("at least 100 replicas required".into()));
    }
    if req.dim == 0 {
        return Err(Error::Precondition("dimension must be positive".into()));
    }
    match req.event {
        EventSpec::SignChange | EventSpec::LevelCrossing { .. } if req.dim != 1 => {
            return Err(Error::Precondition("event requires dimension 1".into()))
        }
        EventSpec::Vn if req.dim != 2 => {
            return Err(Error::Precondition("V_n requires dimension 2".into()))
        }
        _ => {}
    }
    Ok(())
}

/// Estimates the event probability at step `n` by independent replicas on
/// counter-derived streams. Deterministic for a fixed key regardless of
/// thread scheduling. A waiting law with `P(T = 0) = 1` short-circuits to
/// the exact all-zero path.
pub fn estimate_event_prob(req: &EstimateRequest, key: StreamKey) -> Result<EstimateWithCI> {
    validate_request(req)?;
    if let WalkKind::Waiting { law, trunc } = &req.kind {
        let sampler = law.sampler()?;
        if let Some(k) = trunc {
            if *k == 0 || *k > sampler.num_levels() {
                return Err(Error::SamplingRange(format!(
                    "truncation level {k} out of range"
                )));
            }
        }
        if law.max_y() == 0 {
            // Degenerate law: the walk never leaves the origin.
            let zeros = vec![0i64; req.dim];
            let hit = req.event.evaluate(&zeros, &zeros);
            return Ok(EstimateWithCI::exact(
                if hit { 1.0 } else { 0.0 },
                req.replicas,
                key.master_seed,
            ));
        }
        let hits = (0..req.replicas)
            .into_par_iter()
            .map(|i| {
                let mut rng = key.stream(i);
                let mut s_n = vec![0i64; req.dim];
                for _ in 0..req.n {
                    for coord in s_n.iter_mut() {
                        *coord += sample_increment_value(&sampler, *trunc, &mut rng);
                    }
                }
                let mut s_next = s_n.clone();
                for coord in s_next.iter_mut() {
                    *coord += sample_increment_value(&sampler, *trunc, &mut rng);
                }
                u64::from(req.event.evaluate(&s_n, &s_next))
            })
            .sum();
        return Ok(EstimateWithCI::from_hits(
            hits,
            req.replicas,
            req.confidence,
            key.master_seed,
        ));
    }

    // Unit/lazy walks admit direct sampling of S_n via binomial draws.
    let lazy = matches!(req.kind, WalkKind::Lazy);
    let hits = (0..req.replicas)
        .into_par_iter()
        .map(|i| {
            let mut rng = key.stream(i);
            let mut s_n = vec![0i64; req.dim];
            let mut s_next = vec![0i64; req.dim];
            for d in 0..req.dim {
                let pos = if lazy {
                    lazy_position(req.n, &mut rng)
                } else {
                    unit_position(req.n, &mut rng)
                };
                let step = if lazy {
                    lazy_step(&mut rng)
                } else {
                    unit_step(&mut rng)
                };
                s_n[d] = pos;
                s_next[d] = pos + step;
            }
            u64::from(req.event.evaluate(&s_n, &s_next))
        })
        .sum();
    Ok(EstimateWithCI::from_hits(
        hits,
        req.replicas,
        req.confidence,
        key.master_seed,
    ))
}

/// Exact `P(S_n = 0)` for a walk with the given single-step law, via
/// convolution powers.
pub fn exact_return_probs(step: &FloatPmf, n_grid: &[u64]) -> Result<Vec<(u64, f64)>> {
    n_grid
        .iter()
        .map(|&n| Ok((n, step.convolve_power(n)?.prob_at(0))))
        .collect()
}

// ── Exponent fitting ──────────────────────────────────────────────────────────

/// Weighted log-log regression result.
#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub slope_ci_lo: f64,
    pub slope_ci_hi: f64,
    /// Indices of zero-probability points excluded from the fit.
    pub excluded: Vec<usize>,
}

/// Fits `log p ≈ intercept + slope · log n` by weighted least squares,
/// weighting by the delta-method variance of `log p̂`. Exact inputs (zero
/// CI width) fall back to an unweighted fit with residual-based errors.
pub fn fit_exponent(samples: &[(f64, EstimateWithCI)], confidence: f64) -> Result<FitResult> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ses = Vec::new();
    let mut excluded = Vec::new();
    let z = normal_quantile(1.0 - (1.0 - confidence) / 2.0);
    for (i, (n, est)) in samples.iter().enumerate() {
        if est.point <= 0.0 {
            excluded.push(i);
            continue;
        }
        xs.push(n.ln());
        ys.push(est.point.ln());
        // se(log p) ≈ se(p)/p with se(p) from the interval width.
        ses.push((est.ci_hi - est.ci_lo) / (2.0 * z * est.point));
    }
    let k = xs.len();
    if k < 4 {
        return Err(Error::Precondition(format!(
            "need at least 4 positive sample points, got {k}"
        )));
    }
    let exact_inputs = ses.iter().all(|&s| s <= 0.0);
    let weights: Vec<f64> = if exact_inputs {
        vec![1.0; k]
    } else {
        ses.iter().map(|&s| 1.0 / s.max(1e-12).powi(2)).collect()
    };
    let wsum: f64 = weights.iter().sum();
    let xbar: f64 = xs.iter().zip(&weights).map(|(x, w)| x * w).sum::<f64>() / wsum;
    let ybar: f64 = ys.iter().zip(&weights).map(|(y, w)| y * w).sum::<f64>() / wsum;
    let sxx: f64 = xs
        .iter()
        .zip(&weights)
        .map(|(x, w)| w * (x - xbar) * (x - xbar))
        .sum();
    let sxy: f64 = xs
        .iter()
        .zip(ys.iter())
        .zip(&weights)
        .map(|((x, y), w)| w * (x - xbar) * (y - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let var_slope = if exact_inputs {
        // Residual-based error.
        let rss: f64 = xs
            .iter()
            .zip(ys.iter())
            .map(|(x, y)| {
                let r = y - intercept - slope * x;
                r * r
            })
            .sum();
        rss / (k as f64 - 2.0) / sxx
    } else {
        1.0 / sxx
    };
    let half = z * var_slope.sqrt();
    Ok(FitResult {
        slope,
        intercept,
        slope_ci_lo: slope - half,
        slope_ci_hi: slope + half,
        excluded,
    })
}

// ── Quantile lower bound ──────────────────────────────────────────────────────

/// Relative slack for the one-sided statistical comparison.
pub const QUANTILE_SLACK: f64 = 0.05;

#[derive(Debug, Clone, Serialize)]
pub struct QuantileBoundReport {
    pub gamma: i64,
    /// `P(S_n S_{n+1} < 0)`.
    pub lhs: EstimateWithCI,
    /// `P(|S_n| ≤ γ)`.
    pub near_zero: EstimateWithCI,
    /// `(α/2) · P(|S_n| ≤ γ)`.
    pub rhs: f64,
    pub holds: bool,
}

/// Checks `P(S_n S_{n+1} < 0) ≥ (α/2) P(|S_n| ≤ γ_α)` with `γ_α` the exact
/// `(1-α)`-quantile of `|X|`, both sides estimated from the same replicas.
pub fn check_quantile_bound(
    x_law: &ExactPmf,
    alpha: f64,
    n: u64,
    replicas: u64,
    confidence: f64,
    key: StreamKey,
) -> Result<QuantileBoundReport> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::Precondition("alpha must be in (0, 1)".into()));
    }
    if x_law.support_len() == 1 && Weight::as_f64(&x_law.prob_at(0)) == 1.0 {
        // Degenerate walk: no sign change can ever occur.
        return Ok(QuantileBoundReport {
            gamma: 0,
            lhs: EstimateWithCI::exact(0.0, replicas, key.master_seed),
            near_zero: EstimateWithCI::exact(1.0, replicas, key.master_seed),
            rhs: 0.0,
            holds: true,
        });
    }
    let gamma = x_law.abs_quantile(1.0 - alpha);
    let sampler = x_law.sampler();
    let (flips, nears) = (0..replicas)
        .into_par_iter()
        .map(|i| {
            let mut rng = key.stream(i);
            let mut s = 0i64;
            for _ in 0..n {
                s += sampler.sample(&mut rng);
            }
            let s_next = s + sampler.sample(&mut rng);
            (
                u64::from(s.signum() * s_next.signum() < 0),
                u64::from(s.abs() <= gamma),
            )
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let lhs = EstimateWithCI::from_hits(flips, replicas, confidence, key.master_seed);
    let near_zero = EstimateWithCI::from_hits(nears, replicas, confidence, key.master_seed);
    let rhs = alpha / 2.0 * near_zero.point;
    let rhs_lo = alpha / 2.0 * near_zero.ci_lo;
    let holds = lhs.ci_hi >= rhs_lo * (1.0 - QUANTILE_SLACK);
    Ok(QuantileBoundReport {
        gamma,
        lhs,
        near_zero,
        rhs,
        holds,
    })
}

// ── Return-probability recursion ──────────────────────────────────────────────

#[derive(Debug, Clone, Serialize)]
pub struct QknRow {
    pub n: u64,
    /// Monte Carlo `P(S_n^{(2)} = 0)`.
    pub s_hat: EstimateWithCI,
    /// Exact `P(S_n^{(1)} = 0)` from convolution powers.
    pub s1_exact: f64,
    /// `s_n^{(1)} (1 - p₂)^n + A/(p₂ y₂) · n^{-1/2}`.
    pub bound: f64,
    pub holds: bool,
    pub escalated: bool,
}

/// Verifies the recursive return-probability estimate for a two-level law:
/// the CI-upper of the simulated level-2 return probability must stay
/// below the exact level-1 term plus the concentration term. On a failure
/// the replica count is escalated ×10 once before reporting.
pub fn check_qkn2(
    law: &WaitingTimeLaw,
    a: f64,
    n_grid: &[u64],
    replicas: u64,
    confidence: f64,
    key: StreamKey,
) -> Result<Vec<QknRow>> {
    if law.len() != 2 {
        return Err(Error::Precondition("check requires a two-level law".into()));
    }
    let p2 = Weight::as_f64(&law.levels()[1].p);
    let y2 = law.levels()[1].y as f64;
    if p2 < 1e-6 {
        return Err(Error::Precondition(format!(
            "level-2 weight {p2} is degenerately small"
        )));
    }
    let level1 = law.truncated(1)?;
    let (x1, _) = LatticePmf::law_of_x(&level1.as_pmf()?.to_float(), 40)?;
    let sampler = law.sampler()?;
    let mut rows = Vec::new();
    for (gi, &n) in n_grid.iter().enumerate() {
        let s1 = x1.convolve_power(n)?.prob_at(0);
        let bound = s1 * (1.0 - p2).powi(n as i32) + a / (p2 * y2) / (n as f64).sqrt();
        let run = |reps: u64, sub: u64| -> EstimateWithCI {
            let sub_key = key.sub(1000 + gi as u64 * 2 + sub);
            let hits: u64 = (0..reps)
                .into_par_iter()
                .map(|i| {
                    let mut rng = sub_key.stream(i);
                    let mut s = 0i64;
                    for _ in 0..n {
                        s += sample_increment_value(&sampler, Some(2), &mut rng);
                    }
                    u64::from(s == 0)
                })
                .sum();
            EstimateWithCI::from_hits(hits, reps, confidence, key.master_seed)
        };
        let mut s_hat = run(replicas, 0);
        let mut escalated = false;
        if s_hat.ci_hi > bound {
            s_hat = run(replicas.saturating_mul(10), 1);
            escalated = true;
        }
        let holds = s_hat.ci_hi <= bound;
        rows.push(QknRow {
            n,
            s_hat,
            s1_exact: s1,
            bound,
            holds,
            escalated,
        });
    }
    Ok(rows)
}

// ── Series diagnostics ────────────────────────────────────────────────────────

#[derive(Debug, Clone, Serialize)]
pub struct SeriesRow {
    pub n: u64,
    pub sum_return_sq: f64,
    pub sum_return_sq_lo: f64,
    pub sum_return_sq_hi: f64,
    pub sum_cross: f64,
    pub sum_cross_lo: f64,
    pub sum_cross_hi: f64,
}

/// Partial sums of `Σ P(S_n = 0)²` and `Σ P(S_n = 0) P(S_n S_{n+1} < 0)`
/// over every integer `n`, interpolating both probability curves log-log
/// between grid points. Purely diagnostic: no convergence claim is made.
pub fn series_partial_sums(
    returns: &[(u64, EstimateWithCI)],
    sign_changes: &[(u64, EstimateWithCI)],
) -> Result<Vec<SeriesRow>> {
    if returns.len() != sign_changes.len() || returns.len() < 2 {
        return Err(Error::Precondition(
            "matching grids with at least two points required".into(),
        ));
    }
    for (r, s) in returns.iter().zip(sign_changes) {
        if r.0 != s.0 {
            return Err(Error::Precondition("grids must coincide".into()));
        }
    }
    let interp = |grid: &[(u64, EstimateWithCI)],
                  n: u64,
                  pick: &dyn Fn(&EstimateWithCI) -> f64|
     -> f64 {
        let pos = grid.partition_point(|(g, _)| *g <= n);
        let (left, right) = if pos == 0 {
            (&grid[0], &grid[1])
        } else if pos >= grid.len() {
            (&grid[grid.len() - 2], &grid[grid.len() - 1])
        } else {
            (&grid[pos - 1], &grid[pos])
        };
        let (x0, y0) = (left.0 as f64, pick(&left.1).max(1e-300));
        let (x1, y1) = (right.0 as f64, pick(&right.1).max(1e-300));
        if x0 == x1 {
            return y0;
        }
        let t = ((n as f64).ln() - x0.ln()) / (x1.ln() - x0.ln());
        (y0.ln() + t * (y1.ln() - y0.ln())).exp()
    };
    let first = returns[0].0;
    let last = returns[returns.len() - 1].0;
    let grid_set: std::collections::BTreeSet<u64> = returns.iter().map(|(n, _)| *n).collect();
    let mut rows = Vec::new();
    let mut acc = [0.0f64; 6];
    for n in first..=last {
        let r = interp(returns, n, &|e| e.point);
        let r_lo = interp(returns, n, &|e| e.ci_lo);
        let r_hi = interp(returns, n, &|e| e.ci_hi);
        let s = interp(sign_changes, n, &|e| e.point);
        let s_lo = interp(sign_changes, n, &|e| e.ci_lo);
        let s_hi = interp(sign_changes, n, &|e| e.ci_hi);
        acc[0] += r * r;
        acc[1] += r_lo * r_lo;
        acc[2] += r_hi * r_hi;
        acc[3] += r * s;
        acc[4] += r_lo * s_lo;
        acc[5] += r_hi * s_hi;
        if grid_set.contains(&n) {
            rows.push(SeriesRow {
                n,
                sum_return_sq: acc[0],
                sum_return_sq_lo: acc[1],
                sum_return_sq_hi: acc[2],
                sum_cross: acc[3],
                sum_cross_lo: acc[4],
                sum_cross_hi: acc[5],
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests;
