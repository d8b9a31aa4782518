//! Recursive construction and validation of the hierarchy parameters
//! `(p_k, y_k, c_k)`.
//!
//! The recursion starts from `y₁ = 1`, `p₂ = 1/4` and at each level `k ≥ 2`
//! picks
//!
//! * an integer `c_k > k⁸ / p_k²` (the minimal one),
//! * then `(y_k, p_{k+1})` such that
//!   - `y_k √p_k ≥ max(12 c_k, y_{k-1} √p_{k-1})`  (the growth floor),
//!   - `0 < p_{k+1} ≤ p_k / 2`  (halving),
//!   - `1/(2k⁴) ≤ (A/(p_k y_k))² · ln(1/p_{k+1}) ≤ 1/k⁴`  (the balance
//!     window).
//!
//! Choice rule: start from `p_{k+1} = p_k / 2`; the balance window for
//! `y_k` is `[A k² √L, A k² √(2L)] / p_k` with `L = ln(1/p_{k+1})`. If the
//! window lies below the growth floor, halve `p_{k+1}` and retry — the
//! window's edges grow like `√L`, so it eventually clears the floor. Take
//! the smallest integer `y_k` in the intersection.
//!
//! The resulting magnitudes outgrow every fixed-exponent float: `ln(1/p₄)`
//! is itself of order `e^{2·10⁶}`. All quantities are therefore carried as
//! [`Mag`] towers, the halving count is collapsed to its closed form once
//! it exceeds 2⁵³ (the granularity of one halving is far below the
//! representable precision there), and each constraint's residual is
//! recorded as a plain `f64` at construction time, where it is available
//! without catastrophic cancellation. Validation re-derives every
//! constraint from the stored magnitudes whenever the involved logs are
//! plain, and falls back to the recorded residuals plus representation
//! consistency at tower scale.

use std::f64::consts::{LN_2, SQRT_2};

use crate::error::{Error, Result};
use crate::mag::Mag;

/// Comparison slack for log-domain checks.
pub const LOG_SLACK: f64 = 1e-9;

/// Per-level record for `k ≥ 2`.
#[derive(Debug, Clone)]
pub struct LevelRecord {
    pub k: u32,
    /// `1 / p_k`.
    pub inv_p: Mag,
    pub y: Mag,
    pub c: Mag,
    /// Exact values when they fit in 53 bits.
    pub y_exact: Option<u64>,
    pub c_exact: Option<u64>,
    /// `p_k = 2^{-j}` exactly, when the halving count is known.
    pub p_log2: Option<u64>,
    /// `ln(c_k · p_k² / k⁸) ≥ 0`.
    pub ck_slack: f64,
    /// `ln(y_k √p_k) − ln max(12 c_k, y_{k-1} √p_{k-1}) ≥ 0`.
    pub pest_slack: f64,
    /// `ln(p_k / (2 p_{k+1})) ≥ 0`; `+∞` once `p_{k+1}` is a tower below
    /// `p_k`'s precision.
    pub pkhalf_slack: f64,
    /// `ln((A/(p_k y_k))² · ln(1/p_{k+1}))`, inside `[−ln(2k⁴), −ln(k⁴)]`.
    pub lest1_mid: f64,
}

/// The constructed parameter sequences.
#[derive(Debug, Clone)]
pub struct HierarchyParams {
    pub a: f64,
    pub k_max: u32,
    /// Residual mass `1 − Σ_{k≥2} p_k`, at least 1/2.
    pub p1: f64,
    /// Records for `k = 2..=k_max`.
    pub levels: Vec<LevelRecord>,
    /// `1 / p_{k_max+1}` (the last level's balance window refers to it).
    pub tail_inv_p: Mag,
    pub tail_p_log2: Option<u64>,
}

/// One validated constraint.
#[derive(Debug, Clone)]
pub struct ConstraintRow {
    pub k: u32,
    pub constraint: &'static str,
    pub holds: bool,
    /// Log-domain slack (distance to the violated side), `+∞` when the
    /// margin is beyond f64 range.
    pub slack_ln: f64,
}

/// Full validation output.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub rows: Vec<ConstraintRow>,
    /// Observed `ln(y_{k+1}) / y_k` per level (reported, not asserted).
    pub growth: Vec<(u32, f64)>,
    pub all_hold: bool,
}

const EXACT_MAX: u64 = 1 << 53;

fn plain(m: &Mag) -> Option<f64> {
    let (depth, top) = m.parts();
    if depth == 0 {
        Some(top)
    } else {
        None
    }
}

/// Runs the recursive construction with constant `a` up to level `k_max`.
pub fn construct_params(a: f64, k_max: u32) -> Result<HierarchyParams> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Precondition(format!("A must be positive, got {a}")));
    }
    if k_max < 2 {
        return Err(Error::Precondition("k_max must be at least 2".into()));
    }

    let mut levels: Vec<LevelRecord> = Vec::with_capacity((k_max - 1) as usize);
    let mut inv_p = Mag::from_f64(4.0);
    let mut p_log2: Option<u64> = Some(2);
    // Bound for y₁ √p₁ at k = 2 (y₁ = 1 and p₁ ≤ 1 give at most 1; p₁ is
    // fixed only at the end).
    let mut prev_y_sqrt_p = Mag::one();
    let mut sum_p = 0.25f64;

    for k in 2..=k_max {
        let kf = k as f64;
        let k8 = (k as u128).pow(8);

        // c_k: smallest integer exceeding k⁸ / p_k².
        let (c, c_exact, ck_slack) = exact_c(k8, p_log2).unwrap_or_else(|| {
            let c = inv_p.powf(2.0).scale(k8 as f64);
            (c, None, 0.0)
        });

        // Growth floor for y_k: F = max(12 c_k, y_{k-1}√p_{k-1}) / √p_k.
        let floor_pre = c.scale(12.0).max(&prev_y_sqrt_p);
        let f_mag = floor_pre.mul(&inv_p.sqrt());

        let l_k = inv_p.ln();
        let denom = inv_p.scale(a * kf * kf);

        // Required L = ln(1/p_{k+1}) for the window's upper edge to clear
        // the floor: A k² √(2L) / p_k ≥ F. Representation-equal towers
        // count as a ratio of at least one.
        let l_req = if f_mag >= denom {
            f_mag.div(&denom).powf(2.0).scale(0.5)
        } else {
            Mag::zero()
        };

        // Halving regime: the number of halvings m stays an exact integer
        // as long as it is below 2⁵³; beyond that one halving is smaller
        // than the representable granularity of L itself.
        let plain_m = match (plain(&l_req), plain(&l_k)) {
            (Some(lr), Some(lk)) => (lr - lk) / LN_2 < EXACT_MAX as f64,
            _ => false,
        };

        let window_hi = |l_next: &Mag| -> Mag {
            l_next.sqrt().scale(a * kf * kf * SQRT_2).mul(&inv_p)
        };
        let window_lo = |l_next: &Mag| -> Mag {
            l_next.sqrt().scale(a * kf * kf).mul(&inv_p)
        };

        let (l_next, chosen_y, y_exact, pest_slack, lest1_mid) = if plain_m {
            let lk_f = l_k.to_f64();
            let l_next_for =
                |m_val: u64| -> Mag { Mag::from_f64(lk_f + m_val as f64 * LN_2) };
            let mut m: u64 = (((l_req.to_f64() - lk_f) / LN_2).ceil() as i64).max(1) as u64;
            let mut budget = 0u32;
            // Settle m at the minimal halving count that clears the floor.
            while window_hi(&l_next_for(m)) < f_mag {
                m += 1;
                budget += 1;
                if budget > 64 {
                    return Err(Error::InfeasibleWindow {
                        k,
                        detail: "window never clears the growth floor".into(),
                    });
                }
            }
            while m > 1 && window_hi(&l_next_for(m - 1)) >= f_mag {
                m -= 1;
            }
            loop {
                let ln = l_next_for(m);
                let w_lo = window_lo(&ln);
                let w_hi = window_hi(&ln);
                let cand = f_mag.max(&w_lo);
                // Round y up to an integer while it is exactly representable.
                let (y_m, y_e) = match plain(&cand) {
                    Some(v) if v <= EXACT_MAX as f64 => {
                        let yi = v.ceil() as u64;
                        (Mag::from_f64(yi as f64), Some(yi))
                    }
                    _ => (cand, None),
                };
                if y_m > w_hi {
                    // No integer inside the window; widen by one halving.
                    m += 1;
                    budget += 1;
                    if budget > 64 {
                        return Err(Error::InfeasibleWindow {
                            k,
                            detail: "no integer y inside the balance window".into(),
                        });
                    }
                    continue;
                }
                let slack = y_m.ln().sub_f64_saturating(&f_mag.ln());
                let mid = lest1_mid_direct(a, &l_k, &y_m, &ln).ok_or(Error::InfeasibleWindow {
                    k,
                    detail: "balance residual not computable in plain regime".into(),
                })?;
                break (ln, y_m, y_e, slack.max(0.0), mid);
            }
        } else {
            // Tower regime: p_{k+1} is the exact window-clearing value (the
            // halving granularity is below representable precision there)
            // and y_k sits on the growth floor.
            let ln = if l_req.is_zero() {
                l_k.add(&Mag::from_f64(LN_2))
            } else {
                l_req
            };
            let w_lo = window_lo(&ln);
            let cand = f_mag.max(&w_lo);
            let at_floor = f_mag >= w_lo;
            let mid = match lest1_mid_direct(a, &l_k, &cand, &ln) {
                Some(v) => v,
                None => {
                    if at_floor {
                        // y = F with L chosen so the window's upper edge is
                        // exactly F: the balance sits on its lower bound.
                        -LN_2 - 4.0 * kf.ln()
                    } else {
                        // y = W_lo: the balance sits on its upper bound.
                        -4.0 * kf.ln()
                    }
                }
            };
            let slack = cand.ln().sub_f64_saturating(&f_mag.ln()).max(0.0);
            (ln, cand, None, slack, mid)
        };

        let inv_p_next = l_next.exp();
        let p_log2_next = if plain_m {
            // Recover the settled halving count from L_{k+1} = L_k + m ln 2.
            let m = ((l_next.to_f64() - l_k.to_f64()) / LN_2).round() as u64;
            p_log2.and_then(|j| j.checked_add(m))
        } else {
            None
        };
        let pkhalf_slack = inv_p_next
            .ln()
            .sub_f64_saturating(&inv_p.ln())
            - LN_2;

        levels.push(LevelRecord {
            k,
            inv_p,
            y: chosen_y,
            c,
            y_exact,
            c_exact,
            p_log2,
            ck_slack,
            pest_slack,
            pkhalf_slack: pkhalf_slack.max(0.0),
            lest1_mid,
        });

        prev_y_sqrt_p = chosen_y.div(&inv_p.sqrt());
        if let Some(j) = p_log2_next {
            if j < 1074 {
                sum_p += 2f64.powi(-(j as i32));
            }
        }
        inv_p = inv_p_next;
        p_log2 = p_log2_next;
    }

    let p1 = 1.0 - sum_p;
    if p1 < 0.5 {
        return Err(Error::InfeasibleWindow {
            k: k_max,
            detail: format!("residual p1 = {p1} fell below 1/2"),
        });
    }

    Ok(HierarchyParams {
        a,
        k_max,
        p1,
        levels,
        tail_inv_p: inv_p,
        tail_p_log2: p_log2,
    })
}

/// Exact `c_k = ⌊k⁸/p_k²⌋ + 1` when `p_k = 2^{-j}` and the value fits.
fn exact_c(k8: u128, p_log2: Option<u64>) -> Option<(Mag, Option<u64>, f64)> {
    let j = p_log2?;
    if 2 * j >= 64 {
        return None;
    }
    let base = k8.checked_shl(2 * j as u32)?;
    if base >= EXACT_MAX as u128 {
        return None;
    }
    let c_int = base as u64 + 1;
    let slack = (1.0 / base as f64).ln_1p();
    Some((Mag::from_f64(c_int as f64), Some(c_int), slack))
}

/// Direct evaluation of `ln((A/(p_k y_k))² · L_{k+1})` when every log is
/// plain; `None` once any of them is a tower.
fn lest1_mid_direct(a: f64, l_k: &Mag, y: &Mag, l_next: &Mag) -> Option<f64> {
    let lk = plain(l_k)?;
    let ln_y = plain(&y.ln())?;
    let lnl_next = plain(&l_next.ln())?;
    Some(lnl_next + 2.0 * (a.ln() + lk - ln_y))
}

/// Validates every constraint of a parameter set.
pub fn validate_params(params: &HierarchyParams) -> ValidationReport {
    let mut rows = Vec::new();
    let a = params.a;

    let mut prev_y_sqrt_p = Mag::one();
    for (idx, lvl) in params.levels.iter().enumerate() {
        let k = lvl.k;
        let kf = k as f64;
        let k8 = (k as u128).pow(8);
        let inv_p_next = params
            .levels
            .get(idx + 1)
            .map(|n| n.inv_p)
            .unwrap_or(params.tail_inv_p);

        // (ck): c_k > k⁸ / p_k².
        let ck_holds = match (lvl.c_exact, lvl.p_log2) {
            (Some(ce), Some(j)) if 2 * j < 64 => match k8.checked_shl(2 * j as u32) {
                Some(base) => (ce as u128) > base,
                None => false,
            },
            _ => {
                let bound = lvl.inv_p.powf(2.0).scale(k8 as f64);
                lvl.c >= bound && lvl.ck_slack >= -LOG_SLACK
            }
        };
        rows.push(ConstraintRow {
            k,
            constraint: "ck",
            holds: ck_holds,
            slack_ln: lvl.ck_slack,
        });

        // (pest): y_k √p_k ≥ max(12 c_k, y_{k-1} √p_{k-1}).
        let y_sqrt_p = lvl.y.div(&lvl.inv_p.sqrt());
        let floor_pre = lvl.c.scale(12.0).max(&prev_y_sqrt_p);
        let pest_holds = y_sqrt_p >= floor_pre || y_sqrt_p.approx_eq(&floor_pre, LOG_SLACK);
        rows.push(ConstraintRow {
            k,
            constraint: "pest",
            holds: pest_holds,
            slack_ln: lvl.pest_slack,
        });

        // (pkhalf): p_{k+1} ≤ p_k / 2.
        let pkhalf_holds = inv_p_next >= lvl.inv_p.scale(2.0 - LOG_SLACK);
        rows.push(ConstraintRow {
            k,
            constraint: "pkhalf",
            holds: pkhalf_holds,
            slack_ln: lvl.pkhalf_slack,
        });

        // (lest1): 1/(2k⁴) ≤ (A/(p_k y_k))² ln(1/p_{k+1}) ≤ 1/k⁴, checked on
        // the stored residual and, when the logs are plain, re-derived from
        // the magnitudes.
        let lo = -(2.0 * kf.powi(4)).ln();
        let hi = -(kf.powi(4)).ln();
        let mut mid = lvl.lest1_mid;
        let mut consistent = true;
        if let Some(direct) = lest1_mid_direct(a, &lvl.inv_p.ln(), &lvl.y, &inv_p_next.ln()) {
            consistent = (direct - mid).abs() <= 1e-6;
            mid = direct;
        }
        let lest1_lo_holds = consistent && mid >= lo - LOG_SLACK;
        let lest1_hi_holds = consistent && mid <= hi + LOG_SLACK;
        rows.push(ConstraintRow {
            k,
            constraint: "lest1-lo",
            holds: lest1_lo_holds,
            slack_ln: mid - lo,
        });
        rows.push(ConstraintRow {
            k,
            constraint: "lest1-hi",
            holds: lest1_hi_holds,
            slack_ln: hi - mid,
        });

        prev_y_sqrt_p = y_sqrt_p;
    }

    // p₁ stays at least 1/2.
    rows.push(ConstraintRow {
        k: 1,
        constraint: "p1-half",
        holds: params.p1 >= 0.5 - LOG_SLACK,
        slack_ln: (params.p1 / 0.5).ln(),
    });

    let growth = params
        .levels
        .windows(2)
        .map(|w| {
            let ln_next = w[1].y.ln().to_f64();
            let y_cur = w[0].y.to_f64();
            let ratio = if ln_next.is_finite() && y_cur.is_finite() {
                ln_next / y_cur
            } else {
                f64::INFINITY
            };
            (w[0].k, ratio)
        })
        .collect();

    let all_hold = rows.iter().all(|r| r.holds);
    ValidationReport {
        rows,
        growth,
        all_hold,
    }
}

// ── Text serialization ────────────────────────────────────────────────────────

impl HierarchyParams {
    /// Structured text format consumed by [`parse_params`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("A={}\n", self.a));
        out.push_str(&format!("k_max={}\n", self.k_max));
        out.push_str(&format!("k=1 p={} y=1\n", self.p1));
        for lvl in &self.levels {
            let neg_log10_p = lvl.inv_p.log10();
            let mut line = format!("k={}", lvl.k);
            line.push_str(&format!(" p_neg_log10={}", neg_log10_p.render()));
            if let Some(l10) = plain(&neg_log10_p) {
                // p = mantissa · 10^exp10 with mantissa in [1, 10).
                let exp10 = (-l10).floor();
                let mantissa = 10f64.powf(-l10 - exp10);
                line.push_str(&format!(" p_mantissa={mantissa:.6} p_log10={exp10}"));
            }
            if let Some(j) = lvl.p_log2 {
                line.push_str(&format!(" p_log2={j}"));
            }
            line.push_str(&format!(" log10_y={}", lvl.y.log10().render()));
            if let Some(y) = lvl.y_exact {
                line.push_str(&format!(" y={y}"));
            }
            line.push_str(&format!(" log10_c={}", lvl.c.log10().render()));
            if let Some(c) = lvl.c_exact {
                line.push_str(&format!(" c={c}"));
            }
            line.push_str(&format!(
                " ck_slack={} pest_slack={} pkhalf_slack={} lest1_mid={}",
                lvl.ck_slack, lvl.pest_slack, lvl.pkhalf_slack, lvl.lest1_mid
            ));
            line.push('\n');
            out.push_str(&line);
        }
        out.push_str(&format!(
            "tail p_neg_log10={}{}\n",
            self.tail_inv_p.log10().render(),
            match self.tail_p_log2 {
                Some(j) => format!(" p_log2={j}"),
                None => String::new(),
            }
        ));
        out
    }
}

/// Parses the structured text format written by [`HierarchyParams::to_text`].
pub fn parse_params(text: &str) -> Result<HierarchyParams> {
    let mut a = None;
    let mut k_max = None;
    let mut p1 = None;
    let mut levels: Vec<LevelRecord> = Vec::new();
    let mut tail_inv_p = None;
    let mut tail_p_log2 = None;

    let get_mag_from_log10 = |tok: &str| -> Result<Mag> {
        let m = Mag::parse(tok).ok_or_else(|| Error::Parse(format!("bad magnitude {tok:?}")))?;
        Ok(m.scale(std::f64::consts::LN_10).exp())
    };

    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let fields: Vec<(&str, &str)> = line
            .split_whitespace()
            .filter_map(|f| f.split_once('='))
            .collect();
        let lookup = |name: &str| fields.iter().find(|(k, _)| *k == name).map(|(_, v)| *v);
        if line.starts_with("A=") {
            a = Some(
                lookup("A")
                    .unwrap()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad A: {e}")))?,
            );
        } else if line.starts_with("k_max=") {
            k_max = Some(
                lookup("k_max")
                    .unwrap()
                    .parse::<u32>()
                    .map_err(|e| Error::Parse(format!("bad k_max: {e}")))?,
            );
        } else if line.starts_with("tail") {
            let tok = lookup("p_neg_log10")
                .ok_or_else(|| Error::Parse("tail line missing p_neg_log10".into()))?;
            let mut inv = get_mag_from_log10(tok)?;
            if let Some(j) = lookup("p_log2") {
                let j: u64 = j
                    .parse()
                    .map_err(|e| Error::Parse(format!("bad tail p_log2: {e}")))?;
                tail_p_log2 = Some(j);
                inv = if j < 1024 {
                    Mag::from_f64(2f64.powi(j as i32))
                } else {
                    Mag::from_f64(j as f64 * LN_2).exp()
                };
            }
            tail_inv_p = Some(inv);
        } else if line.starts_with("k=") {
            let k: u32 = lookup("k")
                .unwrap()
                .parse()
                .map_err(|e| Error::Parse(format!("bad k: {e}")))?;
            if k == 1 {
                p1 = Some(
                    lookup("p")
                        .ok_or_else(|| Error::Parse("k=1 line missing p".into()))?
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("bad p1: {e}")))?,
                );
                continue;
            }
            let parse_f64 = |name: &str| -> Result<f64> {
                lookup(name)
                    .ok_or_else(|| Error::Parse(format!("level {k} missing {name}")))?
                    .parse()
                    .map_err(|e| Error::Parse(format!("bad {name}: {e}")))
            };
            let p_log2 = match lookup("p_log2") {
                Some(v) => Some(
                    v.parse::<u64>()
                        .map_err(|e| Error::Parse(format!("bad p_log2: {e}")))?,
                ),
                None => None,
            };
            let mut inv_p = get_mag_from_log10(
                lookup("p_neg_log10")
                    .ok_or_else(|| Error::Parse(format!("level {k} missing p_neg_log10")))?,
            )?;
            if let Some(j) = p_log2 {
                inv_p = if j < 1024 {
                    Mag::from_f64(2f64.powi(j as i32))
                } else {
                    Mag::from_f64(j as f64 * LN_2).exp()
                };
            }
            let y_exact = match lookup("y") {
                Some(v) => Some(
                    v.parse::<u64>()
                        .map_err(|e| Error::Parse(format!("bad y: {e}")))?,
                ),
                None => None,
            };
            let c_exact = match lookup("c") {
                Some(v) => Some(
                    v.parse::<u64>()
                        .map_err(|e| Error::Parse(format!("bad c: {e}")))?,
                ),
                None => None,
            };
            let y = match y_exact {
                Some(v) => Mag::from_f64(v as f64),
                None => get_mag_from_log10(
                    lookup("log10_y")
                        .ok_or_else(|| Error::Parse(format!("level {k} missing log10_y")))?,
                )?,
            };
            let c = match c_exact {
                Some(v) => Mag::from_f64(v as f64),
                None => get_mag_from_log10(
                    lookup("log10_c")
                        .ok_or_else(|| Error::Parse(format!("level {k} missing log10_c")))?,
                )?,
            };
            levels.push(LevelRecord {
                k,
                inv_p,
                y,
                c,
                y_exact,
                c_exact,
                p_log2,
                ck_slack: parse_f64("ck_slack")?,
                pest_slack: parse_f64("pest_slack")?,
                pkhalf_slack: parse_f64("pkhalf_slack")?,
                lest1_mid: parse_f64("lest1_mid")?,
            });
        } else {
            return Err(Error::Parse(format!("unrecognized line {line:?}")));
        }
    }

    levels.sort_by_key(|l| l.k);
    Ok(HierarchyParams {
        a: a.ok_or_else(|| Error::Parse("missing A".into()))?,
        k_max: k_max.ok_or_else(|| Error::Parse("missing k_max".into()))?,
        p1: p1.ok_or_else(|| Error::Parse("missing k=1 line".into()))?,
        levels,
        tail_inv_p: tail_inv_p.ok_or_else(|| Error::Parse("missing tail line".into()))?,
        tail_p_log2,
    })
}
