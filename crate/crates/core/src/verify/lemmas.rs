//! Exact oracles for the structural lemmas: the moment inequality for
//! laws with non-increasing weights, symmetry/unimodality and the variance
//! sandwich of the alternating-sum increment, the small-ball lower bound
//! for symmetric unimodal laws, and the concentration bound for
//! convolutions of equal-length uniforms.

use num::{BigInt, BigRational, One, Zero};

use crate::error::{Error, Result};
use crate::pmf::weight::f64_to_exact;
use crate::pmf::{ExactPmf, LatticePmf, Weight};

fn rat(n: i64, d: i64) -> BigRational {
    <BigRational as Weight>::from_ratio(n, d)
}

fn require_nonincreasing_on_nonneg(tau: &ExactPmf) -> Result<()> {
    if tau.min_support() < 0 {
        return Err(Error::Precondition(
            "law must be supported on the nonnegative integers".into(),
        ));
    }
    let mut prev = tau.prob_at(0);
    for x in 1..=tau.max_support() {
        let cur = tau.prob_at(x);
        if cur > prev {
            return Err(Error::Precondition(format!(
                "weights increase at {x}: not a non-increasing law"
            )));
        }
        prev = cur;
    }
    Ok(())
}

/// `(E T)² ≤ (3/4) E T²` for laws with non-increasing weights.
#[derive(Debug, Clone)]
pub struct MomestReport {
    pub lhs: BigRational,
    pub rhs: BigRational,
    pub holds: bool,
    /// The implied `(E T)² ≤ 3 Var(T)`.
    pub corollary_holds: bool,
}

pub fn check_momest(tau: &ExactPmf) -> Result<MomestReport> {
    require_nonincreasing_on_nonneg(tau)?;
    let m = tau.moments();
    let lhs = &m.mean * &m.mean;
    let rhs = rat(3, 4) * &m.second_moment;
    let holds = lhs <= rhs;
    let corollary_holds = lhs <= rat(3, 1) * &m.variance;
    Ok(MomestReport {
        lhs,
        rhs,
        holds,
        corollary_holds,
    })
}

/// Symmetry, unimodality, and both variance identities of the
/// alternating-sum law.
#[derive(Debug, Clone)]
pub struct UnimodReport {
    pub symmetric: bool,
    pub unimodal: bool,
    pub var_pmf: BigRational,
    /// `E_w(G)·Var(T) + P_w(G odd)·(E T)²` with the same G-truncation as
    /// the constructed law.
    pub var_wald: BigRational,
    pub wald_matches: bool,
    /// `Var(T) ≤ Var(X) ≤ 4 E(G) Var(T)` with `E(G) = 3/2`.
    pub sandwich_holds: bool,
    pub truncation_mass: BigRational,
}

pub fn check_unimod(tau: &ExactPmf, g_max: u32) -> Result<UnimodReport> {
    require_nonincreasing_on_nonneg(tau)?;
    let (law, truncation_mass) = LatticePmf::law_of_x(tau, g_max)?;
    let shape = law.shape();
    let mt = tau.moments();
    let var_pmf = law.moments().variance;

    // Truncated geometric weights, renormalized.
    let third = rat(1, 3);
    let mut tail = BigRational::one();
    for _ in 0..g_max {
        tail = &tail * &third;
    }
    let kept = BigRational::one() - &tail;
    let mut w = rat(2, 3);
    let mut e_g = BigRational::zero();
    let mut p_odd = BigRational::zero();
    for g in 1..=g_max {
        let wg = &w / &kept;
        e_g = &e_g + &(&wg * &BigRational::from_integer(BigInt::from(g)));
        if g % 2 == 1 {
            p_odd = &p_odd + &wg;
        }
        w = &w * &third;
    }
    let var_wald = &(&e_g * &mt.variance) + &(&p_odd * &(&mt.mean * &mt.mean));
    let wald_matches = var_wald == var_pmf;
    let sandwich_holds = mt.variance <= var_pmf && var_pmf <= rat(6, 1) * &mt.variance;
    Ok(UnimodReport {
        symmetric: shape.symmetric,
        unimodal: shape.unimodal,
        var_pmf,
        var_wald,
        wald_matches,
        sandwich_holds,
        truncation_mass,
    })
}

/// Small-ball constant for lattice symmetric unimodal laws with `σ ≥ 1`
/// and integer `c ≥ 1`: derived by smoothing with a width-one uniform and
/// applying the continuous bound `d = 2√3/9` at radius `c − 1/2`,
///
/// `μ(|x| < c) ≥ d·(c − 1/2)/√(σ² + 1/12) ≥ (c/σ)·d·(1/2)·√(12/13)`,
///
/// giving `d' = 2/(3√13)`. Exactly, `d'² = 4/117`.
pub const D_PRIME: f64 = 0.18490006540840973; // 2 / (3 √13)

/// Continuous-case constant `max_{λ>1} λ⁻¹(1 − λ⁻²) = 2√3/9` at `λ = √3`.
pub fn continuous_unimodal_constant() -> f64 {
    2.0 * 3f64.sqrt() / 9.0
}

#[derive(Debug, Clone)]
pub struct UnimodestReport {
    /// Minimum over the grid of `μ(|x| < c)·σ/c`.
    pub min_ratio: f64,
    pub holds: bool,
}

/// Checks `μ(|x| < c) ≥ c·d'/σ` for every `c` in the grid, exactly:
/// `mass²·σ² ≥ (4/117)·c²` in rational arithmetic.
pub fn check_unimodest(mu: &ExactPmf, c_grid: &[f64]) -> Result<UnimodestReport> {
    let shape = mu.shape();
    if !shape.symmetric || !shape.unimodal {
        return Err(Error::Precondition(
            "law must be symmetric unimodal".into(),
        ));
    }
    let var = mu.moments().variance;
    if num::Zero::is_zero(&var) {
        return Err(Error::Precondition("law must have positive variance".into()));
    }
    let d_prime_sq = rat(4, 117);
    let mut min_ratio = f64::INFINITY;
    let mut holds = true;
    for &c in c_grid {
        let c_rat = f64_to_exact(c);
        // Precondition c ≤ σ, i.e. c² ≤ σ².
        if &c_rat * &c_rat > var {
            return Err(Error::Precondition(format!(
                "c = {c} exceeds the standard deviation"
            )));
        }
        if c <= 0.0 {
            return Err(Error::Precondition("c must be positive".into()));
        }
        let mass = mu.interval_mass(c);
        let lhs = &(&mass * &mass) * &var;
        let rhs = &d_prime_sq * &(&c_rat * &c_rat);
        if lhs < rhs {
            holds = false;
        }
        let ratio = Weight::as_f64(&mass) * Weight::as_f64(&var).sqrt() / c;
        if ratio < min_ratio {
            min_ratio = ratio;
        }
    }
    Ok(UnimodestReport { min_ratio, holds })
}

/// One cell of the concentration-bound grid.
#[derive(Debug, Clone, Copy)]
pub struct MaxestCell {
    pub y: u64,
    pub m: u64,
    /// `max_x P(S_m = x) · √m · y` for `S_m` the m-fold sum of `R[0, y]`.
    pub stat: f64,
}

#[derive(Debug, Clone)]
pub struct MaxestReport {
    pub cells: Vec<MaxestCell>,
    pub sup: f64,
    /// Exact check `stat ≤ 3/2` on every cell.
    pub within_bound: bool,
}

/// Exact concentration statistic over the grid: the maximum point
/// probability of the m-fold convolution of `R[0, y]`, scaled by `√m · y`.
pub fn check_maxest(y_grid: &[u64], m_grid: &[u64]) -> Result<MaxestReport> {
    let mut cells = Vec::new();
    let mut sup = 0.0f64;
    let mut within_bound = true;
    let bound_sq = rat(9, 4);
    for &y in y_grid {
        let base = ExactPmf::uniform(0, y as i64)?;
        for &m in m_grid {
            let conv = base.convolve_power(m)?;
            let max = conv.max_point_prob();
            // stat² = max² · m · y² compared to (3/2)² exactly.
            let stat_sq = &(&max * &max)
                * &BigRational::from_integer(BigInt::from(m) * BigInt::from(y) * BigInt::from(y));
            if stat_sq > bound_sq {
                within_bound = false;
            }
            let stat = Weight::as_f64(&max) * (m as f64).sqrt() * y as f64;
            if stat > sup {
                sup = stat;
            }
            cells.push(MaxestCell { y, m, stat });
        }
    }
    Ok(MaxestReport {
        cells,
        sup,
        within_bound,
    })
}

/// Numeric check of `Σ_{n≥1} (1/n)(1−q)^n = log(1/q)`.
pub fn log_series_deviation(q: f64) -> f64 {
    assert!(q > 0.0 && q < 1.0);
    let mut sum = 0.0;
    let mut term = 1.0f64;
    let r = 1.0 - q;
    let mut n = 1u64;
    loop {
        term *= r;
        let contrib = term / n as f64;
        sum += contrib;
        if contrib < 1e-18 && n > 10 {
            break;
        }
        n += 1;
        if n > 100_000_000 {
            break;
        }
    }
    (sum - (1.0 / q).ln()).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn uniform(a: i64, b: i64) -> ExactPmf {
        ExactPmf::uniform(a, b).unwrap()
    }

    /// Random mixture of `R[0, y]` components: exactly the laws with
    /// non-increasing weights.
    fn random_mixture(rng: &mut ChaCha8Rng, max_levels: usize, max_y: i64) -> ExactPmf {
        let levels = rng.random_range(1..=max_levels);
        let parts: Vec<(i64, u32)> = (0..levels)
            .map(|_| (rng.random_range(0..=max_y), rng.random_range(1..6)))
            .collect();
        let total: u32 = parts.iter().map(|(_, w)| w).sum();
        let comps: Vec<(BigRational, ExactPmf)> = parts
            .into_iter()
            .map(|(y, w)| (rat(w as i64, total as i64), uniform(0, y)))
            .collect();
        let refs: Vec<(BigRational, &ExactPmf)> =
            comps.iter().map(|(w, p)| (w.clone(), p)).collect();
        ExactPmf::mix(&refs).unwrap()
    }

    #[test]
    fn momest_on_coin_interval() {
        let r = check_momest(&uniform(0, 1)).unwrap();
        assert_eq!(r.lhs, rat(1, 4));
        assert_eq!(r.rhs, rat(3, 8));
        assert!(r.holds && r.corollary_holds);
    }

    #[test]
    fn momest_at_zero_is_tight() {
        let r = check_momest(&ExactPmf::delta(0)).unwrap();
        assert_eq!(r.lhs, rat(0, 1));
        assert_eq!(r.rhs, rat(0, 1));
        assert!(r.holds);
    }

    #[test]
    fn momest_ratio_tightens_for_wide_uniforms() {
        // lhs/rhs = (y/2)² / ((3/4)·y(2y+1)/6) → 1 as y grows.
        let mut prev = 0.0;
        for y in [2i64, 8, 32, 128, 512] {
            let r = check_momest(&uniform(0, y)).unwrap();
            let ratio = Weight::as_f64(&r.lhs) / Weight::as_f64(&r.rhs);
            assert!(ratio > prev, "ratio not increasing at y={y}");
            prev = ratio;
        }
        assert!(prev > 0.99 && prev <= 1.0);
    }

    #[test]
    fn momest_rejects_increasing_weights() {
        let bad = ExactPmf::new(0, vec![rat(1, 4), rat(3, 4)]).unwrap();
        assert!(check_momest(&bad).is_err());
        let shifted = ExactPmf::delta(-1);
        assert!(check_momest(&shifted).is_err());
    }

    #[test]
    fn unimod_on_coin_interval() {
        let r = check_unimod(&uniform(0, 1), 20).unwrap();
        assert!(r.symmetric && r.unimodal);
        assert!(r.wald_matches);
        assert!(r.sandwich_holds);
        // Var X = 9/16 up to the truncation correction.
        assert!((Weight::as_f64(&r.var_pmf) - 0.5625).abs() < 1e-8);
        assert!(Weight::as_f64(&r.truncation_mass) < 1e-9);
    }

    #[test]
    fn unimod_of_zero_law_is_degenerate() {
        let r = check_unimod(&ExactPmf::delta(0), 8).unwrap();
        assert!(r.symmetric && r.unimodal);
        assert_eq!(r.var_pmf, rat(0, 1));
        assert!(r.sandwich_holds);
    }

    #[test]
    fn unimod_over_randomized_mixtures() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let tau = random_mixture(&mut rng, 3, 5);
            let r = check_unimod(&tau, 20).unwrap();
            assert!(r.symmetric && r.unimodal && r.wald_matches && r.sandwich_holds);
        }
    }

    #[test]
    fn unimodest_example_law() {
        // μ = {−1: 1/4, 0: 1/2, 1: 1/4}: σ² = 1/2, mass(|x| < 0.7) = 1/2,
        // ratio ≈ 0.505 ≥ d'.
        let mu = ExactPmf::new(-1, vec![rat(1, 4), rat(1, 2), rat(1, 4)]).unwrap();
        let r = check_unimodest(&mu, &[0.7]).unwrap();
        assert!(r.holds);
        assert!((r.min_ratio - 0.5 * 0.5f64.sqrt() / 0.7).abs() < 1e-12);
        assert!(r.min_ratio >= D_PRIME);
    }

    #[test]
    fn unimodest_rejects_c_above_sigma() {
        let mu = ExactPmf::new(-1, vec![rat(1, 4), rat(1, 2), rat(1, 4)]).unwrap();
        assert!(check_unimodest(&mu, &[2.0]).is_err());
    }

    #[test]
    fn unimodest_wide_uniform_exact() {
        let mu = uniform(-30, 30);
        // σ² = 30·31/3 = 310, σ ≈ 17.6; integer grid up to ⌊σ⌋.
        let sigma = Weight::as_f64(&mu.moments().variance).sqrt();
        let grid: Vec<f64> = (1..=sigma.floor() as i64).map(|c| c as f64).collect();
        let r = check_unimodest(&mu, &grid).unwrap();
        assert!(r.holds, "min ratio {}", r.min_ratio);
    }

    #[test]
    fn continuous_constant_matches_numeric_maximum() {
        // Oracle: scan λ⁻¹(1 − λ⁻²) on a fine grid.
        let mut best = 0.0f64;
        for i in 1..400_000 {
            let lam = 1.0 + i as f64 * 1e-5;
            let v = (1.0 - lam.powi(-2)) / lam;
            if v > best {
                best = v;
            }
        }
        assert!((best - continuous_unimodal_constant()).abs() < 1e-9);
        assert!((continuous_unimodal_constant() - 0.3849001794597505).abs() < 1e-12);
        // And the derived discrete constant.
        assert!((D_PRIME - 2.0 / (3.0 * 13f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn maxest_small_cells() {
        let r = check_maxest(&[1], &[1, 2]).unwrap();
        // (y=1, m=1): max = 1/2, stat = 0.5.
        assert!((r.cells[0].stat - 0.5).abs() < 1e-12);
        // (y=1, m=2): max = 1/2, stat = √2/2.
        assert!((r.cells[1].stat - 0.5 * 2f64.sqrt()).abs() < 1e-12);
        assert!(r.within_bound);
    }

    #[test]
    fn log_series_identity_examples() {
        for q in [0.5, 0.1, 0.01] {
            assert!(log_series_deviation(q) < 1e-10, "q = {q}");
        }
    }
}
