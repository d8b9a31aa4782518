//! Hierarchical waiting-time laws and their coupled samplers.
//!
//! A [`WaitingTimeLaw`] is a finite mixture `Σ p_l · R[0, y_l]` of uniform
//! laws on integer intervals; equivalently, any law on `{0, 1, 2, ...}`
//! with non-increasing weights. The module provides exact level
//! truncations, the coupled bundle draw `(T, κ, T⁽¹⁾, ..., T⁽ᴷ⁾)` in which
//! every level at or above the random index κ coincides with `T`, the
//! κ-truncated variant of that coupling, the constant `A` used by the
//! return-probability recursion, and the perpendicular-region supremum for
//! the transience bound in dimension `d ≥ 3`.

pub mod params;

use num::{BigRational, One, Signed, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::pmf::{ExactPmf, LatticePmf, Weight};

/// Largest `y` a sampler will accept: beyond this, uniform draws on
/// `[0, y]` are no longer exact in 53-bit arithmetic and the level is
/// declared non-simulable.
pub const SAMPLE_Y_MAX: u64 = 1 << 53;

/// One mixture level `(p_l, y_l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureLevel {
    pub p: BigRational,
    pub y: u64,
}

/// Mixture of uniform distributions on `[0, y_l]` with strictly increasing
/// `y_l` and exact weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WaitingTimeLaw {
    levels: Vec<MixtureLevel>,
}

impl WaitingTimeLaw {
    pub fn new(levels: Vec<(BigRational, u64)>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidMixture("waiting-time law needs at least one level".into()));
        }
        let mut total = BigRational::zero();
        for (p, _) in &levels {
            if !p.is_positive() {
                return Err(Error::InvalidMixture("level weights must be positive".into()));
            }
            total += p;
        }
        if !total.is_one() {
            return Err(Error::InvalidMixture(format!(
                "level weights sum to {total}, not 1"
            )));
        }
        for pair in levels.windows(2) {
            if pair[1].1 <= pair[0].1 {
                return Err(Error::InvalidMixture(
                    "interval lengths y_l must be strictly increasing".into(),
                ));
            }
        }
        Ok(WaitingTimeLaw {
            levels: levels
                .into_iter()
                .map(|(p, y)| MixtureLevel { p, y })
                .collect(),
        })
    }

    /// Convenience constructor from small rationals `(num, den, y)`.
    pub fn from_ratios(levels: &[(i64, i64, u64)]) -> Result<Self> {
        Self::new(
            levels
                .iter()
                .map(|&(n, d, y)| (<BigRational as Weight>::from_ratio(n, d), y))
                .collect(),
        )
    }

    pub fn levels(&self) -> &[MixtureLevel] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn max_y(&self) -> u64 {
        self.levels.last().map(|l| l.y).unwrap_or(0)
    }

    /// Partial sum `z_k = Σ_{l ≤ k} p_l`.
    pub fn z(&self, k: usize) -> BigRational {
        self.levels[..k]
            .iter()
            .fold(BigRational::zero(), |acc, l| acc + &l.p)
    }

    /// Exact mixture pmf `Σ p_l · R[0, y_l]`; has non-increasing weights.
    pub fn as_pmf(&self) -> Result<ExactPmf> {
        let comps: Vec<(BigRational, ExactPmf)> = self
            .levels
            .iter()
            .map(|l| Ok((l.p.clone(), ExactPmf::uniform(0, l.y as i64)?)))
            .collect::<Result<_>>()?;
        let refs: Vec<(BigRational, &ExactPmf)> =
            comps.iter().map(|(p, pmf)| (p.clone(), pmf)).collect();
        LatticePmf::mix(&refs)
    }

    /// First `k` levels renormalized by `z_k`.
    pub fn truncated(&self, k: usize) -> Result<WaitingTimeLaw> {
        if k == 0 || k > self.levels.len() {
            return Err(Error::Precondition(format!(
                "truncation level {k} out of range 1..={}",
                self.levels.len()
            )));
        }
        let z = self.z(k);
        WaitingTimeLaw::new(
            self.levels[..k]
                .iter()
                .map(|l| (&l.p / &z, l.y))
                .collect(),
        )
    }

    /// Frozen sampler tables; errors when any level is non-simulable.
    pub fn sampler(&self) -> Result<BundleSampler> {
        if self.max_y() > SAMPLE_Y_MAX {
            return Err(Error::SamplingRange(format!(
                "y = {} exceeds the simulable maximum 2^53",
                self.max_y()
            )));
        }
        let ps: Vec<f64> = self.levels.iter().map(|l| Weight::as_f64(&l.p)).collect();
        let ys: Vec<u64> = self.levels.iter().map(|l| l.y).collect();
        let mut level_cum = Vec::with_capacity(ps.len());
        let mut acc = 0.0;
        for &p in &ps {
            acc += p;
            level_cum.push(acc);
        }
        *level_cum.last_mut().unwrap() = 1.0;
        // Per-truncation cumulative tables: trunc_cum[k-1] draws from the
        // law truncated at level k.
        let mut trunc_cum = Vec::with_capacity(ps.len());
        for k in 1..=ps.len() {
            let z: f64 = ps[..k].iter().sum();
            let mut cum: Vec<f64> = Vec::with_capacity(k);
            let mut a = 0.0;
            for &p in &ps[..k] {
                a += p / z;
                cum.push(a);
            }
            *cum.last_mut().unwrap() = 1.0;
            trunc_cum.push(cum);
        }
        Ok(BundleSampler {
            ys,
            level_cum,
            trunc_cum,
        })
    }
}

/// One coupled draw `(T, κ, T⁽¹⁾, ..., T⁽ᴷ⁾)`.
///
/// Invariants: `T⁽ᵏ⁾ = T` for every `k ≥ κ`, and `0 ≤ T⁽ᵏ⁾ ≤ y_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bundle {
    pub t: u64,
    /// 1-based level index drawn from the mixture weights.
    pub kappa: usize,
    pub levels: Vec<u64>,
}

/// Sampler for waiting times and coupled bundles.
#[derive(Debug, Clone)]
pub struct BundleSampler {
    ys: Vec<u64>,
    level_cum: Vec<f64>,
    trunc_cum: Vec<Vec<f64>>,
}

impl BundleSampler {
    fn pick(cum: &[f64], rng: &mut (impl Rng + ?Sized)) -> usize {
        let u: f64 = rng.random();
        cum.partition_point(|&c| c < u).min(cum.len() - 1)
    }

    pub fn num_levels(&self) -> usize {
        self.ys.len()
    }

    /// A single waiting time `T` from the full mixture.
    pub fn sample_t(&self, rng: &mut (impl Rng + ?Sized)) -> u64 {
        let l = Self::pick(&self.level_cum, rng);
        rng.random_range(0..=self.ys[l])
    }

    /// A waiting time from the law truncated at level `k` (1-based).
    pub fn sample_truncated_t(&self, k: usize, rng: &mut (impl Rng + ?Sized)) -> u64 {
        let l = Self::pick(&self.trunc_cum[k - 1], rng);
        rng.random_range(0..=self.ys[l])
    }

    /// Coupled draw: κ from the full mixture, `T` uniform on `[0, y_κ]`,
    /// levels below κ independent from their truncated laws, levels at or
    /// above κ equal to `T`.
    pub fn sample_bundle(&self, k_levels: usize, rng: &mut (impl Rng + ?Sized)) -> Bundle {
        assert!(k_levels <= self.ys.len());
        let kappa = Self::pick(&self.level_cum, rng) + 1;
        let t = rng.random_range(0..=self.ys[kappa - 1]);
        let levels = (1..=k_levels)
            .map(|k| {
                if k < kappa {
                    self.sample_truncated_t(k, rng)
                } else {
                    t
                }
            })
            .collect();
        Bundle { t, kappa, levels }
    }

    /// As [`Self::sample_bundle`] but with κ conditioned on `κ ≤ K`
    /// (drawn from `{p_l / z_K}`).
    pub fn sample_truncated_bundle(&self, k_levels: usize, rng: &mut (impl Rng + ?Sized)) -> Bundle {
        assert!(k_levels >= 1 && k_levels <= self.ys.len());
        let kappa = Self::pick(&self.trunc_cum[k_levels - 1], rng) + 1;
        let t = rng.random_range(0..=self.ys[kappa - 1]);
        let levels = (1..=k_levels)
            .map(|k| {
                if k < kappa {
                    self.sample_truncated_t(k, rng)
                } else {
                    t
                }
            })
            .collect();
        Bundle { t, kappa, levels }
    }
}

/// The constant `A` bounding `E(Z^{-1/2} 1{Z>0}) ≤ A / (p_k √n)` where `Z`
/// counts level-`k` contributions among `n` increments.
///
/// Derivation: `Z` has mean `n p̃ E(G)` and, by Wald's identity, variance
/// `n p̃ (1-p̃) E(G) + n p̃² Var(G)` with `p̃ = p_k / z_k ≥ p_k`. Splitting at
/// `b·n·p̃` with `b = E(G)/2` and applying Chebyshev's inequality gives
/// `P(Z < b n p̃) ≤ B / (n p_k)` with `B = (E(G) + Var(G)) / (E(G) - b)²`,
/// hence `E(Z^{-1/2} 1{Z>0}) ≤ (b n p_k)^{-1/2} + B/(n p_k) ≤ A/(p_k √n)`
/// with `A = 1/√b + B`. With `E(G) = 3/2` and `Var(G) = 3/4` this yields
/// `A = 2/√3 + 4 ≈ 5.1547`.
pub fn compute_a() -> f64 {
    let e_g: f64 = 1.5;
    let var_g: f64 = 0.75;
    let b = e_g / 2.0;
    let big_b = (e_g + var_g) / ((e_g - b) * (e_g - b));
    1.0 / b.sqrt() + big_b
}

/// Result of the perpendicular-region supremum computation.
#[derive(Debug, Clone)]
pub struct RegionSup {
    /// `sup_t P(|εT - t| ≤ λ)`, exact.
    pub sup: BigRational,
    /// `1 - (1 - sup)^{d-1}`, exact.
    pub value: BigRational,
    /// Whether the value is < 1, i.e. the signed waiting time is spread
    /// enough that the region does not capture everything.
    pub non_degenerate: bool,
}

/// Computes `1 - (1 - sup_t P(|εT - t| ≤ λ))^{d-1}` exactly for a fair
/// sign `ε` and `T` from the law.
///
/// The supremum over real `t` of the mass of the closed window
/// `[t - λ, t + λ]` is attained on a window covering a maximal run of
/// lattice atoms, so it equals the concentration functional of the
/// symmetrized law at window length `2λ`.
pub fn dlambda_sup(law: &WaitingTimeLaw, lambda: f64, d: u32) -> Result<RegionSup> {
    if !(lambda > 0.0) {
        return Err(Error::Precondition("lambda must be positive".into()));
    }
    if d < 3 {
        return Err(Error::Precondition("dimension must be at least 3".into()));
    }
    let symmetrized = law.as_pmf()?.symmetrize();
    let sup = symmetrized.concentration(2.0 * lambda);
    let one = BigRational::one();
    let mut complement = &one - &sup;
    let mut acc = BigRational::one();
    for _ in 0..(d - 1) {
        acc *= &complement;
    }
    complement = acc;
    let value = &one - &complement;
    let non_degenerate = value < one;
    Ok(RegionSup {
        sup,
        value,
        non_degenerate,
    })
}
