//! Exact arithmetic on finite integer-supported probability distributions.
//!
//! [`LatticePmf`] is the universal currency for exact laws: waiting-time
//! mixtures, alternating-sum increments, convolution powers of walks. The
//! weight type parameter selects the arithmetic mode (see [`weight`]).

pub mod io;
pub mod weight;

use num::BigRational;
use rand::Rng;

use crate::error::{Error, Result};
pub use weight::{Weight, FLOAT_TOL};

/// Hard cap on the number of atoms any operation may produce.
pub const SUPPORT_CAP: u64 = 1 << 24;

/// A probability mass function on the integers with finite support.
///
/// Invariants: weights are nonnegative and sum to one (exactly in exact
/// mode, within `1e-12` in float mode), and the first and last weights are
/// strictly positive (the support is tight).
#[derive(Debug, Clone, PartialEq)]
pub struct LatticePmf<W: Weight> {
    offset: i64,
    weights: Vec<W>,
}

/// Exact-mode pmf.
pub type ExactPmf = LatticePmf<BigRational>;
/// Float-mode pmf.
pub type FloatPmf = LatticePmf<f64>;

/// Exact mean, second moment and variance of a pmf.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSummary<W: Weight> {
    pub mean: W,
    pub second_moment: W,
    pub variance: W,
}

/// Result of the symmetry/unimodality predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub symmetric: bool,
    pub unimodal: bool,
}

impl<W: Weight> LatticePmf<W> {
    /// Builds a pmf from an offset and raw weights, validating the invariants.
    pub fn new(offset: i64, weights: Vec<W>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidMixture("empty weight vector".into()));
        }
        if weights.iter().any(|w| w.is_negative()) {
            return Err(Error::InvalidMixture("negative weight".into()));
        }
        let mut total = W::zero();
        for w in &weights {
            total.add_assign_ref(w);
        }
        if !total.approx_eq(&W::one()) {
            return Err(Error::InvalidMixture(format!(
                "weights sum to {:?}, not 1",
                total.as_f64()
            )));
        }
        Ok(Self::from_parts(offset, weights))
    }

    /// Internal constructor: trims zero tails and renormalizes float drift.
    fn from_parts(offset: i64, mut weights: Vec<W>) -> Self {
        let first = weights.iter().position(|w| !w.is_zero()).unwrap_or(0);
        let last = weights.iter().rposition(|w| !w.is_zero()).unwrap_or(0);
        let offset = offset + first as i64;
        weights = weights[first..=last].to_vec();
        if !W::EXACT {
            let mut total = W::zero();
            for w in &weights {
                total.add_assign_ref(w);
            }
            if !total.is_zero() {
                for w in &mut weights {
                    *w = w.div_ref(&total);
                }
            }
        }
        LatticePmf { offset, weights }
    }

    /// Point mass at `x`.
    pub fn delta(x: i64) -> Self {
        LatticePmf {
            offset: x,
            weights: vec![W::one()],
        }
    }

    /// Uniform distribution on the integer interval `[a, b]`.
    pub fn uniform(a: i64, b: i64) -> Result<Self> {
        if a > b {
            return Err(Error::InvalidInterval { a, b });
        }
        let n = (b - a + 1) as u64;
        if n > SUPPORT_CAP {
            return Err(Error::SupportOverflow {
                atoms: n,
                cap: SUPPORT_CAP,
            });
        }
        let w = W::from_ratio(1, n as i64);
        Ok(LatticePmf {
            offset: a,
            weights: vec![w; n as usize],
        })
    }

    /// Pointwise convex combination of pmfs.
    pub fn mix(components: &[(W, &LatticePmf<W>)]) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidMixture("empty mixture".into()));
        }
        let mut total = W::zero();
        for (p, _) in components {
            if p.is_negative() {
                return Err(Error::InvalidMixture("negative mixture weight".into()));
            }
            total.add_assign_ref(p);
        }
        if !total.approx_eq(&W::one()) {
            return Err(Error::InvalidMixture(format!(
                "mixture weights sum to {:?}, not 1",
                total.as_f64()
            )));
        }
        let lo = components.iter().map(|(_, p)| p.min_support()).min().unwrap();
        let hi = components.iter().map(|(_, p)| p.max_support()).max().unwrap();
        let atoms = (hi - lo + 1) as u64;
        if atoms > SUPPORT_CAP {
            return Err(Error::SupportOverflow {
                atoms,
                cap: SUPPORT_CAP,
            });
        }
        let mut weights = vec![W::zero(); atoms as usize];
        for (p, pmf) in components {
            if p.is_zero() {
                continue;
            }
            for (i, w) in pmf.weights.iter().enumerate() {
                let idx = (pmf.offset - lo) as usize + i;
                weights[idx].mul_add_ref(p, w);
            }
        }
        Ok(Self::from_parts(lo, weights))
    }

    /// Law of the independent sum.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        let atoms = self.weights.len() as u64 + other.weights.len() as u64 - 1;
        if atoms > SUPPORT_CAP {
            return Err(Error::SupportOverflow {
                atoms,
                cap: SUPPORT_CAP,
            });
        }
        let mut weights = vec![W::zero(); atoms as usize];
        // Iterate the shorter factor on the outside.
        let (a, b) = if self.weights.len() <= other.weights.len() {
            (self, other)
        } else {
            (other, self)
        };
        for (i, wa) in a.weights.iter().enumerate() {
            if wa.is_zero() {
                continue;
            }
            for (j, wb) in b.weights.iter().enumerate() {
                weights[i + j].mul_add_ref(wa, wb);
            }
        }
        Ok(Self::from_parts(self.offset + other.offset, weights))
    }

    /// `n`-fold convolution power by binary exponentiation; `n = 0` is δ₀.
    pub fn convolve_power(&self, n: u64) -> Result<Self> {
        let mut result = Self::delta(0);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = result.convolve(&base)?;
            }
            n >>= 1;
            if n > 0 {
                base = base.convolve(&base)?;
            }
        }
        Ok(result)
    }

    /// Law of `-X`.
    pub fn reflect(&self) -> Self {
        let mut weights = self.weights.clone();
        weights.reverse();
        LatticePmf {
            offset: -(self.offset + self.weights.len() as i64 - 1),
            weights,
        }
    }

    /// Even part: the law of `εX` for a fair sign `ε`.
    pub fn symmetrize(&self) -> Self {
        let half = W::from_ratio(1, 2);
        Self::mix(&[(half.clone(), self), (half, &self.reflect())])
            .expect("symmetrize preserves mass")
    }

    pub fn moments(&self) -> MomentSummary<W> {
        let mut mean = W::zero();
        let mut second = W::zero();
        for (x, w) in self.iter() {
            let xv = W::from_int(x);
            mean.mul_add_ref(&xv, w);
            second.mul_add_ref(&xv.mul_ref(&xv), w);
        }
        let variance = second.sub_ref(&mean.mul_ref(&mean));
        MomentSummary {
            mean,
            second_moment: second,
            variance,
        }
    }

    /// Symmetry about 0 and unimodality (weights non-increasing in `|x|`,
    /// ties allowed). Exact comparisons in exact mode, `1e-12` tolerance in
    /// float mode.
    pub fn shape(&self) -> Shape {
        let lo = self.min_support();
        let hi = self.max_support();
        let symmetric = lo == -hi
            && (0..self.weights.len() / 2 + 1)
                .all(|i| self.weights[i].approx_eq(&self.weights[self.weights.len() - 1 - i]));
        let unimodal = {
            let mut ok = true;
            let mut prev = self.prob_at(0);
            for x in 1..=hi.max(0) {
                let cur = self.prob_at(x);
                if !prev.ge_approx(&cur) {
                    ok = false;
                    break;
                }
                prev = cur;
            }
            if ok {
                let mut prev = self.prob_at(0);
                for x in 1..=(-lo).max(0) {
                    let cur = self.prob_at(-x);
                    if !prev.ge_approx(&cur) {
                        ok = false;
                        break;
                    }
                    prev = cur;
                }
            }
            ok
        };
        Shape {
            symmetric,
            unimodal,
        }
    }

    /// Maximum single-point weight.
    pub fn max_point_prob(&self) -> W {
        let mut best = self.weights[0].clone();
        for w in &self.weights[1..] {
            if *w > best {
                best = w.clone();
            }
        }
        best
    }

    /// Total weight on `{x : |x| < c}` (strict inequality).
    pub fn interval_mass(&self, c: f64) -> W {
        let mut total = W::zero();
        for (x, w) in self.iter() {
            if (x.abs() as f64) < c {
                total.add_assign_ref(w);
            }
        }
        total
    }

    /// Concentration functional: `sup_x` of the mass of the closed interval
    /// `[x, x + lambda]`. On the lattice this is the best window of
    /// `⌊lambda⌋ + 1` consecutive atoms; for `lambda < 1` it equals
    /// [`Self::max_point_prob`].
    pub fn concentration(&self, lambda: f64) -> W {
        let span = if lambda < 0.0 { 0 } else { lambda.floor() as usize };
        let window = span + 1;
        if window >= self.weights.len() {
            let mut total = W::zero();
            for w in &self.weights {
                total.add_assign_ref(w);
            }
            return total;
        }
        let mut sum = W::zero();
        for w in &self.weights[..window] {
            sum.add_assign_ref(w);
        }
        let mut best = sum.clone();
        for i in window..self.weights.len() {
            sum.add_assign_ref(&self.weights[i]);
            sum = sum.sub_ref(&self.weights[i - window]);
            if sum > best {
                best = sum.clone();
            }
        }
        best
    }

    /// Exact law of `ε · Σ_{i=1..g} (-1)^i T_i` for iid `T_i ~ tau` on the
    /// nonnegative integers and a fair sign `ε`. Always symmetric.
    pub fn alternating_sum_law(tau: &Self, g: u32) -> Result<Self> {
        if tau.min_support() < 0 {
            return Err(Error::Precondition(
                "alternating_sum_law requires support on the nonnegative integers".into(),
            ));
        }
        if g == 0 {
            return Err(Error::Precondition("g must be >= 1".into()));
        }
        let evens = (g / 2) as u64;
        let odds = (g - g / 2) as u64;
        let plus = tau.convolve_power(evens)?;
        let minus = tau.reflect().convolve_power(odds)?;
        Ok(plus.convolve(&minus)?.symmetrize())
    }

    /// Exact law of `X = ε Σ_{i=1..G} (-1)^i T_i` with `G` geometric with
    /// parameter 2/3 on `{1, 2, ...}`, truncated at `g_max` and renormalized.
    ///
    /// Returns `(law, truncation_mass)` where the second component is the
    /// discarded tail `P(G > g_max) = (1/3)^{g_max}`.
    pub fn law_of_x(tau: &Self, g_max: u32) -> Result<(Self, W)> {
        if tau.min_support() < 0 {
            return Err(Error::Precondition(
                "law_of_x requires support on the nonnegative integers".into(),
            ));
        }
        if g_max == 0 {
            return Err(Error::Precondition("g_max must be >= 1".into()));
        }
        let third = W::from_ratio(1, 3);
        let mut tail = W::one();
        for _ in 0..g_max {
            tail = tail.mul_ref(&third);
        }
        let kept = W::one().sub_ref(&tail);

        // Running law of Σ_{i=1..g} (-1)^i T_i, extended one term at a time,
        // mixed with renormalized geometric weights; symmetrized once at the
        // end (symmetrization is linear).
        let reflected = tau.reflect();
        let mut partial = reflected.clone(); // g = 1: -T₁
        let mut geom = W::from_ratio(2, 3); // P(G = 1)
        let mut components: Vec<(W, Self)> = Vec::with_capacity(g_max as usize);
        for g in 1..=g_max {
            components.push((geom.div_ref(&kept), partial.clone()));
            if g < g_max {
                partial = if g % 2 == 0 {
                    partial.convolve(&reflected)?
                } else {
                    partial.convolve(tau)?
                };
                geom = geom.mul_ref(&third);
            }
        }
        let refs: Vec<(W, &Self)> = components.iter().map(|(w, p)| (w.clone(), p)).collect();
        let mixed = Self::mix(&refs)?;
        Ok((mixed.symmetrize(), tail))
    }

    /// Smallest `g ≥ 0` with `P(|X| ≤ g) ≥ q`.
    pub fn abs_quantile(&self, q: f64) -> i64 {
        let bound = self.min_support().abs().max(self.max_support().abs());
        for g in 0..=bound {
            let mut mass = W::zero();
            for (x, w) in self.iter() {
                if x.abs() <= g {
                    mass.add_assign_ref(w);
                }
            }
            if mass.as_f64() >= q {
                return g;
            }
        }
        bound
    }

    pub fn min_support(&self) -> i64 {
        self.offset
    }

    pub fn max_support(&self) -> i64 {
        self.offset + self.weights.len() as i64 - 1
    }

    pub fn support_len(&self) -> usize {
        self.weights.len()
    }

    pub fn prob_at(&self, x: i64) -> W {
        if x < self.offset || x > self.max_support() {
            W::zero()
        } else {
            self.weights[(x - self.offset) as usize].clone()
        }
    }

    pub fn total_mass(&self) -> W {
        let mut total = W::zero();
        for w in &self.weights {
            total.add_assign_ref(w);
        }
        total
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &W)> {
        self.weights
            .iter()
            .enumerate()
            .map(move |(i, w)| (self.offset + i as i64, w))
    }

    /// Converts to float mode.
    pub fn to_float(&self) -> FloatPmf {
        LatticePmf::from_parts(
            self.offset,
            self.weights.iter().map(|w| w.as_f64()).collect(),
        )
    }

    /// Cumulative-table sampler for Monte Carlo use.
    pub fn sampler(&self) -> PmfSampler {
        let mut cum = Vec::with_capacity(self.weights.len());
        let mut acc = 0.0f64;
        for w in &self.weights {
            acc += w.as_f64();
            cum.push(acc);
        }
        if let Some(last) = cum.last_mut() {
            *last = 1.0;
        }
        PmfSampler {
            offset: self.offset,
            cum,
        }
    }
}

/// Samples integers from a frozen pmf via inverse transform.
#[derive(Debug, Clone)]
pub struct PmfSampler {
    offset: i64,
    cum: Vec<f64>,
}

impl PmfSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        let u: f64 = rng.random();
        let idx = self.cum.partition_point(|&c| c < u);
        self.offset + idx.min(self.cum.len() - 1) as i64
    }
}
