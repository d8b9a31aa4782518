//! Axis-aligned boxes and exact segment–box intersection.

use num::{BigInt, BigRational, Signed, Zero};

use crate::error::{Error, Result};
use crate::pmf::weight::f64_to_exact;

/// Closed axis-aligned box given by per-coordinate intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl AxisBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        for (l, h) in lo.iter().zip(&hi) {
            if l > h {
                return Err(Error::Precondition(format!("box interval [{l}, {h}] is empty")));
            }
        }
        Ok(AxisBox { lo, hi })
    }

    /// The cube `[-half, half]^dim`.
    pub fn centered_cube(dim: usize, half: f64) -> Self {
        AxisBox {
            lo: vec![-half; dim],
            hi: vec![half; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn contains(&self, point: &[i64]) -> bool {
        point
            .iter()
            .enumerate()
            .all(|(i, &x)| self.lo[i] <= x as f64 && x as f64 <= self.hi[i])
    }
}

/// True iff the closed segment `[p0, p1]` meets the closed box: the
/// parametric slab test, carried out in exact rational arithmetic so
/// boundary touches are classified correctly.
pub fn segment_hits_box(p0: &[i64], p1: &[i64], bounds: &AxisBox) -> Result<bool> {
    if p0.len() != bounds.dim() || p1.len() != bounds.dim() {
        return Err(Error::DimensionMismatch {
            expected: bounds.dim(),
            got: p0.len().max(p1.len()),
        });
    }
    let mut t_lo = BigRational::zero();
    let mut t_hi = BigRational::from_integer(BigInt::from(1));
    for i in 0..bounds.dim() {
        let a = BigRational::from_integer(BigInt::from(p0[i]));
        let d = BigRational::from_integer(BigInt::from(p1[i] - p0[i]));
        let lo = f64_to_exact(bounds.lo()[i]);
        let hi = f64_to_exact(bounds.hi()[i]);
        if d.is_zero() {
            if a < lo || a > hi {
                return Ok(false);
            }
            continue;
        }
        let mut t0 = (&lo - &a) / &d;
        let mut t1 = (&hi - &a) / &d;
        if d.is_negative() {
            std::mem::swap(&mut t0, &mut t1);
        }
        if t0 > t_lo {
            t_lo = t0;
        }
        if t1 < t_hi {
            t_hi = t1;
        }
        if t_lo > t_hi {
            return Ok(false);
        }
    }
    Ok(true)
}

/// 1D convenience: does the closed interval between `a` and `b` meet
/// `[lo, hi]`?
pub fn interval_hits(a: i64, b: i64, lo: f64, hi: f64) -> bool {
    let (min, max) = if a <= b { (a, b) } else { (b, a) };
    (min as f64) <= hi && (max as f64) >= lo
}

const FAST_LIMIT: i64 = 1 << 20;

fn f64_to_small_ratio(x: f64) -> Option<(i64, i64)> {
    use num::ToPrimitive;
    if !x.is_finite() {
        return None;
    }
    let r = f64_to_exact(x);
    let num = r.numer().to_i64()?;
    let den = r.denom().to_i64()?;
    (num.abs() <= FAST_LIMIT && den <= FAST_LIMIT).then_some((num, den))
}

fn frac_gt(a: (i128, i128), b: (i128, i128)) -> bool {
    a.0 * b.1 > b.0 * a.1
}

/// Exact and allocation-free segment test against `[-half, half]^d` for
/// coordinates within 2^20; larger inputs fall back to the rational slab.
pub fn segment_hits_centered_cube(p0: &[i64], p1: &[i64], half: f64) -> bool {
    if let Some((hn, hd)) = f64_to_small_ratio(half) {
        if hn >= 0
            && p0.iter().chain(p1.iter()).all(|&x| x.abs() <= FAST_LIMIT)
        {
            return slab_small(p0, p1, hn, hd);
        }
    }
    let b = AxisBox::centered_cube(p0.len(), half);
    segment_hits_box(p0, p1, &b).expect("dimensions match by construction")
}

fn slab_small(p0: &[i64], p1: &[i64], hn: i64, hd: i64) -> bool {
    let mut t_lo: (i128, i128) = (0, 1);
    let mut t_hi: (i128, i128) = (1, 1);
    for i in 0..p0.len() {
        let a = p0[i] as i128;
        let d = (p1[i] - p0[i]) as i128;
        // Numerators of (±h − a) over the denominator hd.
        let lo_num = -(hn as i128) - a * hd as i128;
        let hi_num = hn as i128 - a * hd as i128;
        if d == 0 {
            if lo_num > 0 || hi_num < 0 {
                return false;
            }
            continue;
        }
        let den = hd as i128 * d;
        let (mut t0, mut t1) = ((lo_num, den), (hi_num, den));
        if den < 0 {
            t0 = (-hi_num, -den);
            t1 = (-lo_num, -den);
        }
        if frac_gt(t0, t_lo) {
            t_lo = t0;
        }
        if frac_gt(t_hi, t1) {
            t_hi = t1;
        }
        if frac_gt(t_lo, t_hi) {
            return false;
        }
    }
    true
}
