//! Arithmetic modes for lattice distributions.
//!
//! A [`Weight`] is the scalar a [`super::LatticePmf`] carries per atom. Two
//! modes exist: exact rationals ([`num::BigRational`]) for checks that must
//! hold exactly, and `f64` for large convolutions where speed matters. The
//! mode is part of the pmf's type, so mixed-mode arithmetic cannot compile;
//! conversion is explicit via [`super::LatticePmf::to_float`].

use num::bigint::Sign;
use num::{BigInt, BigRational, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Tolerance for float-mode comparisons (mass checks, symmetry predicates).
pub const FLOAT_TOL: f64 = 1e-12;

/// Scalar arithmetic used by pmf operations. The by-reference methods
/// avoid cloning big rationals in convolution loops.
pub trait Weight:
    Clone
    + PartialOrd
    + std::fmt::Debug
    + Send
    + Sync
    + 'static
    + num_traits::Zero
    + num_traits::One
    + num_traits::Signed
{
    /// True when arithmetic and comparisons are exact.
    const EXACT: bool;

    fn add_ref(&self, other: &Self) -> Self;
    fn sub_ref(&self, other: &Self) -> Self;
    fn mul_ref(&self, other: &Self) -> Self;
    fn div_ref(&self, other: &Self) -> Self;
    fn add_assign_ref(&mut self, other: &Self);
    /// `self += a * b`; the inner loop of convolution.
    fn mul_add_ref(&mut self, a: &Self, b: &Self);
    fn from_ratio(num: i64, den: i64) -> Self;
    fn from_int(n: i64) -> Self;
    fn as_f64(&self) -> f64;
    /// Equality in the mode's own sense (exact, or within [`FLOAT_TOL`]).
    fn approx_eq(&self, other: &Self) -> bool;
    /// `self >= other` in the mode's own sense.
    fn ge_approx(&self, other: &Self) -> bool;
    /// Serialize a single weight for the pmf text format.
    fn render(&self) -> String;
    /// Parse a weight from the pmf text format.
    fn parse_weight(s: &str) -> Result<Self>;
}

impl Weight for BigRational {
    const EXACT: bool = true;

    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn div_ref(&self, other: &Self) -> Self {
        self / other
    }
    fn add_assign_ref(&mut self, other: &Self) {
        *self = &*self + other;
    }
    fn mul_add_ref(&mut self, a: &Self, b: &Self) {
        *self = &*self + a * b;
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn as_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            // Numerator or denominator individually overflow f64 range.
            let ln = bigint_ln(self.numer()) - bigint_ln(self.denom());
            let sign = if Signed::is_negative(self) { -1.0 } else { 1.0 };
            sign * ln.exp()
        })
    }
    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }
    fn ge_approx(&self, other: &Self) -> bool {
        self >= other
    }
    fn render(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }
    fn parse_weight(s: &str) -> Result<Self> {
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n, d),
            None => (s, "1"),
        };
        let num: BigInt = num
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("bad rational numerator {s:?}: {e}")))?;
        let den: BigInt = den
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("bad rational denominator {s:?}: {e}")))?;
        if Zero::is_zero(&den) {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        Ok(BigRational::new(num, den))
    }
}

/// Exact rational value of a finite `f64` (every finite float is dyadic).
pub fn f64_to_exact(x: f64) -> BigRational {
    assert!(x.is_finite());
    if x == 0.0 {
        return BigRational::zero();
    }
    let bits = x.to_bits();
    let sign: i64 = if bits >> 63 == 1 { -1 } else { 1 };
    let exponent = ((bits >> 52) & 0x7ff) as i64;
    let fraction = bits & 0xf_ffff_ffff_ffff;
    let (mantissa, exp2) = if exponent == 0 {
        (fraction, -1074i64)
    } else {
        (fraction | (1 << 52), exponent - 1075)
    };
    let mut num = BigInt::from(sign * mantissa as i64);
    let mut den = BigInt::from(1);
    if exp2 >= 0 {
        num <<= exp2 as usize;
    } else {
        den <<= (-exp2) as usize;
    }
    BigRational::new(num, den)
}

fn bigint_ln(x: &BigInt) -> f64 {
    if x.sign() == Sign::NoSign {
        return f64::NEG_INFINITY;
    }
    let (_, digits) = x.to_radix_be(2);
    let bits = digits.len();
    let take = bits.min(52);
    let mut head = 0u64;
    for &d in digits.iter().take(take) {
        head = (head << 1) | d as u64;
    }
    (head as f64).ln() + (bits - take) as f64 * std::f64::consts::LN_2
}

impl Weight for f64 {
    const EXACT: bool = false;

    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn div_ref(&self, other: &Self) -> Self {
        self / other
    }
    fn add_assign_ref(&mut self, other: &Self) {
        *self += other;
    }
    fn mul_add_ref(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn from_int(n: i64) -> Self {
        n as f64
    }
    fn as_f64(&self) -> f64 {
        *self
    }
    fn approx_eq(&self, other: &Self) -> bool {
        (self - other).abs() <= FLOAT_TOL
    }
    fn ge_approx(&self, other: &Self) -> bool {
        *self >= other - FLOAT_TOL
    }
    fn render(&self) -> String {
        // `{}` prints the shortest representation that round-trips.
        format!("{self}")
    }
    fn parse_weight(s: &str) -> Result<Self> {
        s.trim()
            .parse()
            .map_err(|e| Error::Parse(format!("bad float weight {s:?}: {e}")))
    }
}
