//! Nonnegative magnitudes with an iterated-exponential representation.
//!
//! The recursive parameter construction produces quantities like
//! `exp(exp(exp(x)))` whose single logarithm already overflows `f64`. A
//! [`Mag`] stores a magnitude as `depth` nested exponentials applied to a
//! plain `f64` top value:
//!
//! * `depth 0`: the value itself (any finite nonnegative `f64`),
//! * `depth d ≥ 1`: `exp` applied `d` times to the top value.
//!
//! The representation is kept canonical: a tower is demoted to a plain
//! value whenever `exp(top)` fits in `f64` (top ≤ [`DEMOTE_LN`]), so depth
//! is minimal and comparison is lexicographic on `(depth, top)`.
//!
//! Additions between towers of depth ≥ 2 degenerate to `max`: the relative
//! correction is below `exp(-exp(600))`, far outside any floating
//! representation. All constraint checking that would require cancelling
//! same-depth towers is instead done on residuals recorded at construction
//! time (see `hierarchy::params`).

use std::cmp::Ordering;

/// Tops above this threshold are promoted one depth (`exp` would overflow).
pub const DEMOTE_LN: f64 = 690.0;

/// A nonnegative magnitude, possibly far beyond `f64` range.
#[derive(Debug, Clone, Copy)]
pub struct Mag {
    depth: u32,
    top: f64,
}

impl Mag {
    pub fn from_f64(v: f64) -> Self {
        assert!(v.is_finite() && v >= 0.0, "Mag requires finite nonnegative input, got {v}");
        Mag { depth: 0, top: v }
    }

    pub fn zero() -> Self {
        Mag { depth: 0, top: 0.0 }
    }

    pub fn one() -> Self {
        Mag { depth: 0, top: 1.0 }
    }

    /// Raw accessor: `(depth, top)` in canonical form.
    pub fn parts(&self) -> (u32, f64) {
        (self.depth, self.top)
    }

    pub fn from_parts(depth: u32, top: f64) -> Self {
        Mag { depth, top }.canonical()
    }

    fn canonical(mut self) -> Self {
        while self.depth > 0 && self.top <= DEMOTE_LN {
            self.top = self.top.exp();
            self.depth -= 1;
        }
        assert!(self.top.is_finite(), "non-finite Mag top");
        self
    }

    /// Natural logarithm. Requires the value to be ≥ 1 at depth 0.
    pub fn ln(&self) -> Mag {
        if self.depth == 0 {
            assert!(
                self.top >= 1.0,
                "Mag::ln of value < 1 ({}) would leave the nonnegative domain",
                self.top
            );
            Mag::from_f64(self.top.ln())
        } else {
            Mag {
                depth: self.depth - 1,
                top: self.top,
            }
        }
    }

    /// `exp` of this magnitude.
    pub fn exp(&self) -> Mag {
        if self.depth == 0 && self.top <= DEMOTE_LN {
            Mag::from_f64(self.top.exp())
        } else {
            Mag {
                depth: self.depth + 1,
                top: self.top,
            }
        }
    }

    pub fn add(&self, other: &Mag) -> Mag {
        let (a, b) = if self >= other {
            (self, other)
        } else {
            (other, self)
        };
        if b.is_zero() {
            return *a;
        }
        match (a.depth, b.depth) {
            (0, 0) => {
                let sum = a.top + b.top;
                if sum.is_finite() {
                    Mag::from_f64(sum)
                } else {
                    // Overflow at the boundary: go through logs.
                    Mag::from_parts(1, a.top.ln() + (b.top / a.top).ln_1p())
                }
            }
            (1, 0) => {
                // ln(A + b) = ln A + ln1p(b/A); b/A = exp(ln b - ln A).
                let corr = (b.top.ln() - a.top).exp().ln_1p();
                Mag::from_parts(1, a.top + corr)
            }
            (1, 1) => {
                let corr = (b.top - a.top).exp().ln_1p();
                Mag::from_parts(1, a.top + corr)
            }
            // Depth ≥ 2: the smaller term is below representable precision.
            _ => *a,
        }
    }

    /// Multiplication via logarithms; exact for plain values in range.
    pub fn mul(&self, other: &Mag) -> Mag {
        if self.is_zero() || other.is_zero() {
            return Mag::zero();
        }
        if self.depth == 0 && other.depth == 0 {
            let prod = self.top * other.top;
            if prod.is_finite() {
                return Mag::from_f64(prod);
            }
        }
        // Values < 1 only occur at depth 0; split off the plain factor to
        // keep ln in the ≥ 1 domain.
        if self.depth == 0 && self.top < 1.0 {
            return other.scale(self.top);
        }
        if other.depth == 0 && other.top < 1.0 {
            return self.scale(other.top);
        }
        self.ln().add(&other.ln()).exp()
    }

    /// `self - other`, requiring `self >= other`. At depths ≥ 2 a strictly
    /// smaller subtrahend is below representable precision and the result is
    /// `self`; equal towers cannot be subtracted meaningfully and panic.
    pub fn sub_positive(&self, other: &Mag) -> Mag {
        assert!(
            self >= other,
            "sub_positive requires self >= other ({self:?} < {other:?})"
        );
        if other.is_zero() {
            return *self;
        }
        match (self.depth, other.depth) {
            (0, 0) => Mag::from_f64(self.top - other.top),
            (1, 0) => {
                // A - b = A · (1 - b/A); b/A = exp(ln b - ln A).
                let ratio_ln = other.top.ln() - self.top;
                if ratio_ln < -745.0 {
                    *self
                } else {
                    Mag::from_parts(1, self.top + (-ratio_ln.exp()).ln_1p())
                }
            }
            (1, 1) => {
                let ratio_ln = other.top - self.top;
                if ratio_ln == 0.0 {
                    return Mag::zero();
                }
                if ratio_ln < -745.0 {
                    *self
                } else {
                    Mag::from_parts(1, self.top + (-ratio_ln.exp()).ln_1p())
                }
            }
            (da, db) if da > db => *self,
            // Same depth ≥ 2: a strictly smaller subtrahend is relatively
            // below exp(-exp(DEMOTE_LN)). Equal representations arise when
            // the recursion's constant factors collapse (2L and L/2 share
            // one depth-3 representation); any constant-factor difference
            // of such towers is representation-equal to the inputs, so the
            // minuend is returned. Genuine cancellations are never computed
            // through this path; they are carried as residuals.
            _ => *self,
        }
    }

    /// `self / other`, requiring the quotient to stay ≥ 1.
    pub fn div(&self, other: &Mag) -> Mag {
        assert!(!other.is_zero(), "division by zero Mag");
        if other.depth == 0 && other.top < 1.0 {
            return self.scale(1.0 / other.top);
        }
        if self.depth == 0 && other.depth == 0 {
            let q = self.top / other.top;
            assert!(q >= 1.0, "Mag::div would produce {q} < 1");
            return Mag::from_f64(q);
        }
        assert!(self >= other, "Mag::div would produce a value < 1");
        self.ln().sub_positive(&other.ln()).exp()
    }

    /// Multiplies by a plain positive factor.
    pub fn scale(&self, factor: f64) -> Mag {
        assert!(factor > 0.0 && factor.is_finite());
        if self.is_zero() {
            return Mag::zero();
        }
        match self.depth {
            0 => {
                let prod = self.top * factor;
                if prod.is_finite() {
                    Mag::from_f64(prod)
                } else {
                    Mag::from_parts(1, self.top.ln() + factor.ln())
                }
            }
            1 => Mag::from_parts(1, self.top + factor.ln()),
            // ln value changes by ln(factor), invisible at depth ≥ 2.
            _ => *self,
        }
    }

    /// `self^e` for a plain positive exponent.
    pub fn powf(&self, e: f64) -> Mag {
        assert!(e > 0.0 && e.is_finite());
        if self.is_zero() {
            return Mag::zero();
        }
        if self.depth == 0 {
            let p = self.top.powf(e);
            if p.is_finite() {
                return Mag::from_f64(p);
            }
        }
        self.ln().scale(e).exp()
    }

    pub fn sqrt(&self) -> Mag {
        if self.depth == 0 {
            Mag::from_f64(self.top.sqrt())
        } else {
            self.powf(0.5)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.depth == 0 && self.top == 0.0
    }

    /// The value as `f64`, saturating to infinity beyond range.
    pub fn to_f64(&self) -> f64 {
        if self.depth == 0 {
            self.top
        } else {
            f64::INFINITY
        }
    }

    /// `log10` of the value as a `Mag` (requires value ≥ 1).
    pub fn log10(&self) -> Mag {
        self.ln().scale(1.0 / std::f64::consts::LN_10)
    }

    /// `self - other` as plain `f64`, saturating when either side is a tower.
    pub fn sub_f64_saturating(&self, other: &Mag) -> f64 {
        match (self.depth, other.depth) {
            (0, 0) => self.top - other.top,
            _ => match self.partial_cmp(other).unwrap() {
                Ordering::Less => f64::NEG_INFINITY,
                Ordering::Equal => 0.0,
                Ordering::Greater => f64::INFINITY,
            },
        }
    }

    /// The larger of the two.
    pub fn max(&self, other: &Mag) -> Mag {
        if self >= other {
            *self
        } else {
            *other
        }
    }

    /// Serialization token: plain decimal, or `t<d>:<top>` for towers.
    pub fn render(&self) -> String {
        if self.depth == 0 {
            format!("{}", self.top)
        } else {
            format!("t{}:{}", self.depth, self.top)
        }
    }

    pub fn parse(s: &str) -> Option<Mag> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix('t') {
            let (d, v) = rest.split_once(':')?;
            let depth: u32 = d.parse().ok()?;
            let top: f64 = v.parse().ok()?;
            Some(Mag::from_parts(depth, top))
        } else {
            let v: f64 = s.parse().ok()?;
            if v.is_finite() && v >= 0.0 {
                Some(Mag::from_f64(v))
            } else {
                None
            }
        }
    }

    /// Relative agreement of the top-level representation, used for
    /// consistency checks between stored and recomputed magnitudes.
    pub fn approx_eq(&self, other: &Mag, tol: f64) -> bool {
        if self.depth != other.depth {
            return false;
        }
        let (a, b) = (self.top, other.top);
        if a == b {
            return true;
        }
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }
}

impl PartialEq for Mag {
    fn eq(&self, other: &Self) -> bool {
        self.depth == other.depth && self.top == other.top
    }
}

impl PartialOrd for Mag {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.depth.cmp(&other.depth) {
            Ordering::Equal => self.top.partial_cmp(&other.top),
            ord => Some(ord),
        }
    }
}
