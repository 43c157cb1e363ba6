//! One-sided comparison convention shared by every check.
//!
//! An inequality `lhs >= rhs` holds when
//! `lhs - rhs >= -(abs + rel * max(|lhs|, |rhs|))`.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::STANDARD
    }
}

impl Tolerance {
    pub const STANDARD: Tolerance = Tolerance {
        abs: 1e-10,
        rel: 1e-8,
    };

    pub const fn absolute(abs: f64) -> Self {
        Tolerance { abs, rel: 0.0 }
    }

    /// Allowed deficit for the pair `(lhs, rhs)`.
    pub fn allowance(&self, lhs: f64, rhs: f64) -> f64 {
        self.abs + self.rel * lhs.abs().max(rhs.abs())
    }

    /// Signed margin `lhs - rhs`, with infinities resolved the way the
    /// extended-real inequality reads (`+inf >= x` and `x >= -inf` hold).
    pub fn margin(lhs: f64, rhs: f64) -> f64 {
        if lhs == f64::INFINITY || rhs == f64::NEG_INFINITY {
            if lhs.is_nan() || rhs.is_nan() {
                return f64::NAN;
            }
            return f64::INFINITY;
        }
        lhs - rhs
    }

    pub fn holds(&self, lhs: f64, rhs: f64) -> bool {
        let m = Self::margin(lhs, rhs);
        if m == f64::INFINITY {
            return true;
        }
        if m == f64::NEG_INFINITY {
            return false;
        }
        // NaN compares false here, which is what we want.
        m >= -self.allowance(lhs, rhs)
    }
}
