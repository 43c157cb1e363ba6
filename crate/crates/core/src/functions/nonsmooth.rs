use crate::error::{invalid, Result};
use crate::problem::{ProxOracle, Vector};

/// Nonsmooth terms with closed-form prox and subdifferential.
#[derive(Debug, Clone, PartialEq)]
pub enum StructuredNonsmooth {
    Zero,
    /// `lambda * |x|_1`
    L1 {
        lambda: f64,
    },
    /// Indicator of `[lo, hi]` (bounds may be infinite).
    Box {
        lo: Vector,
        hi: Vector,
    },
    /// Indicator of the nonnegative orthant.
    Nonneg,
}

impl StructuredNonsmooth {
    pub fn l1(lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(invalid(format!("l1 weight must be >= 0, got {lambda}")));
        }
        Ok(StructuredNonsmooth::L1 { lambda })
    }

    pub fn boxed(lo: Vector, hi: Vector) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(invalid("box bounds must have the same positive length"));
        }
        if lo
            .iter()
            .zip(hi.iter())
            .any(|(l, h)| !(l <= h) || *l == f64::INFINITY || *h == f64::NEG_INFINITY)
        {
            return Err(invalid("box needs lo <= hi componentwise"));
        }
        Ok(StructuredNonsmooth::Box { lo, hi })
    }

    /// `(lo_i, hi_i)` for indicator kinds.
    fn bounds(&self, i: usize) -> (f64, f64) {
        match self {
            StructuredNonsmooth::Box { lo, hi } => (lo[i], hi[i]),
            _ => (0.0, f64::INFINITY),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            StructuredNonsmooth::Zero => "zero",
            StructuredNonsmooth::L1 { .. } => "l1",
            StructuredNonsmooth::Box { .. } => "box",
            StructuredNonsmooth::Nonneg => "nonneg",
        }
    }
}

fn soft_threshold(v: f64, tau: f64) -> f64 {
    let mag = (v.abs() - tau).max(0.0);
    if mag == 0.0 {
        0.0
    } else {
        mag.copysign(v)
    }
}

/// Residual of `w` against the 1-D normal cone of `[lo, hi]` at `x`.
fn box_residual(lo: f64, hi: f64, x: f64, w: f64) -> f64 {
    match (x == lo, x == hi) {
        (true, true) => 0.0,
        // N = (-inf, 0]
        (true, false) => (-w).max(0.0),
        // N = [0, inf)
        (false, true) => w.max(0.0),
        (false, false) => w.abs(),
    }
}

/// `min_{s in d(lambda |.|_1)(x)} |w + s|`.
pub fn subgrad_dist_l1(lambda: f64, x: &Vector, w: &Vector) -> f64 {
    x.iter()
        .zip(w.iter())
        .map(|(&xi, &wi)| {
            let c = if xi != 0.0 {
                wi + lambda * xi.signum()
            } else {
                (wi.abs() - lambda).max(0.0)
            };
            c * c
        })
        .sum::<f64>()
        .sqrt()
}

/// Distance from `0` to `w + N_[lo,hi](x)`; `x` must be feasible.
pub fn subgrad_dist_box(lo: &Vector, hi: &Vector, x: &Vector, w: &Vector) -> Result<f64> {
    if lo.len() != x.len() || hi.len() != x.len() || w.len() != x.len() {
        return Err(invalid("dimension mismatch in box distance"));
    }
    let mut acc = 0.0;
    for i in 0..x.len() {
        if !(lo[i] <= x[i] && x[i] <= hi[i]) {
            return Err(invalid(format!(
                "x[{i}] = {} outside [{}, {}]",
                x[i], lo[i], hi[i]
            )));
        }
        let r = box_residual(lo[i], hi[i], x[i], w[i]);
        acc += r * r;
    }
    Ok(acc.sqrt())
}

impl ProxOracle for StructuredNonsmooth {
    fn value(&self, x: &Vector) -> f64 {
        match self {
            StructuredNonsmooth::Zero => 0.0,
            StructuredNonsmooth::L1 { lambda } => lambda * x.lp_norm(1),
            StructuredNonsmooth::Box { .. } | StructuredNonsmooth::Nonneg => {
                let feasible = x.iter().enumerate().all(|(i, &xi)| {
                    let (lo, hi) = self.bounds(i);
                    lo <= xi && xi <= hi
                });
                if feasible {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    fn prox(&self, v: &Vector, t: f64) -> Vector {
        match self {
            StructuredNonsmooth::Zero => v.clone(),
            StructuredNonsmooth::L1 { lambda } => v.map(|vi| soft_threshold(vi, t * lambda)),
            StructuredNonsmooth::Box { .. } | StructuredNonsmooth::Nonneg => {
                Vector::from_fn(v.len(), |i, _| {
                    let (lo, hi) = self.bounds(i);
                    v[i].clamp(lo, hi)
                })
            }
        }
    }

    fn subgrad_dist(&self, x: &Vector, w: &Vector) -> Option<f64> {
        Some(match self {
            StructuredNonsmooth::Zero => w.norm(),
            StructuredNonsmooth::L1 { lambda } => subgrad_dist_l1(*lambda, x, w),
            StructuredNonsmooth::Box { lo, hi } => {
                subgrad_dist_box(lo, hi, x, w).unwrap_or(f64::INFINITY)
            }
            StructuredNonsmooth::Nonneg => {
                let lo = Vector::zeros(x.len());
                let hi = Vector::from_element(x.len(), f64::INFINITY);
                subgrad_dist_box(&lo, &hi, x, w).unwrap_or(f64::INFINITY)
            }
        })
    }

    fn dim(&self) -> Option<usize> {
        match self {
            StructuredNonsmooth::Box { lo, .. } => Some(lo.len()),
            _ => None,
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, StructuredNonsmooth::Zero)
            || matches!(self, StructuredNonsmooth::L1 { lambda } if *lambda == 0.0)
    }
}
