//! Slow, simple references used to validate the closed forms and to produce
//! `x*` and the optimal value for fixtures. Never called from solver paths.

use crate::error::{invalid, Error, Result};
use crate::functions::StructuredNonsmooth;
use crate::problem::{pg_map, CompositeProblem, Vector};

const GRID_STEP: f64 = 1e-3;
const TERNARY_WIDTH: f64 = 1e-10;

/// `argmin_y g(y) + (y - v)^2 / (2t)` on `[lo, hi]` by a coarse grid followed
/// by ternary search. `g` may return `+inf`.
pub fn grid_prox_1d(g: impl Fn(f64) -> f64, v: f64, t: f64, lo: f64, hi: f64) -> Result<f64> {
    if !(t > 0.0) || !(lo < hi) || !v.is_finite() {
        return Err(invalid("grid prox needs t > 0, lo < hi and finite v"));
    }
    let h = |y: f64| g(y) + (y - v) * (y - v) / (2.0 * t);
    let steps = ((hi - lo) / GRID_STEP).ceil() as usize;
    let at = |i: usize| {
        if i == steps {
            hi
        } else {
            lo + i as f64 * GRID_STEP
        }
    };
    let mut best = (0, h(lo));
    for i in 1..=steps {
        let val = h(at(i));
        if val < best.1 {
            best = (i, val);
        }
    }
    if !best.1.is_finite() {
        return Err(Error::Bracket { lo, hi });
    }
    if best.0 == 0 || best.0 == steps {
        return Err(Error::Bracket { lo, hi });
    }
    let anchor = at(best.0);
    let (mut a, mut b) = (at(best.0 - 1), at(best.0 + 1));
    // Sign of h(m1) - h(m2) with the quadratic part in factored form, which
    // keeps the comparison meaningful well below sqrt(eps).
    let left_is_lower = |m1: f64, m2: f64| -> bool {
        let (g1, g2) = (g(m1), g(m2));
        match (g1.is_finite(), g2.is_finite()) {
            (true, true) => g1 - g2 + (m1 - m2) * (m1 + m2 - 2.0 * v) / (2.0 * t) < 0.0,
            (true, false) => true,
            (false, true) => false,
            // Both outside dom g: the domain lies on the anchor's side.
            (false, false) => anchor < m1,
        }
    };
    while b - a > TERNARY_WIDTH {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if left_is_lower(m1, m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    Ok(0.5 * (a + b))
}

/// A reference minimizer, its objective value, and how stationary it is.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    pub x_star: Vector,
    pub phi_bar: f64,
    /// `|G(x*, 1/L)|`.
    pub residual: f64,
    pub iterations: usize,
    /// `|x_pgd - x_direct|` when a direct linear solve was available.
    pub cross_check: Option<f64>,
}

pub const REFERENCE_RESIDUAL: f64 = 1e-12;
pub const REFERENCE_MAX_ITER: usize = 10_000_000;
const CROSS_CHECK_TOL: f64 = 1e-10;

/// PGD at `t = 1/L` from the origin until `|G| <= 1e-12`.
pub fn reference_solve(p: &CompositeProblem) -> Result<ReferenceSolution> {
    reference_solve_from(p, &Vector::zeros(p.dim()))
}

pub fn reference_solve_from(p: &CompositeProblem, x0: &Vector) -> Result<ReferenceSolution> {
    p.check_dim(x0)?;
    let t = 1.0 / p.lip();
    let mut x = x0.clone();
    let mut iterations = 0;
    let residual = loop {
        let rec = pg_map(p, &x, t)?;
        let r = rec.g_map.norm();
        if r <= REFERENCE_RESIDUAL {
            break r;
        }
        if iterations == REFERENCE_MAX_ITER {
            return Err(Error::NoReference {
                iterations,
                residual: r,
            });
        }
        x = rec.x_plus;
        iterations += 1;
    };
    let phi_bar = p.phi(&x);
    if !phi_bar.is_finite() {
        return Err(invalid("reference point is outside dom g"));
    }
    let cross_check = direct_cross_check(p, &x)?;
    Ok(ReferenceSolution {
        x_star: x,
        phi_bar,
        residual,
        iterations,
        cross_check,
    })
}

fn direct_cross_check(p: &CompositeProblem, x: &Vector) -> Result<Option<f64>> {
    if !p.g.is_zero() || p.mu() <= 0.0 {
        return Ok(None);
    }
    let Some(direct) = p.f.solve_direct() else {
        return Ok(None);
    };
    let gap = (&direct - x).norm();
    if gap > CROSS_CHECK_TOL {
        return Err(invalid(format!(
            "iterative and direct solutions disagree by {gap:e}"
        )));
    }
    Ok(Some(gap))
}

const ENUM_STEP: f64 = 1e-4;
const ENUM_RADIUS: f64 = 10.0;

/// `d(0, w + dg(x))` by enumerating each coordinate's subdifferential
/// interval on a `1e-4` grid. Unbounded intervals are truncated at radius 10.
pub fn subdiff_enum_dist(g: &StructuredNonsmooth, x: &Vector, w: &Vector) -> Result<f64> {
    let n = x.len();
    if n == 0 || n > 3 || w.len() != n {
        return Err(invalid(
            "enumeration supports dimensions 1..=3 with matching w",
        ));
    }
    if w.amax() > ENUM_RADIUS {
        return Err(invalid(format!(
            "|w|_inf = {} exceeds the truncation radius {ENUM_RADIUS}",
            w.amax()
        )));
    }
    let mut total = 0.0;
    for i in 0..n {
        let (s_lo, s_hi) = match g {
            StructuredNonsmooth::L1 { lambda } => {
                if x[i] > 0.0 {
                    (*lambda, *lambda)
                } else if x[i] < 0.0 {
                    (-lambda, -lambda)
                } else {
                    (-lambda, *lambda)
                }
            }
            StructuredNonsmooth::Box { .. } | StructuredNonsmooth::Nonneg => {
                let (lo, hi) = match g {
                    StructuredNonsmooth::Box { lo, hi } => (lo[i], hi[i]),
                    _ => (0.0, f64::INFINITY),
                };
                if !(lo <= x[i] && x[i] <= hi) {
                    return Err(invalid("point outside the box"));
                }
                let lower = if x[i] == lo { -ENUM_RADIUS } else { 0.0 };
                let upper = if x[i] == hi { ENUM_RADIUS } else { 0.0 };
                (lower, upper)
            }
            StructuredNonsmooth::Zero => {
                return Err(invalid("enumeration supports l1 and box terms only"))
            }
        };
        let steps = ((s_hi - s_lo) / ENUM_STEP).round() as usize;
        let best = (0..=steps)
            .map(|j| {
                let s = if j == steps {
                    s_hi
                } else {
                    s_lo + j as f64 * ENUM_STEP
                };
                (w[i] + s).abs()
            })
            .fold(f64::INFINITY, f64::min);
        total += best * best;
    }
    Ok(total.sqrt())
}
