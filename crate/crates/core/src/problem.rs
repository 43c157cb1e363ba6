//! Oracle contracts for the composite model `phi = f + g` and the proximal
//! gradient mapping `G(x, t) = (x - prox_{tg}(x - t grad f(x))) / t`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{invalid, Error, Result};

pub type Vector = DVector<f64>;

/// Residual bound a reference optimum must meet to be attached to a problem.
pub const REFERENCE_TOLERANCE: f64 = 1e-8;

/// Value and gradient access to an `L`-smooth, `mu`-strongly convex `f`.
pub trait SmoothOracle: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn value(&self, x: &Vector) -> f64;
    fn gradient(&self, x: &Vector) -> Vector;
    /// Declared strong-convexity modulus.
    fn mu(&self) -> f64;
    /// Declared smoothness constant.
    fn lip(&self) -> f64;

    /// Minimizer from a direct solve, for functions that have one (quadratics).
    fn solve_direct(&self) -> Option<Vector> {
        None
    }
}

/// A proper closed convex `g` with a computable proximal mapping.
pub trait ProxOracle: Send + Sync + fmt::Debug {
    /// `g(x)`, `+inf` outside the domain.
    fn value(&self, x: &Vector) -> f64;

    /// `argmin_y g(y) + |y - v|^2 / (2t)`. Callers go through [`prox_apply`],
    /// which validates the arguments.
    fn prox(&self, v: &Vector, t: f64) -> Vector;

    /// Exact `min_{s in dg(x)} |w + s|`, for `g` whose subdifferential is
    /// known in closed form. `+inf` when `x` is outside the domain.
    fn subgrad_dist(&self, _x: &Vector, _w: &Vector) -> Option<f64> {
        None
    }

    /// Fixed dimension, if `g` has one.
    fn dim(&self) -> Option<usize> {
        None
    }

    /// True only for `g == 0`.
    fn is_zero(&self) -> bool {
        false
    }
}

impl<T: SmoothOracle + ?Sized> SmoothOracle for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &Vector) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &Vector) -> Vector {
        (**self).gradient(x)
    }
    fn mu(&self) -> f64 {
        (**self).mu()
    }
    fn lip(&self) -> f64 {
        (**self).lip()
    }
    fn solve_direct(&self) -> Option<Vector> {
        (**self).solve_direct()
    }
}

/// A reference minimizer `x*` and optimal value.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub x_star: Vector,
    pub phi_bar: f64,
}

#[derive(Debug, Clone)]
pub struct CompositeProblem {
    pub f: Arc<dyn SmoothOracle>,
    pub g: Arc<dyn ProxOracle>,
    pub label: String,
    reference: Option<Reference>,
}

impl CompositeProblem {
    pub fn new(f: Arc<dyn SmoothOracle>, g: Arc<dyn ProxOracle>) -> Result<Self> {
        let (mu, lip) = (f.mu(), f.lip());
        if !(lip > 0.0 && lip.is_finite()) {
            return Err(invalid(format!(
                "smoothness constant must be positive, got {lip}"
            )));
        }
        if !(0.0..=lip).contains(&mu) {
            return Err(invalid(format!("need 0 <= mu <= L, got mu={mu}, L={lip}")));
        }
        if let Some(d) = g.dim() {
            if d != f.dim() {
                return Err(invalid(format!(
                    "f has dimension {} but g has dimension {d}",
                    f.dim()
                )));
            }
        }
        Ok(CompositeProblem {
            f,
            g,
            label: String::from("problem"),
            reference: None,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Attaches a reference optimum after confirming it is a fixed point of
    /// the step at `t = 1/L`.
    pub fn with_reference(mut self, x_star: Vector, phi_bar: f64) -> Result<Self> {
        self.check_dim(&x_star)?;
        let rec = pg_map(&self, &x_star, 1.0 / self.lip())?;
        let residual = rec.g_map.norm();
        if !(residual <= REFERENCE_TOLERANCE) {
            return Err(invalid(format!(
                "reference point is not stationary: |G(x*, 1/L)| = {residual:e}"
            )));
        }
        self.reference = Some(Reference { x_star, phi_bar });
        Ok(self)
    }

    pub fn reference(&self) -> Option<&Reference> {
        self.reference.as_ref()
    }

    pub(crate) fn require_reference(&self, what: &'static str) -> Result<&Reference> {
        self.reference
            .as_ref()
            .ok_or(Error::RequiresReference(what))
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    pub fn lip(&self) -> f64 {
        self.f.lip()
    }

    pub fn mu(&self) -> f64 {
        self.f.mu()
    }

    pub fn phi(&self, x: &Vector) -> f64 {
        let gx = self.g.value(x);
        if gx == f64::INFINITY {
            return f64::INFINITY;
        }
        self.f.value(x) + gx
    }

    /// Exact `d(0, dphi(x))`, when `g` supports it.
    pub fn subdiff_dist(&self, x: &Vector) -> Option<f64> {
        self.g.subgrad_dist(x, &self.f.gradient(x))
    }

    pub(crate) fn check_dim(&self, x: &Vector) -> Result<()> {
        if x.len() != self.dim() {
            return Err(invalid(format!(
                "point has dimension {} but problem has dimension {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(())
    }
}

/// One proximal gradient step and everything derived from it.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub x: Vector,
    pub t: f64,
    /// `grad f(x)`.
    pub grad: Vector,
    /// `G(x, t)`.
    pub g_map: Vector,
    /// `prox_{tg}(x - t grad f(x))`.
    pub x_plus: Vector,
    /// The subgradient `s+ in dg(x+)` with `x+ = x - t (grad f(x) + s+)`.
    pub s_plus: Vector,
}

fn validate_step(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid(format!(
            "step size must be positive and finite, got {t}"
        )));
    }
    Ok(())
}

fn validate_finite(v: &Vector, what: &str) -> Result<()> {
    if v.iter().any(|c| !c.is_finite()) {
        return Err(invalid(format!("{what} has non-finite entries")));
    }
    Ok(())
}

pub fn prox_apply(g: &dyn ProxOracle, v: &Vector, t: f64) -> Result<Vector> {
    validate_step(t)?;
    validate_finite(v, "prox argument")?;
    if let Some(d) = g.dim() {
        if d != v.len() {
            return Err(invalid(format!(
                "prox argument has dimension {} but g has dimension {d}",
                v.len()
            )));
        }
    }
    Ok(g.prox(v, t))
}

pub fn pg_map(p: &CompositeProblem, x: &Vector, t: f64) -> Result<StepRecord> {
    validate_step(t)?;
    p.check_dim(x)?;
    validate_finite(x, "point")?;
    let grad = p.f.gradient(x);
    let forward = x - &grad * t;
    if p.g.is_zero() {
        // Identity prox: G is the gradient itself, without the cancellation
        // in (x - x+)/t.
        let s_plus = Vector::zeros(x.len());
        return Ok(StepRecord {
            x: x.clone(),
            t,
            g_map: grad.clone(),
            grad,
            x_plus: forward,
            s_plus,
        });
    }
    // x+ is kept as the prox output itself so it stays in dom g exactly
    // (boundary points of a box stay on the boundary).
    let x_plus = prox_apply(p.g.as_ref(), &forward, t)?;
    let g_map = (x - &x_plus) / t;
    let s_plus = &g_map - &grad;
    Ok(StepRecord {
        x: x.clone(),
        t,
        grad,
        g_map,
        x_plus,
        s_plus,
    })
}

/// Recomputes `s+ = (x - x+)/t - grad f(x)` from a step record.
pub fn recover_subgradient(rec: &StepRecord, f: &dyn SmoothOracle) -> Result<Vector> {
    validate_step(rec.t)?;
    validate_finite(&rec.x, "point")?;
    validate_finite(&rec.x_plus, "updated point")?;
    let s = (&rec.x - &rec.x_plus) / rec.t - f.gradient(&rec.x);
    validate_finite(&s, "subgradient")?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{QuadraticSmooth, StructuredNonsmooth};
    use crate::oracles::grid_prox_1d;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_row_slice(xs)
    }

    fn unit_quadratic(center: f64) -> Arc<dyn SmoothOracle> {
        Arc::new(QuadraticSmooth::scalar(1.0, center))
    }

    #[test]
    fn prox_of_zero_is_identity() {
        let out = prox_apply(&StructuredNonsmooth::Zero, &v(&[3.0, -1.0]), 0.5).unwrap();
        assert_eq!(out, v(&[3.0, -1.0]));
    }

    #[test]
    fn prox_l1_matches_grid_oracle() {
        // Frozen from the 1-D grid oracle: argmin |y| + (y - 3)^2 / 2 = 2.
        let grid = grid_prox_1d(|y| y.abs(), 3.0, 1.0, -10.0, 10.0).unwrap();
        assert!((grid - 2.0).abs() < 1e-9);
        let out = prox_apply(&StructuredNonsmooth::L1 { lambda: 1.0 }, &v(&[3.0]), 1.0).unwrap();
        assert_eq!(out, v(&[2.0]));
    }

    #[test]
    fn prox_orthant_projection() {
        for t in [1e-3, 1.0, 50.0] {
            let out = prox_apply(&StructuredNonsmooth::Nonneg, &v(&[-2.0, 5.0]), t).unwrap();
            assert_eq!(out, v(&[0.0, 5.0]));
        }
    }

    #[test]
    fn prox_rejects_bad_arguments() {
        let g = StructuredNonsmooth::Zero;
        assert!(matches!(
            prox_apply(&g, &v(&[1.0]), 0.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            prox_apply(&g, &v(&[1.0]), -1.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            prox_apply(&g, &v(&[f64::NAN]), 1.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            prox_apply(&g, &v(&[f64::INFINITY]), 1.0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn pg_map_unit_quadratic_exact_step() {
        let p = CompositeProblem::new(unit_quadratic(0.0), Arc::new(StructuredNonsmooth::Zero))
            .unwrap();
        let rec = pg_map(&p, &v(&[5.0]), 1.0).unwrap();
        assert_eq!(rec.g_map, v(&[5.0]));
        assert_eq!(rec.x_plus, v(&[0.0]));
        assert_eq!(rec.s_plus, v(&[0.0]));
    }

    #[test]
    fn pg_map_projection_on_boundary() {
        let p = CompositeProblem::new(unit_quadratic(0.0), Arc::new(StructuredNonsmooth::Nonneg))
            .unwrap();
        let rec = pg_map(&p, &v(&[-1.0]), 1.0).unwrap();
        assert_eq!(rec.x_plus, v(&[0.0]));
        assert_eq!(rec.g_map, v(&[-1.0]));
        assert_eq!(rec.s_plus, v(&[0.0]));
    }

    #[test]
    fn pg_map_lasso_1d() {
        let p = CompositeProblem::new(
            unit_quadratic(2.0),
            Arc::new(StructuredNonsmooth::L1 { lambda: 1.0 }),
        )
        .unwrap();
        let rec = pg_map(&p, &v(&[0.0]), 1.0).unwrap();
        // prox of |.| at 2 with t = 1, confirmed by the grid oracle.
        let grid = grid_prox_1d(|y| y.abs(), 2.0, 1.0, -10.0, 10.0).unwrap();
        assert!((grid - 1.0).abs() < 1e-9);
        assert_eq!(rec.x_plus, v(&[1.0]));
        assert_eq!(rec.g_map, v(&[-1.0]));
        assert_eq!(rec.s_plus, v(&[1.0]));
        // dg(1) = {1}
        let s = recover_subgradient(&rec, p.f.as_ref()).unwrap();
        assert_eq!(s, v(&[1.0]));
    }

    #[test]
    fn recover_subgradient_cases() {
        let p = CompositeProblem::new(unit_quadratic(0.7), Arc::new(StructuredNonsmooth::Zero))
            .unwrap();
        for (x, t) in [(3.0, 0.25), (-1.5, 1.0), (0.1, 0.9)] {
            let rec = pg_map(&p, &v(&[x]), t).unwrap();
            let s = recover_subgradient(&rec, p.f.as_ref()).unwrap();
            assert!(s[0].abs() < 1e-15, "s = {s}");
        }
        // x = x+ gives s+ = -grad f(x)
        let rec = StepRecord {
            x: v(&[2.0]),
            t: 0.5,
            grad: v(&[1.3]),
            g_map: v(&[0.0]),
            x_plus: v(&[2.0]),
            s_plus: v(&[-1.3]),
        };
        let s = recover_subgradient(&rec, p.f.as_ref()).unwrap();
        assert_eq!(s, -p.f.gradient(&v(&[2.0])));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let g = StructuredNonsmooth::Box {
            lo: v(&[0.0, 0.0]),
            hi: v(&[1.0, 1.0]),
        };
        assert!(CompositeProblem::new(unit_quadratic(0.0), Arc::new(g)).is_err());
    }

    #[test]
    fn reference_must_be_stationary() {
        let p = CompositeProblem::new(
            unit_quadratic(2.0),
            Arc::new(StructuredNonsmooth::L1 { lambda: 1.0 }),
        )
        .unwrap();
        assert!(p.clone().with_reference(v(&[0.0]), 2.0).is_err());
        let p = p.with_reference(v(&[1.0]), 1.5).unwrap();
        assert_eq!(p.reference().unwrap().phi_bar, 1.5);
    }
}
