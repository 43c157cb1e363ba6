use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::tolerance::Tolerance;

type Seq = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

/// The scalar sequences `(a_k, b_k, B_k)` driving the accelerated scheme
/// and its potential.
#[derive(Clone)]
pub struct Schedule {
    lip: f64,
    label: String,
    a: Seq,
    b: Seq,
    big_b: Seq,
}

impl fmt::Debug for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Schedule")
            .field("label", &self.label)
            .field("lip", &self.lip)
            .finish()
    }
}

pub const DEFAULT_LABEL: &str = "default";

impl Schedule {
    pub fn from_fns(
        lip: f64,
        label: impl Into<String>,
        a: impl Fn(usize) -> f64 + Send + Sync + 'static,
        b: impl Fn(usize) -> f64 + Send + Sync + 'static,
        big_b: impl Fn(usize) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Schedule {
            lip,
            label: label.into(),
            a: Arc::new(a),
            b: Arc::new(b),
            big_b: Arc::new(big_b),
        }
    }

    /// `b_k = beta (k+1)`, `B_k = beta (k+1)(k+2) / 2`, `a_k = alpha (k+1)^2 / L`.
    ///
    /// `beta = 1/4`, `alpha = 1/32` reproduces [`default_schedule`].
    pub fn polynomial(lip: f64, beta: f64, alpha: f64) -> Result<Self> {
        if !(lip > 0.0) || !(beta > 0.0) || !(alpha >= 0.0) {
            return Err(invalid(format!(
                "polynomial schedule needs L > 0, beta > 0, alpha >= 0 (got {lip}, {beta}, {alpha})"
            )));
        }
        let label = if beta == 0.25 && alpha == 1.0 / 32.0 {
            DEFAULT_LABEL.to_string()
        } else {
            format!("poly(beta={beta},alpha={alpha})")
        };
        Ok(Schedule::from_fns(
            lip,
            label,
            move |k| alpha * ((k + 1) * (k + 1)) as f64 / lip,
            move |k| beta * (k + 1) as f64,
            move |k| beta * ((k + 1) * (k + 2)) as f64 / 2.0,
        ))
    }

    pub fn lip(&self) -> f64 {
        self.lip
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_default(&self) -> bool {
        self.label == DEFAULT_LABEL
    }

    pub fn a(&self, k: usize) -> f64 {
        (self.a)(k)
    }

    pub fn b(&self, k: usize) -> f64 {
        (self.b)(k)
    }

    pub fn big_b(&self, k: usize) -> f64 {
        (self.big_b)(k)
    }

    /// `sum_{i <= k} a_i`.
    pub fn a_sum(&self, k: usize) -> f64 {
        (0..=k).map(|i| self.a(i)).sum()
    }

    /// Checks the sequence invariants for `k = 0..=k_max`, including the
    /// condition `a_k <= (B_k - b_k^2) / (2L)` for `k >= 1`.
    pub fn validate(&self, k_max: usize) -> Result<()> {
        let tol = Tolerance::STANDARD;
        let (b0, bb0) = (self.b(0), self.big_b(0));
        if !(bb0 > 0.0) || !(b0 > 0.0) {
            return Err(invalid("schedule needs b_0 = B_0 > 0"));
        }
        if !tol.holds(b0, bb0) || !tol.holds(bb0, b0) {
            return Err(invalid(format!("schedule has b_0 = {b0} != B_0 = {bb0}")));
        }
        if !(self.a(0) >= 0.0) {
            return Err(invalid("schedule has a_0 < 0"));
        }
        for k in 1..=k_max {
            let (a, b, bb, prev) = (self.a(k), self.b(k), self.big_b(k), self.big_b(k - 1));
            if !(bb > prev) {
                return Err(invalid(format!("B is not strictly increasing at k = {k}")));
            }
            let diff = bb - prev;
            if !tol.holds(b, diff) || !tol.holds(diff, b) {
                return Err(invalid(format!(
                    "b_{k} = {b} but B_{k} - B_{} = {diff}",
                    k - 1
                )));
            }
            if !(a >= 0.0) {
                return Err(invalid(format!("a_{k} < 0")));
            }
            let cap = (bb - b * b) / (2.0 * self.lip);
            if !tol.holds(cap, a) {
                return Err(invalid(format!(
                    "a_{k} = {a} exceeds (B_k - b_k^2)/(2L) = {cap}"
                )));
            }
        }
        Ok(())
    }
}

/// `b_k = (k+1)/4`, `B_k = (k+1)(k+2)/8`, `a_k = (k+1)^2 / (32 L)`; the
/// same formula is used for `a_0`.
pub fn default_schedule(lip: f64) -> Schedule {
    Schedule::polynomial(lip, 0.25, 1.0 / 32.0).expect("default schedule needs L > 0")
}
