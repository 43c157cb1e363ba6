//! Proximal gradient descent, the smooth fast gradient method, and the
//! accelerated proximal scheme. Every run returns a full [`Trace`].

mod schedule;
mod trace;

pub use schedule::{default_schedule, Schedule, DEFAULT_LABEL};
pub use trace::{IterRecord, SolverKind, Trace, Weights};

use std::time::Instant;

use crate::error::{invalid, Result};
use crate::problem::{pg_map, CompositeProblem, SmoothOracle, Vector};

/// Optional early exit once the mapping norm drops to `stop_tol`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunOptions {
    pub stop_tol: Option<f64>,
}

impl RunOptions {
    fn should_stop(&self, norm: f64) -> bool {
        matches!(self.stop_tol, Some(tol) if norm <= tol)
    }
}

fn check_start(dim: usize, x0: &Vector, k_max: usize) -> Result<()> {
    if k_max < 1 {
        return Err(invalid("iteration count must be at least 1"));
    }
    if x0.len() != dim {
        return Err(invalid(format!(
            "start point has dimension {} but problem has dimension {dim}",
            x0.len()
        )));
    }
    if x0.iter().any(|c| !c.is_finite()) {
        return Err(invalid("start point has non-finite entries"));
    }
    Ok(())
}

pub fn pgd_run(p: &CompositeProblem, x0: &Vector, eta: f64, k_max: usize) -> Result<Trace> {
    pgd_run_with(p, x0, eta, k_max, RunOptions::default())
}

/// `x^{k+1} = x^k - (eta/L) G(x^k, eta/L)` for `k = 0..K-1`; records `k = 0..=K`.
pub fn pgd_run_with(
    p: &CompositeProblem,
    x0: &Vector,
    eta: f64,
    k_max: usize,
    opts: RunOptions,
) -> Result<Trace> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(invalid(format!("eta must lie in (0, 1], got {eta}")));
    }
    check_start(p.dim(), x0, k_max)?;
    let t = eta / p.lip();
    let phi_bar = p.reference().map(|r| r.phi_bar);
    let start = Instant::now();
    let mut records = Vec::with_capacity(k_max + 1);
    let mut x = x0.clone();
    for k in 0..=k_max {
        let rec = pg_map(p, &x, t)?;
        let norm = rec.g_map.norm();
        let phi_x = p.phi(&x);
        let potential = phi_bar.map(|pb| t * k as f64 * norm * norm + (phi_x - pb));
        records.push(IterRecord {
            k,
            x: x.clone(),
            y: None,
            v: None,
            map: rec.g_map,
            map_norm: norm,
            phi_x,
            phi_y: None,
            weights: None,
            potential,
            elapsed_s: start.elapsed().as_secs_f64(),
        });
        if k == k_max || opts.should_stop(norm) {
            break;
        }
        x = rec.x_plus;
    }
    Ok(Trace {
        solver: SolverKind::Pgd,
        problem: p.label.clone(),
        dim: p.dim(),
        lip: p.lip(),
        mu: p.mu(),
        step: t,
        eta: Some(eta),
        schedule: None,
        records,
    })
}

fn weights(sched: &Schedule, k: usize) -> Weights {
    Weights {
        a: sched.a(k),
        b: sched.b(k),
        big_b: sched.big_b(k),
    }
}

fn check_schedule(sched: &Schedule, lip: f64, k_max: usize) -> Result<()> {
    if sched.lip() != lip {
        return Err(invalid(format!(
            "schedule built for L = {} but the function has L = {lip}",
            sched.lip()
        )));
    }
    sched.validate(k_max + 1)
}

pub fn fgm_run(f: &dyn SmoothOracle, x0: &Vector, sched: &Schedule, k_max: usize) -> Result<Trace> {
    fgm_run_with(f, x0, sched, k_max, RunOptions::default())
}

/// Fast gradient method with `v^0 = x^0`:
/// `v^k = v^{k-1} - (b_{k-1}/L) grad f(x^{k-1})`,
/// `x^k = (B_{k-1}/B_k)(x^{k-1} - grad f(x^{k-1})/L) + (b_k/B_k) v^k`.
pub fn fgm_run_with(
    f: &dyn SmoothOracle,
    x0: &Vector,
    sched: &Schedule,
    k_max: usize,
    opts: RunOptions,
) -> Result<Trace> {
    check_start(f.dim(), x0, k_max)?;
    let lip = f.lip();
    check_schedule(sched, lip, k_max)?;
    let t = 1.0 / lip;
    let start = Instant::now();
    let mut records = Vec::with_capacity(k_max + 1);
    let (mut x, mut v) = (x0.clone(), x0.clone());
    for k in 0..=k_max {
        let grad = f.gradient(&x);
        let y = &x - &grad * t;
        let norm = grad.norm();
        let w = weights(sched, k);
        records.push(IterRecord {
            k,
            x: x.clone(),
            y: Some(y.clone()),
            v: Some(v.clone()),
            map: grad.clone(),
            map_norm: norm,
            phi_x: f.value(&x),
            phi_y: Some(f.value(&y)),
            weights: Some(w),
            potential: None,
            elapsed_s: start.elapsed().as_secs_f64(),
        });
        if k == k_max || opts.should_stop(norm) {
            break;
        }
        let next = weights(sched, k + 1);
        v -= &grad * (w.b / lip);
        x = &y * (w.big_b / next.big_b) + &v * (next.b / next.big_b);
    }
    Ok(Trace {
        solver: SolverKind::Fgm,
        problem: String::from("smooth"),
        dim: f.dim(),
        lip,
        mu: f.mu(),
        step: t,
        eta: None,
        schedule: Some(sched.label().to_string()),
        records,
    })
}

pub fn apg_run(p: &CompositeProblem, x0: &Vector, sched: &Schedule, k_max: usize) -> Result<Trace> {
    apg_run_with(p, x0, sched, k_max, RunOptions::default())
}

/// Accelerated scheme with fixed `t = 1/L` and `v^0 = x^0`:
/// `y^{k-1} = x^{k-1} - G(x^{k-1})/L`,
/// `v^k = v^{k-1} - (b_{k-1}/L) G(x^{k-1})`,
/// `x^k = (B_{k-1}/B_k) y^{k-1} + (b_k/B_k) v^k`.
pub fn apg_run_with(
    p: &CompositeProblem,
    x0: &Vector,
    sched: &Schedule,
    k_max: usize,
    opts: RunOptions,
) -> Result<Trace> {
    check_start(p.dim(), x0, k_max)?;
    let lip = p.lip();
    check_schedule(sched, lip, k_max)?;
    let t = 1.0 / lip;
    let phi_bar = p.reference().map(|r| r.phi_bar);
    let start = Instant::now();
    let mut records = Vec::with_capacity(k_max + 1);
    let (mut x, mut v) = (x0.clone(), x0.clone());
    let mut weighted_sum = 0.0;
    for k in 0..=k_max {
        let rec = pg_map(p, &x, t)?;
        let norm = rec.g_map.norm();
        let w = weights(sched, k);
        let phi_y = p.phi(&rec.x_plus);
        weighted_sum += w.a * norm * norm;
        let potential = phi_bar.map(|pb| weighted_sum + w.big_b * (phi_y - pb));
        records.push(IterRecord {
            k,
            x: x.clone(),
            y: Some(rec.x_plus.clone()),
            v: Some(v.clone()),
            map: rec.g_map.clone(),
            map_norm: norm,
            phi_x: p.phi(&x),
            phi_y: Some(phi_y),
            weights: Some(w),
            potential,
            elapsed_s: start.elapsed().as_secs_f64(),
        });
        if k == k_max || opts.should_stop(norm) {
            break;
        }
        let next = weights(sched, k + 1);
        v -= &rec.g_map * (w.b / lip);
        x = &rec.x_plus * (w.big_b / next.big_b) + &v * (next.b / next.big_b);
    }
    Ok(Trace {
        solver: SolverKind::Apg,
        problem: p.label.clone(),
        dim: p.dim(),
        lip,
        mu: p.mu(),
        step: t,
        eta: None,
        schedule: Some(sched.label().to_string()),
        records,
    })
}
