use super::{labelled, scalar, CheckReport, Tally};
use crate::error::{invalid, Result};
use crate::problem::{CompositeProblem, Vector};
use crate::solvers::{Schedule, SolverKind, Trace};
use crate::tolerance::Tolerance;

/// Per-step increase allowed for the PGD potential.
const MONOTONE_TOL: Tolerance = Tolerance::absolute(1e-10);

fn check_pgd_trace(trace: &Trace, p: &CompositeProblem, eta: f64) -> Result<()> {
    if trace.solver != SolverKind::Pgd {
        return Err(invalid(format!(
            "expected a pgd trace, got {}",
            trace.solver.name()
        )));
    }
    if trace.eta != Some(eta) {
        return Err(invalid(format!(
            "trace was run with eta = {:?}, not {eta}",
            trace.eta
        )));
    }
    if trace.lip != p.lip() || trace.dim != p.dim() {
        return Err(invalid("trace does not belong to this problem"));
    }
    Ok(())
}

/// `C_k = (eta/L) k |G(x^k, eta/L)|^2 + phi(x^k) - phi_bar`.
pub fn pgd_potential(trace: &Trace, p: &CompositeProblem, eta: f64) -> Result<Vec<f64>> {
    check_pgd_trace(trace, p, eta)?;
    let phi_bar = p.require_reference("pgd potential")?.phi_bar;
    let t = eta / p.lip();
    Ok(trace
        .records
        .iter()
        .map(|r| t * r.k as f64 * r.map_norm * r.map_norm + (r.phi_x - phi_bar))
        .collect())
}

/// Gradient-descent potential `C_k = (k/L)|grad f(x^k)|^2 + f(x^k) - f*`,
/// i.e. the PGD potential with `g = 0` and `eta = 1`.
pub fn gd_potential(trace: &Trace, p: &CompositeProblem) -> Result<Vec<f64>> {
    if !p.g.is_zero() {
        return Err(invalid("the gradient-descent potential needs g = 0"));
    }
    pgd_potential(trace, p, 1.0)
}

/// Verifies that the PGD potential never increases, together with the
/// squared-norm rate `(eta k / L)|G(x^k)|^2 <= phi(x^0) - phi_bar` it yields.
/// The unsquared form `|G(x^k)| <= L(phi(x^0) - phi_bar)/(eta k)` is
/// reported as informational.
pub fn check_pgd_potential(trace: &Trace, p: &CompositeProblem, eta: f64) -> Result<CheckReport> {
    let c = pgd_potential(trace, p, eta)?;
    let phi_bar = p.require_reference("pgd potential")?.phi_bar;
    let lip = p.lip();
    let gap0 = trace.records[0].phi_x - phi_bar;
    let mut tally = Tally::new("pgd-potential");
    for (i, r) in trace.records.iter().enumerate() {
        tally.sample();
        let k = r.k as f64;
        tally.le(
            "squared-rate",
            eta * k / lip * r.map_norm * r.map_norm,
            gap0,
            || vec![scalar("k", k), labelled("x", &r.x)],
        );
        if r.k >= 1 {
            tally.info_le("stated-rate", r.map_norm, lip * gap0 / (eta * k));
        }
        if i + 1 < c.len() {
            let nxt = &trace.records[i + 1];
            tally.le_with("monotone", c[i + 1], c[i], MONOTONE_TOL, || {
                vec![
                    scalar("k", k),
                    labelled("x", &r.x),
                    labelled("x_next", &nxt.x),
                ]
            });
            tally.le("norm-monotone", nxt.map_norm, r.map_norm, || {
                vec![scalar("k", k), labelled("x", &r.x)]
            });
            tally.le("descent", nxt.phi_x, r.phi_x, || {
                vec![scalar("k", k), labelled("x", &r.x)]
            });
        }
    }
    Ok(tally.finish())
}

fn check_accelerated_trace(trace: &Trace, p: &CompositeProblem, sched: &Schedule) -> Result<()> {
    match trace.solver {
        SolverKind::Apg => {}
        SolverKind::Fgm => {
            if !p.g.is_zero() {
                return Err(invalid("an fgm trace only matches a problem with g = 0"));
            }
        }
        SolverKind::Pgd => return Err(invalid("expected an accelerated trace, got pgd")),
    }
    if trace.lip != p.lip() || trace.dim != p.dim() || sched.lip() != p.lip() {
        return Err(invalid(
            "trace, schedule and problem disagree on L or dimension",
        ));
    }
    for r in &trace.records {
        let w = r
            .weights
            .ok_or_else(|| invalid("accelerated trace is missing schedule weights"))?;
        if w.a != sched.a(r.k) || w.b != sched.b(r.k) || w.big_b != sched.big_b(r.k) {
            return Err(invalid(format!(
                "schedule does not match the trace at k = {}",
                r.k
            )));
        }
        if r.y.is_none() || r.v.is_none() || r.phi_y.is_none() {
            return Err(invalid("accelerated trace is missing y, v or phi(y)"));
        }
    }
    Ok(())
}

/// `C_k = sum_{i<=k} a_i |G(x^i)|^2 + B_k (phi(y^k) - phi_bar)`.
pub fn apg_potential(trace: &Trace, p: &CompositeProblem, sched: &Schedule) -> Result<Vec<f64>> {
    check_accelerated_trace(trace, p, sched)?;
    let phi_bar = p.require_reference("accelerated potential")?.phi_bar;
    let mut sum = 0.0;
    Ok(trace
        .records
        .iter()
        .map(|r| {
            sum += sched.a(r.k) * r.map_norm * r.map_norm;
            sum + sched.big_b(r.k) * (r.phi_y.unwrap_or(f64::NAN) - phi_bar)
        })
        .collect())
}

/// `a_0 |G(x^0)|^2 + b_0 (phi(y^0) - phi_bar) + (L/2)|x* - v^0|^2`.
pub fn c_tilde(trace: &Trace, p: &CompositeProblem, sched: &Schedule) -> Result<f64> {
    check_accelerated_trace(trace, p, sched)?;
    let reference = p.require_reference("accelerated potential")?;
    let r0 = &trace.records[0];
    let v0 = r0.v.as_ref().expect("checked above");
    Ok(sched.a(0) * r0.map_norm * r0.map_norm
        + sched.b(0) * (r0.phi_y.expect("checked above") - reference.phi_bar)
        + p.lip() / 2.0 * (&reference.x_star - v0).norm_squared())
}

/// `v^{k+1}` for every record, extending one step past the last one.
fn v_next(trace: &Trace, sched: &Schedule) -> Vec<Vector> {
    trace
        .records
        .iter()
        .map(|r| {
            let v = r.v.as_ref().expect("accelerated record has v");
            v - &r.map * (sched.b(r.k) / trace.lip)
        })
        .collect()
}

/// Per-step potential bound for `k >= 1`:
/// `C_k - C_{k-1} <= (L/2)(|x* - v^k|^2 - |x* - v^{k+1}|^2)`, its telescoped
/// consequence `C_k <= C~`, the combination identity
/// `B_k x^k - B_{k-1} y^{k-1} - b_k v^k = 0`, and the schedule condition.
pub fn check_apg_potential(
    trace: &Trace,
    p: &CompositeProblem,
    sched: &Schedule,
) -> Result<CheckReport> {
    let c = apg_potential(trace, p, sched)?;
    let ct = c_tilde(trace, p, sched)?;
    let x_star = &p.require_reference("accelerated potential")?.x_star;
    let half_l = p.lip() / 2.0;
    let vn = v_next(trace, sched);
    let mut tally = Tally::new("apg-potential");
    for (i, r) in trace.records.iter().enumerate() {
        tally.sample();
        let k = r.k as f64;
        let inputs = || vec![scalar("k", k), labelled("x", &r.x)];
        tally.le("bounded-by-c-tilde", c[i], ct, inputs);
        if i == 0 {
            continue;
        }
        let prev = &trace.records[i - 1];
        let v = r.v.as_ref().expect("checked");
        let dv_now = (x_star - v).norm_squared();
        let dv_next = (x_star - &vn[i]).norm_squared();
        tally.le(
            "lemma",
            c[i] + half_l * dv_next,
            c[i - 1] + half_l * dv_now,
            inputs,
        );

        let (w, wp) = (sched.big_b(r.k), sched.big_b(prev.k));
        let b = sched.b(r.k);
        let y_prev = prev.y.as_ref().expect("checked");
        let combo = (&r.x * w - y_prev * wp - v * b).norm();
        let scale = w * r.x.norm() + wp * y_prev.norm() + b * v.norm();
        tally.le("combination-identity", combo, 1e-12 * scale, inputs);

        let cap = (w - b * b) / (2.0 * p.lip());
        tally.le("schedule-condition", sched.a(r.k), cap, inputs);
    }
    Ok(tally.finish())
}

/// Rate bounds along a trace.
///
/// For accelerated traces (schedule required): `phi(y^k) - phi_bar <= C~/B_k`,
/// `sum a_i |G(x^i)|^2 <= C~`, and `min_{i<=k} |G(x^i)|^2 <= C~ / sum a_i`;
/// with the default schedule also the closed forms `8C~/((k+1)(k+2))` and
/// `192 L C~ / ((k+1)(k+2)(2k+3))`.
///
/// For gradient-descent traces (`pgd` with `g = 0`, `eta = 1`):
/// `|grad f(x^k)|^2 <= 2L (f(x^0) - f*) / (2k + 1)`.
pub fn rate_bounds(
    trace: &Trace,
    p: &CompositeProblem,
    sched: Option<&Schedule>,
) -> Result<CheckReport> {
    if trace.solver == SolverKind::Pgd {
        return gd_rate_bound(trace, p);
    }
    let sched = sched.ok_or_else(|| invalid("accelerated rate bounds need the schedule"))?;
    let c = apg_potential(trace, p, sched)?;
    let ct = c_tilde(trace, p, sched)?;
    let phi_bar = p.require_reference("rate bounds")?.phi_bar;
    let lip = p.lip();
    let mut tally = Tally::new("rate-bounds");
    let mut weighted = 0.0;
    let mut a_sum = 0.0;
    let mut min_sq = f64::INFINITY;
    for (i, r) in trace.records.iter().enumerate() {
        tally.sample();
        let k = r.k as f64;
        let inputs = || vec![scalar("k", k), labelled("x", &r.x)];
        let sq = r.map_norm * r.map_norm;
        let a = sched.a(r.k);
        weighted += a * sq;
        a_sum += a;
        min_sq = min_sq.min(sq);
        let gap = r.phi_y.expect("checked") - phi_bar;
        let _ = c[i];
        tally.le("objvalue", gap, ct / sched.big_b(r.k), inputs);
        tally.le("gradnorm", weighted, ct, inputs);
        tally.le("min-norm", min_sq, ct / a_sum, inputs);
        if sched.is_default() {
            tally.le("eq1", gap, 8.0 * ct / ((k + 1.0) * (k + 2.0)), inputs);
            tally.le(
                "eq2",
                min_sq,
                192.0 * lip * ct / ((k + 1.0) * (k + 2.0) * (2.0 * k + 3.0)),
                inputs,
            );
            tally.info_le(
                "eq2-stated",
                min_sq,
                192.0 * lip * ct / ((k + 1.0) * (k + 2.0) * (k + 3.0)),
            );
        }
    }
    Ok(tally.finish())
}

fn gd_rate_bound(trace: &Trace, p: &CompositeProblem) -> Result<CheckReport> {
    if !p.g.is_zero() || trace.eta != Some(1.0) {
        return Err(invalid(
            "the gradient-descent bound needs g = 0 and eta = 1",
        ));
    }
    if trace.lip != p.lip() || trace.dim != p.dim() {
        return Err(invalid("trace does not belong to this problem"));
    }
    let f_star = p.require_reference("gradient-descent bound")?.phi_bar;
    let lip = p.lip();
    let gap0 = trace.records[0].phi_x - f_star;
    let mut tally = Tally::new("rate-bounds");
    for r in &trace.records {
        tally.sample();
        let k = r.k as f64;
        tally.le(
            "gd-bound",
            r.map_norm * r.map_norm,
            2.0 * lip * gap0 / (2.0 * k + 1.0),
            || vec![scalar("k", k), labelled("x", &r.x)],
        );
    }
    Ok(tally.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{make_quadratic, QuadraticSmooth, StructuredNonsmooth};
    use crate::solvers::{apg_run, default_schedule, pgd_run};
    use std::sync::Arc;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_row_slice(xs)
    }

    fn lasso_1d() -> CompositeProblem {
        CompositeProblem::new(
            Arc::new(QuadraticSmooth::scalar(1.0, 2.0)),
            Arc::new(StructuredNonsmooth::L1 { lambda: 1.0 }),
        )
        .unwrap()
        .with_reference(v(&[1.0]), 1.5)
        .unwrap()
    }

    #[test]
    fn pgd_potential_starts_at_gap() {
        let p = lasso_1d();
        let tr = pgd_run(&p, &v(&[-3.0]), 0.5, 20).unwrap();
        let c = pgd_potential(&tr, &p, 0.5).unwrap();
        assert_eq!(c[0], p.phi(&v(&[-3.0])) - 1.5);
        for (ci, r) in c.iter().zip(&tr.records) {
            assert_eq!(Some(*ci), r.potential);
        }
        assert!(check_pgd_potential(&tr, &p, 0.5).unwrap().passed);
    }

    #[test]
    fn pgd_potential_vanishes_after_one_step_when_mu_equals_l() {
        let q = QuadraticSmooth::scalar(2.0, 0.7);
        let p = CompositeProblem::new(Arc::new(q), Arc::new(StructuredNonsmooth::Zero))
            .unwrap()
            .with_reference(v(&[0.7]), 0.0)
            .unwrap();
        let tr = pgd_run(&p, &v(&[4.0]), 1.0, 3).unwrap();
        let c = pgd_potential(&tr, &p, 1.0).unwrap();
        assert!(c[1].abs() < 1e-24);
    }

    #[test]
    fn pgd_potential_needs_reference_and_matching_eta() {
        let p = CompositeProblem::new(
            Arc::new(QuadraticSmooth::scalar(1.0, 2.0)),
            Arc::new(StructuredNonsmooth::Zero),
        )
        .unwrap();
        let tr = pgd_run(&p, &v(&[0.0]), 1.0, 5).unwrap();
        assert!(matches!(
            pgd_potential(&tr, &p, 1.0),
            Err(crate::Error::RequiresReference(_))
        ));
        let p = lasso_1d();
        let tr = pgd_run(&p, &v(&[0.0]), 1.0, 5).unwrap();
        assert!(pgd_potential(&tr, &p, 0.5).is_err());
    }

    #[test]
    fn pgd_potential_detects_halved_lip() {
        // True curvature 2, declared 1: the step 1/L overshoots to -x.
        let q = QuadraticSmooth::scalar(2.0, 0.0).with_declared(0.0, 1.0);
        let p = CompositeProblem::new(Arc::new(q), Arc::new(StructuredNonsmooth::Zero))
            .unwrap()
            .with_reference(v(&[0.0]), 0.0);
        // x* = 0 is still a fixed point
        let p = p.unwrap();
        let tr = pgd_run(&p, &v(&[1.0]), 1.0, 5).unwrap();
        let r = check_pgd_potential(&tr, &p, 1.0).unwrap();
        assert!(!r.passed);
        assert!(!r.witnesses.is_empty());
    }

    #[test]
    fn apg_potential_frozen_at_optimum() {
        let p = lasso_1d();
        let s = default_schedule(1.0);
        let tr = apg_run(&p, &v(&[1.0]), &s, 10).unwrap();
        let c = apg_potential(&tr, &p, &s).unwrap();
        assert!(c.iter().all(|&ci| ci == 0.0));
        let r = check_apg_potential(&tr, &p, &s).unwrap();
        assert!(r.passed);
        assert_eq!(r.link("lemma").unwrap().worst_margin, 0.0);
    }

    #[test]
    fn apg_lasso_1d_rates() {
        let p = lasso_1d();
        let s = default_schedule(1.0);
        let tr = apg_run(&p, &v(&[0.0]), &s, 50).unwrap();
        let r = check_apg_potential(&tr, &p, &s).unwrap();
        assert!(r.passed, "{r:?}");
        let r = rate_bounds(&tr, &p, Some(&s)).unwrap();
        assert!(r.passed, "{r:?}");
        let ct = c_tilde(&tr, &p, &s).unwrap();
        let last = tr.records.last().unwrap();
        assert!(last.phi_y.unwrap() - 1.5 <= 8.0 * ct / (51.0 * 52.0));
    }

    #[test]
    fn mismatched_schedule_rejected() {
        let p = lasso_1d();
        let s = default_schedule(1.0);
        let tr = apg_run(&p, &v(&[0.0]), &s, 5).unwrap();
        let other = crate::solvers::Schedule::polynomial(1.0, 0.25, 0.01).unwrap();
        assert!(rate_bounds(&tr, &p, Some(&other)).is_err());
        assert!(rate_bounds(&tr, &p, None).is_err());
    }

    #[test]
    fn gd_bound_on_quadratic() {
        let q = make_quadratic(4, 0.1, 5.0, 8).unwrap();
        let xs = q.solve_stationary().unwrap();
        let p = CompositeProblem::new(Arc::new(q), Arc::new(StructuredNonsmooth::Zero)).unwrap();
        let fs = p.phi(&xs);
        let p = p.with_reference(xs, fs).unwrap();
        let tr = pgd_run(&p, &Vector::zeros(4), 1.0, 200).unwrap();
        assert!(rate_bounds(&tr, &p, None).unwrap().passed);
        let tr = pgd_run(&p, &Vector::zeros(4), 0.5, 20).unwrap();
        assert!(rate_bounds(&tr, &p, None).is_err());
    }
}
