use super::{labelled, scalar, CheckReport, Tally};
use crate::error::{invalid, Error, Result};
use crate::problem::{pg_map, prox_apply, CompositeProblem, ProxOracle, Vector};

/// Contraction factor of one PG step on the mapping norm:
/// `max(|1 - L t|, |1 - mu t|)`.
pub fn rho(mu: f64, lip: f64, t: f64) -> f64 {
    (1.0 - lip * t).abs().max((1.0 - mu * t).abs())
}

fn positive_step(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid(format!("step size must be positive, got {t}")));
    }
    Ok(())
}

/// Lower bound on the decrease from `y` to `y+ = y - t G(y, t)` measured
/// against an arbitrary `x`:
/// `phi(x) - phi(y+) >= t(1 - Lt/2)|G|^2 + <G, x - y> + (mu/2)|x - y|^2`.
/// At `t = 1/L` the `mu = 0` specialization is checked as well.
pub fn check_ovg(p: &CompositeProblem, x: &Vector, y: &Vector, t: f64) -> Result<CheckReport> {
    positive_step(t)?;
    p.check_dim(x)?;
    let (mu, lip) = (p.mu(), p.lip());
    let rec = pg_map(p, y, t)?;
    let g2 = rec.g_map.norm_squared();
    let dxy = x - y;
    let inner = rec.g_map.dot(&dxy);
    let phi_x = p.phi(x);
    let phi_plus = p.phi(&rec.x_plus);
    let inputs = || vec![labelled("x", x), labelled("y", y), scalar("t", t)];

    let mut tally = Tally::new("ovg");
    tally.sample();
    tally.ge(
        "ovg",
        phi_x,
        phi_plus + t * (1.0 - lip * t / 2.0) * g2 + inner + mu / 2.0 * dxy.norm_squared(),
        inputs,
    );
    if (t * lip - 1.0).abs() <= 4.0 * f64::EPSILON {
        tally.ge("ovgl", phi_x, phi_plus + g2 / (2.0 * lip) + inner, inputs);
    }
    Ok(tally.finish())
}

/// One PG step from `x` and the chain
/// `|G(x+,t)| <= d(0, dphi(x+)) <= rho(t)|G(x,t)| <= rho(t) d(0, dphi(x))`,
/// plus the sharper `|grad f(x+) + s+| <= rho(t)|G(x,t)|`.
///
/// The two distance links need an exact `subgrad_dist` on `g`; without it
/// they are reported as skipped.
pub fn check_norm_monotonicity(p: &CompositeProblem, x: &Vector, t: f64) -> Result<CheckReport> {
    positive_step(t)?;
    let r = rho(p.mu(), p.lip(), t);
    let rec = pg_map(p, x, t)?;
    let next = pg_map(p, &rec.x_plus, t)?;
    let gx = rec.g_map.norm();
    let g_next = next.g_map.norm();
    let residual = (&next.grad + &rec.s_plus).norm();
    let inputs = || vec![labelled("x", x), scalar("t", t)];

    let mut tally = Tally::new("norm-monotonicity");
    tally.sample();
    tally.le("mapping-contraction", g_next, r * gx, inputs);
    tally.le("residual-contraction", residual, r * gx, inputs);
    match p.subdiff_dist(&rec.x_plus) {
        Some(d_next) => {
            tally.le("ub-next", g_next, d_next, inputs);
            tally.le("dist-next", d_next, r * gx, inputs);
            tally.le("dist-below-residual", d_next, residual, inputs);
        }
        None => {
            for link in ["ub-next", "dist-next", "dist-below-residual"] {
                tally.skip(link, "no exact subdifferential distance for g");
            }
        }
    }
    match p.subdiff_dist(x) {
        Some(d_x) => {
            tally.le("ub-current", gx, d_x, inputs);
        }
        None => tally.skip("ub-current", "no exact subdifferential distance for g"),
    }
    Ok(tally.finish())
}

/// Guard used when `mu t = 1`: the step is then exact and `G(x+, t)` must vanish.
const SINGULAR_GUARD: f64 = 1e-8;

/// Refined one-step descent for `0 < t <= 1/L`:
/// `phi(x) >= phi(x+) + (t/2)|G(x,t)|^2 + t/(2(1 - mu t))|G(x+,t)|^2`,
/// its `mu = 0` and `g = 0` specializations, and the classical descent
/// lemmas it dominates.
pub fn check_refined_descent(p: &CompositeProblem, x: &Vector, t: f64) -> Result<CheckReport> {
    positive_step(t)?;
    let (mu, lip) = (p.mu(), p.lip());
    if t > 1.0 / lip {
        return Err(Error::OutOfHypothesis(format!(
            "refined descent needs t <= 1/L = {}, got {t}",
            1.0 / lip
        )));
    }
    let rec = pg_map(p, x, t)?;
    let next = pg_map(p, &rec.x_plus, t)?;
    let gx2 = rec.g_map.norm_squared();
    let gp2 = next.g_map.norm_squared();
    let phi_x = p.phi(x);
    let phi_plus = p.phi(&rec.x_plus);
    let inputs = || vec![labelled("x", x), scalar("t", t)];

    let mut tally = Tally::new("refined-descent");
    tally.sample();
    let denom = 1.0 - mu * t;
    let third = if denom.abs() <= 4.0 * f64::EPSILON {
        if gp2.sqrt() > SINGULAR_GUARD {
            tally.fail(
                "mu-t-guard",
                vec![
                    labelled("x", x),
                    scalar("t", t),
                    scalar("|G(x+)|", gp2.sqrt()),
                ],
            );
        }
        0.0
    } else {
        t / (2.0 * denom) * gp2
    };
    let sdp_rhs = phi_plus + t / 2.0 * gx2 + third;
    tally.ge("sdp", phi_x, sdp_rhs, inputs);
    // F_L contains every S_{mu,L}, so the mu = 0 form applies to all fixtures.
    tally.ge("dp1", phi_x, phi_plus + t / 2.0 * (gx2 + gp2), inputs);
    if p.g.is_zero() {
        let f = &p.f;
        let (g0, g1) = (f.gradient(x), f.gradient(&rec.x_plus));
        tally.ge(
            "dp2",
            f.value(x),
            f.value(&rec.x_plus) + t / 2.0 * (g0.norm_squared() + g1.norm_squared()),
            inputs,
        );
    }
    let compare1_rhs = phi_plus + t / 2.0 * gx2;
    let compare2_rhs = phi_plus + lip / 2.0 * (&rec.x_plus - x).norm_squared();
    tally.ge("compare1", phi_x, compare1_rhs, inputs);
    tally.ge("compare2", phi_x, compare2_rhs, inputs);
    // margin(sdp) <= margin(classical) is the same as comparing right-hand sides.
    tally.le("dominates-compare1", compare1_rhs, sdp_rhs, inputs);
    tally.le("dominates-compare2", compare2_rhs, sdp_rhs, inputs);
    Ok(tally.finish())
}

/// `|G(x, t)| <= d(0, dphi(x))`.
pub fn check_mapping_bound(p: &CompositeProblem, x: &Vector, t: f64) -> Result<CheckReport> {
    positive_step(t)?;
    let rec = pg_map(p, x, t)?;
    let mut tally = Tally::new("mapping-bound");
    tally.sample();
    match p.subdiff_dist(x) {
        Some(d) => {
            tally.le("ub", rec.g_map.norm(), d, || {
                vec![labelled("x", x), scalar("t", t)]
            });
        }
        None => tally.skip("ub", "no exact subdifferential distance for g"),
    }
    Ok(tally.finish())
}

/// Contract checks for `z = prox_{tg}(v)`: `(v - z)/t` is a subgradient of
/// `g` at `z` (tested against every probe), `z` beats every probe on the
/// prox objective, and the map is nonexpansive against `other`.
pub fn check_prox(
    g: &dyn ProxOracle,
    v: &Vector,
    t: f64,
    probes: &[Vector],
    other: &Vector,
) -> Result<CheckReport> {
    let z = prox_apply(g, v, t)?;
    let z_other = prox_apply(g, other, t)?;
    let s = (v - &z) / t;
    let gz = g.value(&z);
    let obj = |u: &Vector| {
        let gu = g.value(u);
        if gu == f64::INFINITY {
            f64::INFINITY
        } else {
            gu + (u - v).norm_squared() / (2.0 * t)
        }
    };
    let obj_z = obj(&z);
    let mut tally = Tally::new("prox");
    tally.sample();
    if !gz.is_finite() {
        tally.fail("in-domain", vec![labelled("v", v), scalar("t", t)]);
    }
    for u in probes {
        let inputs = || vec![labelled("v", v), labelled("u", u), scalar("t", t)];
        tally.ge("subgradient", g.value(u), gz + s.dot(&(u - &z)), inputs);
        tally.ge("minimizer", obj(u), obj_z, inputs);
    }
    tally.le(
        "nonexpansive",
        (&z - &z_other).norm(),
        (v - other).norm(),
        || vec![labelled("v", v), labelled("other", other), scalar("t", t)],
    );
    Ok(tally.finish())
}
