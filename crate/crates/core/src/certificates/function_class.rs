use super::{labelled, CheckReport, Tally};
use crate::error::{invalid, Result};
use crate::problem::{SmoothOracle, Vector};

/// Samples the characterizations of `L`-smooth, `mu`-strongly convex
/// functions at each pair: the interpolation inequalities `unif2`, `unif3`
/// (both orders) and the gradient sandwich `unif4`, plus the first-order
/// strong-convexity and smoothness bounds. With `mu = 0` it also checks the
/// single-inequality form `unif1` and cocoercivity `unif1p`.
pub fn check_function_class(
    f: &dyn SmoothOracle,
    pairs: &[(Vector, Vector)],
) -> Result<CheckReport> {
    if pairs.is_empty() {
        return Err(invalid("function-class check needs at least one pair"));
    }
    let (mu, lip) = (f.mu(), f.lip());
    let mut tally = Tally::new("function-class");
    for (x, y) in pairs {
        if x.len() != f.dim() || y.len() != f.dim() {
            return Err(invalid("pair dimension does not match f"));
        }
        tally.sample();
        let inputs = || vec![labelled("x", x), labelled("y", y)];
        let (fx, fy) = (f.value(x), f.value(y));
        let (gx, gy) = (f.gradient(x), f.gradient(y));
        let dx = x - y;
        let dg = &gx - &gy;
        let (dx2, dg2, inner) = (dx.norm_squared(), dg.norm_squared(), dg.dot(&dx));

        tally.ge(
            "unif2",
            inner,
            mu * lip / (mu + lip) * dx2 + dg2 / (mu + lip),
            inputs,
        );

        for (p, q, fp, fq, gp, gq) in [(x, y, fx, fy, &gx, &gy), (y, x, fy, fx, &gy, &gx)] {
            let d = p - q;
            let dgrad = gp - gq;
            // With mu = L the residual direction vanishes identically.
            let curvature = if lip > mu {
                let r = &d - &dgrad / lip;
                mu * lip / (2.0 * (lip - mu)) * r.norm_squared()
            } else {
                0.0
            };
            tally.ge(
                "unif3",
                fp,
                fq + gq.dot(&d) + dgrad.norm_squared() / (2.0 * lip) + curvature,
                inputs,
            );
            tally.ge(
                "strong-convexity",
                fp,
                fq + gq.dot(&d) + mu / 2.0 * d.norm_squared(),
                inputs,
            );
            tally.le(
                "smoothness",
                fp,
                fq + gq.dot(&d) + lip / 2.0 * d.norm_squared(),
                inputs,
            );
        }

        let (ndx, ndg) = (dx2.sqrt(), dg2.sqrt());
        tally.ge("unif4-lower", ndg, mu * ndx, inputs);
        tally.le("unif4-upper", ndg, lip * ndx, inputs);

        if mu == 0.0 {
            tally.ge(
                "unif1",
                fy,
                fx + gx.dot(&(y - x)) + dg2 / (2.0 * lip),
                inputs,
            );
            tally.ge("unif1p", inner, dg2 / (2.0 * lip), inputs);
        }
    }
    Ok(tally.finish())
}
