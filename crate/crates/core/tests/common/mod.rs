//! Fixtures and samplers shared by the integration tests.
#![allow(dead_code)]

use std::sync::{Arc, OnceLock};

use proxgrad::fixture::{attach_reference, generate_with_reference, ProblemKind, ProblemSpec};
use proxgrad::functions::{QuadraticSmooth, StructuredNonsmooth};
use proxgrad::{CompositeProblem, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub struct Case {
    pub name: String,
    pub kind: Option<ProblemKind>,
    pub problem: CompositeProblem,
    pub g: StructuredNonsmooth,
}

impl Case {
    pub fn n(&self) -> usize {
        self.problem.dim()
    }

    pub fn is_structured(&self) -> bool {
        !matches!(self.g, StructuredNonsmooth::Zero)
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vector {
    Vector::from_fn(n, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

struct SpecArgs {
    kind: ProblemKind,
    n: usize,
    mu: f64,
    lip: f64,
    lambda: f64,
    lo: f64,
    hi: f64,
    seed: u64,
    m: Option<usize>,
}

impl SpecArgs {
    fn new(kind: ProblemKind, n: usize, mu: f64, lip: f64, seed: u64) -> Self {
        SpecArgs {
            kind,
            n,
            mu,
            lip,
            lambda: 0.1,
            lo: -1.0,
            hi: 1.0,
            seed,
            m: None,
        }
    }

    fn lambda(mut self, l: f64) -> Self {
        self.lambda = l;
        self
    }

    fn bounds(mut self, lo: f64, hi: f64) -> Self {
        self.lo = lo;
        self.hi = hi;
        self
    }

    fn samples(mut self, m: usize) -> Self {
        self.m = Some(m);
        self
    }

    fn build(self) -> Case {
        let mut spec = ProblemSpec::new(self.kind, self.n);
        spec.mu = self.mu;
        spec.lip = self.lip;
        spec.lambda = self.lambda;
        spec.lo = self.lo;
        spec.hi = self.hi;
        spec.seed = self.seed;
        spec.m = self.m;
        let (fx, r) = generate_with_reference(&spec, None).expect("fixture generation");
        let problem = attach_reference(&fx, &r).expect("reference attaches");
        Case {
            name: fx.name.clone(),
            kind: Some(self.kind),
            problem,
            g: fx.nonsmooth_oracle().unwrap(),
        }
    }
}

/// `f(x) = (x - 2)^2 / 2`, `g = |x|`, minimized at `x* = 1` with value 1.5.
pub fn lasso_1d() -> Case {
    let g = StructuredNonsmooth::L1 { lambda: 1.0 };
    let problem = CompositeProblem::new(
        Arc::new(QuadraticSmooth::scalar(1.0, 2.0)),
        Arc::new(g.clone()),
    )
    .unwrap()
    .with_label("lasso-1d")
    .with_reference(Vector::from_row_slice(&[1.0]), 1.5)
    .unwrap();
    Case {
        name: "lasso-1d".into(),
        kind: None,
        problem,
        g,
    }
}

fn build_all() -> Vec<Case> {
    use ProblemKind::*;
    vec![
        SpecArgs::new(Quadratic, 5, 1.0, 100.0, 11).build(),
        SpecArgs::new(Quadratic, 1, 1.0, 1.0, 12).build(),
        SpecArgs::new(Quadratic, 8, 0.0, 10.0, 13).build(),
        SpecArgs::new(Lasso, 1, 2.0, 2.0, 21).lambda(0.5).build(),
        SpecArgs::new(Lasso, 5, 1.0, 4.0, 22).lambda(0.3).build(),
        SpecArgs::new(Lasso, 20, 0.0, 10.0, 1).lambda(0.5).build(),
        SpecArgs::new(Box, 1, 2.0, 2.0, 31)
            .bounds(-0.5, 0.5)
            .build(),
        SpecArgs::new(Box, 5, 0.5, 2.0, 32)
            .bounds(-0.3, 0.4)
            .build(),
        SpecArgs::new(Box, 20, 0.0, 10.0, 33)
            .bounds(-0.5, 0.5)
            .build(),
        SpecArgs::new(Nonneg, 3, 0.2, 3.0, 41).build(),
        SpecArgs::new(Logistic, 5, 0.0, 1.0, 51).samples(40).build(),
        SpecArgs::new(LogisticL1, 5, 0.0, 1.0, 52)
            .samples(40)
            .lambda(0.05)
            .build(),
        lasso_1d(),
    ]
}

/// Every shipped fixture, generated once per test binary.
pub fn all() -> &'static [Case] {
    static CASES: OnceLock<Vec<Case>> = OnceLock::new();
    CASES.get_or_init(build_all)
}

pub fn by_kind(kind: ProblemKind) -> Vec<&'static Case> {
    all().iter().filter(|c| c.kind == Some(kind)).collect()
}

pub fn named(name: &str) -> &'static Case {
    all()
        .iter()
        .find(|c| c.name == name)
        .unwrap_or_else(|| panic!("no fixture {name}"))
}

/// A point in `dom g` that often sits on the nonsmooth set: exact zeros for
/// l1, active bounds for boxes and the orthant.
pub fn state(case: &Case, rng: &mut ChaCha8Rng, scale: f64) -> Vector {
    let n = case.n();
    let mut x = gaussian(rng, n, scale);
    match &case.g {
        StructuredNonsmooth::Zero => {}
        StructuredNonsmooth::L1 { .. } => {
            for i in 0..n {
                if rng.random_range(0..3) == 0 {
                    x[i] = 0.0;
                }
            }
        }
        StructuredNonsmooth::Box { lo, hi } => {
            for i in 0..n {
                x[i] = match rng.random_range(0..3) {
                    0 => lo[i],
                    1 => hi[i],
                    _ => rng.random_range(lo[i]..=hi[i]),
                };
            }
        }
        StructuredNonsmooth::Nonneg => {
            for i in 0..n {
                x[i] = if rng.random_range(0..3) == 0 {
                    0.0
                } else {
                    x[i].abs()
                };
            }
        }
    }
    x
}

/// Pairs at mixed scales, including nearby points.
pub fn pairs(n: usize, count: usize, seed: u64) -> Vec<(Vector, Vector)> {
    let mut r = rng(seed);
    (0..count)
        .map(|i| {
            let scale = 10f64.powf(r.random_range(-2.0..1.0));
            let x = gaussian(&mut r, n, scale);
            let y = if i % 4 == 0 {
                &x + gaussian(&mut r, n, 1e-3 * scale)
            } else {
                gaussian(&mut r, n, scale)
            };
            (x, y)
        })
        .collect()
}

/// Worst margin of one named link, panicking if it was not evaluated.
pub fn link_margin(r: &proxgrad::certificates::CheckReport, name: &str) -> f64 {
    let l = r
        .link(name)
        .unwrap_or_else(|| panic!("{} has no link {name}", r.name));
    assert!(l.skipped.is_none(), "{name} skipped: {:?}", l.skipped);
    l.worst_margin
}
