//! Generated problem instances and their on-disk form.
//!
//! A fixture file stores the fully materialized data (matrices, labels,
//! bounds) as hex floats, so loading never re-runs the generator and the
//! rebuilt problem is bit-identical to the one that was solved for the
//! reference.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::functions::{
    make_logistic, make_quadratic, LogisticSmooth, QuadraticSmooth, StructuredNonsmooth,
};
use crate::hexfloat;
use crate::oracles::{reference_solve, ReferenceSolution};
use crate::problem::{CompositeProblem, SmoothOracle, Vector};

pub const PROBLEM_SCHEMA: &str = "proxgrad-problem/1";
pub const REFERENCE_SCHEMA: &str = "proxgrad-reference/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    /// Strongly convex or convex quadratic, `g = 0`.
    Quadratic,
    /// Quadratic plus `lambda |x|_1`.
    Lasso,
    /// Quadratic restricted to `[lo, hi]^n`.
    Box,
    /// Quadratic restricted to the nonnegative orthant.
    Nonneg,
    /// Average logistic loss, `g = 0`.
    Logistic,
    /// Logistic loss plus `lambda |x|_1`.
    LogisticL1,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Quadratic => "quadratic",
            ProblemKind::Lasso => "lasso",
            ProblemKind::Box => "box",
            ProblemKind::Nonneg => "nonneg",
            ProblemKind::Logistic => "logistic",
            ProblemKind::LogisticL1 => "logistic-l1",
        }
    }

    fn is_logistic(self) -> bool {
        matches!(self, ProblemKind::Logistic | ProblemKind::LogisticL1)
    }
}

/// Generator inputs. `mu` and `lip` are ignored for logistic kinds, whose
/// constants follow from the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub n: usize,
    /// Sample count for logistic kinds (default `8n`).
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(with = "hexfloat")]
    pub mu: f64,
    #[serde(with = "hexfloat")]
    pub lip: f64,
    #[serde(with = "hexfloat")]
    pub lambda: f64,
    #[serde(with = "hexfloat")]
    pub lo: f64,
    #[serde(with = "hexfloat")]
    pub hi: f64,
    pub seed: u64,
}

impl ProblemSpec {
    pub fn new(kind: ProblemKind, n: usize) -> Self {
        ProblemSpec {
            kind,
            n,
            m: None,
            mu: 0.0,
            lip: 1.0,
            lambda: 0.1,
            lo: -1.0,
            hi: 1.0,
            seed: 0,
        }
    }

    pub fn default_name(&self) -> String {
        format!("{}-n{}-s{}", self.kind.name(), self.n, self.seed)
    }

    fn smooth(&self) -> Result<SmoothData> {
        if self.kind.is_logistic() {
            let m = self.m.unwrap_or(8 * self.n);
            let f = make_logistic(m, self.n, self.seed)?;
            Ok(SmoothData::Logistic {
                data: f.data().clone(),
                labels: f.labels().clone(),
            })
        } else {
            let f = make_quadratic(self.n, self.mu, self.lip, self.seed)?;
            Ok(SmoothData::Quadratic {
                matrix: f.matrix().clone(),
                linear: f.linear().clone(),
                constant: f.constant(),
                mu: f.mu(),
                lip: f.lip(),
            })
        }
    }

    fn nonsmooth(&self) -> Result<NonsmoothData> {
        Ok(match self.kind {
            ProblemKind::Quadratic | ProblemKind::Logistic => NonsmoothData::Zero,
            ProblemKind::Lasso | ProblemKind::LogisticL1 => {
                StructuredNonsmooth::l1(self.lambda)?;
                NonsmoothData::L1 {
                    lambda: self.lambda,
                }
            }
            ProblemKind::Box => {
                let lo = Vector::from_element(self.n, self.lo);
                let hi = Vector::from_element(self.n, self.hi);
                StructuredNonsmooth::boxed(lo.clone(), hi.clone())?;
                NonsmoothData::Box { lo, hi }
            }
            ProblemKind::Nonneg => NonsmoothData::Nonneg,
        })
    }
}

mod hexmatrix {
    use nalgebra::DMatrix;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::hexfloat;

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = m
            .row_iter()
            .map(|r| r.iter().map(|&x| hexfloat::format(x)).collect())
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let rows = Vec::<Vec<String>>::deserialize(d)?;
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(D::Error::custom("ragged matrix"));
        }
        let mut vals = Vec::with_capacity(rows.len() * ncols);
        for r in &rows {
            for x in r {
                vals.push(hexfloat::parse(x).map_err(D::Error::custom)?);
            }
        }
        Ok(DMatrix::from_row_slice(rows.len(), ncols, &vals))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum SmoothData {
    Quadratic {
        #[serde(with = "hexmatrix")]
        matrix: DMatrix<f64>,
        #[serde(with = "hexfloat::vector")]
        linear: DVector<f64>,
        #[serde(with = "hexfloat")]
        constant: f64,
        #[serde(with = "hexfloat")]
        mu: f64,
        #[serde(with = "hexfloat")]
        lip: f64,
    },
    Logistic {
        #[serde(with = "hexmatrix")]
        data: DMatrix<f64>,
        #[serde(with = "hexfloat::vector")]
        labels: DVector<f64>,
    },
}

impl SmoothData {
    pub fn oracle(&self) -> Result<Arc<dyn SmoothOracle>> {
        Ok(match self {
            SmoothData::Quadratic {
                matrix,
                linear,
                constant,
                mu,
                lip,
            } => Arc::new(QuadraticSmooth::new(
                matrix.clone(),
                linear.clone(),
                *constant,
                *mu,
                *lip,
            )?),
            SmoothData::Logistic { data, labels } => {
                Arc::new(LogisticSmooth::new(data.clone(), labels.clone())?)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum NonsmoothData {
    Zero,
    L1 {
        #[serde(with = "hexfloat")]
        lambda: f64,
    },
    Box {
        #[serde(with = "hexfloat::vector")]
        lo: Vector,
        #[serde(with = "hexfloat::vector")]
        hi: Vector,
    },
    Nonneg,
}

impl NonsmoothData {
    pub fn oracle(&self) -> Result<StructuredNonsmooth> {
        match self {
            NonsmoothData::Zero => Ok(StructuredNonsmooth::Zero),
            NonsmoothData::L1 { lambda } => StructuredNonsmooth::l1(*lambda),
            NonsmoothData::Box { lo, hi } => StructuredNonsmooth::boxed(lo.clone(), hi.clone()),
            NonsmoothData::Nonneg => Ok(StructuredNonsmooth::Nonneg),
        }
    }
}

/// A materialized problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub schema: String,
    pub name: String,
    pub spec: ProblemSpec,
    pub smooth: SmoothData,
    pub nonsmooth: NonsmoothData,
}

impl Fixture {
    pub fn generate(spec: &ProblemSpec, name: Option<&str>) -> Result<Fixture> {
        if spec.n == 0 {
            return Err(invalid("dimension must be positive"));
        }
        Ok(Fixture {
            schema: PROBLEM_SCHEMA.to_string(),
            name: name.map_or_else(|| spec.default_name(), str::to_string),
            spec: spec.clone(),
            smooth: spec.smooth()?,
            nonsmooth: spec.nonsmooth()?,
        })
    }

    /// The composite problem, without a reference optimum.
    pub fn problem(&self) -> Result<CompositeProblem> {
        let g = self.nonsmooth.oracle()?;
        Ok(
            CompositeProblem::new(self.smooth.oracle()?, Arc::new(g))?
                .with_label(self.name.clone()),
        )
    }

    /// The structured nonsmooth term, for callers that need its closed forms.
    pub fn nonsmooth_oracle(&self) -> Result<StructuredNonsmooth> {
        self.nonsmooth.oracle()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Fixture> {
        let fx: Fixture = serde_json::from_str(text)?;
        if fx.schema != PROBLEM_SCHEMA {
            return Err(invalid(format!(
                "unsupported problem schema {:?}",
                fx.schema
            )));
        }
        Ok(fx)
    }

    pub fn load(path: &Path) -> Result<Fixture> {
        Fixture::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Reference optimum stored next to a fixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceFile {
    pub schema: String,
    pub fixture: String,
    pub seed: u64,
    #[serde(with = "hexfloat::vector")]
    pub x_star: Vector,
    #[serde(with = "hexfloat")]
    pub phi_bar: f64,
    #[serde(with = "hexfloat")]
    pub residual: f64,
    pub iterations: usize,
    #[serde(with = "hexfloat::opt", default)]
    pub cross_check: Option<f64>,
}

impl ReferenceFile {
    pub fn new(fixture: &Fixture, sol: &ReferenceSolution) -> Self {
        ReferenceFile {
            schema: REFERENCE_SCHEMA.to_string(),
            fixture: fixture.name.clone(),
            seed: fixture.spec.seed,
            x_star: sol.x_star.clone(),
            phi_bar: sol.phi_bar,
            residual: sol.residual,
            iterations: sol.iterations,
            cross_check: sol.cross_check,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<ReferenceFile> {
        let r: ReferenceFile = serde_json::from_str(text)?;
        if r.schema != REFERENCE_SCHEMA {
            return Err(invalid(format!(
                "unsupported reference schema {:?}",
                r.schema
            )));
        }
        Ok(r)
    }

    pub fn load(path: &Path) -> Result<ReferenceFile> {
        ReferenceFile::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Conventional file locations for a fixture named `name` under `dir`.
pub fn fixture_paths(dir: &Path, name: &str) -> (PathBuf, PathBuf) {
    (
        dir.join(format!("{name}.problem.json")),
        dir.join(format!("{name}.reference.json")),
    )
}

/// Reference path that sits beside a `*.problem.json` file.
pub fn sibling_reference(problem_path: &Path) -> PathBuf {
    let s = problem_path.to_string_lossy();
    match s.strip_suffix(".problem.json") {
        Some(stem) => PathBuf::from(format!("{stem}.reference.json")),
        None => problem_path.with_extension("reference.json"),
    }
}

/// Generates a fixture, solves for its reference, and returns both.
pub fn generate_with_reference(
    spec: &ProblemSpec,
    name: Option<&str>,
) -> Result<(Fixture, ReferenceFile)> {
    let fx = Fixture::generate(spec, name)?;
    let sol = reference_solve(&fx.problem()?)?;
    let r = ReferenceFile::new(&fx, &sol);
    Ok((fx, r))
}

/// Rebuilds the problem and attaches the reference, checking they belong
/// together.
pub fn attach_reference(fx: &Fixture, r: &ReferenceFile) -> Result<CompositeProblem> {
    if r.fixture != fx.name {
        return Err(invalid(format!(
            "reference is for fixture {:?}, not {:?}",
            r.fixture, fx.name
        )));
    }
    fx.problem()?.with_reference(r.x_star.clone(), r.phi_bar)
}
