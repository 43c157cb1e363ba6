use serde::{Deserialize, Serialize};

use crate::hexfloat;
use crate::problem::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Pgd,
    Fgm,
    Apg,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Pgd => "pgd",
            SolverKind::Fgm => "fgm",
            SolverKind::Apg => "apg",
        }
    }
}

impl std::str::FromStr for SolverKind {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pgd" => Ok(SolverKind::Pgd),
            "fgm" => Ok(SolverKind::Fgm),
            "apg" => Ok(SolverKind::Apg),
            other => Err(crate::error::invalid(format!("unknown solver {other:?}"))),
        }
    }
}

/// Schedule values in force at one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    #[serde(with = "hexfloat")]
    pub a: f64,
    #[serde(with = "hexfloat")]
    pub b: f64,
    #[serde(with = "hexfloat")]
    pub big_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub k: usize,
    #[serde(with = "hexfloat::vector")]
    pub x: Vector,
    /// `x^k - G(x^k)/L` (accelerated runs).
    #[serde(with = "hexfloat::opt_vector", default)]
    pub y: Option<Vector>,
    #[serde(with = "hexfloat::opt_vector", default)]
    pub v: Option<Vector>,
    /// `G(x^k, t)` for composite runs, `grad f(x^k)` for FGM.
    #[serde(with = "hexfloat::vector")]
    pub map: Vector,
    #[serde(with = "hexfloat")]
    pub map_norm: f64,
    #[serde(with = "hexfloat")]
    pub phi_x: f64,
    #[serde(with = "hexfloat::opt", default)]
    pub phi_y: Option<f64>,
    #[serde(default)]
    pub weights: Option<Weights>,
    /// Potential value, present when a reference optimum was known.
    #[serde(with = "hexfloat::opt", default)]
    pub potential: Option<f64>,
    /// Seconds since the run started; excluded from determinism comparisons.
    pub elapsed_s: f64,
}

impl IterRecord {
    /// Equality on everything except wall time.
    pub fn same_numerics(&self, other: &IterRecord) -> bool {
        let bits = |a: f64, b: f64| a.to_bits() == b.to_bits();
        let vbits = |a: &Vector, b: &Vector| {
            a.len() == b.len() && a.iter().zip(b.iter()).all(|(p, q)| bits(*p, *q))
        };
        let ovbits = |a: &Option<Vector>, b: &Option<Vector>| match (a, b) {
            (Some(a), Some(b)) => vbits(a, b),
            (None, None) => true,
            _ => false,
        };
        let obits = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(a), Some(b)) => bits(a, b),
            (None, None) => true,
            _ => false,
        };
        self.k == other.k
            && vbits(&self.x, &other.x)
            && ovbits(&self.y, &other.y)
            && ovbits(&self.v, &other.v)
            && vbits(&self.map, &other.map)
            && bits(self.map_norm, other.map_norm)
            && bits(self.phi_x, other.phi_x)
            && obits(self.phi_y, other.phi_y)
            && self.weights == other.weights
            && obits(self.potential, other.potential)
    }
}

/// Per-iteration history of one run, indexed contiguously from `k = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub solver: SolverKind,
    pub problem: String,
    pub dim: usize,
    #[serde(with = "hexfloat")]
    pub lip: f64,
    #[serde(with = "hexfloat")]
    pub mu: f64,
    /// Step size used inside the mapping.
    #[serde(with = "hexfloat")]
    pub step: f64,
    #[serde(with = "hexfloat::opt", default)]
    pub eta: Option<f64>,
    #[serde(default)]
    pub schedule: Option<String>,
    pub records: Vec<IterRecord>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Number of completed iterations (`records.len() - 1`).
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn same_numerics(&self, other: &Trace) -> bool {
        self.solver == other.solver
            && self.problem == other.problem
            && self.step.to_bits() == other.step.to_bits()
            && self.records.len() == other.records.len()
            && self
                .records
                .iter()
                .zip(other.records.iter())
                .all(|(a, b)| a.same_numerics(b))
    }

    /// Checks that indices run `0, 1, ...` and per-record fields are
    /// consistently present.
    pub fn is_well_formed(&self) -> bool {
        let accelerated = self.solver != SolverKind::Pgd;
        self.records.iter().enumerate().all(|(i, r)| {
            r.k == i
                && r.x.len() == self.dim
                && r.map.len() == self.dim
                && r.y.is_some() == accelerated
                && r.v.is_some() == accelerated
                && r.phi_y.is_some() == accelerated
                && r.weights.is_some() == accelerated
        })
    }
}
