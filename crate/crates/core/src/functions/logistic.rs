use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::problem::{SmoothOracle, Vector};

/// Average logistic loss `(1/m) sum log(1 + exp(-y_i <d_i, x>))`.
///
/// Declared `mu = 0` and `L = |D|_op^2 / (4m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticSmooth {
    data: DMatrix<f64>,
    labels: DVector<f64>,
    lip: f64,
}

fn softplus(z: f64) -> f64 {
    // log(1 + e^z) without overflow
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl LogisticSmooth {
    pub fn new(data: DMatrix<f64>, labels: DVector<f64>) -> Result<Self> {
        let m = data.nrows();
        if m == 0 || data.ncols() == 0 || labels.len() != m {
            return Err(invalid(format!(
                "data is {}x{} with {} labels",
                m,
                data.ncols(),
                labels.len()
            )));
        }
        if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
            return Err(invalid("labels must be +1 or -1"));
        }
        let sigma = data.singular_values().max();
        let lip = sigma * sigma / (4.0 * m as f64);
        if !(lip > 0.0) {
            return Err(invalid("data matrix is zero"));
        }
        Ok(LogisticSmooth { data, labels, lip })
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn labels(&self) -> &DVector<f64> {
        &self.labels
    }

    fn margins(&self, x: &Vector) -> DVector<f64> {
        (&self.data * x).component_mul(&self.labels)
    }
}

impl SmoothOracle for LogisticSmooth {
    fn dim(&self) -> usize {
        self.data.ncols()
    }

    fn value(&self, x: &Vector) -> f64 {
        let m = self.data.nrows() as f64;
        self.margins(x).iter().map(|&z| softplus(-z)).sum::<f64>() / m
    }

    fn gradient(&self, x: &Vector) -> Vector {
        let m = self.data.nrows() as f64;
        // d/dz log(1 + e^{-z}) = -sigmoid(-z)
        let w = self
            .margins(x)
            .zip_map(&self.labels, |z, y| -y * sigmoid(-z) / m);
        self.data.transpose() * w
    }

    fn mu(&self) -> f64 {
        0.0
    }

    fn lip(&self) -> f64 {
        self.lip
    }
}

/// Random logistic-regression instance with `m` samples in `n` features.
///
/// Labels come from a random linear rule with 20% of them flipped, which
/// keeps the classes non-separable so that a minimizer exists.
pub fn make_logistic(m: usize, n: usize, seed: u64) -> Result<LogisticSmooth> {
    if m == 0 || n == 0 {
        return Err(invalid("need at least one sample and one feature"));
    }
    let mut rng = super::seeded_rng(seed);
    let data = DMatrix::from_fn(m, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let w = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let scores = &data * w;
    let labels = DVector::from_fn(m, |i, _| {
        let y = if scores[i] >= 0.0 { 1.0 } else { -1.0 };
        if rng.random::<f64>() < 0.2 {
            -y
        } else {
            y
        }
    });
    LogisticSmooth::new(data, labels)
}
