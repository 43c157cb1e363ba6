use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::problem::{SmoothOracle, Vector};

/// `f(x) = <Ax, x>/2 - <b, x> + c` with `A` symmetric positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSmooth {
    a: DMatrix<f64>,
    b: DVector<f64>,
    c: f64,
    mu: f64,
    lip: f64,
}

impl QuadraticSmooth {
    /// Builds a quadratic with declared constants. The declaration is not
    /// checked against the spectrum; the certificate layer does that.
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, c: f64, mu: f64, lip: f64) -> Result<Self> {
        let n = b.len();
        if n == 0 || a.nrows() != n || a.ncols() != n {
            return Err(invalid(format!(
                "matrix is {}x{} but vector has length {n}",
                a.nrows(),
                a.ncols()
            )));
        }
        if (&a - a.transpose()).amax() > 1e-12 * a.amax().max(1.0) {
            return Err(invalid("quadratic matrix is not symmetric"));
        }
        if !(lip > 0.0) || !(0.0..=lip).contains(&mu) {
            return Err(invalid(format!(
                "need 0 <= mu <= L, L > 0; got mu={mu}, L={lip}"
            )));
        }
        Ok(QuadraticSmooth { a, b, c, mu, lip })
    }

    /// `curv * (x - center)^2 / 2` in one dimension.
    pub fn scalar(curv: f64, center: f64) -> Self {
        QuadraticSmooth {
            a: DMatrix::from_element(1, 1, curv),
            b: DVector::from_element(1, curv * center),
            c: curv * center * center / 2.0,
            mu: curv,
            lip: curv,
        }
    }

    /// Same function with different declared constants (used to build
    /// deliberately mis-declared fixtures).
    pub fn with_declared(&self, mu: f64, lip: f64) -> Self {
        QuadraticSmooth {
            mu,
            lip,
            ..self.clone()
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn linear(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn constant(&self) -> f64 {
        self.c
    }

    /// Solves `Ax = b` directly. Fails when `A` is singular.
    pub fn solve_stationary(&self) -> Result<Vector> {
        if let Some(ch) = self.a.clone().cholesky() {
            return Ok(ch.solve(&self.b));
        }
        self.a
            .clone()
            .lu()
            .solve(&self.b)
            .ok_or_else(|| invalid("quadratic matrix is singular"))
    }
}

impl SmoothOracle for QuadraticSmooth {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn value(&self, x: &Vector) -> f64 {
        0.5 * (&self.a * x).dot(x) - self.b.dot(x) + self.c
    }

    fn gradient(&self, x: &Vector) -> Vector {
        &self.a * x - &self.b
    }

    fn mu(&self) -> f64 {
        self.mu
    }

    fn lip(&self) -> f64 {
        self.lip
    }

    fn solve_direct(&self) -> Option<Vector> {
        self.solve_stationary().ok()
    }
}

fn random_orthogonal(n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Random quadratic with spectrum `{mu, ..., lip}`, deterministic in `seed`.
///
/// `A = Q diag(lambda) Q^T` with `lambda_1 = mu`, `lambda_n = lip` and the
/// interior eigenvalues uniform in `[mu, lip]`. When `mu = 0` the linear
/// term is drawn from the range of `A` so that `f` stays bounded below.
pub fn make_quadratic(n: usize, mu: f64, lip: f64, seed: u64) -> Result<QuadraticSmooth> {
    if n == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    if !(lip > 0.0 && lip.is_finite()) || !(mu >= 0.0) {
        return Err(invalid(format!(
            "need mu >= 0 and L > 0, got mu={mu}, L={lip}"
        )));
    }
    if mu > lip {
        return Err(invalid(format!("mu = {mu} exceeds L = {lip}")));
    }
    if n == 1 && mu != lip {
        return Err(invalid("a one-dimensional quadratic needs mu == L"));
    }
    let mut rng = super::seeded_rng(seed);
    let mut eig = vec![0.0; n];
    eig[0] = mu;
    eig[n - 1] = lip;
    for e in eig.iter_mut().take(n - 1).skip(1) {
        *e = rng.random_range(mu..=lip);
    }
    let q = random_orthogonal(n, &mut rng);
    let a = &q * DMatrix::from_diagonal(&DVector::from_vec(eig)) * q.transpose();
    let a = (&a + a.transpose()) * 0.5;
    let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let b = if mu > 0.0 { z } else { &a * z };
    QuadraticSmooth::new(a, b, 0.0, mu, lip)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::SymmetricEigen;

    fn spectrum(q: &QuadraticSmooth) -> Vec<f64> {
        let mut e: Vec<f64> = SymmetricEigen::new(q.matrix().clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        e.sort_by(f64::total_cmp);
        e
    }

    #[test]
    fn one_dimensional_is_forced() {
        let q = make_quadratic(1, 1.0, 1.0, 0).unwrap();
        assert_eq!(q.matrix()[(0, 0)], 1.0);
        let b = q.linear()[0];
        let x = Vector::from_element(1, 0.3);
        assert!((q.value(&x) - (0.045 - b * 0.3)).abs() < 1e-15);
    }

    #[test]
    fn spectrum_matches_declaration() {
        let q = make_quadratic(3, 1.0, 100.0, 7).unwrap();
        let e = spectrum(&q);
        assert!((e[0] - 1.0).abs() < 1e-10);
        assert!((e[2] - 100.0).abs() < 1e-10);
        assert!(e[1] >= 1.0 - 1e-10 && e[1] <= 100.0 + 1e-10);
        assert_eq!(q.mu(), 1.0);
        assert_eq!(q.lip(), 100.0);
    }

    #[test]
    fn degenerate_spectrum_keeps_linear_term_in_range() {
        let q = make_quadratic(6, 0.0, 10.0, 3).unwrap();
        let e = spectrum(&q);
        assert!(e[0].abs() < 1e-10);
        assert!((e[5] - 10.0).abs() < 1e-10);
        // b orthogonal to the null direction
        let eig = SymmetricEigen::new(q.matrix().clone());
        let (i0, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        let null = eig.eigenvectors.column(i0);
        assert!(null.dot(q.linear()).abs() < 1e-10);
    }

    #[test]
    fn generator_is_deterministic() {
        let a = make_quadratic(5, 0.5, 4.0, 11).unwrap();
        let b = make_quadratic(5, 0.5, 4.0, 11).unwrap();
        assert_eq!(a, b);
        let c = make_quadratic(5, 0.5, 4.0, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_constants() {
        assert!(make_quadratic(3, 2.0, 1.0, 0).is_err());
        assert!(make_quadratic(0, 1.0, 1.0, 0).is_err());
        assert!(make_quadratic(3, 0.0, 0.0, 0).is_err());
        assert!(make_quadratic(1, 0.5, 1.0, 0).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let q = make_quadratic(4, 0.2, 3.0, 5).unwrap();
        let x = Vector::from_row_slice(&[0.3, -1.2, 0.8, 2.0]);
        let g = q.gradient(&x);
        for i in 0..4 {
            let mut e = Vector::zeros(4);
            e[i] = 1e-6;
            let fd = (q.value(&(&x + &e)) - q.value(&(&x - &e))) / 2e-6;
            assert!((fd - g[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn direct_solve() {
        let q = make_quadratic(4, 1.0, 9.0, 2).unwrap();
        let x = q.solve_stationary().unwrap();
        assert!(q.gradient(&x).norm() < 1e-12);
    }
}
