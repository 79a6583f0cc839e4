use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::round_rng;
use crate::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;

fn check_symmetric(a: &DMatrix<f64>) -> Result<()> {
    if !a.is_square() {
        return Err(Error::InvalidArgument(format!("matrix is {}x{}, not square", a.nrows(), a.ncols())));
    }
    for i in 0..a.nrows() {
        for j in 0..i {
            if (a[(i, j)] - a[(j, i)]).abs() > SYMMETRY_TOL {
                return Err(Error::InvalidArgument(format!(
                    "matrix is not symmetric at ({i}, {j}): {} vs {}",
                    a[(i, j)],
                    a[(j, i)]
                )));
            }
        }
    }
    Ok(())
}

/// `f(x) = 1/2 x'Ax + b'x`.
pub fn quadratic_loss(x: &[f64], a: &DMatrix<f64>, b: &[f64]) -> Result<f64> {
    check_symmetric(a)?;
    Error::check_len(a.nrows(), x.len())?;
    Error::check_len(a.nrows(), b.len())?;
    let xv = DVector::from_column_slice(x);
    Ok(0.5 * xv.dot(&(a * &xv)) + xv.dot(&DVector::from_column_slice(b)))
}

/// `Ax + b`.
pub fn quadratic_grad(x: &[f64], a: &DMatrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    check_symmetric(a)?;
    Error::check_len(a.nrows(), x.len())?;
    Error::check_len(a.nrows(), b.len())?;
    let g = a * DVector::from_column_slice(x) + DVector::from_column_slice(b);
    Ok(g.as_slice().to_vec())
}

/// Online quadratic `f_t(x) = 1/2 x'Ax + (b + noise xi_t)'x` with
/// `xi_t ~ N(0, I)` drawn from round `t`'s stream. `noise = 0` repeats one
/// fixed loss every round.
#[derive(Debug, Clone)]
pub struct QuadraticProblem {
    a: DMatrix<f64>,
    b: Vec<f64>,
    noise: f64,
    sigma: f64,
    lmax: f64,
}

impl QuadraticProblem {
    /// Validates symmetry and positive definiteness; `sigma` is the smallest
    /// eigenvalue of `A`.
    pub fn new(a: DMatrix<f64>, b: Vec<f64>, noise: f64) -> Result<Self> {
        check_symmetric(&a)?;
        Error::check_len(a.nrows(), b.len())?;
        if a.nrows() == 0 {
            return Err(Error::InvalidArgument("empty matrix".into()));
        }
        if !(noise.is_finite() && noise >= 0.0) {
            return Err(Error::InvalidArgument(format!("noise level {noise} must be nonnegative")));
        }
        let eig = a.clone().symmetric_eigenvalues();
        let sigma = eig.min();
        if !(sigma > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "matrix is not positive definite (smallest eigenvalue {sigma})"
            )));
        }
        let lmax = eig.max();
        Ok(QuadraticProblem { a, b, noise, sigma, lmax })
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Largest eigenvalue of `A`, the smoothness constant of every round.
    pub fn lipschitz(&self) -> f64 {
        self.lmax
    }

    /// Linear term `b_t` of round `t`.
    pub fn linear_term(&self, seed: u64, t: u64) -> Vec<f64> {
        if self.noise == 0.0 {
            return self.b.clone();
        }
        let mut rng = round_rng(seed, t);
        self.b
            .iter()
            .map(|bi| {
                let z: f64 = StandardNormal.sample(&mut rng);
                bi + self.noise * z
            })
            .collect()
    }

    pub(crate) fn loss_grad_with(&self, x: &[f64], linear: &[f64]) -> Result<(f64, Vec<f64>)> {
        Error::check_len(self.dim(), x.len())?;
        let xv = DVector::from_column_slice(x);
        let ax = &self.a * &xv;
        let lin = DVector::from_column_slice(linear);
        let loss = 0.5 * xv.dot(&ax) + xv.dot(&lin);
        Ok((loss, (ax + lin).as_slice().to_vec()))
    }
}

/// Random strongly convex quadratic: `A = Q diag(linspace(0.1, 1, n)) Q'`
/// with `Q` orthogonal, and `b = -A x_bar` for `x_bar` uniform in `[-1, 1]^n`,
/// so the noiseless minimizer is `x_bar`.
pub fn canonical_quadratic(seed: u64, n: usize, noise: f64) -> Result<QuadraticProblem> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gauss = DMatrix::<f64>::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
    let q = gauss.qr().q();
    let eig = DVector::from_fn(n, |i, _| {
        if n == 1 {
            1.0
        } else {
            0.1 + 0.9 * i as f64 / (n - 1) as f64
        }
    });
    let a: DMatrix<f64> = &q * DMatrix::from_diagonal(&eig) * q.transpose();
    let a = (&a + a.transpose()) * 0.5;
    let x_bar = DVector::from_fn(n, |_, _| rng.random_range(-1.0f64..=1.0));
    let b = -(&a * x_bar);
    QuadraticProblem::new(a, b.as_slice().to_vec(), noise)
}
