use std::sync::Arc;

use super::{Dataset, MiniBatch};
use crate::{Error, Result};

/// Mini-batch l2-regularized softmax regression.
///
/// Parameters are packed `w_1, ..., w_K` (each of length `d`) followed by
/// `b_1, ..., b_K`.
#[derive(Debug, Clone)]
pub struct SoftmaxProblem {
    pub dataset: Arc<Dataset>,
    pub sigma1: f64,
    pub sigma2: f64,
    pub batch_size: usize,
}

impl SoftmaxProblem {
    pub fn new(dataset: Arc<Dataset>, sigma1: f64, sigma2: f64, batch_size: usize) -> Result<Self> {
        if !(sigma1 > 0.0 && sigma1.is_finite() && sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "regularizers must be positive for strong convexity, got sigma1 = {sigma1}, sigma2 = {sigma2}"
            )));
        }
        if batch_size == 0 || batch_size > dataset.len() {
            return Err(Error::InvalidArgument(format!(
                "batch size {batch_size} outside 1..={}",
                dataset.len()
            )));
        }
        if dataset.classes() < 2 {
            return Err(Error::InvalidDataset("softmax regression needs at least two classes".into()));
        }
        Ok(SoftmaxProblem { dataset, sigma1, sigma2, batch_size })
    }

    pub fn dim(&self) -> usize {
        self.dataset.classes() * (self.dataset.dim() + 1)
    }

    /// Certified strong-convexity modulus `2 min(sigma1, sigma2)`.
    pub fn sigma(&self) -> f64 {
        2.0 * self.sigma1.min(self.sigma2)
    }

    /// Loss and gradient of `sum_i c_i CE_i / sum_i c_i` plus the regularizer.
    pub(crate) fn weighted_loss_grad(&self, params: &[f64], weights: &[(usize, f64)]) -> Result<(f64, Vec<f64>)> {
        let mut grad = vec![0.0; params.len()];
        let loss = weighted_ce(params, &self.dataset, weights, Some(&mut grad))?
            + regularize(params, &self.dataset, self.sigma1, self.sigma2, Some(&mut grad));
        Ok((loss, grad))
    }

    pub(crate) fn weighted_loss(&self, params: &[f64], weights: &[(usize, f64)]) -> Result<f64> {
        Ok(weighted_ce(params, &self.dataset, weights, None)?
            + regularize(params, &self.dataset, self.sigma1, self.sigma2, None))
    }

    /// Upper bound on the Hessian spectral norm of the weighted loss.
    ///
    /// The cross-entropy Hessian of one sample is bounded by
    /// `1/2 I (x) x~x~'` with `x~ = (x, 1)`, so the weighted average is bounded
    /// by half the largest eigenvalue of `sum_i c_i x~_i x~_i' / sum_i c_i`.
    pub(crate) fn smoothness(&self, weights: &[(usize, f64)]) -> f64 {
        let d = self.dataset.dim();
        let total: f64 = weights.iter().map(|(_, w)| w).sum();
        let mut gram = nalgebra::DMatrix::<f64>::zeros(d + 1, d + 1);
        let mut aug = vec![1.0; d + 1];
        for &(i, w) in weights {
            aug[..d].copy_from_slice(self.dataset.features(i));
            for a in 0..=d {
                for b in 0..=a {
                    gram[(a, b)] += w / total * aug[a] * aug[b];
                }
            }
        }
        for a in 0..=d {
            for b in 0..a {
                gram[(b, a)] = gram[(a, b)];
            }
        }
        let lmax = gram.symmetric_eigenvalues().max();
        0.5 * lmax * (1.0 + 1e-9) + 2.0 * self.sigma1.max(self.sigma2)
    }
}

fn check_params(params: &[f64], dataset: &Dataset) -> Result<()> {
    Error::check_len(dataset.classes() * (dataset.dim() + 1), params.len())
}

fn weighted_ce(params: &[f64], dataset: &Dataset, weights: &[(usize, f64)], mut grad: Option<&mut [f64]>) -> Result<f64> {
    check_params(params, dataset)?;
    let (k, d) = (dataset.classes(), dataset.dim());
    let total: f64 = weights.iter().map(|(_, w)| w).sum();
    if weights.is_empty() || total <= 0.0 {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let (w, b) = params.split_at(k * d);
    let mut z = vec![0.0; k];
    let mut loss = 0.0;
    for &(i, c) in weights {
        if i >= dataset.len() {
            return Err(Error::InvalidArgument(format!("sample index {i} out of range")));
        }
        let x = dataset.features(i);
        let y = dataset.label(i);
        for (c_, zc) in z.iter_mut().enumerate() {
            *zc = b[c_] + w[c_ * d..(c_ + 1) * d].iter().zip(x).map(|(a, v)| a * v).sum::<f64>();
        }
        let zmax = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = zmax + z.iter().map(|v| (v - zmax).exp()).sum::<f64>().ln();
        let scale = c / total;
        loss += scale * (lse - z[y]);
        if let Some(g) = grad.as_deref_mut() {
            for (c_, zc) in z.iter().enumerate() {
                let p = (zc - lse).exp() - if c_ == y { 1.0 } else { 0.0 };
                let coef = scale * p;
                for (gj, xj) in g[c_ * d..(c_ + 1) * d].iter_mut().zip(x) {
                    *gj += coef * xj;
                }
                g[k * d + c_] += coef;
            }
        }
    }
    Ok(loss)
}

fn regularize(params: &[f64], dataset: &Dataset, sigma1: f64, sigma2: f64, grad: Option<&mut [f64]>) -> f64 {
    let split = dataset.classes() * dataset.dim();
    let (w, b) = params.split_at(split);
    let value = sigma1 * w.iter().map(|v| v * v).sum::<f64>() + sigma2 * b.iter().map(|v| v * v).sum::<f64>();
    if let Some(g) = grad {
        for (i, p) in params.iter().enumerate() {
            g[i] += 2.0 * if i < split { sigma1 } else { sigma2 } * p;
        }
    }
    value
}

fn batch_weights(batch: &MiniBatch) -> Vec<(usize, f64)> {
    batch.indices.iter().map(|&i| (i, 1.0)).collect()
}

/// `-(1/m) sum_i log softmax(z_i)_{y_i} + sigma1 sum_k |w_k|^2 + sigma2 sum_k b_k^2`.
pub fn softmax_l2_loss(params: &[f64], batch: &MiniBatch, dataset: &Dataset, sigma1: f64, sigma2: f64) -> Result<f64> {
    Ok(weighted_ce(params, dataset, &batch_weights(batch), None)? + regularize(params, dataset, sigma1, sigma2, None))
}

/// Gradient of [`softmax_l2_loss`] in the same packing.
pub fn softmax_l2_grad(params: &[f64], batch: &MiniBatch, dataset: &Dataset, sigma1: f64, sigma2: f64) -> Result<Vec<f64>> {
    Ok(softmax_l2_loss_grad(params, batch, dataset, sigma1, sigma2)?.1)
}

/// Loss and gradient in one pass.
pub fn softmax_l2_loss_grad(
    params: &[f64],
    batch: &MiniBatch,
    dataset: &Dataset,
    sigma1: f64,
    sigma2: f64,
) -> Result<(f64, Vec<f64>)> {
    let mut grad = vec![0.0; params.len()];
    let loss = weighted_ce(params, dataset, &batch_weights(batch), Some(&mut grad))?
        + regularize(params, dataset, sigma1, sigma2, Some(&mut grad));
    Ok((loss, grad))
}
