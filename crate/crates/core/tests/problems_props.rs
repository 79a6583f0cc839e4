use std::sync::Arc;

use fastbelief_core::problems::{
    canonical_quadratic, finite_diff_grad, quadratic_grad, quadratic_loss, sample_batch, softmax_l2_loss,
    softmax_l2_loss_grad, synth_classification, Dataset, ProblemInstance, SoftmaxProblem,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / scale.max(1e-12)
}

fn random_point(rng: &mut ChaCha8Rng, n: usize, r: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-r..r)).collect()
}

#[test]
fn softmax_gradient_matches_finite_differences() {
    let ds = synth_classification(4, 3, 4, 40, 2.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for t in 1..=100 {
        let batch = sample_batch(&ds, 5, t, 3).unwrap();
        let x = random_point(&mut rng, 15, 2.0);
        let (_, g) = softmax_l2_loss_grad(&x, &batch, &ds, 0.01, 0.01).unwrap();
        let fd = finite_diff_grad(|p| softmax_l2_loss(p, &batch, &ds, 0.01, 0.01), &x, 1e-5).unwrap();
        assert!(rel_err(&fd, &g) <= 1e-6, "round {t}: {}", rel_err(&fd, &g));
    }
}

#[test]
fn quadratic_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let m = DMatrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
    let a = &m * m.transpose() + DMatrix::identity(3, 3) * 0.5;
    let b = random_point(&mut rng, 3, 1.0);
    for _ in 0..100 {
        let x = random_point(&mut rng, 3, 5.0);
        let g = quadratic_grad(&x, &a, &b).unwrap();
        let fd = finite_diff_grad(|p| quadratic_loss(p, &a, &b), &x, 1e-5).unwrap();
        assert!(rel_err(&fd, &g) <= 1e-6);
    }
}

/// `f(x) - f(y) >= grad f(y)'(x - y) + sigma/2 |x - y|^2 - 1e-9` for random
/// pairs in the region.
fn strong_convexity_witness(problem: &ProblemInstance, radius: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = problem.sigma();
    for k in 0..1000 {
        let t = 1 + k % 50;
        let x = random_point(&mut rng, problem.dim(), radius);
        let y = random_point(&mut rng, problem.dim(), radius);
        let (fx, _) = problem.round_loss_grad(t, 5, &x).unwrap();
        let (fy, gy) = problem.round_loss_grad(t, 5, &y).unwrap();
        let lin: f64 = gy.iter().zip(x.iter().zip(&y)).map(|(g, (a, b))| g * (a - b)).sum();
        let dist2: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum();
        assert!(fx - fy >= lin + 0.5 * sigma * dist2 - 1e-9, "pair {k}");
    }
}

#[test]
fn strong_convexity_holds_with_certified_sigma() {
    let quad = ProblemInstance::Quadratic(canonical_quadratic(0, 10, 1.0).unwrap());
    strong_convexity_witness(&quad, 5.0, 1);
    let ds = Arc::new(synth_classification(0, 10, 20, 2000, 1.0).unwrap());
    let soft = ProblemInstance::SoftmaxL2(SoftmaxProblem::new(ds, 0.01, 0.01, 32).unwrap());
    strong_convexity_witness(&soft, 10.0, 2);
}

#[test]
fn well_separated_blobs_are_linearly_separable() {
    let ds = synth_classification(9, 2, 2, 400, 10.0).unwrap();
    // offline logistic regression on label 1 vs 0 by plain gradient descent
    let (mut w, mut b) = ([0.0f64; 2], 0.0f64);
    for _ in 0..2000 {
        let (mut gw, mut gb) = ([0.0; 2], 0.0);
        for i in 0..ds.len() {
            let x = ds.features(i);
            let y = ds.label(i) as f64;
            let p = 1.0 / (1.0 + (-(w[0] * x[0] + w[1] * x[1] + b)).exp());
            gw[0] += (p - y) * x[0];
            gw[1] += (p - y) * x[1];
            gb += p - y;
        }
        let n = ds.len() as f64;
        w[0] -= 0.1 * gw[0] / n;
        w[1] -= 0.1 * gw[1] / n;
        b -= 0.1 * gb / n;
    }
    let correct = (0..ds.len())
        .filter(|&i| {
            let x = ds.features(i);
            ((w[0] * x[0] + w[1] * x[1] + b > 0.0) as usize) == ds.label(i)
        })
        .count();
    assert!(correct as f64 >= 0.99 * ds.len() as f64, "{correct}/{}", ds.len());
}

#[test]
fn batches_depend_only_on_seed_and_round() {
    let a = Dataset::new((0..50).map(|i| vec![i as f64]).collect(), (0..50).map(|i| i % 3).collect()).unwrap();
    let b = a.clone();
    for t in 1..20 {
        assert_eq!(sample_batch(&a, 7, t, 42).unwrap(), sample_batch(&b, 7, t, 42).unwrap());
    }
}
