use super::{sample_batch, QuadraticProblem, SoftmaxProblem};
use crate::{Error, Result};

/// A strongly convex online problem: round `t` of a run seeded with `seed`
/// exposes the loss `f_t`.
#[derive(Debug, Clone)]
pub enum ProblemInstance {
    SoftmaxL2(SoftmaxProblem),
    Quadratic(QuadraticProblem),
}

impl ProblemInstance {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ProblemInstance::SoftmaxL2(_) => "softmax_l2",
            ProblemInstance::Quadratic(_) => "quadratic",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ProblemInstance::SoftmaxL2(p) => p.dim(),
            ProblemInstance::Quadratic(p) => p.dim(),
        }
    }

    /// Certified strong-convexity modulus of every round.
    pub fn sigma(&self) -> f64 {
        match self {
            ProblemInstance::SoftmaxL2(p) => p.sigma(),
            ProblemInstance::Quadratic(p) => p.sigma(),
        }
    }

    /// `(f_t(x), grad f_t(x))`.
    pub fn round_loss_grad(&self, t: u64, seed: u64, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        match self {
            ProblemInstance::SoftmaxL2(p) => {
                let batch = sample_batch(&p.dataset, p.batch_size, t, seed)?;
                let weights: Vec<(usize, f64)> = batch.indices.iter().map(|&i| (i, 1.0)).collect();
                p.weighted_loss_grad(x, &weights)
            }
            ProblemInstance::Quadratic(p) => p.loss_grad_with(x, &p.linear_term(seed, t)),
        }
    }

    /// The noiseless objective: full-dataset softmax loss, or the quadratic
    /// with its mean linear term.
    pub fn objective(&self, x: &[f64]) -> Result<f64> {
        match self {
            ProblemInstance::SoftmaxL2(p) => {
                let weights: Vec<(usize, f64)> = (0..p.dataset.len()).map(|i| (i, 1.0)).collect();
                p.weighted_loss(x, &weights)
            }
            ProblemInstance::Quadratic(p) => Ok(p.loss_grad_with(x, p.b())?.0),
        }
    }
}

/// Running sum of the first `T` rounds, `F_T(x) = sum_{t <= T} f_t(x)`,
/// grown one round at a time.
#[derive(Debug, Clone)]
pub struct HindsightAggregate<'a> {
    instance: &'a ProblemInstance,
    seed: u64,
    rounds: u64,
    acc: Accumulator,
}

#[derive(Debug, Clone)]
enum Accumulator {
    /// How often each sample was drawn.
    Counts(Vec<f64>),
    /// Sum of the linear terms.
    Linear(Vec<f64>),
}

impl<'a> HindsightAggregate<'a> {
    pub fn new(instance: &'a ProblemInstance, seed: u64) -> Self {
        let acc = match instance {
            ProblemInstance::SoftmaxL2(p) => Accumulator::Counts(vec![0.0; p.dataset.len()]),
            ProblemInstance::Quadratic(p) => Accumulator::Linear(vec![0.0; p.dim()]),
        };
        HindsightAggregate { instance, seed, rounds: 0, acc }
    }

    /// Aggregate of rounds `1..=rounds`.
    pub fn with_rounds(instance: &'a ProblemInstance, seed: u64, rounds: u64) -> Result<Self> {
        let mut agg = Self::new(instance, seed);
        agg.extend_to(rounds)?;
        Ok(agg)
    }

    pub fn instance(&self) -> &'a ProblemInstance {
        self.instance
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    /// Adds rounds until `rounds()` equals `t`.
    pub fn extend_to(&mut self, t: u64) -> Result<()> {
        while self.rounds < t {
            let next = self.rounds + 1;
            match (&mut self.acc, self.instance) {
                (Accumulator::Counts(c), ProblemInstance::SoftmaxL2(p)) => {
                    for i in sample_batch(&p.dataset, p.batch_size, next, self.seed)?.indices {
                        c[i] += 1.0;
                    }
                }
                (Accumulator::Linear(sum), ProblemInstance::Quadratic(p)) => {
                    for (s, b) in sum.iter_mut().zip(p.linear_term(self.seed, next)) {
                        *s += b;
                    }
                }
                _ => unreachable!("accumulator matches its instance"),
            }
            self.rounds = next;
        }
        Ok(())
    }

    /// `F_T(x) / T` and its gradient.
    pub fn mean_loss_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.require_rounds()?;
        match (&self.acc, self.instance) {
            (Accumulator::Counts(c), ProblemInstance::SoftmaxL2(p)) => p.weighted_loss_grad(x, &nonzero(c)),
            (Accumulator::Linear(sum), ProblemInstance::Quadratic(p)) => p.loss_grad_with(x, &self.mean_linear(sum)),
            _ => unreachable!("accumulator matches its instance"),
        }
    }

    pub fn mean_loss(&self, x: &[f64]) -> Result<f64> {
        self.require_rounds()?;
        match (&self.acc, self.instance) {
            (Accumulator::Counts(c), ProblemInstance::SoftmaxL2(p)) => p.weighted_loss(x, &nonzero(c)),
            (Accumulator::Linear(sum), ProblemInstance::Quadratic(p)) => Ok(p.loss_grad_with(x, &self.mean_linear(sum))?.0),
            _ => unreachable!("accumulator matches its instance"),
        }
    }

    /// `F_T(x)`.
    pub fn total_loss(&self, x: &[f64]) -> Result<f64> {
        Ok(self.rounds as f64 * self.mean_loss(x)?)
    }

    /// Smoothness constant of `F_T / T`.
    pub fn lipschitz(&self) -> Result<f64> {
        self.require_rounds()?;
        Ok(match (&self.acc, self.instance) {
            (Accumulator::Counts(c), ProblemInstance::SoftmaxL2(p)) => p.smoothness(&nonzero(c)),
            (_, ProblemInstance::Quadratic(p)) => p.lipschitz(),
            _ => unreachable!("accumulator matches its instance"),
        })
    }

    /// Mean linear term of the quadratic rounds, if this is a quadratic.
    pub fn mean_linear_term(&self) -> Option<Vec<f64>> {
        match &self.acc {
            Accumulator::Linear(sum) if self.rounds > 0 => Some(self.mean_linear(sum)),
            _ => None,
        }
    }

    fn mean_linear(&self, sum: &[f64]) -> Vec<f64> {
        sum.iter().map(|s| s / self.rounds as f64).collect()
    }

    fn require_rounds(&self) -> Result<()> {
        if self.rounds == 0 {
            Err(Error::InvalidArgument("aggregate holds no rounds".into()))
        } else {
            Ok(())
        }
    }
}

fn nonzero(counts: &[f64]) -> Vec<(usize, f64)> {
    counts.iter().enumerate().filter(|(_, c)| **c > 0.0).map(|(i, c)| (i, *c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{canonical_quadratic, synth_classification};
    use approx::assert_relative_eq;
    use std::sync::Arc;

    #[test]
    fn aggregate_equals_sum_of_rounds() {
        let ds = Arc::new(synth_classification(2, 3, 2, 30, 1.0).unwrap());
        let soft = ProblemInstance::SoftmaxL2(SoftmaxProblem::new(ds, 0.01, 0.02, 4).unwrap());
        let quad = ProblemInstance::Quadratic(canonical_quadratic(1, 3, 0.5).unwrap());
        for inst in [soft, quad] {
            let x: Vec<f64> = (0..inst.dim()).map(|i| 0.1 * i as f64 - 0.2).collect();
            let agg = HindsightAggregate::with_rounds(&inst, 9, 7).unwrap();
            let direct: f64 = (1..=7).map(|t| inst.round_loss_grad(t, 9, &x).unwrap().0).sum();
            assert_relative_eq!(agg.total_loss(&x).unwrap(), direct, max_relative = 1e-12);
            let mut gsum = vec![0.0; inst.dim()];
            for t in 1..=7 {
                for (s, g) in gsum.iter_mut().zip(inst.round_loss_grad(t, 9, &x).unwrap().1) {
                    *s += g / 7.0;
                }
            }
            for (a, b) in agg.mean_loss_grad(&x).unwrap().1.iter().zip(&gsum) {
                assert_relative_eq!(*a, *b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn empty_aggregate_is_an_error() {
        let quad = ProblemInstance::Quadratic(canonical_quadratic(1, 2, 0.0).unwrap());
        assert!(HindsightAggregate::new(&quad, 0).mean_loss(&[0.0, 0.0]).is_err());
    }
}
