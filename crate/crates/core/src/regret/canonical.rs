use std::sync::Arc;

use crate::optim::{Beta2Schedule, FeasibleRegion, HyperParams, OptimizerKind, StepSchedule};
use crate::problems::{canonical_quadratic, synth_classification, ProblemInstance, SoftmaxProblem};
use crate::Result;

/// Stepsize grid searched for every optimizer.
pub const ALPHA_GRID: [f64; 4] = [0.1, 0.01, 0.001, 0.0001];

/// A complete experiment: problem, region, FastAdaBelief parameters, horizon
/// and run seed.
#[derive(Debug, Clone)]
pub struct Setup {
    pub name: &'static str,
    pub problem: ProblemInstance,
    pub region: FeasibleRegion,
    pub hp: HyperParams,
    pub horizon: u64,
    pub seed: u64,
}

/// Ten-dimensional quadratic with eigenvalues evenly spaced in `[0.1, 1]`,
/// unit linear-term noise and the box `[-5, 5]^10`.
///
/// The stepsize `alpha = 2000` keeps every per-round increment of
/// `(t/alpha) sqrt(s_t)` inside `[0, sigma (1 - beta1)]` with `sigma = 0.1`,
/// and `lambda = 0.9999 < 1` keeps every term of the regret bound finite.
pub fn canonical_quadratic_setup() -> Result<Setup> {
    Ok(Setup {
        name: "quadratic",
        problem: ProblemInstance::Quadratic(canonical_quadratic(0, 10, 1.0)?),
        region: FeasibleRegion::uniform(10, -5.0, 5.0)?,
        hp: HyperParams {
            alpha: 2000.0,
            beta1: 0.9,
            lambda: 0.9999,
            beta2: Beta2Schedule::SAdam { c: 0.9 },
            delta: 100.0,
            epsilon: 0.0,
            schedule: StepSchedule::InverseT,
            ..HyperParams::defaults_for(OptimizerKind::FastAdaBelief)
        },
        horizon: 16384,
        seed: 1,
    })
}

/// Softmax regression on 2000 synthetic samples (10 classes, 20 features,
/// unit class separation), `sigma1 = sigma2 = 0.01`, batches of 32 and the
/// box `[-10, 10]^210`.
pub fn canonical_softmax_setup() -> Result<Setup> {
    let dataset = Arc::new(synth_classification(0, 10, 20, 2000, 1.0)?);
    let problem = SoftmaxProblem::new(dataset, 0.01, 0.01, 32)?;
    let n = problem.dim();
    Ok(Setup {
        name: "softmax_l2",
        problem: ProblemInstance::SoftmaxL2(problem),
        region: FeasibleRegion::uniform(n, -10.0, 10.0)?,
        hp: HyperParams::defaults_for(OptimizerKind::FastAdaBelief).with_alpha(0.1),
        horizon: 16384,
        seed: 1,
    })
}
