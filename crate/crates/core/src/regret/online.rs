use super::growth::checkpoint_grid;
use super::{Snapshot, StepRecord, TrajectoryTrace};
use crate::optim::{init_state, step, FeasibleRegion, HyperParams, OptimizerKind};
use crate::problems::ProblemInstance;
use crate::{Error, Result};

/// Which rounds keep their full vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Retention {
    /// Every round.
    Dense,
    /// Every round up to `10^4` rounds, otherwise every tenth.
    Auto,
    /// Every `k`-th round.
    Stride(u64),
}

impl Retention {
    fn stride(self, horizon: u64) -> u64 {
        match self {
            Retention::Dense => 1,
            Retention::Auto if horizon <= 10_000 => 1,
            Retention::Auto => 10,
            Retention::Stride(k) => k.max(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    /// Initial decision; defaults to the origin clipped into the region.
    pub x0: Option<Vec<f64>>,
    pub retention: Retention,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { x0: None, retention: Retention::Auto }
    }
}

/// Plays `horizon` rounds of the online protocol.
///
/// Snapshots are always kept for round 1, the last round and every
/// checkpoint of the geometric grid, whatever the retention policy.
pub fn run_online(
    problem: &ProblemInstance,
    kind: OptimizerKind,
    hp: &HyperParams,
    region: &FeasibleRegion,
    horizon: u64,
    seed: u64,
    options: &RunOptions,
) -> Result<TrajectoryTrace> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    hp.validate(kind)?;
    Error::check_len(problem.dim(), region.dim())?;
    let x0 = match &options.x0 {
        Some(x) => x.clone(),
        None => region.clip(&vec![0.0; region.dim()]),
    };
    let mut state = init_state(kind, &x0, region)?;
    let stride = options.retention.stride(horizon);
    let checkpoints = checkpoint_grid(horizon);
    let keep = |t: u64| t == 1 || t == horizon || t % stride == 0 || checkpoints.contains(&t);

    let mut tracker = Tracker::new(region.dim());
    let mut records = Vec::with_capacity(horizon as usize);
    let mut snapshots = Vec::new();
    let mut cum_loss = 0.0;
    for t in 1..=horizon {
        let (loss, g) = problem.round_loss_grad(t, seed, &state.x)?;
        if !loss.is_finite() {
            return Err(Error::NumericFailure { step: t, what: format!("loss is {loss}") });
        }
        let (next, outcome) = step(&state, &g, hp, region)?;
        cum_loss += loss;
        let mut record = StepRecord {
            t,
            loss,
            cum_loss,
            grad_inf_norm: inf_norm(&g),
            step_inf_norm: inf_norm(&outcome.delta_applied),
            alpha_t: hp.step_size(t),
            beta1_t: if kind == OptimizerKind::FastAdaBelief { hp.beta1_at(t) } else { hp.beta1 },
            beta2_t: hp.beta2_at(t),
            cond4_min: 0.0,
            cond4_max: 0.0,
            gamma_min: 0.0,
            cond3_zeta: 0.0,
            g_inf: 0.0,
            sum_g_norms: 0.0,
            r_max: 0.0,
        };
        tracker.observe(&mut record, hp, &g, &next.s, &next.s_hat);
        records.push(record);
        if keep(t) {
            snapshots.push(Snapshot {
                t,
                x: state.x.clone(),
                g,
                m: next.m.clone(),
                s: next.s.clone(),
                s_hat: next.s_hat.clone(),
            });
        }
        state = next;
    }
    Ok(TrajectoryTrace {
        kind,
        hp: *hp,
        seed,
        x0,
        records,
        snapshots,
        final_x: state.x,
    })
}

pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, b| a.max(b.abs()))
}

/// Running per-coordinate accumulators behind the per-round diagnostics.
#[derive(Debug, Clone)]
pub(crate) struct Tracker {
    t: u64,
    sqrt_s_prev: Vec<f64>,
    s_hat_prev: Vec<f64>,
    alpha_prev: f64,
    weighted: Vec<f64>,
    sum_g2: Vec<f64>,
    sum_g4: Vec<f64>,
    g_inf: f64,
    r_max: f64,
}

impl Tracker {
    pub(crate) fn new(n: usize) -> Self {
        Tracker {
            t: 0,
            sqrt_s_prev: vec![0.0; n],
            s_hat_prev: vec![0.0; n],
            alpha_prev: f64::NAN,
            weighted: vec![0.0; n],
            sum_g2: vec![0.0; n],
            sum_g4: vec![0.0; n],
            g_inf: 0.0,
            r_max: 0.0,
        }
    }

    pub(crate) fn observe(&mut self, rec: &mut StepRecord, hp: &HyperParams, g: &[f64], s: &[f64], s_hat: &[f64]) {
        self.t += 1;
        let t = self.t as f64;
        let alpha_t = hp.step_size(self.t);
        let b2 = hp.beta2_at(self.t);
        let vanishing = hp.delta / t;

        let (mut c4_min, mut c4_max) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut gamma = f64::INFINITY;
        let mut zeta: f64 = 0.0;
        let mut sum_norms = 0.0;
        for i in 0..g.len() {
            let sq = s[i].sqrt();
            let inc = (t / hp.alpha) * sq - ((t - 1.0) / hp.alpha) * self.sqrt_s_prev[i];
            c4_min = c4_min.min(inc);
            c4_max = c4_max.max(inc);
            self.sqrt_s_prev[i] = sq;

            let prev = if self.t == 1 { 0.0 } else { self.s_hat_prev[i] / self.alpha_prev };
            gamma = gamma.min(s_hat[i] / alpha_t - prev);
            self.s_hat_prev[i] = s_hat[i];

            let g2 = g[i] * g[i];
            self.weighted[i] = b2 * self.weighted[i] + (1.0 - b2) * g2;
            self.sum_g2[i] += g2;
            self.sum_g4[i] += g2 * g2;
            zeta = zeta.max(zeta_ratio(self.sum_g2[i].sqrt(), (t / hp.alpha) * self.weighted[i].sqrt()));
            sum_norms += self.sum_g4[i].sqrt();

            self.g_inf = self.g_inf.max(g[i].abs());
            self.r_max = self.r_max.max((s_hat[i] + vanishing).powf(-0.5));
        }
        self.alpha_prev = alpha_t;
        rec.cond4_min = c4_min;
        rec.cond4_max = c4_max;
        rec.gamma_min = gamma;
        rec.cond3_zeta = zeta;
        rec.g_inf = self.g_inf;
        rec.sum_g_norms = sum_norms;
        rec.r_max = self.r_max;
    }
}

/// `rhs / lhs`, with `0/0 = 0` and `x/0 = inf`.
pub(crate) fn zeta_ratio(rhs: f64, lhs: f64) -> f64 {
    if rhs == 0.0 {
        0.0
    } else if lhs == 0.0 {
        f64::INFINITY
    } else {
        rhs / lhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{canonical_quadratic, QuadraticProblem};
    use nalgebra::DMatrix;

    fn zero_quadratic() -> ProblemInstance {
        ProblemInstance::Quadratic(QuadraticProblem::new(DMatrix::identity(3, 3), vec![0.0; 3], 0.0).unwrap())
    }

    #[test]
    fn stationary_start_stays_put() {
        let region = FeasibleRegion::uniform(3, -1.0, 1.0).unwrap();
        for kind in OptimizerKind::ALL {
            let hp = HyperParams::defaults_for(kind);
            let tr = run_online(&zero_quadratic(), kind, &hp, &region, 50, 1, &RunOptions::default()).unwrap();
            assert!(tr.records.iter().all(|r| r.loss == 0.0 && r.grad_inf_norm == 0.0));
            assert!(tr.snapshots.iter().all(|s| s.x == vec![0.0; 3]));
            assert_eq!(tr.final_x, vec![0.0; 3]);
        }
    }

    #[test]
    fn single_round() {
        let region = FeasibleRegion::uniform(3, -1.0, 1.0).unwrap();
        let p = ProblemInstance::Quadratic(canonical_quadratic(0, 3, 1.0).unwrap());
        let hp = HyperParams::defaults_for(OptimizerKind::FastAdaBelief);
        let tr = run_online(&p, OptimizerKind::FastAdaBelief, &hp, &region, 1, 1, &RunOptions::default()).unwrap();
        assert_eq!(tr.records.len(), 1);
        assert_eq!(tr.snapshots.len(), 1);
        assert!(run_online(&p, OptimizerKind::FastAdaBelief, &hp, &region, 0, 1, &RunOptions::default()).is_err());
    }

    #[test]
    fn deterministic_and_thinned() {
        let region = FeasibleRegion::uniform(4, -5.0, 5.0).unwrap();
        let p = ProblemInstance::Quadratic(canonical_quadratic(2, 4, 1.0).unwrap());
        let hp = HyperParams::defaults_for(OptimizerKind::Adam);
        let dense = run_online(&p, OptimizerKind::Adam, &hp, &region, 300, 4, &RunOptions::default()).unwrap();
        assert_eq!(dense, run_online(&p, OptimizerKind::Adam, &hp, &region, 300, 4, &RunOptions::default()).unwrap());
        assert!(dense.is_dense());
        let opts = RunOptions { retention: Retention::Stride(50), ..RunOptions::default() };
        let thin = run_online(&p, OptimizerKind::Adam, &hp, &region, 300, 4, &opts).unwrap();
        assert_eq!(thin.records, dense.records);
        let kept: Vec<u64> = thin.snapshots.iter().map(|s| s.t).collect();
        assert_eq!(kept, vec![1, 50, 100, 128, 150, 200, 250, 256, 300]);
        assert!(!thin.is_dense());
    }

    #[test]
    fn zeta_conventions() {
        assert_eq!(zeta_ratio(0.0, 0.0), 0.0);
        assert_eq!(zeta_ratio(1.0, 0.0), f64::INFINITY);
        assert_eq!(zeta_ratio(1.0, 4.0), 0.25);
    }
}
