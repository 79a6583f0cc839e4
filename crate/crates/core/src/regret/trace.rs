use crate::optim::{HyperParams, OptimizerKind};

/// Scalar diagnostics of one round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: u64,
    /// `f_t(x_t)`.
    pub loss: f64,
    /// `sum_{j <= t} f_j(x_j)`.
    pub cum_loss: f64,
    pub grad_inf_norm: f64,
    /// `|Delta_t|_inf` before projection.
    pub step_inf_norm: f64,
    pub alpha_t: f64,
    pub beta1_t: f64,
    pub beta2_t: f64,
    /// Extremes over coordinates of `(t/alpha) sqrt(s_t) - ((t-1)/alpha) sqrt(s_{t-1})`.
    pub cond4_min: f64,
    pub cond4_max: f64,
    /// `min_i s_hat_{t,i} / alpha_t - s_hat_{t-1,i} / alpha_{t-1}`; the
    /// second term is zero at `t = 1`.
    pub gamma_min: f64,
    /// Smallest `zeta` satisfying the accumulated-gradient condition at `t`.
    pub cond3_zeta: f64,
    /// `max_{j <= t} |g_j|_inf`.
    pub g_inf: f64,
    /// `sum_i sqrt(sum_{j <= t} g_{j,i}^4)`.
    pub sum_g_norms: f64,
    /// `max_{j <= t, i} (s_hat_{j,i} + delta/j)^{-1/2}`.
    pub r_max: f64,
}

/// Vectors of one round: the decision `x_t` the loss was evaluated at, the
/// gradient `g_t`, and the momenta after the update.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: u64,
    pub x: Vec<f64>,
    pub g: Vec<f64>,
    pub m: Vec<f64>,
    pub s: Vec<f64>,
    pub s_hat: Vec<f64>,
}

/// Complete record of one online run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTrace {
    pub kind: OptimizerKind,
    pub hp: HyperParams,
    pub seed: u64,
    pub x0: Vec<f64>,
    /// One entry per round, `t = 1..=T`.
    pub records: Vec<StepRecord>,
    /// Per-round vectors; every round when dense, otherwise a thinned subset.
    pub snapshots: Vec<Snapshot>,
    /// Decision after the last update, `x_{T+1}`.
    pub final_x: Vec<f64>,
}

impl TrajectoryTrace {
    pub fn horizon(&self) -> u64 {
        self.records.len() as u64
    }

    /// Whether a snapshot exists for every round.
    pub fn is_dense(&self) -> bool {
        self.snapshots.len() == self.records.len()
    }

    pub fn record(&self, t: u64) -> Option<&StepRecord> {
        t.checked_sub(1).and_then(|i| self.records.get(i as usize))
    }

    /// `sum_{j <= t} f_j(x_j)`.
    pub fn cum_loss(&self, t: u64) -> Option<f64> {
        self.record(t).map(|r| r.cum_loss)
    }

    /// The first `t` rounds of this trace.
    pub fn truncated(&self, t: u64) -> TrajectoryTrace {
        let t = t.min(self.horizon());
        let snapshots: Vec<Snapshot> = self.snapshots.iter().filter(|s| s.t <= t).cloned().collect();
        let final_x = if t == self.horizon() {
            self.final_x.clone()
        } else {
            self.snapshots
                .iter()
                .find(|s| s.t == t + 1)
                .map_or_else(|| self.final_x.clone(), |s| s.x.clone())
        };
        TrajectoryTrace {
            kind: self.kind,
            hp: self.hp,
            seed: self.seed,
            x0: self.x0.clone(),
            records: self.records[..t as usize].to_vec(),
            snapshots,
            final_x,
        }
    }
}
