use super::OptimizerKind;
use crate::{Error, Result};

/// Second-moment decay schedule `beta2_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Beta2Schedule {
    Constant(f64),
    /// `beta2_t = 1 - c / t`, the strongly convex schedule.
    SAdam { c: f64 },
}

impl Beta2Schedule {
    pub fn at(&self, t: u64) -> f64 {
        match *self {
            Beta2Schedule::Constant(b) => b,
            Beta2Schedule::SAdam { c } => 1.0 - c / t as f64,
        }
    }
}

/// Base stepsize schedule `alpha_t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepSchedule {
    InverseT,
    InverseSqrtT,
    Constant,
}

impl StepSchedule {
    pub fn rate(self, alpha: f64, t: u64) -> f64 {
        match self {
            StepSchedule::InverseT => alpha / t as f64,
            StepSchedule::InverseSqrtT => alpha / (t as f64).sqrt(),
            StepSchedule::Constant => alpha,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StepSchedule::InverseT => "inverse_t",
            StepSchedule::InverseSqrtT => "inverse_sqrt_t",
            StepSchedule::Constant => "constant",
        }
    }
}

/// Hyperparameters shared by every kernel. Fields a kernel does not use are
/// ignored by it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperParams {
    pub alpha: f64,
    pub beta1: f64,
    /// Decay of the first-moment rate, `beta1_t = beta1 * lambda^t`
    /// (FastAdaBelief only).
    pub lambda: f64,
    pub beta2: Beta2Schedule,
    /// Numerator of the vanishing factor `delta / t`.
    pub delta: f64,
    /// Denominator guard for the square-root baselines.
    pub epsilon: f64,
    pub schedule: StepSchedule,
    /// AdaBound limit rate `eta_final`.
    pub bound_final_lr: f64,
    /// AdaBound convergence speed `gamma`.
    pub bound_gamma: f64,
}

impl HyperParams {
    /// Defaults used by the experiments for each optimizer: `beta1 = 0.9`
    /// everywhere, `beta2 = 0.999` with `alpha / sqrt(t)` for the convex
    /// methods and `beta2_t = 1 - 0.9/t` with `alpha / t` for SAdam and
    /// FastAdaBelief.
    pub fn defaults_for(kind: OptimizerKind) -> Self {
        let base = HyperParams {
            alpha: 0.01,
            beta1: 0.9,
            lambda: 1.0,
            beta2: Beta2Schedule::Constant(0.999),
            delta: 0.0,
            epsilon: 1e-8,
            schedule: StepSchedule::InverseSqrtT,
            bound_final_lr: 0.1,
            bound_gamma: 1e-3,
        };
        match kind {
            OptimizerKind::SgdMomentum => HyperParams {
                alpha: 0.1,
                epsilon: 0.0,
                ..base
            },
            OptimizerKind::Adam
            | OptimizerKind::Yogi
            | OptimizerKind::AdaBound
            | OptimizerKind::AdaBelief => base,
            OptimizerKind::SAdam | OptimizerKind::FastAdaBelief => HyperParams {
                beta2: Beta2Schedule::SAdam { c: 0.9 },
                delta: 0.1,
                epsilon: 0.0,
                schedule: StepSchedule::InverseT,
                ..base
            },
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    /// `alpha_t` for step `t >= 1`.
    pub fn step_size(&self, t: u64) -> f64 {
        self.schedule.rate(self.alpha, t)
    }

    /// `beta1_t = beta1 * lambda^t`.
    pub fn beta1_at(&self, t: u64) -> f64 {
        if self.lambda == 1.0 {
            self.beta1
        } else {
            self.beta1 * self.lambda.powf(t as f64)
        }
    }

    pub fn beta2_at(&self, t: u64) -> f64 {
        self.beta2.at(t)
    }

    pub fn validate(&self, kind: OptimizerKind) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::hyper("alpha", format!("must be positive, got {}", self.alpha)));
        }
        if !(0.0..1.0).contains(&self.beta1) {
            return Err(Error::hyper("beta1", format!("must lie in [0, 1), got {}", self.beta1)));
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::hyper("lambda", format!("must lie in (0, 1], got {}", self.lambda)));
        }
        match self.beta2 {
            Beta2Schedule::Constant(b) if !(0.0..1.0).contains(&b) => {
                return Err(Error::hyper("beta2", format!("must lie in [0, 1), got {b}")));
            }
            Beta2Schedule::SAdam { c } if !(c > 0.0 && c < 1.0) => {
                return Err(Error::hyper("beta2", format!("schedule constant must lie in (0, 1), got {c}")));
            }
            _ => {}
        }
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(Error::hyper("delta", format!("must be nonnegative, got {}", self.delta)));
        }
        if kind.uses_vanishing_factor() && self.delta <= 0.0 {
            return Err(Error::hyper("delta", format!("{kind} requires delta > 0")));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::hyper("epsilon", format!("must be nonnegative, got {}", self.epsilon)));
        }
        if kind == OptimizerKind::AdaBound {
            if !(self.bound_final_lr.is_finite() && self.bound_final_lr > 0.0) {
                return Err(Error::hyper("bound_final_lr", "must be positive"));
            }
            if !(self.bound_gamma.is_finite() && self.bound_gamma > 0.0) {
                return Err(Error::hyper("bound_gamma", "must be positive"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sadam_schedule_starts_at_one_minus_c() {
        let b = Beta2Schedule::SAdam { c: 0.9 };
        assert!((b.at(1) - 0.1).abs() < 1e-15);
        assert!((b.at(10) - 0.91).abs() < 1e-15);
        assert!(b.at(1_000_000) < 1.0);
    }

    #[test]
    fn schedules() {
        assert_eq!(StepSchedule::InverseT.rate(0.5, 4), 0.125);
        assert_eq!(StepSchedule::InverseSqrtT.rate(0.5, 4), 0.25);
        assert_eq!(StepSchedule::Constant.rate(0.5, 4), 0.5);
    }

    #[test]
    fn beta1_decays_geometrically() {
        let hp = HyperParams {
            lambda: 0.5,
            ..HyperParams::defaults_for(OptimizerKind::FastAdaBelief)
        };
        assert!((hp.beta1_at(2) - 0.225).abs() < 1e-15);
    }

    #[test]
    fn validation_rejects_bad_values() {
        let kind = OptimizerKind::FastAdaBelief;
        let ok = HyperParams::defaults_for(kind);
        assert!(ok.validate(kind).is_ok());
        for bad in [
            HyperParams { alpha: 0.0, ..ok },
            HyperParams { beta1: 1.0, ..ok },
            HyperParams { lambda: 0.0, ..ok },
            HyperParams { delta: 0.0, ..ok },
            HyperParams { beta2: Beta2Schedule::SAdam { c: 1.0 }, ..ok },
            HyperParams { beta2: Beta2Schedule::Constant(1.0), ..ok },
            HyperParams { epsilon: -1.0, ..ok },
        ] {
            assert!(bad.validate(kind).is_err(), "{bad:?}");
        }
        // delta = 0 is legal for the square-root baselines
        let adam = HyperParams { delta: 0.0, ..HyperParams::defaults_for(OptimizerKind::Adam) };
        assert!(adam.validate(OptimizerKind::Adam).is_ok());
    }
}
