//! Step kernels for FastAdaBelief and its baselines.
//!
//! Every kernel is a pure function of `(state, gradient, hyperparameters,
//! region)` and returns the successor state together with a [`StepOutcome`].
//! The input state is never mutated, so a failed step leaves the caller's
//! state untouched.

mod hyper;
mod kernels;
mod probe;
mod region;

use std::fmt;
use std::str::FromStr;

pub use hyper::{Beta2Schedule, HyperParams, StepSchedule};
pub use kernels::{
    adabelief_step, adabound_step, adam_step, fastadabelief_step, init_state, sadam_step,
    sgd_momentum_step, step, yogi_step, OptimizerState, StepOutcome,
};
pub use probe::stepsize_probe;
pub use region::{project_weighted, FeasibleRegion};

use crate::Error;

/// Optimizer identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OptimizerKind {
    SgdMomentum,
    Adam,
    Yogi,
    AdaBound,
    AdaBelief,
    SAdam,
    FastAdaBelief,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 7] = [
        OptimizerKind::SgdMomentum,
        OptimizerKind::Adam,
        OptimizerKind::Yogi,
        OptimizerKind::AdaBound,
        OptimizerKind::AdaBelief,
        OptimizerKind::SAdam,
        OptimizerKind::FastAdaBelief,
    ];

    /// The five optimizers whose stepsizes are compared region by region.
    pub const PROBED: [OptimizerKind; 5] = [
        OptimizerKind::SgdMomentum,
        OptimizerKind::Adam,
        OptimizerKind::SAdam,
        OptimizerKind::AdaBelief,
        OptimizerKind::FastAdaBelief,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::SgdMomentum => "sgd_momentum",
            OptimizerKind::Adam => "adam",
            OptimizerKind::Yogi => "yogi",
            OptimizerKind::AdaBound => "adabound",
            OptimizerKind::AdaBelief => "adabelief",
            OptimizerKind::SAdam => "sadam",
            OptimizerKind::FastAdaBelief => "fastadabelief",
        }
    }

    /// Whether the kernel divides by the `1/t`-style diagonal `v + delta/t`.
    pub fn uses_vanishing_factor(self) -> bool {
        matches!(self, OptimizerKind::SAdam | OptimizerKind::FastAdaBelief)
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let kind = match s.trim().to_ascii_lowercase().as_str() {
            "sgd" | "sgd_momentum" | "sgdm" => OptimizerKind::SgdMomentum,
            "adam" => OptimizerKind::Adam,
            "yogi" => OptimizerKind::Yogi,
            "adabound" => OptimizerKind::AdaBound,
            "adabelief" => OptimizerKind::AdaBelief,
            "sadam" => OptimizerKind::SAdam,
            "fastadabelief" | "fast_adabelief" | "fab" => OptimizerKind::FastAdaBelief,
            other => return Err(Error::Unsupported(format!("optimizer `{other}`"))),
        };
        Ok(kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_names_round_trip() {
        for kind in OptimizerKind::ALL {
            assert_eq!(kind.name().parse::<OptimizerKind>().unwrap(), kind);
        }
        assert!("rmsprop".parse::<OptimizerKind>().is_err());
    }
}
