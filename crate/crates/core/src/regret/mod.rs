//! The online-learning laboratory.
//!
//! [`run_online`] plays the protocol: at round `t` the learner commits to
//! `x_t`, observes `f_t`, suffers `f_t(x_t)` and updates with `grad f_t(x_t)`.
//! The resulting [`TrajectoryTrace`] feeds regret accounting against the best
//! fixed decision in hindsight, growth-model fits, the closed-form regret
//! bound and the convergence-condition checkers.

mod bound;
mod canonical;
mod conditions;
mod growth;
mod hindsight;
mod online;
mod scenarios;
mod trace;

pub use bound::{measure_constants, measure_constants_at, theoretical_bound, BoundConstants, RRule};
pub use canonical::{canonical_quadratic_setup, canonical_softmax_setup, Setup, ALPHA_GRID};
pub use conditions::{
    check_condition3, check_condition4, check_gamma_psd, Condition3Report, Condition4Report, ConditionReport,
};
pub use growth::{checkpoint_grid, compute_regret, fit_growth, GrowthFit, RegretReport};
pub use hindsight::{best_in_hindsight, solve_hindsight, HindsightOptions, HindsightSolution};
pub use online::{run_online, Retention, RunOptions};
pub use scenarios::{probe_table, region_scenarios, ProbeRow, RegionScenario, PROBE_COLUMNS};
pub use trace::{Snapshot, StepRecord, TrajectoryTrace};
