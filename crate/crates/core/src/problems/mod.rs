//! Loss/gradient oracles for strongly convex test problems.
//!
//! Two families are provided: mini-batch l2-regularized softmax regression
//! over a [`Dataset`], and quadratics `1/2 x'Ax + b_t'x` whose linear term may
//! carry per-round Gaussian noise. [`ProblemInstance`] wraps either one behind
//! the online protocol's interface: a per-round loss/gradient oracle keyed by
//! `(seed, t)` and an aggregate of the first `T` rounds for the best decision
//! in hindsight.

mod dataset;
mod gradcheck;
mod instance;
mod quadratic;
mod sampling;
mod softmax;

pub use dataset::{load_csv, synth_classification, Dataset};
pub use gradcheck::finite_diff_grad;
pub use instance::{HindsightAggregate, ProblemInstance};
pub use quadratic::{canonical_quadratic, quadratic_grad, quadratic_loss, QuadraticProblem};
pub use sampling::{round_rng, sample_batch, MiniBatch};
pub use softmax::{softmax_l2_grad, softmax_l2_loss, softmax_l2_loss_grad, SoftmaxProblem};
