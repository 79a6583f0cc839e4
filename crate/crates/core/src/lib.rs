//! Adaptive gradient optimizers for strongly convex online learning.
//!
//! The crate is split into three layers:
//!
//! * [`optim`] holds the stateful step kernels (FastAdaBelief plus the SGD,
//!   Adam, Yogi, AdaBound, AdaBelief and SAdam baselines), the box feasible
//!   region and the diagonally weighted projection onto it.
//! * [`problems`] provides loss/gradient oracles for strongly convex test
//!   problems (mini-batch l2-regularized softmax regression and quadratics),
//!   dataset generation and CSV ingestion.
//! * [`regret`] runs the online protocol, computes regret against the best
//!   decision in hindsight, fits growth models, evaluates the closed-form
//!   regret bound and checks the convergence conditions along a trajectory.

pub mod error;
pub mod optim;
pub mod problems;
pub mod regret;

pub use error::{Error, Result};
