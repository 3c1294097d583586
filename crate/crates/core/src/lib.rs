//! Representative version selection and learned run-time dispatch for
//! multiversioned code.
//!
//! The pipeline starts from a *scenario*: a set of differently optimized
//! versions of one hot function, a set of input datasets described by
//! numeric features, and the measured runtime of every version on every
//! dataset. From there:
//!
//! 1. [`model`] ingests and validates the scenario and turns runtimes into
//!    speedups over the baseline version.
//! 2. [`repselect`] picks a small representative subset of versions that
//!    keeps most of the achievable speedup, under count, code-size and
//!    per-dataset loss constraints.
//! 3. [`learners`] trains the run-time mapping from dataset features to a
//!    version: direct classifiers (decision tree, rule list) or per-version
//!    performance predictors (regression tree, linear regression), with
//!    k-fold cross validation.
//! 4. [`dispatch`] compiles a classifier into a flat dispatcher, serializes
//!    it, renders it through a source template, accounts for code growth
//!    and simulates the resulting adaptive binary on held-out datasets.
//! 5. [`synthgen`] generates seeded synthetic scenarios with a planted
//!    feature-to-winner structure for testing and experiments.
//!
//! The `mvtool` binary wraps these steps as `gen`, `select`, `train`,
//! `cv`, `emit` and `simulate`; see [`cli`]. Runnable walkthroughs of each
//! capability live in the crate's `examples/` directory.

pub mod cli;
pub mod dispatch;
mod error;
pub mod learners;
pub mod model;
pub mod report;
pub mod repselect;
pub mod rng;
pub mod synthgen;

pub use error::{Error, Result};
pub use model::{DatasetId, DatasetRecord, Scenario, SpeedupMatrix, Version, VersionId};
