//! Robust minimax likelihood-ratio inference for incomplete models.
//!
//! An incomplete model predicts a *set* of outcomes for each value of the
//! latent variables and stays silent on how one outcome is selected. On a
//! finite outcome space the set of distributions compatible with a parameter
//! value is the core of a belief function. This crate provides:
//!
//! * [`capacity`]: Möbius masses, lower and upper capacities, Choquet integrals
//!   and a dense simplex oracle over the core.
//! * [`model`]: parameterized models, including the two-player entry game and
//!   a Roy-type selection model, plus robust testability checks.
//! * [`lfp`]: least-favorable pairs by a log-barrier interior point method and
//!   their verification.
//! * [`testing`]: minimax likelihood-ratio tests with exact and Gaussian
//!   critical values, size and lower power.
//! * [`localpower`]: directional derivatives of least-favorable pairs, score
//!   tables, efficient influence functions, power envelopes.
//! * [`bds`]: Bayes-Dempster-Shafer tests under priors on composite hypotheses.
//! * [`simlab`]: seeded Monte Carlo designs, selection mechanisms, the
//!   Wald-Wolfowitz runs test and power curves.
//! * [`cli`]: configuration-driven workflows behind the `robust-lr` binary.

pub mod bds;
pub mod cli;
pub mod capacity;
pub mod error;
pub mod lp;
pub mod normal;

pub use error::{Error, Result};
pub mod model;
pub mod lfp;
pub mod localpower;
pub mod nnls;
pub mod qp;
pub mod simlab;
pub mod testing;
