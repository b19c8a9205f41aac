//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors reported by capacity algebra, solvers, tests and simulations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A Möbius inversion produced a mass below the tolerance `-1e-10`.
    #[error("table is not a belief function: Möbius mass {mass:e} on subset {mask}")]
    NotBeliefFunction { mask: u32, mass: f64 },

    /// Malformed masses, outcome spaces, pmfs or other structural input.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A parameter lies outside the declared domain of a model.
    #[error("parameter outside the model domain: {0}")]
    DomainError(String),

    /// A level-set sampler emitted the empty set.
    #[error("level-set sampler emitted the empty set")]
    SamplerError,

    /// The simplex method exceeded its iteration cap.
    #[error("linear program failed: {0}")]
    LpNumericalFailure(String),

    /// A linear program has no feasible point.
    #[error("linear program is infeasible")]
    LpInfeasible,

    /// A linear program is unbounded in the optimization direction.
    #[error("linear program is unbounded")]
    LpUnbounded,

    /// The null and alternative cores intersect, so no test has lower power above its size.
    #[error("hypotheses are not robustly testable: the two cores intersect")]
    NotRobustlyTestable,

    /// An iterative solver hit its iteration cap.
    #[error("solver did not converge: {0}")]
    NonConvergence(String),

    /// The likelihood ratio is constant on the support.
    #[error("likelihood ratio is constant; no nontrivial test exists")]
    DegenerateRatio,

    /// The exact distribution of the log-ratio sum is too expensive to enumerate.
    #[error("exact mode too large: n = {n} exceeds cap {cap} or atom budget")]
    ExactModeTooLarge { n: usize, cap: usize },

    /// More than one multiplier vector satisfies the stationarity conditions.
    #[error("Lagrange multipliers are not unique (strict complementarity fails)")]
    MultiplierNotUnique,

    /// No direction strictly satisfies the active inequality constraints.
    #[error("Mangasarian-Fromovitz constraint qualification fails")]
    MfcqViolation,

    /// A score requires division by a zero null density.
    #[error("null density vanishes at outcome {0} where the derivative is nonzero")]
    DivisionBySupportGap(usize),

    /// The null least-favorable density moves along some cone generator.
    #[error("null least-favorable density is not constant along generator {0}")]
    NullLfpNotConstant(usize),

    /// The functional has no influence curve on the tangent set.
    #[error("functional is not differentiable on this cone: {0}")]
    FunctionalNotDifferentiable(String),

    /// Mixture cores intersect in a Bayes-Dempster-Shafer problem.
    #[error("mixture cores intersect")]
    CoresIntersect,

    /// A runs test needs at least two of each symbol.
    #[error("binary sequence is degenerate for the runs test")]
    DegenerateSequence,

    /// Configuration could not be read or validated.
    #[error("configuration error: {0}")]
    Config(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
