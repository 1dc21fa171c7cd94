use thiserror::Error;

/// Errors shared by the operator model, the eigensolver, and the hierarchy.
///
/// The solver-refusal variants ([`Error::DegenerateState`], [`Error::IllConditioned`],
/// [`Error::NoisyDerivative`], [`Error::StateCrossing`]) are contracts, not bugs: they
/// fire when the requested expansion is not numerically meaningful and carry enough
/// context to say why. The CLI maps them to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    /// Matrix shape or band-storage violation (dim = 0, bandwidth >= dim, ...).
    #[error("invalid band shape: {0}")]
    InvalidShape(String),

    /// Two operators that must share a basis do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Potential or grid specification that cannot produce a bound-state problem.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// A band LDL^T pivot became exactly singular (or overflowed) at `column`.
    /// Retry contract: perturb the shift by `degeneracy_gap * max(|shift|, scale)`
    /// and factor again; the perturbation is deterministic.
    #[error("exact singular pivot in band factorization at column {column}")]
    ExactSingularPivot { column: usize },

    /// The requested zero-order state has a neighboring eigenvalue closer than
    /// `degeneracy_gap * span`; a single-vector expansion around it is meaningless.
    #[error("state {state_index} is quasi-degenerate (suspected gap below {gap_bound:.3e}); refusing at order {order}")]
    DegenerateState {
        state_index: usize,
        /// Absolute gap threshold that was violated, `degeneracy_gap * span`.
        gap_bound: f64,
        /// Perturbation order at which the refusal fired (0 = zero-order solve).
        order: usize,
    },

    /// The bordered correction system is too ill-conditioned to trust.
    #[error("bordered system ill-conditioned at order {order}: {detail}")]
    IllConditioned { order: usize, detail: String },

    /// Inverse iteration failed to reach the residual tolerance.
    #[error("inverse iteration stalled for state {state_index}: residual {residual:.3e} after {iterations} iterations")]
    InverseIterationStalled {
        state_index: usize,
        residual: f64,
        iterations: usize,
    },

    /// Finite-difference derivative extraction has no significant digits at this
    /// step size; the step is misconfigured (usually too small: rounding noise).
    #[error("finite-difference derivative of order {k} is noise at step {step:.3e}: Richardson pair disagrees by {disagreement:.3e} (value {value:.3e}); adjust the step")]
    NoisyDerivative {
        k: usize,
        step: f64,
        disagreement: f64,
        value: f64,
    },

    /// Index-tracked eigenvalue continuation jumped by more than half the local
    /// spectral gap between grid points; the tracked state likely crossed another.
    #[error("state {state_index} lost between lambda = {lambda_before} and {lambda_after}: jump {jump:.3e} exceeds half the local gap {local_gap:.3e}")]
    StateCrossing {
        state_index: usize,
        lambda_before: f64,
        lambda_after: f64,
        jump: f64,
        local_gap: f64,
    },

    /// The split carries a constant perturbation term; the plain power series in
    /// `lambda - lambda_ref` is not defined for it. Fold the constant into an
    /// effective first-order operator with `HamiltonianSplit::fold_for_target`.
    #[error("split carries a constant perturbation term; fold it for a target coupling before expanding")]
    ConstantTermNotFolded,

    /// Configuration file problem (parse error, unknown key, invalid value).
    /// The CLI maps this to exit code 1.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code the command-line front end reports for this error:
    /// 1 for problems with the request itself (shape, model, configuration,
    /// I/O), 2 for a solver refusal — a well-posed request whose answer would
    /// not be numerically meaningful.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidShape(_)
            | Error::DimensionMismatch(_)
            | Error::InvalidModel(_)
            | Error::Config(_)
            | Error::Io(_) => 1,
            Error::ExactSingularPivot { .. }
            | Error::DegenerateState { .. }
            | Error::IllConditioned { .. }
            | Error::InverseIterationStalled { .. }
            | Error::NoisyDerivative { .. }
            | Error::StateCrossing { .. }
            | Error::ConstantTermNotFolded => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
