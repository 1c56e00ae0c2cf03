use thiserror::Error;

/// Errors surfaced by the matrix containers, solvers, and data loaders.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {0}")]
    ShapeMismatch(&'static str),

    #[error("non-finite value rejected in {0}")]
    NonFinite(&'static str),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported regularizer combination: {0}")]
    Unsupported(String),

    #[error("degenerate subproblem ({0}): the kernel vanishes and every point is a minimizer")]
    DegenerateSubproblem(&'static str),

    #[error("scalar root solve failed: {0}")]
    RootSolve(&'static str),

    #[error("SVD did not converge within {sweeps} Jacobi sweeps")]
    SvdNonConvergence { sweeps: usize },

    #[error("backtracking exceeded {cap} doublings; the certificate cannot be satisfied")]
    BacktrackingExceeded { cap: u32 },

    #[error("kernel is not strongly convex; the inertial method cannot start")]
    StrongConvexityRequired,

    #[error("semi-convexity modulus unavailable (hard sparsity constraint); the inertial method refuses")]
    SemiConvexityUnavailable,

    #[error("instance too large for the brute-force oracle: {size} > {cap}")]
    InstanceTooLarge { size: usize, cap: usize },

    #[error("test set is empty")]
    EmptyTestSet,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
