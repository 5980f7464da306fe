use thiserror::Error;

/// Errors raised by the numerical routines and the command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite function value at point {point}")]
    Evaluation { point: String },

    #[error("invalid interval [{alpha}, {beta}]: require alpha < beta")]
    InvalidInterval { alpha: f64, beta: f64 },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("degenerate density: total mass is zero")]
    DegenerateDensity,

    #[error("negative density {value:e} at atom {index} (tolerance {tolerance:e})")]
    NegativeDensity {
        index: usize,
        value: f64,
        tolerance: f64,
    },

    #[error("{what}: index {index} is outside the stored range 0..={max}")]
    OutOfRange {
        what: &'static str,
        index: usize,
        max: usize,
    },

    #[error("measure too coarse: {atoms} atoms cannot carry {requested} orthonormal polynomials")]
    Rank { atoms: usize, requested: usize },

    #[error("orthonormality defect {defect:e} exceeds {tolerance:e}")]
    Orthogonality { defect: f64, tolerance: f64 },

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("degenerate recurrence: coefficient <xP_{k}, Q_{next}> vanishes", next = .k + 1)]
    DegenerateRecurrence { k: usize },

    #[error("Q functions are only known at atoms; point {0} is not an atom")]
    UnsupportedPoint(String),

    #[error("positivity violation: minor {value:e} for points {witness:?}")]
    PositivityViolation { witness: Vec<usize>, value: f64 },

    #[error("invalid tilt: minor {value:e} for points {witness:?}")]
    InvalidTilt { witness: Vec<usize>, value: f64 },

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("orthogonalization drift: Gram determinant {gram:e} vs product of heights {product:e}")]
    OrthogonalizationDrift { gram: f64, product: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("point {z} lies within {distance:e} of the support")]
    Singularity { z: String, distance: f64 },

    #[error("eigenvalue iteration did not converge")]
    EigenNonConvergence,

    #[error("bound violated ({what}): value {value:e} > bound {bound:e}")]
    BoundViolated {
        what: &'static str,
        value: f64,
        bound: f64,
    },

    #[error("need at least {needed} replicas, got {got}")]
    TooFewReplicas { needed: usize, got: usize },

    #[error("lattice enumeration limited to l <= {max_l}, q <= {max_q} (got l = {l}, q = {q})")]
    CombinatorialLimit {
        l: usize,
        q: usize,
        max_l: usize,
        max_q: usize,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Process exit code for this error: 1 for usage/config problems, 2 for
    /// numerical or model errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Json(_) | Error::Io(_) | Error::UnknownName(_) => 1,
            _ => 2,
        }
    }
}
