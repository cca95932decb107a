use thiserror::Error;

/// Errors produced anywhere in the realization pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unresolved symbol `{0}`")]
    UnresolvedSymbol(String),

    #[error("denominator is the zero polynomial")]
    ZeroDenominator,

    #[error("non-finite coefficient or matrix entry in {0}")]
    NonFinite(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("entry ({row}, {col}) has a pole within tolerance of s = {s}")]
    PoleProximity { row: usize, col: usize, s: String },

    #[error("entry ({row}, {col}) is improper (numerator degree exceeds denominator degree)")]
    Improper { row: usize, col: usize },

    #[error("rank decision is tolerance-ambiguous: {0}")]
    AmbiguousRank(String),

    #[error("minimal realization has odd state dimension {0}; doubled-up form requires even")]
    OddStateDimension(usize),

    #[error("s = {s} lies on an eigenvalue of -A (smallest singular value {sigma_min:.3e})")]
    Singular { s: String, sigma_min: f64 },

    #[error("state space is already normalized")]
    AlreadyNormalized,

    #[error("state space carries no normalization record")]
    NotNormalized,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("eigenvalue pair condition violated: min |l_i + conj(l_j)| = {min_pair_sum:.3e}")]
    EigenPairCondition { min_pair_sum: f64 },

    #[error("feedthrough D is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("feedthrough D is unitary but violates DJD^H = J (residual {residual:.3e})")]
    NotSymplectic { residual: f64 },

    #[error("Sylvester operator is singular")]
    SingularSylvester,

    #[error("solution X is not Hermitian (asymmetry {residual:.3e})")]
    NonHermitianX { residual: f64 },

    #[error("output constraint on X is inconsistent (residual {residual:.3e}); transfer matrix violates the symplectic condition or input is not minimal")]
    OutputConstraint { residual: f64 },

    #[error("X has inertia ({positive}+, {negative}-), expected ({expected}+, {expected}-): not realizable as a quantum system")]
    Inertia {
        positive: usize,
        negative: usize,
        expected: usize,
    },

    #[error("X is numerically singular (smallest |eigenvalue| {min_abs:.3e})")]
    SingularX { min_abs: f64 },

    #[error("J-factorization residual {residual:.3e} exceeds tolerance")]
    Factorization { residual: f64 },

    #[error("state space is not physically realizable (max residual {residual:.3e})")]
    NotRealizable { residual: f64 },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("schema error at `{path}`: {msg}")]
    Schema { path: String, msg: String },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn schema(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            msg: msg.into(),
        }
    }

    /// Short stable identifier used in machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Syntax { .. } => "syntax",
            Error::UnresolvedSymbol(_) => "unresolved_symbol",
            Error::ZeroDenominator => "zero_denominator",
            Error::NonFinite(_) => "non_finite",
            Error::Dimension(_) => "dimension",
            Error::PoleProximity { .. } => "pole_proximity",
            Error::Improper { .. } => "improper",
            Error::AmbiguousRank(_) => "ambiguous_rank",
            Error::OddStateDimension(_) => "odd_state_dimension",
            Error::Singular { .. } => "singular",
            Error::AlreadyNormalized => "already_normalized",
            Error::NotNormalized => "not_normalized",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::EigenPairCondition { .. } => "eigenvalue_pair_condition",
            Error::NotUnitary { .. } => "not_unitary",
            Error::NotSymplectic { .. } => "not_symplectic",
            Error::SingularSylvester => "singular_sylvester",
            Error::NonHermitianX { .. } => "non_hermitian_x",
            Error::OutputConstraint { .. } => "output_constraint",
            Error::Inertia { .. } => "inertia",
            Error::SingularX { .. } => "singular_x",
            Error::Factorization { .. } => "factorization",
            Error::NotRealizable { .. } => "not_realizable",
            Error::Invariant(_) => "invariant",
            Error::Numerical(_) => "numerical",
            Error::Schema { .. } => "schema",
            Error::Json(_) => "json",
            Error::Io(_) => "io",
        }
    }

    /// True for failures caused by files, formats or usage rather than by the model.
    pub fn is_io_or_usage(&self) -> bool {
        matches!(
            self,
            Error::Io(_)
                | Error::Json(_)
                | Error::Schema { .. }
                | Error::Syntax { .. }
                | Error::UnresolvedSymbol(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
