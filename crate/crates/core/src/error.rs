use thiserror::Error;

/// Which of the three operator conditions an ILS candidate violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IlsCondition {
    /// `tr((p⊗q)X) = tr((q⊗p)X*)`, checked as `X = W X* W`.
    SwapAdjoint,
    /// `tr((p⊗p)X) ≥ 0`.
    Positivity,
    /// `tr(X) = 1`.
    Normalization,
}

impl std::fmt::Display for IlsCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            IlsCondition::SwapAdjoint => "(i) swap-adjoint",
            IlsCondition::Positivity => "(ii) positivity",
            IlsCondition::Normalization => "(iii) normalization",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {requested} exceeds the supported limit {limit}")]
    DimensionLimit { requested: usize, limit: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("theorems require dimension ≥ 3 (got dimension {dim})")]
    DimensionExcluded { dim: usize },

    #[error("invalid dimension {0}")]
    InvalidDimension(usize),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not a projection (idempotence {idempotence:.3e}, hermiticity {hermiticity:.3e}, trace {trace})")]
    NotProjection {
        idempotence: f64,
        hermiticity: f64,
        trace: f64,
    },

    #[error("vector is not a unit vector (norm {norm})")]
    NotUnit { norm: f64 },

    #[error("rank {rank} is out of range for dimension {dim}")]
    RankOutOfRange { rank: usize, dim: usize },

    #[error("projections are not pairwise orthogonal (residual {residual:.3e} between #{first} and #{second})")]
    NotOrthogonal {
        first: usize,
        second: usize,
        residual: f64,
    },

    #[error("history choice {choice} at time slot {slot} is out of range ({available} alternatives)")]
    HistoryIndex {
        slot: usize,
        choice: usize,
        available: usize,
    },

    #[error("invalid class-operator model: {0}")]
    InvalidModel(String),

    #[error("empty elementary tensor sum")]
    EmptyTensorSum,

    #[error("operator violates ILS condition(s): {}", list_conditions(.failed))]
    ConditionViolation { failed: Vec<IlsCondition> },

    #[error("form Gram matrix is not Hermitian (residual {residual:.3e}); the functional violates Hermiticity")]
    NonHermitianGram { residual: f64 },

    #[error("functional is not tracially bounded at this truncation: sup |β(p_ξ)| = {sup} exceeds {bound} ({samples} samples, seed {seed})")]
    NotTraciallyBounded {
        sup: f64,
        bound: f64,
        samples: usize,
        seed: u64,
    },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("{path}: {message}")]
    Scenario { path: String, message: String },
}

fn list_conditions(failed: &[IlsCondition]) -> String {
    failed
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

pub type Result<T> = std::result::Result<T, Error>;
