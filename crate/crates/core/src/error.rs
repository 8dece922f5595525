use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GfError {
    #[error("gauge mismatch: {0} vs {1}")]
    GaugeMismatch(String, String),
    #[error("not invertible: {0}")]
    NotInvertible(String),
    #[error("undetermined: {0}")]
    Undetermined(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("invalid interval: {0}")]
    InvalidInterval(String),
    #[error("not differentiable along axis {axis}: derivative jumps across the face x_{axis} = {at}")]
    NotDifferentiable { axis: usize, at: String },
    #[error("discontinuous representative: {0}")]
    Discontinuous(String),
    #[error("multi-index {0} is not dominated by {1}")]
    OrderNotDominated(String, String),
    #[error("integration by parts invalid: {0}")]
    BoundaryCondition(String),
    #[error("incompatible family: {0}")]
    Incompatible(String),
    #[error("empty common refinement: {0}")]
    EmptyRefinement(String),
    #[error("derivative order {requested} exceeds smoothness budget {budget}")]
    SmoothnessBudget { requested: u32, budget: u32 },
    #[error("point outside the domain: {0}")]
    OutsideDomain(String),
    #[error("value not moderate at {0}; generalized smooth functions require moderate derivatives at every domain point")]
    NotModerate(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("missing preimage for carrier element {0}")]
    MissingPreimage(String),
    #[error("target fails condition {0}")]
    TargetCondition(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, GfError>;
