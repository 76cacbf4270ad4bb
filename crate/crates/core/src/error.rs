use thiserror::Error;

#[derive(Debug, Error)]
pub enum LoclabError {
    #[error("non-finite matrix")]
    NonFiniteMatrix,
    #[error("divergent integral")]
    DivergentIntegral,
    #[error("divergent tilt: coordinate {coord} with tilt {theta} at t = 0")]
    DivergentTilt { coord: usize, theta: f64 },
    #[error("no convergence in {0}")]
    NoConvergence(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("construction infeasible: {0}")]
    ConstructionInfeasible(String),
    #[error("ladder exceeds representable depth after {depth} rungs ({detail})")]
    LadderTooDeep { depth: usize, detail: String },
    #[error("ladder is not contracting: {0}")]
    LadderNotContracting(String),
    #[error("ladder threshold bound violated: s = {s} > 15/6")]
    LadderThresholdBound { s: f64 },
    #[error("Lichnerowicz violation at t = {t}: lambda_max = {lambda_max} > 1/t")]
    LichnerowiczViolation { t: f64, lambda_max: f64 },
    #[error("record time {0} is not a multiple of the step")]
    MisalignedSchedule(f64),
    #[error("model spec: {0}")]
    ModelSpec(String),
    #[error("config: {0}")]
    Config(String),
    #[error("unknown suite '{0}'")]
    UnknownSuite(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LoclabError>;
