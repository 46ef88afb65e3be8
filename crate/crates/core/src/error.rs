use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScalarError {
    #[error("removable singularity at ỹ = z̃ = 0")]
    Degenerate,
    #[error("point within the diagonal guard (ỹ − z̃ = {gap:e})")]
    NearDiagonal { gap: f64 },
    #[error("domain error: {0}")]
    Domain(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("R/h = {ratio} is not an integer")]
    NonIntegral { ratio: f64 },
    #[error("invalid grid parameters: {0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("Newton did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("line search failed at iteration {iteration} (residual {residual:e})")]
    LineSearch { iteration: usize, residual: f64 },
    #[error("linear solve failed: {0}")]
    Linear(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Debug, Error)]
pub enum CandidateError {
    #[error("candidate needs n in {{8, 10, 12}}, got {0}")]
    Dimension(usize),
    #[error("point ({s}, {t}) is off the candidate domain")]
    Domain { s: f64, t: f64 },
    #[error("solution has m = {m} but candidate has n = {n}")]
    Mismatch { m: usize, n: usize },
    #[error("T(r) undefined: denominator {denominator:e} >= 0")]
    TUndefined { denominator: f64 },
}

#[derive(Debug, Error)]
pub enum EigenError {
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("inverse iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RigorError {
    #[error("guard violated: {0}")]
    Guard(&'static str),
    #[error("operation not differentiable: {0}")]
    NotDifferentiable(&'static str),
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("cache header mismatch: {0}")]
    HeaderMismatch(String),
    #[error("content hash mismatch")]
    HashMismatch,
    #[error("malformed file: {0}")]
    Malformed(String),
    #[error("nothing to export: {0}")]
    EmptyStage(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertificateError {
    #[error("report hash does not match its contents")]
    TamperedReport,
    #[error("prerequisite failed: {0}")]
    PrerequisiteFailed(String),
    #[error("report does not belong to these inputs: {0}")]
    InputMismatch(String),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("solve failed: {0}")]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Candidate(#[from] CandidateError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Rigor(#[from] RigorError),
    #[error(transparent)]
    Grid(#[from] GridError),
}
