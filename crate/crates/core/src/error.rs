use thiserror::Error;

/// Direction a trajectory was heading when it left the admissible region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Heading {
    Down,
    Up,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("point at |x| = {radius} lies outside the metric domain (|x| >= {inner})")]
    PointOutsideDomain { radius: f64, inner: f64 },
    #[error("normal has g-length {length}, expected 1")]
    NonUnitNormal { length: f64 },
    #[error("flux sequence does not converge: {0}")]
    QuadratureDivergence(String),
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error("trajectory entered the horizon guard band at t = {t}")]
    HorizonCollision { t: f64 },
    #[error("slope blew up at t = {t}")]
    SlopeBlowup { t: f64, heading: Heading },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("lower limit t = {t} is at or below the singular radius {singular}")]
    SingularLowerLimit { t: f64, singular: f64 },
    #[error("no sign change of the shooting residual on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
    #[error("root finder exceeded {0} iterations")]
    MaxIterations(usize),
    #[error("leaf did not converge: last sup-difference {last_diff} > {tol}")]
    NotConverged { last_diff: f64, tol: f64 },
    #[error("tail differences are below {0}; decay fit is meaningless")]
    TailTooFlat(f64),
    #[error("insufficient range: {0}")]
    InsufficientRange(String),
    #[error("quadrature singularity: {0}")]
    QuadratureSingularity(String),
    #[error("exponent alpha = {alpha} must lie in (0, {limit})")]
    ExponentOutOfRange { alpha: f64, limit: f64 },
    #[error("tail estimate unreliable: fit residual {residual}")]
    TailEstimateUnreliable { residual: f64 },
    #[error("tail too short: {0}")]
    TailTooShort(String),
    #[error("bump steepness too low: max Laplacian {max_laplacian} on the annulus")]
    SteepnessTooLow { max_laplacian: f64 },
    #[error("bump centers violate the overlap condition: {0}")]
    OverlapViolation(String),
    #[error("sign check failed: {0}")]
    SignCheckFailed(String),
    #[error("conformal factor 1 + t*delta*v = {value} is not positive")]
    PositivityViolation { value: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
