use thiserror::Error;

/// Errors raised by the mechanism, force and simulation routines.
///
/// Numeric payloads are carried as `f64` regardless of the scalar type the
/// computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("sides ({a}, {b}, {c}) violate the triangle inequality")]
    DegenerateTriangle { a: f64, b: f64, c: f64 },
    #[error("no crank window reaches {requested} of horizontal travel (best {available})")]
    InsufficientTravel { requested: f64, available: f64 },
    #[error("line through the slider at theta1 = {theta1} rad misses the virtual-bar circle")]
    NoIntersection { theta1: f64 },
    #[error("no B position for theta1 = {theta1} rad, theta2 = {theta2} rad")]
    NoSolution { theta1: f64, theta2: f64 },
    #[error("virtual bar length {ab} reaches the fully opened pair limit {limit}")]
    StopperLimit { ab: f64, limit: f64 },
    #[error("opening angle is not evaluable around theta1 = {theta1}, theta2 = {theta2}")]
    NonSmooth { theta1: f64, theta2: f64 },
    #[error("dx_D/dtheta_A = {0} is too close to zero")]
    SingularJacobian(f64),
    #[error("contact lever {0} mm is too small")]
    DegenerateLever(f64),
    #[error("invalid object: {0}")]
    InvalidObject(String),
    #[error("grasp did not transition to enveloping")]
    NotEnveloping,
    #[error("unknown sweep variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{variable}` is not consumed by target {target}")]
    TargetMismatch { variable: String, target: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
