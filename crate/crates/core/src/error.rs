use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("point ({x}, {y}) is too close to a critical point (|grad f| = {grad_norm:e})")]
    NearCritical { x: f64, y: f64, grad_norm: f64 },

    #[error("point ({x}, {y}, {z}) is too close to a critical point (|grad f| = {grad_norm:e})")]
    NearCritical3 { x: f64, y: f64, z: f64, grad_norm: f64 },

    #[error("critical point search did not converge from seed ({x}, {y})")]
    NonConvergence { x: f64, y: f64 },

    #[error("lower-degree Taylor terms are not negligible for degree {degree}")]
    DegreeMismatch { degree: u32 },

    #[error("band [{a}, {b}] is not compact inside the window")]
    NonCompactBand { a: f64, b: f64 },

    #[error("level {t} leaves the window; the level set is not compact")]
    NonCompactLevel { t: f64 },

    #[error("{t} is a critical value; the slice integral is only defined at regular values")]
    CriticalValue { t: f64 },

    #[error("gradient flow came within {grad_norm:e} of a critical point")]
    CriticalProximity { grad_norm: f64 },

    #[error("flow defect {defect:e} exceeds tolerance {tol:e}")]
    FlowDefect { defect: f64, tol: f64 },

    #[error("component is not closed")]
    NotClosed,

    #[error("boundary is not a simple closed curve: {0}")]
    NotJordan(String),

    #[error("curve self-intersects")]
    SelfIntersection,

    #[error("explicit step unstable: length grew by {growth:.3e} at t = {t}")]
    StepUnstable { t: f64, growth: f64 },

    #[error("input curve is not strictly convex")]
    NonConvexInput,

    #[error("level surface {t} leaves the window")]
    OpenSurfaceAtBoundary { t: f64 },

    #[error("excision sequence does not behave linearly (relative fit residual {residual:.3})")]
    DivergenceSuspected { residual: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
