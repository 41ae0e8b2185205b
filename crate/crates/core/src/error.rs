use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("non-manifold complex: {degree}-simplex {index} belongs to {count} top simplices")]
    NonManifold {
        degree: usize,
        index: usize,
        count: usize,
    },

    #[error("non-orientable complex: no consistent orientation across face {face}")]
    NonOrientable { face: usize },

    #[error("degenerate {degree}-simplex {index} (zero volume)")]
    DegenerateSimplex { degree: usize, index: usize },

    #[error("non-positive dual volume {value:e} for {degree}-simplex {index}")]
    NonPositiveDual {
        degree: usize,
        index: usize,
        value: f64,
    },

    #[error("degree {degree} is out of range for a complex of dimension {dim}")]
    InvalidDegree { degree: usize, dim: usize },

    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("operation requires a non-empty boundary")]
    EmptyBoundary,

    #[error("invalid material: {0}")]
    InvalidMaterial(String),

    #[error("invalid boundary condition: {0}")]
    InvalidBc(String),

    #[error("boundary condition '{label}' is not admissible by the sufficient test")]
    Inadmissible { label: String },

    #[error("singular saddle system for boundary condition '{label}'")]
    SingularSaddle { label: String },

    #[error("linear solve did not converge: residual {residual:e} > {tolerance:e}")]
    SolverResidual { residual: f64, tolerance: f64 },

    #[error("unknown profile '{0}' (expected standing_wave_x, gaussian_bump or sphere_l1)")]
    UnknownProfile(String),

    #[error("state became non-finite at t = {time}")]
    NonFinite { time: f64 },

    #[error("invalid time step {0}")]
    InvalidStep(f64),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
