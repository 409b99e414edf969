use alloc::string::String;

/// Everything that can go wrong inside the engine.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid Fock space: {0}")]
    InvalidSpace(String),
    #[error("mode index {mode} out of range for a space with {modes} mode(s)")]
    InvalidMode { mode: usize, modes: usize },
    #[error("atom index {atom} has no internal two-level factor (space has {atoms} atom(s))")]
    NoInternalLevel { atom: usize, atoms: usize },
    #[error("operator spaces do not match: {0}")]
    SpaceMismatch(String),
    #[error("matrix is not anti-Hermitian (defect {defect:.3e})")]
    NotAntiHermitian { defect: f64 },
    #[error("resonance g = nu is required for degeneracy (g = {g}, nu = {nu})")]
    NotResonant { g: f64, nu: f64 },
    #[error("invalid Jaynes-Cummings parameters: {0}")]
    InvalidParams(String),
    #[error("truncation violated: {0}")]
    Truncation(String),
    #[error("leakage {leakage:.3e} exceeds budget {budget:.3e}")]
    LeakageExceeded { leakage: f64, budget: f64 },
    #[error("squeeze amplitude {r:.4} exceeds configured cap {cap:.4}")]
    CapExceeded { r: f64, cap: f64 },
    #[error("coordinate {0} does not belong to this control manifold")]
    UnknownCoordinate(&'static str),
    #[error("no closed form is available off the plane: {0}")]
    OffPlane(String),
    #[error("finite-difference step {h:e} outside [1e-6, 1e-3]")]
    StepOutOfRange { h: f64 },
    #[error("path is not closed")]
    OpenPath,
    #[error("{steps} transport steps requested, at least {min} needed")]
    StepUnderflow { steps: usize, min: usize },
    #[error("loop has no plane tag with a defined area weight")]
    UntaggedPlane,
    #[error("loop is self-intersecting")]
    SelfIntersecting,
    #[error("vertex {index} does not lie on plane {plane}")]
    VertexOffPlane { index: usize, plane: &'static str },
    #[error("area law violated: residual {residual:.3e} above tolerance {tolerance:.3e}")]
    Nonlinear { residual: f64, tolerance: f64 },
    #[error("connection components do not commute along the plane (defect {defect:.3e})")]
    NonAbelian { defect: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("propagation unstable: norm drift {drift:.3e}")]
    StepInstability { drift: f64 },
    #[error("state is not normalized (norm {norm:.6})")]
    Unnormalized { norm: f64 },
    #[error("invalid error model: {0}")]
    InvalidModel(String),
    #[error("Monte Carlo run invalid: clamp rate {rate:.3} above 0.1")]
    ClampRate { rate: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = core::result::Result<T, Error>;
