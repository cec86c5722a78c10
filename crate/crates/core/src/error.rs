use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (defect {defect:.3e} > tolerance {tol:.3e})")]
    NotHermitian { defect: f64, tol: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:.3e})")]
    NotPsd { min_eig: f64 },

    #[error("negative power of a singular matrix")]
    SingularNegativePower,

    #[error("invalid exponent {0}; exponents must lie in [1, inf]")]
    BadExponent(String),

    #[error("exponent order violated: q = {q} exceeds p = {p} (the regime p < q is excluded)")]
    ExponentOrder { p: String, q: String },

    #[error("exponent mismatch: {0}")]
    ExponentMismatch(String),

    #[error("exponent pairs do not share the ratio {expected}: got p/q = {got}")]
    RatioMismatch { expected: String, got: String },

    #[error("block profile mismatch: expected {expected:?}, got {got:?}")]
    ProfileMismatch { expected: Vec<usize>, got: Vec<usize> },

    #[error("invalid block profile: {0}")]
    InvalidProfile(String),

    #[error("weight is not faithful (min eigenvalue {min_eig:.3e})")]
    NotFaithful { min_eig: f64 },

    #[error("algebra generation failed to stabilise after {iterations} rounds")]
    NoConvergence { iterations: usize },

    #[error("invalid morphism: {0}")]
    InvalidMorphism(String),

    #[error("map is not a right-module homomorphism (residual {residual:.3e} at basis element {witness})")]
    NotModuleMap { residual: f64, witness: usize },

    #[error("no finite domination constant: {0}")]
    DominationFails(String),

    #[error("densities do not commute (commutator norm {residual:.3e})")]
    NotCommuting { residual: f64 },

    #[error("density is not the sum of its parts (residual {residual:.3e})")]
    NotSummable { residual: f64 },

    #[error("{atoms} atoms exceed the enumeration limit of {limit}")]
    TooLarge { atoms: usize, limit: usize },

    #[error("invalid measure space: {0}")]
    InvalidMeasure(String),

    #[error("{0}")]
    Numerical(String),
}
