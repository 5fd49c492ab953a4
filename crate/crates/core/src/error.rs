use thiserror::Error;

/// Errors produced by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square-compatible: {0}")]
    Shape(String),

    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("trace is {trace:.12} instead of 1")]
    NotUnitTrace { trace: f64 },

    #[error("eigenvalue {eigenvalue:.3e} below the positivity tolerance")]
    NotPositive { eigenvalue: f64 },

    #[error("non-finite matrix entry")]
    NonFinite,

    #[error("dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("subsystem dims {dims:?} do not multiply to matrix dimension {dim}")]
    DimsMismatch { dims: Vec<usize>, dim: usize },

    #[error("invalid bipartite cut: {0}")]
    InvalidCut(String),

    #[error("support of the first state is not contained in the support of the second")]
    InfiniteDivergence,

    #[error("Bell-diagonal parameters ({c1}, {c2}, {c3}) lie outside the physical tetrahedron")]
    UnphysicalBellDiagonal { c1: f64, c2: f64, c3: f64 },

    #[error("unknown fixture `{0}` (expected rho1, rho2 or rho3)")]
    UnknownFixture(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("effective coupling is zero: no decoherence (t_D is infinite)")]
    NoDecoherence,

    #[error("pointer-basis time needs c2 = -eps*c1 with eps = +/-1")]
    UnsupportedFamily,

    #[error("{configs} bath configurations exceed the cap {cap}")]
    ConfigurationCap { configs: u128, cap: usize },

    #[error("internal consistency check `{check}` failed (residual {residual:.3e})")]
    Inconsistent { check: &'static str, residual: f64 },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
