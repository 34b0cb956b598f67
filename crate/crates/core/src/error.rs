use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("parameter `{name}` must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("parameter `{name}` = {value} outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error(
        "inductance ratio b = {0} must lie strictly inside (0, 1) for the constraint coefficients"
    )]
    InvalidInductanceRatio(f64),
    #[error("straddling resonance: detuning {delta} Hz with anharmonicity {alpha} Hz makes the dispersive correction diverge")]
    StraddlingResonance { delta: f64, alpha: f64 },
    #[error("dispersive correction factor {factor} is not positive (unphysical regime)")]
    UnphysicalCorrection { factor: f64 },
    #[error("negative cross-Kerr shift {0} Hz")]
    NegativeShift(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("truncation ({n_q}, {n_r}) below the minimum of 4 levels per mode")]
    TruncationTooSmall { n_q: usize, n_r: usize },
    #[error("energy scale {name} = {value} Hz is not representable")]
    EnergyScale { name: &'static str, value: f64 },
    #[error("eigensolver residual {residual:e} exceeds bound {bound:e}")]
    Convergence { residual: f64, bound: f64 },
    #[error("ambiguous labeling for bare state ({m_q}, {m_r}): best overlap {overlap:.4}, margin {margin:.4}")]
    AmbiguousLabeling {
        m_q: usize,
        m_r: usize,
        overlap: f64,
        margin: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FluxError {
    #[error("flux bias n = {n}: E_JΣ = {e_jsigma} Hz is not positive (SQUID tuned through zero)")]
    UnphysicalJunction { n: i64, e_jsigma: f64 },
    #[error("invalid flux configuration: {0}")]
    InvalidConfig(String),
    #[error("area-ratio fit failed: {0}")]
    FitFailed(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoherenceError {
    #[error("no T1 contributions to combine")]
    EmptyContributions,
    #[error("`{name}` must be positive, got {value}")]
    InvalidInput { name: &'static str, value: f64 },
    #[error("zero qubit-resonator detuning")]
    ZeroDetuning,
    #[error("transmon coupling not invertible: chi {chi} Hz, delta {delta} Hz, alpha {alpha} Hz")]
    NonInvertible { chi: f64, delta: f64, alpha: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReadoutError {
    #[error("invalid readout parameter: {0}")]
    InvalidParams(String),
    #[error("shot sets are indistinguishable; the two Gaussian clusters collapse")]
    DegenerateClusters,
    #[error("mixture fit did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("no intersection of the fitted Gaussians between the means")]
    NoThresholdRoot,
    #[error("shot file line {line}: {message}")]
    Csv { line: usize, message: String },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("analytic: {0}")]
    Analytic(#[from] AnalyticError),
    #[error("numeric: {0}")]
    Numeric(#[from] NumericError),
    #[error("flux: {0}")]
    Flux(#[from] FluxError),
    #[error("coherence: {0}")]
    Coherence(#[from] CoherenceError),
    #[error("readout: {0}")]
    Readout(#[from] ReadoutError),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code: 1 for invalid input, 2 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Param(_) | Error::Config(_) | Error::Io(_) => 1,
            Error::Flux(FluxError::InvalidConfig(_)) => 1,
            Error::Readout(ReadoutError::InvalidParams(_) | ReadoutError::Csv { .. }) => 1,
            Error::Coherence(CoherenceError::InvalidInput { .. }) => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
