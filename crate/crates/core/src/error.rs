use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid physics parameters: {0}")]
    InvalidParams(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid initial datum: {0}")]
    InvalidDatum(String),

    #[error("frequency {re}{im:+}i lies on a branch cut")]
    OnBranchCut { re: f64, im: f64 },

    #[error("vanishing denominator in coefficient at omega = {re}{im:+}i")]
    VanishingDenominator { re: f64, im: f64 },

    #[error("non-finite integrand sample at omega = {omega}")]
    NonFiniteIntegrand { omega: f64 },

    #[error("quadrature setup: {0}")]
    InvalidQuadrature(String),

    #[error("sampling window too small: {0}")]
    WindowTooSmall(String),

    #[error("propagation window violation: support expands to [{lo}, {hi}] but window is [{win_lo}, {win_hi}]")]
    WindowViolation {
        lo: f64,
        hi: f64,
        win_lo: f64,
        win_hi: f64,
    },

    #[error("CFL violation: c*dt/h = {ratio} exceeds {limit}")]
    CflViolation { ratio: f64, limit: f64 },

    #[error("Newton iteration failed to converge at step {step}, branch {branch}, point {index}")]
    NewtonDivergence {
        step: usize,
        branch: usize,
        index: usize,
    },

    #[error("non-finite field detected at step {step}")]
    NonFiniteField { step: usize },

    #[error("amplitude guard tripped at step {step}: max |u| = {max} exceeds {limit}")]
    AmplitudeGuard { step: usize, max: f64, limit: f64 },

    #[error("grid extent {actual} too small: need more than {required}")]
    ExtentTooSmall { required: f64, actual: f64 },

    #[error("non-finite sample while probing: {0}")]
    NonFiniteSample(String),

    #[error("inadmissible nonlinearity: {0}")]
    InadmissibleNonlinearity(String),

    #[error("{0}")]
    Invalid(String),
}
