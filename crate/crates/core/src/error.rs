use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("grid needs an odd site count >= 3, got {0}")]
    EvenOrTooFewSites(usize),
    #[error("box length must be positive and finite, got {0}")]
    InvalidLength(f64),
    #[error("invalid physical parameter `{name}` = {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("gauge function has Fourier content up to k = {band}, grid allows at most {limit}")]
    BandLimitExceeded { band: usize, limit: usize },
    #[error("gauge function does not vanish with zero time derivative at t0 = {t0}")]
    InitialConditionViolated { t0: f64 },
    #[error("box length mismatch: {expected} vs {found}")]
    LengthMismatch { expected: f64, found: f64 },
    #[error("tabulated potential has {0} time sample(s); a time derivative needs at least two")]
    CannotDifferentiate(usize),
    #[error("tabulated potential is malformed: {0}")]
    MalformedTable(String),
    #[error("potential sample is not finite at site {site}, t = {t}")]
    NonFinitePotential { site: usize, t: f64 },

    #[error("time step must be positive and finite, got {0}")]
    InvalidTimeStep(f64),
    #[error("time step {dt} does not divide the interval [{t0}, {t_end}]")]
    StepDoesNotDivide { t0: f64, t_end: f64, dt: f64 },
    #[error("linear solve failed in {0}")]
    SolveFailed(&'static str),
    #[error("norm drift {drift:e} exceeds {limit:e} at t = {t}")]
    NormDrift { drift: f64, limit: f64, t: f64 },

    #[error("{context}: matrix is singular or ill-conditioned (condition estimate {condition:e}); {diagnosis}")]
    IllConditioned {
        context: &'static str,
        condition: f64,
        diagnosis: &'static str,
    },
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("Fock truncation of {0} modes exceeds the limit of 12")]
    TooManyModes(usize),
    #[error("mode selection is invalid: {0}")]
    InvalidSelection(String),
    #[error("one-particle matrix is not Hermitian (residual {0:e})")]
    NonHermitian(f64),
    #[error("comparison runs disagree on {0}")]
    RunMismatch(&'static str),
    #[error("continuity residual needs at least 3 snapshots, got {0}")]
    TooFewSnapshots(usize),
}
