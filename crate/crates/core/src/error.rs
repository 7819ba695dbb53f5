use thiserror::Error;

/// Errors raised by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("noise variances must be strictly decreasing, got N_{index}={prev} then N_{next}={value}", next = .index + 1)]
    NonDecreasingNoises { index: usize, prev: f64, value: f64 },

    #[error("parameter `{name}` must be positive and finite, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },

    #[error("at least one receiver is required")]
    NoReceivers,

    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("expected {expected} entries, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("extended real must be nonnegative and not NaN, got {0}")]
    InvalidExtReal(f64),

    #[error("tau schedule must be nonincreasing in the index: tau_{index} = {value} exceeds tau_{prev_index} = {prev}", prev_index = .index - 1)]
    NonMonotoneTau { index: usize, prev: f64, value: f64 },

    #[error("the last tau entry must be exactly 0, got {0}")]
    LastTauNonZero(f64),

    #[error("tau schedule contains +inf; use the extended evaluation")]
    NonFiniteTau,

    #[error("distortion D_{index} = {value} outside (0, {source_var}]")]
    InvalidDistortion { index: usize, value: f64, source_var: f64 },

    #[error("finite-difference step {step} leaves the distortion domain at D_{index}")]
    StepOutOfDomain { index: usize, step: f64 },

    #[error("not a member of the outer region even at D_K = {upper}")]
    InfeasibleEverywhere { upper: f64 },

    #[error("numerical classification {empirical} disagrees with the analytic rule {analytic}")]
    ClassificationMismatch { empirical: String, analytic: String },

    #[error("invalid power split: {0}")]
    InvalidSplit(String),

    #[error("D_{index} equals the source variance; the virtual channel noise is infinite")]
    DistortionAtSourceVariance { index: usize },

    #[error("distortions must be strictly decreasing for a virtual channel (D_{index} = {value} >= D_{prev_index} = {prev})", prev_index = .index - 1)]
    NonStrictOrdering { index: usize, prev: f64, value: f64 },

    #[error("invalid capacities: need 0 < C_1 < C_2, got C_1 = {c1}, C_2 = {c2}")]
    InvalidCapacities { c1: f64, c2: f64 },

    #[error("power sum exponent must be nonzero")]
    ZeroP,

    #[error("vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("exponent p = {0} must be positive and at least 1e-3 away from 1")]
    InvalidP(f64),

    #[error("analog simulation requires bandwidth factor exactly 1, got {0}")]
    BandwidthNotOne(f64),

    #[error("sample count must be at least 1")]
    NoSamples,
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Variant name, stable for machine-readable error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonDecreasingNoises { .. } => "NonDecreasingNoises",
            Error::NonPositiveParameter { .. } => "NonPositiveParameter",
            Error::NoReceivers => "NoReceivers",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidExtReal(_) => "InvalidExtReal",
            Error::NonMonotoneTau { .. } => "NonMonotoneTau",
            Error::LastTauNonZero(_) => "LastTauNonZero",
            Error::NonFiniteTau => "NonFiniteTau",
            Error::InvalidDistortion { .. } => "InvalidDistortion",
            Error::StepOutOfDomain { .. } => "StepOutOfDomain",
            Error::InfeasibleEverywhere { .. } => "InfeasibleEverywhere",
            Error::ClassificationMismatch { .. } => "ClassificationMismatch",
            Error::InvalidSplit(_) => "InvalidSplit",
            Error::DistortionAtSourceVariance { .. } => "DistortionAtSourceVariance",
            Error::NonStrictOrdering { .. } => "NonStrictOrdering",
            Error::InvalidCapacities { .. } => "InvalidCapacities",
            Error::ZeroP => "ZeroP",
            Error::LengthMismatch(..) => "LengthMismatch",
            Error::InvalidP(_) => "InvalidP",
            Error::BandwidthNotOne(_) => "BandwidthNotOne",
            Error::NoSamples => "NoSamples",
        }
    }
}
