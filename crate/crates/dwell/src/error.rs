use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DwellError {
    #[error("matrix is not Hurwitz (largest eigenvalue real part {max_real_part:e})")]
    NotHurwitz { max_real_part: f64 },

    #[error("classification is ambiguous at the given tolerance: {first} or {second}")]
    Degenerate {
        first: &'static str,
        second: &'static str,
    },

    #[error("matrix is singular")]
    Singular,

    #[error("no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("bracketed solve exceeded {0} bisection steps")]
    MaxIterations(usize),

    #[error("no sign change found before {limit}")]
    NoRootInRange { limit: f64 },

    #[error("map is not decreasing near t = {at}")]
    NotDecreasing { at: f64 },

    #[error("inner solve failed at s = {s}: {source}")]
    InnerSolveFailed { s: f64, source: Box<DwellError> },

    #[error("hyperbolic argument {arg} exceeds the overflow cap")]
    OverflowDomain { arg: f64 },

    #[error("transition matrix has a zero entry")]
    ZeroEntry,

    #[error("g inverse needs n >= 1/2, got n = {n}")]
    WrongRegime { n: f64 },

    #[error("matrix is not defective")]
    NotDefective,

    #[error("repeated eigenvalue reached a distinct-eigenvalue routine")]
    DegenerateSpectrum,

    #[error("subsystem index {index} is out of range")]
    IndexOutOfRange { index: usize },

    #[error("selector `{selector}` does not apply to case {case}")]
    WrongCase { selector: String, case: String },

    #[error("{case}: {source}")]
    InCase {
        case: &'static str,
        source: Box<DwellError>,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl DwellError {
    pub(crate) fn in_case(self, case: &'static str) -> Self {
        match self {
            e @ DwellError::InCase { .. } => e,
            e => DwellError::InCase {
                case,
                source: Box::new(e),
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, DwellError>;
