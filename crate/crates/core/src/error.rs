use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("window [{lo}, {hi}] spans {len} numbers, above the segment cap of {cap}")]
    RangeTooLarge {
        lo: u64,
        hi: u64,
        len: u64,
        cap: u64,
    },
    #[error("{value} exceeds the supported maximum {max}")]
    Overflow { value: u64, max: u64 },
    #[error("invalid range: lo {lo} > hi {hi}")]
    InvertedRange { lo: u64, hi: u64 },
    #[error("{what}: {n} exceeds the configured limit {limit}")]
    LimitExceeded {
        what: &'static str,
        n: u64,
        limit: u64,
    },
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("flow singularity: 1 + t*d0 <= 0 (pole at t* = {t_star})")]
    Singularity { t_star: f64 },
    #[error("series outside its radius: |t*d0| = {ratio} >= 1")]
    OutsideRadius { ratio: f64 },
    #[error("numeric flow blows up: pole at t* = {t_star} lies on the integration path")]
    BlowUp { t_star: f64 },
    #[error("step count must be at least 1")]
    ZeroSteps,
    #[error("grid is not strictly increasing at position {index}")]
    NonMonotonicGrid { index: usize },
    #[error("scale relation needs two different scales, both were {n}")]
    EqualScale { n: u64 },
    #[error("invalid window: center {center}, width {width}")]
    InvalidWindow { center: u64, width: u64 },
    #[error("extrapolation reaches the flow pole (denominator {denominator})")]
    Pole { denominator: f64 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::LimitExceeded { .. } | Error::RangeTooLarge { .. } | Error::Overflow { .. } => 2,
            Error::Verification(_) => 3,
            _ => 1,
        }
    }
}
