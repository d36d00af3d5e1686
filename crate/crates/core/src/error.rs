use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the numerical engines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A probability vector needs at least two classes.
    Dimension {
        len: usize,
    },
    /// Entries are negative beyond tolerance or do not sum to one.
    NotAPmf {
        sum: f64,
        min: f64,
    },
    NonFinite,
    /// Members of an ensemble (or paired inputs) disagree on the class count.
    DimensionMismatch {
        expected: usize,
        found: usize,
    },
    LabelOutOfRange {
        label: usize,
        k: usize,
    },
    /// The operation enumerates subsets and refuses class counts above `max`.
    TooManyClasses {
        k: usize,
        max: usize,
    },
    /// The maximum-entropy solver stopped with a duality gap above tolerance.
    ConvergenceFailure {
        gap: f64,
        iterations: usize,
    },
    EmptyEnsemble,
    /// The interval model's miscoverage collapsed to zero, so the optimal
    /// inflation factor is infinite.
    DegenerateCoverage,
    EmptyInput,
    /// A ranking metric needs both in-distribution and out-of-distribution samples.
    SingleClass,
    MissingField {
        field: &'static str,
    },
    InvalidParameter {
        name: &'static str,
        value: f64,
    },
    InvalidLabels(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dimension { len } => write!(f, "need at least 2 classes, got {len}"),
            Error::NotAPmf { sum, min } => {
                write!(f, "not a probability vector (sum = {sum}, min entry = {min})")
            }
            Error::NonFinite => f.write_str("non-finite value"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected} classes, found {found}")
            }
            Error::LabelOutOfRange { label, k } => write!(f, "label {label} out of range for {k} classes"),
            Error::TooManyClasses { k, max } => write!(f, "{k} classes exceeds the enumeration limit of {max}"),
            Error::ConvergenceFailure { gap, iterations } => {
                write!(f, "no convergence after {iterations} iterations (duality gap {gap:e})")
            }
            Error::EmptyEnsemble => f.write_str("ensemble has no members"),
            Error::DegenerateCoverage => f.write_str("region carries all mass; inflation factor is infinite"),
            Error::EmptyInput => f.write_str("empty input"),
            Error::SingleClass => f.write_str("need both in-distribution and out-of-distribution samples"),
            Error::MissingField { field } => write!(f, "missing field `{field}`"),
            Error::InvalidParameter { name, value } => write!(f, "invalid value {value} for `{name}`"),
            Error::InvalidLabels(why) => write!(f, "invalid label names: {why}"),
        }
    }
}

impl core::error::Error for Error {}
