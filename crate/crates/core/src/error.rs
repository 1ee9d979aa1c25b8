use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter `{name}` = {value} outside valid range {valid}")]
    Parameter {
        name: &'static str,
        value: f64,
        valid: String,
    },
    #[error("point coordinate {index} = {value} is not strictly positive")]
    Domain { index: usize, value: f64 },
    #[error("integral diverges in variable `{variable}` (exponent {exponent} against an infinite limit)")]
    Divergent { variable: String, exponent: f64 },
    #[error("exponent pole in variable `{variable}`: log-slope {slope:e} is within tolerance of zero against an infinite limit")]
    Pole { variable: String, slope: f64 },
    #[error("unbounded tail: no admissible decay along cell {cell}")]
    UnboundedTail { cell: String },
    #[error("fit needs at least {needed} valid points, got {got}")]
    Fit { needed: usize, got: usize },
    #[error("invalid data: {0}")]
    Data(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    valid: &str,
) -> Result<()> {
    if value > lo && value < hi && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter {
            name,
            value,
            valid: valid.to_string(),
        })
    }
}
