use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("symmetric eigensolver did not converge for the {parity} block (size {size})")]
    EigenNonConvergence { parity: &'static str, size: usize },

    #[error("k_max = {requested} exceeds the reliable truncation bound {safe} for c = {c} and quad_order = {quad_order}")]
    TruncationBound {
        requested: usize,
        safe: usize,
        c: f64,
        quad_order: usize,
    },

    #[error("mode index {k} out of range (basis holds {k_max} modes)")]
    ModeIndex { k: usize, k_max: usize },

    #[error("bandwidth {bandwidth_hz} Hz and duration {duration_s} s give c = {implied}, basis has c = {basis}")]
    ScaleMismatch {
        bandwidth_hz: f64,
        duration_s: f64,
        implied: f64,
        basis: f64,
    },

    #[error("degenerate basis: every retained eigenvalue is zero")]
    DegenerateBasis,

    #[error("degenerate scenario: trigger probability {p_det:e} is below {floor:e}")]
    DegenerateScenario { p_det: f64, floor: f64 },

    #[error("inconsistent scenario: {0}")]
    Inconsistent(String),

    #[error("Fock cutoff {cutoff} leaves tail mass {tail:e}; raise the cutoff")]
    FockTruncation { cutoff: usize, tail: f64 },

    #[error("singular reduced covariance (condition number {condition:e})")]
    SingularCovariance { condition: f64 },

    #[error("bisection failed: {0}")]
    Bisection(String),
}

pub(crate) fn check_unit_interval(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            expected: "0 <= value <= 1",
        })
    }
}

pub(crate) fn check_nonnegative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            expected: "finite and >= 0",
        })
    }
}
