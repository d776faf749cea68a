use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Failure classes shared by every solver in the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    Domain(String),
    /// A point sits on the positive real axis, the cut of the square-root branch.
    BranchCut { re: f64 },
    /// Malformed input data (NaN, non-monotone grid, too few samples, ...).
    Input(String),
    /// A curve is not simple, or leaves the half-plane it must stay in.
    Geometry { index: usize, reason: String },
    /// An increment is too steep for a single slit map; the grid must be refined.
    StepRefinement { index: usize, slope: f64 },
    /// A point was swallowed by the hull before the requested time.
    Swallowed { time: f64 },
    /// A requested scale is below the grid resolution.
    Resolution { delta: f64, resolution: f64 },
    /// The fit or iteration could not produce a meaningful value.
    Degenerate(String),
    /// Partial energies decreased beyond the allowed slack.
    NonMonotone { partials: Vec<f64> },
    /// An improper integral was truncated with too large a tail.
    Truncation { tail: f64 },
    /// An iterative method ran out of budget.
    NonConvergence { iterations: usize, residual: f64 },
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn geometry(index: usize, reason: impl Into<String>) -> Self {
        Error::Geometry { index, reason: reason.into() }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::BranchCut { re } => {
                write!(f, "point {re} lies on the positive real axis (branch cut)")
            }
            Error::Input(msg) => write!(f, "invalid input: {msg}"),
            Error::Geometry { index, reason } => {
                write!(f, "geometry error at sample {index}: {reason}")
            }
            Error::StepRefinement { index, slope } => {
                write!(f, "increment {index} has slope {slope:.3e} beyond the slit family; refine the grid")
            }
            Error::Swallowed { time } => {
                write!(f, "point swallowed by the hull at capacity time ~{time:.6e}")
            }
            Error::Resolution { delta, resolution } => {
                write!(f, "scale {delta:.3e} is below the grid resolution {resolution:.3e}")
            }
            Error::Degenerate(msg) => write!(f, "degenerate data: {msg}"),
            Error::NonMonotone { partials } => {
                write!(f, "partial energies are not monotone: {partials:?}")
            }
            Error::Truncation { tail } => {
                write!(f, "integral truncation tail {tail:.3e} above threshold")
            }
            Error::NonConvergence { iterations, residual } => {
                write!(f, "no convergence after {iterations} iterations (residual {residual:.3e})")
            }
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;

impl core::error::Error for Error {}
