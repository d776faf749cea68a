use loewner_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("{0}")]
    Core(#[from] CoreError),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_GEOMETRY: i32 = 3;
pub const EXIT_CONVERGENCE: i32 = 4;

impl LabError {
    pub fn input(msg: impl Into<String>) -> Self {
        LabError::Input(msg.into())
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        LabError::Io { path: path.as_ref().display().to_string(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Input(_) | LabError::Io { .. } => EXIT_INPUT,
            LabError::Core(e) => match e {
                CoreError::Input(_) | CoreError::Domain(_) | CoreError::BranchCut { .. } => EXIT_INPUT,
                CoreError::Geometry { .. }
                | CoreError::StepRefinement { .. }
                | CoreError::Swallowed { .. }
                | CoreError::Resolution { .. } => EXIT_GEOMETRY,
                CoreError::NonConvergence { .. }
                | CoreError::NonMonotone { .. }
                | CoreError::Truncation { .. }
                | CoreError::Degenerate(_) => EXIT_CONVERGENCE,
            },
        }
    }
}

impl From<serde_json::Error> for LabError {
    fn from(e: serde_json::Error) -> Self {
        LabError::Input(format!("malformed JSON: {e}"))
    }
}

impl From<csv::Error> for LabError {
    fn from(e: csv::Error) -> Self {
        LabError::Input(format!("malformed CSV: {e}"))
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
