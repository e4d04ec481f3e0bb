use std::fmt;

use serde::Serialize;

/// Pipeline stage an error came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Config,
    Sample,
    Graph,
    Solve,
    Reference,
    Align,
    Diagnostics,
    Output,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Config => "config",
            Self::Sample => "sample",
            Self::Graph => "graph",
            Self::Solve => "solve",
            Self::Reference => "reference",
            Self::Align => "align",
            Self::Diagnostics => "diagnostics",
            Self::Output => "output",
        };
        f.write_str(s)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{stage} stage: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: union_laplacian::Error,
    },

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed data: {0}")]
    Data(String),
}

impl HarnessError {
    /// 2 for anything the user can fix in the input, 3 when the
    /// eigensolver gave up, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use union_laplacian::Error as E;
        match self {
            Self::Config(_) | Self::Data(_) => 2,
            Self::Stage { source: E::NoConvergence { .. }, .. } => 3,
            Self::Stage { stage: Stage::Config, .. } => 2,
            Self::Stage { source: E::Domain(_) | E::InvalidModel(_) | E::LengthMismatch { .. }, .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

pub(crate) trait StageExt<T> {
    fn stage(self, stage: Stage) -> Result<T>;
}

impl<T> StageExt<T> for union_laplacian::Result<T> {
    fn stage(self, stage: Stage) -> Result<T> {
        self.map_err(|source| HarnessError::Stage { stage, source })
    }
}
