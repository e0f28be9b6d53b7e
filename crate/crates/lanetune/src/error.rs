use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] lanetune_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Image {
        path: PathBuf,
        source: image::ImageError,
    },
    #[error("{}: {reason}", path.display())]
    Config { path: PathBuf, reason: String },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("{}: line {line}: {reason}", path.display())]
    RecordFile {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("invalid scene spec field `{field}`: {reason}")]
    InvalidSpec { field: &'static str, reason: String },
    #[error("no frames found in {}", .0.display())]
    NoFrames(PathBuf),
    #[error("{}: frame is {found:?} but the clip is {expected:?}", path.display())]
    FrameSize {
        path: PathBuf,
        expected: (usize, usize),
        found: (usize, usize),
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
