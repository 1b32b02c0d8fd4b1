use thiserror::Error;

/// Errors produced by the stitching pipeline and its file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("schema error in {entity}: {detail}")]
    Schema { entity: String, detail: String },

    #[error("duplicate gloss {0:?}")]
    DuplicateGloss(String),

    #[error("unresolvable gloss {gloss:?}{}", position.map(|p| format!(" at position {p}")).unwrap_or_default())]
    UnresolvableGloss {
        gloss: String,
        position: Option<usize>,
    },

    #[error("degenerate pose in frame {frame}: {detail}")]
    DegenerateFrame { frame: usize, detail: String },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("cutoff {cutoff_hz} Hz violates the Nyquist limit for {fps} fps")]
    NyquistViolation { cutoff_hz: f64, fps: f64 },

    #[error("scale {scale} would produce an empty sequence")]
    InvalidScale { scale: f64 },

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("reference sentence in pair {pair} is empty")]
    EmptyReference { pair: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
