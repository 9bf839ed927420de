use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: bad magic {found:?}, expected \"FMX1\"", path.display())]
    BadMagic { path: PathBuf, found: Vec<u8> },

    #[error("{}: truncated payload, expected {expected} bytes but found {found}", path.display())]
    Truncated {
        path: PathBuf,
        expected: usize,
        found: usize,
    },

    #[error("{}: {msg}", path.display())]
    Header { path: PathBuf, msg: String },

    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("invalid synset id {0:?}")]
    InvalidSynsetId(String),

    #[error("run {run_id} has {volumes} volume(s); at least 2 are needed to normalize")]
    DegenerateRun { run_id: String, volumes: usize },

    #[error(
        "event {event} (image {image_id}, run {run_id}) needs volumes up to {end} but the run has {volumes}"
    )]
    WindowOutOfBounds {
        event: usize,
        image_id: String,
        run_id: String,
        end: usize,
        volumes: usize,
    },

    #[error("event {event} references run {run_id}, which was not supplied")]
    UnknownRun { event: usize, run_id: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("linear system is numerically singular (lambda = {lambda})")]
    Singular { lambda: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("split leaves an empty partition ({train} training / {validation} validation rows)")]
    EmptySplit { train: usize, validation: usize },

    #[error("validation loss is not finite for lambda = {lambda}")]
    NonFiniteLoss { lambda: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("at least {needed} rows are required, found {found}")]
    TooFewRows { needed: usize, found: usize },

    #[error("source std is ~0 while target std is positive in column(s) {0:?}")]
    DegenerateColumns(Vec<usize>),

    #[error("feature matrix has no labels")]
    MissingLabels,

    #[error("item {index} ({item}) has zero norm; cosine distance is undefined")]
    ZeroVector { item: String, index: usize },

    #[error("k = {k} exceeds the {size} items in the index")]
    KTooLarge { k: usize, size: usize },

    #[error("unknown synset {0}")]
    UnknownSynset(String),

    #[error("synsets {0} and {1} share no common ancestor")]
    NoCommonAncestor(String, String),

    #[error("{}:{line}: malformed record: {msg}", path.display())]
    MalformedRecord {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("synset {from} points to missing hypernym {to}")]
    DanglingPointer { from: String, to: String },

    #[error("hypernym cycle through {0}")]
    Cycle(String),

    #[error("self edge on {0}")]
    SelfEdge(String),

    #[error("image {image_id} carries conflicting labels {first} and {second}")]
    ConflictingLabels {
        image_id: String,
        first: String,
        second: String,
    },

    #[error("no feature row for image id(s): {}", .0.join(", "))]
    Alignment(Vec<String>),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
