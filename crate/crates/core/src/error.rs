use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("negative load {0}")]
    NegativeLoad(f64),
    #[error("invalid cost spec: {0}")]
    InvalidCost(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown router `{0}`")]
    UnknownRouter(String),
    #[error("directed cycle through router `{0}` on a demand path")]
    Cycle(String),
    #[error("no path from `{src}` to `{dst}`")]
    Unreachable { src: String, dst: String },
    #[error("invalid demand: {0}")]
    InvalidDemand(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("missing routing decision for router `{router}` toward `{dest}`")]
    MissingDecision { router: String, dest: String },
    #[error("router `{router}` cannot forward toward `{dest}` via `{hop}`")]
    DeadEnd {
        router: String,
        dest: String,
        hop: String,
    },
    #[error("split for router `{router}` toward `{dest}` sums to {got}, expected {expected}")]
    SplitMismatch {
        router: String,
        dest: String,
        got: u64,
        expected: u64,
    },
    #[error("traffic still in flight at the end of wave {0}")]
    WaveNotDrained(usize),
    #[error("no packets injected during measurement")]
    NoTraffic,
    #[error("coordinate out of range: {0}")]
    CoordinateOutOfRange(String),
    #[error("threshold k = {k} outside (1, {max})")]
    ThresholdOutOfRange { k: f64, max: f64 },
    #[error("window W = {0} too small for a threshold in (1, W - 1)")]
    WindowTooSmall(usize),
    #[error("no load-balancing root on (1, W - 1)")]
    NoRoot,
    #[error("steering {0} outside [0, 1]")]
    InvalidSteering(f64),
    #[error("bootstrap needs at least one wave")]
    EmptyBootstrap,
    #[error("experiment error: {0}")]
    Experiment(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
