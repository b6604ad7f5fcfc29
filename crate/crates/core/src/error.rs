use thiserror::Error;

/// Errors raised anywhere in the lab.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("non-finite field")]
    NonFinite,
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("subsonic speed: c = {c} must exceed the sound speed {sound_speed}")]
    SubsonicSpeed { c: f64, sound_speed: f64 },
    #[error("soliton center {center} is closer than {margin:.1} sites to the window edge")]
    CenterTooCloseToBoundary { center: f64, margin: f64 },
    #[error("weighted norm overflow")]
    NormOverflow,
    #[error("tangent inconsistency: analytic dH/dc = {analytic}, finite difference = {finite_difference}")]
    TangentInconsistency { analytic: f64, finite_difference: f64 },
    #[error("profile solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("not a solitary wave: {0}")]
    NotSolitaryWave(String),
    #[error("profile alignment failed: centroid drift {0} sites")]
    AlignmentFailure(f64),
    #[error("non-finite state at t = {t}")]
    BlowUp { t: f64 },
    #[error("left tubular neighborhood: {0}")]
    LeftTubularNeighborhood(String),
    #[error("modulation system degenerate: perturbation {perturbation:e} vs dH/dc {dhdc:e}")]
    DegenerateModulation { perturbation: f64, dhdc: f64 },
    #[error("constraint solve failed at sample {index} (t = {t}): {source}")]
    SampleFailure {
        index: usize,
        t: f64,
        #[source]
        source: Box<LabError>,
    },
    #[error("nonpositive value in decay fit at t = {t}")]
    NonPositiveSeries { t: f64 },
    #[error("window exceeded: {0}")]
    WindowExceeded(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
