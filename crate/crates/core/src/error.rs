use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |M - M^H| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("time {t} us outside protocol range [{start}, {end}] us")]
    TimeOutOfRange { t: f64, start: f64, end: f64 },

    #[error("qubit index {0} is not 1 or 2")]
    BadIndex(usize),

    #[error("invalid integration step: {0}")]
    InvalidStep(String),

    #[error("integration drift {drift:e} exceeds {limit:e} at t = {t} us; reduce dt")]
    StepTooLarge { drift: f64, limit: f64, t: f64 },

    #[error("unphysical noise on qubit {qubit}: T2 = {t2} us exceeds 2*T1 = {} us", 2.0 * t1)]
    UnphysicalNoise { qubit: usize, t1: f64, t2: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("tomogram is missing Pauli term {0}")]
    MissingTerm(String),

    #[error("level tracking is ambiguous at t = {t} us (overlap tie within 1e-9)")]
    DegenerateTracking { t: f64 },

    #[error("gap between levels {lower} and {upper} has no interior minimum on the grid")]
    NoInteriorMinimum { lower: usize, upper: usize },

    #[error("fit window [{start}, {end}] us lies outside the protocol [0, {t_ad}] us")]
    WindowOutOfRange { start: f64, end: f64, t_ad: f64 },

    #[error("diabatic slope is zero")]
    ZeroSlope,

    #[error("trajectory and spectral trace use different time grids")]
    GridMismatch,

    #[error("fewer than three distinct abscissae for a quadratic fit")]
    DegenerateAbscissae,

    #[error("runs do not share the same schedule shape: {0}")]
    SchedulesMismatch(String),

    #[error("data do not span the resonance (minimum at the edge of the frequency range)")]
    InsufficientSpan,

    #[error("fit basis is degenerate: need at least two distinct nonzero amplitudes")]
    DegenerateBasis,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
