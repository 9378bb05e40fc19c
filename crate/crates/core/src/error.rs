use thiserror::Error;

/// Errors raised by constructors and checks in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum HsError {
    #[error("profile needs at least two breakpoints, got {0}")]
    TooFewBreakpoints(usize),
    #[error("expected {expected} slopes for {breakpoints} breakpoints, got {got}")]
    SlopeCount {
        expected: usize,
        breakpoints: usize,
        got: usize,
    },
    #[error("breakpoint {index} is not strictly greater than its predecessor")]
    NonIncreasingBreakpoint { index: usize },
    #[error("{field}[{index}] is not finite")]
    NonFinite { field: &'static str, index: usize },
    #[error("anchor value is not finite")]
    NonFiniteAnchor,
    #[error("resurrection coefficient for cell {cell} must be a finite value >= 0, got {kappa}")]
    NegativeKappa { cell: usize, kappa: f64 },
    #[error("cell {cell} has nonnegative slope and never blows up; nothing to continue")]
    NoBlowUp { cell: usize },
    #[error("cell index {cell} out of range (profile has {cells} cells)")]
    CellOutOfRange { cell: usize, cells: usize },
    #[error("invalid cell key {0:?} in policy")]
    BadCellKey(String),
    #[error("time step must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("time {t} is outside the provider domain [0, {horizon}]")]
    OutsideDomain { t: f64, horizon: f64 },
    #[error("negative time {0}")]
    NegativeTime(f64),
    #[error("traces are sampled on different time grids")]
    MismatchedGrids,
    #[error("width must be positive, got {0}")]
    NonPositiveWidth(f64),
    #[error("test function support is not inside the window")]
    SupportOutsideWindow,
    #[error("identity only applies to the dissipative solution")]
    NotDissipative,
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, HsError>;
