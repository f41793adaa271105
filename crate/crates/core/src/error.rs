use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} = {value:e} m is not an integer multiple of the cell size {cell:e} m")]
    NonIntegralDimension { what: String, value: f64, cell: f64 },

    #[error("geometry overlap: {0}")]
    OverlapConflict(String),

    #[error("placement out of range: {0}")]
    PlacementOutOfRange(String),

    #[error("time step underflow: dt = {dt:e} s at t = {time:e} s")]
    StepSizeUnderflow { dt: f64, time: f64 },

    #[error("relaxation did not converge: max torque {torque:e} after {steps} steps")]
    NotConverged { torque: f64, steps: usize },

    #[error("expected {expected} domain wall(s) on wire {wire}, found {found}")]
    WallCountMismatch {
        wire: usize,
        expected: usize,
        found: usize,
    },

    #[error("domain wall left wire {wire} at t = {time:e} s before steady motion")]
    WallExited { wire: usize, time: f64 },

    #[error("no shift window in the density grid: {0}")]
    NoWindow(String),

    #[error("region is not a straight rectangle: {0}")]
    NonRectangularRegion(String),

    #[error("terminals are not connected through the conductor")]
    DisconnectedTerminals,

    #[error("singular nodal system: {0}")]
    SingularSystem(String),

    #[error("invalid placement: {0}")]
    InvalidPlacement(String),

    #[error("shift would destroy data: {0}")]
    Overflow(String),

    #[error("access is not aligned with a stored domain: {0}")]
    Misaligned(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
