use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid kernel spec: {0}")]
    InvalidKernel(String),
    #[error("kernel under-resolved: characteristic width spans {cells:.2} cells, need at least {required}")]
    KernelUnderresolved { cells: f64, required: f64 },
    #[error("kernel is identically zero")]
    ZeroKernel,
    #[error("grid mismatch: kernel grid {kernel} vs noise grid {noise}")]
    GridMismatch { kernel: String, noise: String },
    #[error("negative spectral mass {value:e} below tolerance {tolerance:e}")]
    NegativeSpectralMass { value: f64, tolerance: f64 },
    #[error("event geometry does not fit the torus: {0}")]
    GeometryOutOfBounds(String),
    #[error("unsupported dimension {0}; this operation requires d = 2")]
    UnsupportedDimension(usize),
    #[error("duality classification impossible: {0}")]
    ClassificationImpossible(String),
    #[error("non-nested resolution list: {0}")]
    NonNested(String),
    #[error("event is not increasing: {0}")]
    NonIncreasingEvent(String),
    #[error("degenerate annulus: r1 = r2 = {0}")]
    DegenerateAnnulus(f64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
