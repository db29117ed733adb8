use thiserror::Error;

/// Errors raised by the simulator, the feature maps and the training phase.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("qudit dimension must be at least 2, found {0}")]
    InvalidDimension(usize),

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("basis index {index} out of range for dimension {dim}")]
    BasisOutOfRange { index: usize, dim: usize },

    #[error("wire {wire} out of range for a {wires}-wire register")]
    WireOutOfRange { wire: usize, wires: usize },

    #[error("control and target coincide on wire {0}")]
    CoincidentWires(usize),

    #[error("matrix is not unitary (max |U†U - I| = {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("feature vector vanished (norm {norm:e})")]
    ZeroFeatureVector { norm: f64 },

    #[error("class {0} has no training samples")]
    EmptyClass(usize),

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("{classes} classes do not fit in a qudit of dimension {dim}")]
    TooManyClasses { classes: usize, dim: usize },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("negative eigenvalue mass {shift:e} exceeds clamping threshold")]
    NegativeSpectrum { shift: f64 },

    #[error("all joint class probabilities vanish; sample cannot be classified")]
    DegenerateSample,
}

impl Error {
    /// True for failures of a numerical invariant, as opposed to malformed
    /// input or a misuse of the API.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotNormalized { .. }
                | Error::NotUnitary { .. }
                | Error::ZeroFeatureVector { .. }
                | Error::InvalidDensity(_)
                | Error::NegativeSpectrum { .. }
                | Error::DegenerateSample
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
