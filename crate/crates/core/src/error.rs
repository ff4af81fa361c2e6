use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vertex {index} has modulus {modulus}, expected 1")]
    NotUnimodular { index: usize, modulus: f64 },
    #[error("vertices {first} and {second} coincide")]
    DuplicateVertex { first: usize, second: usize },
    #[error("vertices are not in counterclockwise order at index {index}")]
    NotCounterclockwise { index: usize },
    #[error("vertex set is empty")]
    EmptyVertexSet,
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("radius {radius} is not E-large enough: chord {chord} misses the closed disc")]
    UnsupportedGeometry { radius: f64, chord: usize },
    #[error("z = {re}{im:+}i is within tolerance of the spectrum")]
    SingularResolvent { re: f64, im: f64 },
    #[error("spectrum is not contained in the closed domain: eigenvalue {re}{im:+}i")]
    SpectrumOutside { re: f64, im: f64 },
    #[error("contour radius {u} must lie strictly between the operator type {type_radius} and the function radius {s}")]
    Contour { u: f64, type_radius: f64, s: f64 },
    #[error("vector is not in the range of the vertex factor (least-squares residual {residual:e})")]
    RangeMembership { residual: f64 },
    #[error("polynomial is not divisible by the vertex polynomial (remainder norm {remainder:e})")]
    NotDivisible { remainder: f64 },
    #[error("orthonormal basis is ill-conditioned (gram residual {residual:e}); reduce the degree")]
    Conditioning { residual: f64 },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("FM contour construction failed: {0}")]
    FmConstruction(String),
    #[error("{0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
