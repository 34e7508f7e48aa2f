use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed document: {0}")]
    Document(String),

    #[error("duplicate identifier `{0}`")]
    DuplicateId(String),

    #[error("edge `{edge}` refers to undeclared vertex `{vertex}`")]
    DanglingVertex { edge: String, vertex: String },

    #[error("edge `{edge}` has non-positive or non-finite length {length}")]
    BadLength { edge: String, length: f64 },

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("graph has {slots} boundary slots, above the cap of {cap}")]
    TooLarge { slots: usize, cap: usize },

    #[error("unknown edge `{0}`")]
    UnknownEdge(String),

    #[error("edge `{0}` is not an external edge")]
    NotExternal(String),

    #[error("cannot identify edges `{0}` and `{1}` of different sign")]
    SignMismatch(String, String),

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("boundary conditions are not self-adjoint (rank {rank} of {dim}, symmetry residual {residual:e})")]
    NotSelfAdjoint {
        rank: usize,
        dim: usize,
        residual: f64,
    },

    #[error("matrix is not unitary (defect {0:e})")]
    NotUnitary(f64),

    #[error("vertex degree must be positive")]
    ZeroDegree,

    #[error("graph has external edges; a compact graph is required")]
    NotCompact,

    #[error("spectral parameter must be nonzero")]
    ZeroParameter,

    #[error("coefficient matrix has a pole at (z+, z-) = ({0}, {1})")]
    Pole(Complex64, Complex64),

    #[error("secular matrix is singular at (z+, z-) = ({0}, {1}): resonance")]
    Resonance(Complex64, Complex64),

    #[error("parameter lies in a critical set of the star product (reciprocal condition {0:e})")]
    CriticalSet(f64),

    #[error("no external edges of the requested sign")]
    NoExternalEdges,

    #[error("invalid range: {0}")]
    Range(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("point outside edge `{edge}`: x = {x}")]
    PointOutside { edge: String, x: f64 },
}
