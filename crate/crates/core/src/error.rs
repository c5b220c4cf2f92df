use thiserror::Error;

/// Errors surfaced by the geometry, matrix and bound layers.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("vertex list is empty")]
    EmptyVertexSet,

    #[error("ambient dimension {dim} exceeds the supported cap {max}")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("dilation factor must be strictly positive")]
    NonPositiveDilation,

    #[error("lattice map is singular (determinant 0)")]
    SingularMap,

    #[error("lattice point has a negative coordinate: {0:?}")]
    NegativeCoordinate(Vec<i64>),

    #[error("coordinate does not fit the supported integer range")]
    CoordinateOverflow,

    #[error("multipoint evaluation points must be pairwise distinct")]
    CoincidentPoints,

    #[error("multipoint evaluation point has a zero coordinate")]
    ZeroCoordinatePoint,

    #[error("monomial ideal is not m-primary: no pure power generator on axis {axis}")]
    NotPrimary { axis: usize },

    #[error("generator list is empty")]
    EmptyGenerators,

    #[error("generator 0 makes the ideal the unit ideal")]
    UnitIdeal,

    #[error("colength mismatch: ideal has {found}, the weight tuple needs {expected}")]
    ColengthMismatch { expected: usize, found: usize },

    #[error("weights must be strictly positive")]
    InvalidWeights,

    #[error("k budget must be at least 1")]
    ZeroBudget,

    #[error("decomposition is invalid: {0}")]
    InvalidDecomposition(String),

    #[error("decomposition is non-regular: the lifting LP is infeasible")]
    NonRegular,

    #[error("selected cell {cell} meets the target set with empty interior")]
    EmptyInterior { cell: usize },

    #[error("cell index {cell} out of range ({cells} cells)")]
    CellIndexOutOfRange { cell: usize, cells: usize },

    #[error("internal invariant violated: {0}")]
    Internal(String),
}
