use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime (or is too large)")]
    NotPrime(u64),
    #[error("precision must be positive, got {0}")]
    BadPrecision(i64),
    #[error("invalid unramified modulus: {0}")]
    BadModulus(String),
    #[error("invalid ring parameters: {0}")]
    BadParams(String),
    #[error("operands live over different ring parameters")]
    MismatchedParams,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("module has no {0} structure")]
    MissingStructure(&'static str),
    #[error("matrix is not invertible at working precision: {0}")]
    NonInvertible(String),
    #[error("Frobenius and connection are not compatible (residual valuation {0:?})")]
    Incompatible(Option<i64>),
    #[error("result depends on the t-window: {0}")]
    WindowTooSmall(String),
    #[error("connection has a pole of order > 1 at t = 0")]
    IrregularSingularity,
    #[error("Kummer cover of degree {0} is wild (divisible by p)")]
    WildCover(u32),
    #[error("matrix is not nilpotent")]
    NotNilpotent,
    #[error("{0} is not a Weil number")]
    NotWeil(String),
    #[error("weight of {0} cannot be certified")]
    Uncertifiable(String),
    #[error("trace {0} is not rational")]
    IrrationalTrace(String),
    #[error("module is not unipotent")]
    NotUnipotent,
    #[error("module is unipotent of level {0}, expected at most 2")]
    NotLevelTwo(usize),
    #[error("module is not tamely quasi-unipotent: {0}")]
    NotTame(String),
    #[error("induced Frobenius is not constant at working precision")]
    NonConstantFrobenius,
    #[error("inertia of order {0} has no representation over a quadratic field")]
    InertiaNotRepresentable(u32),
    #[error("a Weil pairing is required for this datum")]
    MissingPairing,
    #[error("inconsistent ranks: {0}")]
    InconsistentRanks(String),
    #[error("reduction diagnostics disagree: {0}")]
    DiagnosticConflict(String),
    #[error("graded piece {index} is not pure of weight {expected}: {detail}")]
    PurityFailure {
        index: i64,
        expected: String,
        detail: String,
    },
    #[error("map is not equivariant: {0}")]
    NotEquivariant(String),
    #[error("invalid Weil-Deligne datum: {0}")]
    InvalidRepresentation(String),
    #[error("curve is singular")]
    SingularCurve,
    #[error("parse error: {0}")]
    Parse(String),
}
