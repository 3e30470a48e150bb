//! Shared error type for all modules.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Matrix input does not have the shape an operation requires.
    Shape(String),
    /// Matrix expected to be integral has a fractional entry.
    NotIntegral(String),
    /// Square matrix is singular where an inverse or residue system is needed.
    SingularModulus,
    /// Input matrix had lower column rank than required; carries the actual rank.
    RankDeficient(usize),
    /// Expanding matrix required: some eigenvalue has modulus <= 1.
    NotExpansive,
    /// Digit set constraint violated (duplicate digit, empty set, mixed dimensions).
    BadDigitSet(String),
    /// #B != #L.
    CardinalityMismatch { b: usize, l: usize },
    /// Two digits fall in the same residue class; carries a printable witness pair.
    NotCompleteResidues(String),
    /// Conjugation would leave the integer class (non-integral image).
    NonIntegralConjugation(String),
    /// Certified truncation could not reach the requested tolerance within the depth cap.
    DepthCapExceeded { achieved: f64, requested: f64 },
    /// A candidate invariant subspace is not exactly invariant; carries a defect description.
    NotInvariant(String),
    /// Triple must be reduced (invariant lattice = Z^d) before this operation.
    ReduceFirst,
    /// Digit set is not quasi-product against the supplied witness.
    NotQuasiProduct(String),
    /// The fiber lattice degenerates to the full integer lattice.
    FiberLatticeFull,
    /// No fiber lattice candidate survived screening within the index bound.
    NoFiberLattice { index_bound: u64 },
    /// A structural identity expected of Hadamard triples failed; names the identity.
    IdentityViolated(String),
    /// Orthogonality defect above tolerance; carries the witness pair difference.
    OrthogonalityViolated(String),
    /// Partial spectral sums exceeded 1 beyond numeric slack (impossible for a true
    /// orthogonal candidate); carries the witness point and sum.
    BesselViolated { point: Vec<f64>, sum: f64 },
    /// Work or time budget exhausted before a verdict.
    BudgetExhausted(String),
    /// Enumeration would exceed a hard safety cap.
    TooLarge(String),
    /// Malformed user input (JSON, flags, file contents).
    Input(String),
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Shape(s) => write!(f, "shape error: {s}"),
            Error::NotIntegral(s) => write!(f, "non-integral entry: {s}"),
            Error::SingularModulus => write!(f, "singular modulus"),
            Error::RankDeficient(r) => write!(f, "rank-deficient input (rank {r})"),
            Error::NotExpansive => write!(f, "matrix is not expanding"),
            Error::BadDigitSet(s) => write!(f, "bad digit set: {s}"),
            Error::CardinalityMismatch { b, l } => {
                write!(f, "digit/frequency cardinality mismatch: #B={b}, #L={l}")
            }
            Error::NotCompleteResidues(s) => write!(f, "not distinct residues: {s}"),
            Error::NonIntegralConjugation(s) => {
                write!(f, "conjugation leaves the integer class: {s}")
            }
            Error::DepthCapExceeded { achieved, requested } => write!(
                f,
                "depth cap exceeded: achieved error bound {achieved:.3e}, requested {requested:.3e}"
            ),
            Error::NotInvariant(s) => write!(f, "subspace not exactly invariant: {s}"),
            Error::ReduceFirst => write!(f, "triple must be reduced first (invariant lattice != Z^d)"),
            Error::NotQuasiProduct(s) => write!(f, "not quasi-product for this witness: {s}"),
            Error::FiberLatticeFull => write!(f, "fiber lattice is the full integer lattice"),
            Error::NoFiberLattice { index_bound } => {
                write!(f, "no fiber lattice candidate passed screening (index bound {index_bound})")
            }
            Error::IdentityViolated(s) => write!(f, "structural identity violated: {s}"),
            Error::OrthogonalityViolated(s) => write!(f, "orthogonality violated: {s}"),
            Error::BesselViolated { point, sum } => {
                write!(f, "partial sums exceed 1 at {point:?}: {sum}")
            }
            Error::BudgetExhausted(s) => write!(f, "budget exhausted: {s}"),
            Error::TooLarge(s) => write!(f, "enumeration too large: {s}"),
            Error::Input(s) => write!(f, "invalid input: {s}"),
            Error::Io(s) => write!(f, "io error: {s}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
