use thiserror::Error;

/// Alarms for conditions the underlying theory rules out. Seeing one at
/// runtime means an implementation bug or a genuine counterexample, so the
/// CLI maps them to a reserved exit code and they are never absorbed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Alarm {
    /// No index split found in the rational cone lemma.
    NoSplitFound,
    /// No Weyl coset yields a relative Bruhat factorization.
    RelativeBruhatCoverage,
    /// A point violated both branches of the CM lower-bound dichotomy.
    CmBoundViolation,
}

impl std::fmt::Display for Alarm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Alarm::NoSplitFound => write!(f, "cone split: no admissible index found"),
            Alarm::RelativeBruhatCoverage => {
                write!(f, "relative Bruhat factorization: no Weyl coset succeeded")
            }
            Alarm::CmBoundViolation => write!(f, "CM lower bound: dichotomy violated"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("polynomial is not monic")]
    NotMonic,
    #[error("polynomial is reducible: {0}")]
    Reducible(String),
    #[error("root isolation failed: {0}")]
    RootIsolationFailed(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("bad CM witness: {0}")]
    BadWitness(String),
    #[error("supplied element is not an S-unit: {0}")]
    NotAUnit(String),
    #[error("no built-in fundamental units for this field; supply them explicitly")]
    NeedSuppliedUnits,
    #[error("unit log lattice is degenerate (rank below r-1)")]
    DegenerateLattice,
    #[error("integer-relation search exhausted height bound without a certificate: {0}")]
    InconclusivePrecision(String),
    #[error("lemma hypotheses violated: {0}")]
    HypothesisViolated(String),
    #[error("matrix is singular or not in SL_n")]
    Singular,
    #[error("parabolic pair is not admissible for this base point")]
    NotAdmissible,
    #[error("search budget exceeded: {0}")]
    SearchBudgetExceeded(String),
    #[error("sequence specification violates the boundedness-criterion hypotheses: {0}")]
    SpecViolatesHypotheses(String),
    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("no non-proportional pair of linear forms across places")]
    NoWitness,
    #[error("trials exhausted without an admissible substitution")]
    TrialsExhausted,
    #[error("coefficient matrix cannot be normalized into SL_m")]
    NotUnimodularizable,
    #[error("form coefficient lies outside the totally real base field")]
    NotOverF,
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("theorem-violation alarm: {0}")]
    TheoremViolation(Alarm),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
