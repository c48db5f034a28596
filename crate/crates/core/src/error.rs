use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("symbol `{0}` is not in the alphabet")]
    UnknownSymbol(String),
    #[error("invalid subshift: {0}")]
    InvalidSpec(String),
    #[error("word `{0}` is not admissible")]
    NotAdmissible(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("class resolution failed at level {level}: no enumerated class for `{word}` (raise the word cap)")]
    ClassResolution { level: usize, word: String },
    #[error("graph is not left-resolving: {0}")]
    NotLeftResolving(String),
    #[error("quotient breaks left-resolving at level {level}: {detail}")]
    QuotientBreaksLeftResolving { level: usize, detail: String },
    #[error("level range mismatch: {0}")]
    LevelRangeMismatch(String),
    #[error("induced map is not well defined: column {column} leaves the image")]
    NotWellDefined { column: usize },
    #[error("tower is undetermined: {0}")]
    UndeterminedTower(String),
    #[error("not irreducible: {0}")]
    NotIrreducible(String),
    #[error("outside the domain: {0}")]
    Domain(String),
    #[error("symbol collision: {0}")]
    SymbolCollision(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
