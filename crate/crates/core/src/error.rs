use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("state {0} has an all-zero row or column in the transition matrix")]
    EmptyRowOrColumn(usize),

    #[error("edge ({0}, {1}) references a state outside the alphabet of size {2}")]
    EdgeOutOfRange(usize, usize, usize),

    #[error("symbol {0} is outside the alphabet")]
    InvalidSymbol(usize),

    #[error("truncation at K = {0} is not strongly connected")]
    DisconnectedTruncation(usize),

    #[error("shift is not topologically transitive")]
    NotTransitive,

    #[error("power iteration did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("word is not admissible: no edge {0} -> {1}")]
    InadmissibleWord(usize, usize),

    #[error("path is not a loop (first and last symbols differ)")]
    NotALoop,

    #[error("taboo series diverges: restricted spectral radius is not below 1 - 1e-12")]
    SeriesDiverges,

    #[error("symbol {0} does not belong to the subshift")]
    InvalidSubshiftSymbols(usize),

    #[error("potential has no closed-form tail rule; summability cannot be certified")]
    NoTailRule,

    #[error("potential is not coercive: {}", match .0 { Some(s) => format!("sup on cylinder [{s}] is not below zero"), None => "no symbol lies outside the support set".to_string() })]
    NotCoercive(Option<usize>),

    #[error("no symbol has sup on its cylinder >= {0} within the cap K = {1}")]
    CapTooSmall(f64, usize),

    #[error("optimal-cycle support differs between K = {0} and K = {1}")]
    UnstableSupport(usize, usize),

    #[error("watched masses did not settle: last two records differ by {0:e}")]
    NotConverged(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence(_)
                | Error::SeriesDiverges
                | Error::NotConverged(_)
                | Error::UnstableSupport(..)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
