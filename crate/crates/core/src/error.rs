use thiserror::Error;

/// Errors produced by the engine.
///
/// Empty subshifts are never errors; they propagate as empty block sets.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShiftError {
    #[error("windows live over different universes ({0} vs {1})")]
    MixedUniverse(String, String),

    #[error("operation needs universe Z or N, got {0}")]
    UnsupportedUniverse(String),

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("rank mismatch: expected {expected}, got {got}")]
    RankMismatch { expected: usize, got: usize },

    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u32, u32),

    #[error("invalid modulus {0} (need 2 <= m <= 65536)")]
    InvalidModulus(u64),

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("enumeration cap exceeded: {what} needs {needed} > cap {cap}")]
    CapExceeded { what: String, needed: u128, cap: u64 },

    #[error("window {0} is not contained in window {1}")]
    NotContained(String, String),

    #[error("local rule is undefined on block {0}")]
    RuleUndefined(String),

    #[error("containment check failed: {0}")]
    Containment(String),

    #[error("cellular automaton is not injective")]
    NotInjective,

    #[error("left inverse is not functional: {0}")]
    NonFunctional(String),

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = ShiftError> = std::result::Result<T, E>;
