use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("initial state {0} is not in the kept set")]
    InitialRemoved(usize),
    #[error("unknown letter `{0}`")]
    UnknownLetter(String),
    #[error("game condition is not parity; compile it first")]
    NotParity,
    #[error("condition uses {0} colors, more than the supported {1}")]
    TooManyColors(usize, usize),
    #[error("{what} has {size} {unit}, above the guard of {guard} (set GFG_GUARD_STATES to raise)")]
    TooLarge {
        what: &'static str,
        size: usize,
        unit: &'static str,
        guard: usize,
    },
    #[error("automaton is not nondeterministic")]
    NotNondeterministic,
    #[error("automaton is not deterministic")]
    NotDeterministic,
    #[error("automaton is not Buchi (priorities must be within {{1,2}})")]
    NotBuchi,
    #[error("automaton is not a nondeterministic coBuchi automaton")]
    NotNcw,
    #[error("automaton is not a nondeterministic Buchi automaton")]
    NotNbw,
    #[error("automaton is not GFG")]
    NotGfg,
    #[error("no state survives the two-token restriction from the initial state")]
    EmptyAfterRestriction,
    #[error("arena labels are not drawn from the automaton alphabet")]
    LabelMismatch,
    #[error("automata are over different alphabets")]
    AlphabetMismatch,
    #[error("input must be over the alphabet {{a,b}}")]
    BadAlphabet,
    #[error("base automaton is not GFG")]
    BaseNotGfg,
    #[error("invalid automaton: {0}")]
    Invalid(String),
    #[error("{0}")]
    Document(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Desk-scale size guard, overridable through `GFG_GUARD_STATES`.
pub fn state_guard() -> usize {
    std::env::var("GFG_GUARD_STATES")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(4_000_000)
}

pub fn check_guard(what: &'static str, size: usize, unit: &'static str) -> Result<()> {
    let guard = state_guard();
    if size > guard {
        return Err(Error::TooLarge {
            what,
            size,
            unit,
            guard,
        });
    }
    Ok(())
}
