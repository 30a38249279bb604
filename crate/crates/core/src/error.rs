use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("operands belong to different groups")]
    MixedGroups,
    #[error("element {0} is not in the group")]
    NotAnElement(String),
    #[error("invalid group descriptor: {0}")]
    BadDescriptor(String),
    #[error("{what} needs {needed} but the cap is {cap}")]
    CapExceeded { what: String, needed: u128, cap: u128 },
    #[error("operation requires a finite group")]
    InfiniteGroup,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("no solution: {0}")]
    Unsolvable(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn precondition<S: Into<String>>(ok: bool, msg: S) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Precondition(msg.into()))
    }
}

pub(crate) fn invariant<S: Into<String>>(ok: bool, msg: S) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Invariant(msg.into()))
    }
}

/// Resource limits shared by the exhaustive routines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct Caps {
    /// Bound on k^|G| and on stored table entries.
    pub table_entries: u128,
    /// Bound on the brute-force CSP search space.
    pub search_space: u128,
    /// Node budget for exact separated-witness search.
    pub witness_nodes: u128,
    /// Largest group order accepted by subgroup enumeration.
    pub subgroup_order: u128,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { table_entries: 1 << 24, search_space: 1 << 24, witness_nodes: 1 << 20, subgroup_order: 128 }
    }
}

impl Caps {
    /// Scale every limit to `cap` (used by the global override).
    pub fn uniform(cap: u128) -> Self {
        Caps { table_entries: cap, search_space: cap, witness_nodes: cap, subgroup_order: cap }
    }

    pub(crate) fn check(what: &str, needed: u128, cap: u128) -> Result<()> {
        if needed > cap {
            Err(Error::CapExceeded { what: what.to_string(), needed, cap })
        } else {
            Ok(())
        }
    }
}
