//! Three-valued classification outcomes.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Outcome of a property test that a numerical engine may be unable to
/// decide. `Inconclusive` is a first-class result, never an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl Verdict {
    pub fn is_conclusive(self) -> bool {
        self != Verdict::Inconclusive
    }

    /// True when two verdicts are conclusive and disagree.
    pub fn conflicts_with(self, other: Verdict) -> bool {
        self.is_conclusive() && other.is_conclusive() && self != other
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Holds => write!(f, "holds"),
            Verdict::Fails => write!(f, "fails"),
            Verdict::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conflict_requires_two_conclusive_sides() {
        assert!(Verdict::Holds.conflicts_with(Verdict::Fails));
        assert!(!Verdict::Holds.conflicts_with(Verdict::Holds));
        assert!(!Verdict::Inconclusive.conflicts_with(Verdict::Fails));
        assert!(!Verdict::Fails.conflicts_with(Verdict::Inconclusive));
    }
}
