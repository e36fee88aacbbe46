use std::fmt;

/// A component size, or the distinguished giant symbol.
///
/// `Giant` orders strictly above every finite size. Finite sizes are
/// always at least one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtSize {
    Finite(u64),
    Giant,
}

impl ExtSize {
    /// Finite size; panics on zero.
    pub fn finite(size: u64) -> Self {
        assert!(size >= 1, "component sizes are at least one");
        ExtSize::Finite(size)
    }

    pub fn is_giant(self) -> bool {
        matches!(self, ExtSize::Giant)
    }

    pub fn as_finite(self) -> Option<u64> {
        match self {
            ExtSize::Finite(s) => Some(s),
            ExtSize::Giant => None,
        }
    }

    /// `GIANT + x = GIANT`.
    pub fn add(self, other: ExtSize) -> ExtSize {
        match (self, other) {
            (ExtSize::Finite(a), ExtSize::Finite(b)) => ExtSize::Finite(a + b),
            _ => ExtSize::Giant,
        }
    }

    /// Symbolic product, keeping the number of giant factors so that
    /// `G·2 < G·3 < G·G` as it would be for any sufficiently large `G`.
    pub fn product(self, other: ExtSize) -> Magnitude {
        Magnitude::of(self).times(Magnitude::of(other))
    }

    /// Symbolic sum; `G+2 < G+3 < G+G`.
    pub fn sum(self, other: ExtSize) -> Magnitude {
        Magnitude::of(self).plus(Magnitude::of(other))
    }
}

impl From<u64> for ExtSize {
    fn from(s: u64) -> Self {
        ExtSize::finite(s)
    }
}

impl fmt::Display for ExtSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtSize::Finite(s) => write!(f, "{s}"),
            ExtSize::Giant => f.write_str("inf"),
        }
    }
}

/// A value of the form `G^giants · finite` (products) or
/// `giants·G + finite` (sums), compared lexicographically.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Magnitude {
    pub giants: u32,
    pub finite: u64,
}

impl Magnitude {
    fn of(size: ExtSize) -> Self {
        match size {
            ExtSize::Finite(s) => Magnitude { giants: 0, finite: s },
            ExtSize::Giant => Magnitude { giants: 1, finite: 0 },
        }
    }

    fn times(self, other: Magnitude) -> Magnitude {
        // A giant factor carries no finite part for products.
        let a = if self.giants > 0 && self.finite == 0 { 1 } else { self.finite };
        let b = if other.giants > 0 && other.finite == 0 { 1 } else { other.finite };
        Magnitude {
            giants: self.giants + other.giants,
            finite: a.saturating_mul(b),
        }
    }

    fn plus(self, other: Magnitude) -> Magnitude {
        Magnitude {
            giants: self.giants + other.giants,
            finite: self.finite.saturating_add(other.finite),
        }
    }
}
