//! Three-valued belief states stored as two bitsets.

use std::fmt;

/// Index of a ground fluent atom.
pub type AtomId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Truth {
    True,
    False,
    Unknown,
}

impl fmt::Display for Truth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Truth::True => "true",
            Truth::False => "false",
            Truth::Unknown => "unknown",
        })
    }
}

/// `known` marks atoms with a definite value; `value` holds that value and
/// is kept clear for unknown atoms so equal beliefs compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BeliefState {
    known: Vec<u64>,
    value: Vec<u64>,
}

impl BeliefState {
    /// All atoms unknown.
    pub fn unknown(n_atoms: usize) -> Self {
        let words = n_atoms.div_ceil(64);
        BeliefState { known: vec![0; words], value: vec![0; words] }
    }

    #[inline]
    fn bit(a: AtomId) -> (usize, u64) {
        ((a / 64) as usize, 1u64 << (a % 64))
    }

    #[inline]
    pub fn get(&self, a: AtomId) -> Truth {
        let (w, m) = Self::bit(a);
        if self.known[w] & m == 0 {
            Truth::Unknown
        } else if self.value[w] & m != 0 {
            Truth::True
        } else {
            Truth::False
        }
    }

    #[inline]
    pub fn is(&self, a: AtomId, v: bool) -> bool {
        let (w, m) = Self::bit(a);
        self.known[w] & m != 0 && (self.value[w] & m != 0) == v
    }

    #[inline]
    pub fn set(&mut self, a: AtomId, v: bool) {
        let (w, m) = Self::bit(a);
        self.known[w] |= m;
        if v {
            self.value[w] |= m;
        } else {
            self.value[w] &= !m;
        }
    }

    pub fn forget(&mut self, a: AtomId) {
        let (w, m) = Self::bit(a);
        self.known[w] &= !m;
        self.value[w] &= !m;
    }

    pub fn known_count(&self) -> u32 {
        self.known.iter().map(|w| w.count_ones()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn set_get_forget() {
        let mut s = BeliefState::unknown(130);
        assert_eq!(s.get(129), Truth::Unknown);
        s.set(129, true);
        s.set(3, false);
        assert_eq!(s.get(129), Truth::True);
        assert!(s.is(3, false) && !s.is(3, true));
        s.forget(129);
        assert_eq!(s.get(129), Truth::Unknown);
        assert_eq!(s.known_count(), 1);
    }

    proptest! {
        #[test]
        fn equal_assignments_give_equal_states(ops in proptest::collection::vec((0u32..100, any::<bool>()), 0..40)) {
            let mut a = BeliefState::unknown(100);
            let mut b = BeliefState::unknown(100);
            for &(i, v) in &ops {
                a.set(i, !v);
                a.set(i, v);
                b.set(i, v);
            }
            prop_assert_eq!(a, b);
        }
    }
}
