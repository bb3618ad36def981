//! Coalitions as bitsets over a fixed ground set of players.
//!
//! Players are indexed `0..n-1` internally and rendered 1-based externally
//! (`{1,3}` / key `"1,3"`). A [`Coalition`] carries its ground size so set
//! operations can be checked to stay within the ground.

use std::fmt;

use crate::error::{Error, Result};

/// Hard cap on ground-set size; explicit tables are indexed by mask.
pub const MAX_PLAYERS: usize = 24;

/// Subset of a ground set of `ground` players, as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coalition {
    mask: u32,
    ground: u32,
}

impl Coalition {
    pub fn empty(ground: usize) -> Self {
        debug_assert!(ground <= MAX_PLAYERS);
        Coalition {
            mask: 0,
            ground: ground as u32,
        }
    }

    pub fn full(ground: usize) -> Self {
        debug_assert!(ground <= MAX_PLAYERS);
        Coalition {
            mask: full_mask(ground),
            ground: ground as u32,
        }
    }

    pub fn singleton(ground: usize, player: usize) -> Self {
        debug_assert!(player < ground);
        Coalition {
            mask: 1 << player,
            ground: ground as u32,
        }
    }

    /// From a raw bitmask. Bits outside the ground are rejected.
    pub fn from_mask(mask: u32, ground: usize) -> Result<Self> {
        if mask & !full_mask(ground) != 0 {
            return Err(Error::input(format!(
                "mask {mask:#b} has bits outside ground of size {ground}"
            )));
        }
        Ok(Coalition {
            mask,
            ground: ground as u32,
        })
    }

    pub fn from_players(ground: usize, players: &[usize]) -> Result<Self> {
        let mut mask = 0u32;
        for &p in players {
            if p >= ground {
                return Err(Error::input(format!(
                    "player {} outside ground of size {ground}",
                    p + 1
                )));
            }
            mask |= 1 << p;
        }
        Ok(Coalition {
            mask,
            ground: ground as u32,
        })
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    pub fn ground(&self) -> usize {
        self.ground as usize
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn contains(&self, player: usize) -> bool {
        player < self.ground() && self.mask & (1 << player) != 0
    }

    pub fn union(&self, other: Coalition) -> Coalition {
        debug_assert_eq!(self.ground, other.ground);
        Coalition {
            mask: self.mask | other.mask,
            ground: self.ground,
        }
    }

    pub fn inter(&self, other: Coalition) -> Coalition {
        debug_assert_eq!(self.ground, other.ground);
        Coalition {
            mask: self.mask & other.mask,
            ground: self.ground,
        }
    }

    pub fn minus(&self, other: Coalition) -> Coalition {
        debug_assert_eq!(self.ground, other.ground);
        Coalition {
            mask: self.mask & !other.mask,
            ground: self.ground,
        }
    }

    /// Complement within the ground set.
    pub fn complement(&self) -> Coalition {
        Coalition {
            mask: !self.mask & full_mask(self.ground()),
            ground: self.ground,
        }
    }

    pub fn insert(&self, player: usize) -> Coalition {
        debug_assert!(player < self.ground());
        Coalition {
            mask: self.mask | (1 << player),
            ground: self.ground,
        }
    }

    pub fn remove(&self, player: usize) -> Coalition {
        Coalition {
            mask: self.mask & !(1 << player),
            ground: self.ground,
        }
    }

    pub fn is_subset_of(&self, other: Coalition) -> bool {
        debug_assert_eq!(self.ground, other.ground);
        self.mask & !other.mask == 0
    }

    /// Members in increasing player order.
    pub fn players(&self) -> impl Iterator<Item = usize> + '_ {
        let ground = self.ground();
        (0..ground).filter(move |&p| self.mask & (1 << p) != 0)
    }

    /// Lowest-index member, if any.
    pub fn first_player(&self) -> Option<usize> {
        if self.is_empty() {
            None
        } else {
            Some(self.mask.trailing_zeros() as usize)
        }
    }

    /// All subsets of this coalition (including ∅ and itself), by the
    /// carry-rippler trick. 2^|self| items.
    pub fn subsets(&self) -> Subsets {
        Subsets {
            set: *self,
            next: Some(0),
        }
    }

    /// 1-based comma-separated key, e.g. `"1,3"`. Empty coalition renders as
    /// the empty string.
    pub fn key(&self) -> String {
        self.players()
            .map(|p| (p + 1).to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Parses a 1-based key like `"2,1,3"`; order is canonicalized, duplicates
    /// are rejected.
    pub fn parse_key(key: &str, ground: usize) -> Result<Self> {
        let mut mask = 0u32;
        for part in key.split(',') {
            let p: usize = part
                .trim()
                .parse()
                .map_err(|_| Error::input(format!("bad player index {part:?} in key {key:?}")))?;
            if p == 0 || p > ground {
                return Err(Error::input(format!(
                    "player {p} out of range 1..={ground} in key {key:?}"
                )));
            }
            let bit = 1 << (p - 1);
            if mask & bit != 0 {
                return Err(Error::input(format!("duplicate player {p} in key {key:?}")));
            }
            mask |= bit;
        }
        Coalition::from_mask(mask, ground)
    }
}

fn full_mask(ground: usize) -> u32 {
    debug_assert!(ground <= MAX_PLAYERS);
    if ground == 0 {
        0
    } else {
        (1u32 << ground) - 1
    }
}

/// Iterator over all submasks of a (possibly scattered) set.
pub struct Subsets {
    set: Coalition,
    next: Option<u32>,
}

impl Iterator for Subsets {
    type Item = Coalition;

    fn next(&mut self) -> Option<Coalition> {
        let cur = self.next?;
        self.next = if cur == self.set.mask {
            None
        } else {
            Some(cur.wrapping_sub(self.set.mask) & self.set.mask)
        };
        Some(Coalition {
            mask: cur,
            ground: self.set.ground,
        })
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.key())
    }
}

impl fmt::Debug for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.key())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    #[test]
    fn basic_ops() {
        let n = 4;
        let s = Coalition::from_players(n, &[0, 2]).unwrap();
        let t = Coalition::from_players(n, &[2, 3]).unwrap();
        assert_eq!(s.union(t).key(), "1,3,4");
        assert_eq!(s.inter(t).key(), "3");
        assert_eq!(s.minus(t).key(), "1");
        assert_eq!(s.complement().key(), "2,4");
        assert_eq!(s.len(), 2);
        assert!(s.contains(2));
        assert!(!s.contains(1));
        assert!(s.inter(t).is_subset_of(s));
        assert_eq!(format!("{s}"), "{1,3}");
    }

    #[test]
    fn subset_enumeration_over_scattered_mask() {
        let s = Coalition::from_players(5, &[0, 2, 4]).unwrap();
        let subs: Vec<_> = s.subsets().collect();
        assert_eq!(subs.len(), 8);
        let unique: HashSet<u32> = subs.iter().map(|c| c.mask()).collect();
        assert_eq!(unique.len(), 8);
        assert!(subs.iter().all(|c| c.is_subset_of(s)));
        assert!(subs.contains(&Coalition::empty(5)));
        assert!(subs.contains(&s));
    }

    #[test]
    fn empty_ground() {
        let e = Coalition::empty(0);
        assert_eq!(e.subsets().count(), 1);
        assert_eq!(e, Coalition::full(0));
    }

    #[test]
    fn key_round_trip_and_canonicalization() {
        let s = Coalition::parse_key("3,1", 4).unwrap();
        assert_eq!(s.key(), "1,3");
        assert!(Coalition::parse_key("1,1", 4).is_err());
        assert!(Coalition::parse_key("5", 4).is_err());
        assert!(Coalition::parse_key("0", 4).is_err());
        assert!(Coalition::parse_key("x", 4).is_err());
    }

    #[test]
    fn ordering_is_by_mask() {
        let a = Coalition::from_mask(0b0100, 4).unwrap();
        let b = Coalition::from_mask(0b0011, 4).unwrap();
        assert!(b < a);
    }

    proptest! {
        #[test]
        fn set_ops_match_hashset_model(am in 0u32..256, bm in 0u32..256) {
            let n = 8;
            let a = Coalition::from_mask(am, n).unwrap();
            let b = Coalition::from_mask(bm, n).unwrap();
            let sa: HashSet<usize> = a.players().collect();
            let sb: HashSet<usize> = b.players().collect();
            prop_assert_eq!(a.union(b).players().collect::<HashSet<_>>(),
                            sa.union(&sb).copied().collect::<HashSet<_>>());
            prop_assert_eq!(a.inter(b).players().collect::<HashSet<_>>(),
                            sa.intersection(&sb).copied().collect::<HashSet<_>>());
            prop_assert_eq!(a.minus(b).players().collect::<HashSet<_>>(),
                            sa.difference(&sb).copied().collect::<HashSet<_>>());
            prop_assert_eq!(a.complement().len(), n - a.len());
            prop_assert_eq!(Coalition::parse_key(&a.key(), n).ok(),
                            if a.is_empty() { None } else { Some(a) });
        }
    }
}
