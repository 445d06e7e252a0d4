//! Fixed-width index sets for devices and packets.
//!
//! Both sets are 64-bit masks. Indices are zero-based; the public
//! constructors reject indices at or beyond [`MAX_INDEX`].

use std::cmp::Ordering;
use std::fmt;
use std::ops::{BitAnd, BitAndAssign, BitOr, BitOrAssign, Sub};

use serde::{Deserialize, Serialize};

/// Largest number of devices or packets a set can hold.
pub const MAX_INDEX: usize = 64;

macro_rules! index_set {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
        #[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
        pub struct $name(u64);

        impl $name {
            pub const fn empty() -> Self {
                Self(0)
            }

            /// The set `{0, .., n - 1}`.
            pub fn full(n: usize) -> Self {
                assert!(n <= MAX_INDEX, "set width {n} exceeds {MAX_INDEX}");
                if n == MAX_INDEX {
                    Self(u64::MAX)
                } else {
                    Self((1u64 << n) - 1)
                }
            }

            pub fn singleton(i: usize) -> Self {
                assert!(i < MAX_INDEX, "index {i} out of range");
                Self(1u64 << i)
            }

            pub const fn from_bits(bits: u64) -> Self {
                Self(bits)
            }

            pub const fn bits(self) -> u64 {
                self.0
            }

            pub const fn contains(self, i: usize) -> bool {
                i < MAX_INDEX && self.0 & (1u64 << i) != 0
            }

            pub fn insert(&mut self, i: usize) {
                assert!(i < MAX_INDEX, "index {i} out of range");
                self.0 |= 1u64 << i;
            }

            pub fn remove(&mut self, i: usize) {
                if i < MAX_INDEX {
                    self.0 &= !(1u64 << i);
                }
            }

            pub const fn len(self) -> usize {
                self.0.count_ones() as usize
            }

            pub const fn is_empty(self) -> bool {
                self.0 == 0
            }

            pub const fn union(self, other: Self) -> Self {
                Self(self.0 | other.0)
            }

            pub const fn intersection(self, other: Self) -> Self {
                Self(self.0 & other.0)
            }

            pub const fn difference(self, other: Self) -> Self {
                Self(self.0 & !other.0)
            }

            pub const fn is_subset(self, other: Self) -> bool {
                self.0 & !other.0 == 0
            }

            pub const fn is_disjoint(self, other: Self) -> bool {
                self.0 & other.0 == 0
            }

            pub const fn intersects(self, other: Self) -> bool {
                self.0 & other.0 != 0
            }

            pub fn first(self) -> Option<usize> {
                (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
            }

            /// Members in increasing order.
            pub fn iter(self) -> SetIter {
                SetIter(self.0)
            }

            pub fn to_vec(self) -> Vec<usize> {
                self.iter().collect()
            }

            /// Lexicographic order of the sorted member lists, so `{0} < {0, 1} < {1}`.
            pub fn lex_cmp(self, other: Self) -> Ordering {
                self.iter().cmp(other.iter())
            }

            /// Every subset of `self`, ordered lexicographically by sorted
            /// member list (the empty set first).
            pub fn subsets_lex(self) -> Vec<Self> {
                subsets_lex_bits(self.0).into_iter().map(Self).collect()
            }
        }

        impl BitOr for $name {
            type Output = Self;
            fn bitor(self, rhs: Self) -> Self {
                self.union(rhs)
            }
        }

        impl BitOrAssign for $name {
            fn bitor_assign(&mut self, rhs: Self) {
                self.0 |= rhs.0;
            }
        }

        impl BitAnd for $name {
            type Output = Self;
            fn bitand(self, rhs: Self) -> Self {
                self.intersection(rhs)
            }
        }

        impl BitAndAssign for $name {
            fn bitand_assign(&mut self, rhs: Self) {
                self.0 &= rhs.0;
            }
        }

        impl Sub for $name {
            type Output = Self;
            fn sub(self, rhs: Self) -> Self {
                self.difference(rhs)
            }
        }

        impl FromIterator<usize> for $name {
            fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
                let mut set = Self::empty();
                for i in iter {
                    set.insert(i);
                }
                set
            }
        }

        impl TryFrom<Vec<usize>> for $name {
            type Error = String;
            fn try_from(v: Vec<usize>) -> Result<Self, String> {
                match v.iter().find(|&&i| i >= MAX_INDEX) {
                    Some(i) => Err(format!("index {i} exceeds the supported width {MAX_INDEX}")),
                    None => Ok(v.into_iter().collect()),
                }
            }
        }

        impl From<$name> for Vec<usize> {
            fn from(s: $name) -> Self {
                s.to_vec()
            }
        }

        impl IntoIterator for $name {
            type Item = usize;
            type IntoIter = SetIter;
            fn into_iter(self) -> SetIter {
                self.iter()
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.debug_set().entries(self.iter()).finish()
            }
        }
    };
}

index_set!(
    /// A set of device indices.
    DeviceSet
);

index_set!(
    /// A set of packet indices within a frame. Binary XOR combinations are
    /// represented by the set of their source packets.
    PacketSet
);

/// Ascending iterator over the members of a set.
#[derive(Clone, Debug)]
pub struct SetIter(u64);

impl Iterator for SetIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for SetIter {}

fn subsets_lex_bits(universe: u64) -> Vec<u64> {
    let members: Vec<u64> = SetIter(universe).map(|i| 1u64 << i).collect();
    let mut out = Vec::with_capacity(1 << members.len());
    fn rec(members: &[u64], from: usize, current: u64, out: &mut Vec<u64>) {
        out.push(current);
        for k in from..members.len() {
            rec(members, k + 1, current | members[k], out);
        }
    }
    rec(&members, 0, 0, &mut out);
    out
}
