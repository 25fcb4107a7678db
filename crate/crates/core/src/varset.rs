//! Small sets of variable positions stored as a bitmask.

use std::cmp::Ordering;
use std::fmt;

/// Maximum number of variables a [`VarSet`] can address.
pub const MAX_VARS: usize = 32;

/// A subset of the variables of a table, addressed by their position in the
/// table's variable order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct VarSet(u32);

impl VarSet {
    pub const EMPTY: VarSet = VarSet(0);

    pub fn from_bits(bits: u32) -> Self {
        VarSet(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// The set `{0, 1, ..., n-1}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_VARS, "at most {MAX_VARS} variables are supported");
        if n == MAX_VARS {
            VarSet(u32::MAX)
        } else {
            VarSet((1u32 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        assert!(i < MAX_VARS);
        VarSet(1 << i)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        indices
            .into_iter()
            .fold(VarSet::EMPTY, |s, i| s.with(i))
    }

    pub fn with(self, i: usize) -> Self {
        VarSet(self.0 | VarSet::singleton(i).0)
    }

    pub fn contains(self, i: usize) -> bool {
        i < MAX_VARS && self.0 & (1 << i) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn union(self, other: VarSet) -> VarSet {
        VarSet(self.0 | other.0)
    }

    pub fn intersection(self, other: VarSet) -> VarSet {
        VarSet(self.0 & other.0)
    }

    pub fn difference(self, other: VarSet) -> VarSet {
        VarSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: VarSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: VarSet) -> bool {
        self.0 & other.0 == 0
    }

    /// Member positions in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..MAX_VARS).filter(move |&i| bits & (1 << i) != 0)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Every subset of `self`, including the empty set and `self`.
    pub fn subsets(self) -> impl Iterator<Item = VarSet> {
        let members = self.to_vec();
        let n = members.len();
        (0u64..(1u64 << n)).map(move |mask| {
            VarSet::from_indices((0..n).filter(|k| mask & (1 << k) != 0).map(|k| members[k]))
        })
    }

    /// Nondecreasing cardinality, ties broken lexicographically on the sorted
    /// member positions.
    pub fn canonical_cmp(&self, other: &VarSet) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.to_vec().cmp(&other.to_vec()))
    }

    /// Member names in variable order. Concatenated when every name in
    /// `names` is a single character (`"AS"`, `"HAO"`), otherwise joined
    /// with `*` (`"Age*Sex"`).
    pub fn render<S: AsRef<str>>(self, names: &[S]) -> String {
        let sep = if names.iter().all(|n| n.as_ref().chars().count() == 1) {
            ""
        } else {
            "*"
        };
        self.iter()
            .map(|i| names.get(i).map(|s| s.as_ref()).unwrap_or("?"))
            .collect::<Vec<_>>()
            .join(sep)
    }
}

impl fmt::Debug for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
