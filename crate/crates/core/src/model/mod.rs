//! Processes, values, communication graphs and lasso-shaped patterns.

mod adversary;
mod graph;
mod pattern;

use alloc::vec::Vec;
use core::fmt;

pub use adversary::{
    bdll_loops, diamond_ll, dll_pattern, lassos_over, ll, ll_lassos, one_message_alpha,
    one_message_beta, one_message_eta, two_cliques, with_passive_start, words, Adversary,
};
pub use graph::{CommGraph, Link};
pub use pattern::{lcm, LassoPattern};

use crate::error::{Error, Result};

/// Upper bound on the process count; process sets are 64-bit masks.
pub const MAX_PROCESSES: usize = 64;

/// A process identifier in `0..n`. For `n = 2` process 0 is the left
/// process `l` and process 1 the right process `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProcessId(pub u8);

impl ProcessId {
    pub const LEFT: ProcessId = ProcessId(0);
    pub const RIGHT: ProcessId = ProcessId(1);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ProcessId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

pub fn check_process_count(n: usize) -> Result<()> {
    if n == 0 || n > MAX_PROCESSES {
        return Err(Error::ProcessCount {
            got: n,
            max: MAX_PROCESSES,
        });
    }
    Ok(())
}

/// A set of processes stored as a bit mask.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ProcSet(u64);

impl ProcSet {
    pub const EMPTY: ProcSet = ProcSet(0);

    pub fn from_bits(bits: u64) -> Self {
        ProcSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn singleton(p: ProcessId) -> Self {
        ProcSet(1 << p.0)
    }

    pub fn full(n: usize) -> Self {
        if n >= 64 {
            ProcSet(u64::MAX)
        } else {
            ProcSet((1u64 << n) - 1)
        }
    }

    pub fn contains(self, p: ProcessId) -> bool {
        self.0 >> p.0 & 1 == 1
    }

    pub fn insert(&mut self, p: ProcessId) {
        self.0 |= 1 << p.0;
    }

    pub fn remove(&mut self, p: ProcessId) {
        self.0 &= !(1 << p.0);
    }

    pub fn union(self, other: ProcSet) -> ProcSet {
        ProcSet(self.0 | other.0)
    }

    pub fn intersection(self, other: ProcSet) -> ProcSet {
        ProcSet(self.0 & other.0)
    }

    pub fn is_subset(self, other: ProcSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn first(self) -> Option<ProcessId> {
        (self.0 != 0).then(|| ProcessId(self.0.trailing_zeros() as u8))
    }

    pub fn iter(self) -> impl Iterator<Item = ProcessId> {
        let mut bits = self.0;
        core::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let p = bits.trailing_zeros() as u8;
            bits &= bits - 1;
            Some(ProcessId(p))
        })
    }
}

impl FromIterator<ProcessId> for ProcSet {
    fn from_iter<I: IntoIterator<Item = ProcessId>>(iter: I) -> Self {
        let mut set = ProcSet::EMPTY;
        for p in iter {
            set.insert(p);
        }
        set
    }
}

impl fmt::Debug for ProcSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|p| p.0)).finish()
    }
}

/// A decision or input value, held as its position in the [`ValueSet`].
/// Comparisons follow the value-set order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Value(pub u32);

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The finite set of input values. Its total order is the list order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueSet {
    values: Vec<i64>,
}

impl ValueSet {
    pub fn new(values: Vec<i64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::ValueSet);
        }
        for (i, v) in values.iter().enumerate() {
            if values[..i].contains(v) {
                return Err(Error::ValueSet);
            }
        }
        Ok(ValueSet { values })
    }

    /// `{0, 1}` in natural order.
    pub fn binary() -> Self {
        Self::range(2)
    }

    /// `{0, .., k-1}` in natural order.
    pub fn range(k: usize) -> Self {
        ValueSet {
            values: (0..k.max(1) as i64).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, v: Value) -> bool {
        (v.0 as usize) < self.values.len()
    }

    pub fn value(&self, raw: i64) -> Result<Value> {
        self.values
            .iter()
            .position(|&x| x == raw)
            .map(|i| Value(i as u32))
            .ok_or(Error::UnknownValue(raw))
    }

    pub fn raw(&self, v: Value) -> i64 {
        self.values[v.0 as usize]
    }

    pub fn raw_values(&self) -> &[i64] {
        &self.values
    }

    pub fn members(&self) -> impl Iterator<Item = Value> {
        (0..self.values.len() as u32).map(Value)
    }
}

/// Input values indexed by process.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InputAssignment(Vec<Value>);

impl InputAssignment {
    pub fn new(inputs: Vec<Value>) -> Result<Self> {
        check_process_count(inputs.len())?;
        Ok(InputAssignment(inputs))
    }

    /// Shorthand for ranks, e.g. `InputAssignment::of(&[0, 1])`.
    pub fn of(ranks: &[u32]) -> Self {
        InputAssignment(ranks.iter().map(|&r| Value(r)).collect())
    }

    pub fn uniform(n: usize, v: Value) -> Self {
        InputAssignment(alloc::vec![v; n])
    }

    pub fn check(&self, n: usize, values: &ValueSet) -> Result<()> {
        if self.0.len() != n {
            return Err(Error::InputLength {
                expected: n,
                got: self.0.len(),
            });
        }
        if let Some(v) = self.0.iter().find(|v| !values.contains(**v)) {
            return Err(Error::UnknownValue(v.0 as i64));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, p: ProcessId) -> Value {
        self.0[p.index()]
    }

    pub fn as_slice(&self) -> &[Value] {
        &self.0
    }

    /// `Some(v)` iff every process starts with `v`.
    pub fn valent(&self) -> Option<Value> {
        let first = *self.0.first()?;
        self.0.iter().all(|&v| v == first).then_some(first)
    }

    /// Minimum input among `set`, `None` for the empty set.
    pub fn min_over(&self, set: ProcSet) -> Option<Value> {
        set.iter().map(|p| self.get(p)).min()
    }

    /// Every binary assignment for `n` processes, in lexicographic order.
    pub fn all_binary(n: usize) -> Vec<InputAssignment> {
        (0..1u32 << n)
            .map(|bits| InputAssignment((0..n).map(|i| Value(bits >> (n - 1 - i) & 1)).collect()))
            .collect()
    }
}
