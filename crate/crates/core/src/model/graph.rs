use alloc::vec::Vec;
use core::fmt;

use super::{check_process_count, ProcSet, ProcessId};
use crate::error::{Error, Result};

/// The four graphs on two processes. `Right` carries a message from `l`
/// to `r`, `Left` one from `r` to `l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Link {
    Right,
    Both,
    Left,
    Silent,
}

impl Link {
    pub const ALL: [Link; 4] = [Link::Right, Link::Both, Link::Left, Link::Silent];
    /// The lossy-link alphabet, in prefix order.
    pub const LOSSY: [Link; 3] = [Link::Right, Link::Both, Link::Left];

    pub fn symbol(self) -> char {
        match self {
            Link::Right => '>',
            Link::Both => '=',
            Link::Left => '<',
            Link::Silent => '-',
        }
    }

    pub fn from_symbol(c: char) -> Option<Link> {
        match c {
            '>' => Some(Link::Right),
            '=' => Some(Link::Both),
            '<' => Some(Link::Left),
            '-' => Some(Link::Silent),
            _ => None,
        }
    }

    pub fn graph(self) -> CommGraph {
        let l = ProcSet::singleton(ProcessId::LEFT);
        let r = ProcSet::singleton(ProcessId::RIGHT);
        let both = l.union(r);
        let (into_l, into_r) = match self {
            Link::Right => (l, both),
            Link::Both => (both, both),
            Link::Left => (both, r),
            Link::Silent => (l, r),
        };
        CommGraph {
            incoming: alloc::vec![into_l, into_r],
        }
    }
}

/// A directed communication graph for one round. Stored as the set of
/// in-neighbours of every process, self-loops included.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CommGraph {
    incoming: Vec<ProcSet>,
}

impl CommGraph {
    /// Builds a graph from in-neighbour sets. Every set must contain its
    /// own process.
    pub fn from_incoming(incoming: Vec<ProcSet>) -> Result<Self> {
        let n = incoming.len();
        check_process_count(n)?;
        let all = ProcSet::full(n);
        for (i, set) in incoming.iter().enumerate() {
            let p = ProcessId(i as u8);
            if !set.contains(p) {
                return Err(Error::MissingSelfLoop(p));
            }
            if let Some(q) = set.iter().find(|q| !all.contains(*q)) {
                return Err(Error::ProcessOutOfRange(q));
            }
        }
        Ok(CommGraph { incoming })
    }

    /// Builds a graph from a full adjacency matrix `adj[from][to]`.
    pub fn from_adjacency(adj: &[Vec<bool>]) -> Result<Self> {
        let n = adj.len();
        check_process_count(n)?;
        let mut incoming = alloc::vec![ProcSet::EMPTY; n];
        for (from, row) in adj.iter().enumerate() {
            if row.len() != n {
                return Err(Error::MixedProcessCount {
                    expected: n,
                    got: row.len(),
                });
            }
            for (to, &e) in row.iter().enumerate() {
                if e {
                    incoming[to].insert(ProcessId(from as u8));
                }
            }
        }
        Self::from_incoming(incoming)
    }

    /// Self-loops plus the listed `(from, to)` edges.
    pub fn with_edges(n: usize, edges: &[(ProcessId, ProcessId)]) -> Result<Self> {
        check_process_count(n)?;
        let mut incoming: Vec<ProcSet> = (0..n).map(|i| ProcSet::singleton(ProcessId(i as u8))).collect();
        for &(from, to) in edges {
            for p in [from, to] {
                if p.index() >= n {
                    return Err(Error::ProcessOutOfRange(p));
                }
            }
            incoming[to.index()].insert(from);
        }
        Ok(CommGraph { incoming })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::with_edges(n, &[])
    }

    pub fn complete(n: usize) -> Result<Self> {
        check_process_count(n)?;
        Ok(CommGraph {
            incoming: alloc::vec![ProcSet::full(n); n],
        })
    }

    pub fn n(&self) -> usize {
        self.incoming.len()
    }

    pub fn incoming(&self, p: ProcessId) -> ProcSet {
        self.incoming[p.index()]
    }

    pub fn has_edge(&self, from: ProcessId, to: ProcessId) -> bool {
        self.incoming[to.index()].contains(from)
    }

    /// The processes a set reaches in one hop, the set itself included.
    pub fn step(&self, from: ProcSet) -> ProcSet {
        self.incoming
            .iter()
            .enumerate()
            .filter(|(_, inc)| !inc.intersection(from).is_empty())
            .map(|(i, _)| ProcessId(i as u8))
            .collect()
    }

    /// The in-neighbours of a set, the set itself included.
    pub fn step_back(&self, to: ProcSet) -> ProcSet {
        to.iter().fold(ProcSet::EMPTY, |acc, p| acc.union(self.incoming(p)))
    }

    /// The two-process link this graph encodes, if `n = 2`.
    pub fn as_link(&self) -> Option<Link> {
        if self.n() != 2 {
            return None;
        }
        let lr = self.has_edge(ProcessId::LEFT, ProcessId::RIGHT);
        let rl = self.has_edge(ProcessId::RIGHT, ProcessId::LEFT);
        Some(match (lr, rl) {
            (true, true) => Link::Both,
            (true, false) => Link::Right,
            (false, true) => Link::Left,
            (false, false) => Link::Silent,
        })
    }
}

impl From<Link> for CommGraph {
    fn from(link: Link) -> Self {
        link.graph()
    }
}

impl fmt::Debug for CommGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(link) = self.as_link() {
            return write!(f, "{}", link.symbol());
        }
        f.debug_list().entries(self.incoming.iter()).finish()
    }
}
