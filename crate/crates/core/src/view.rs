//! Hash-consed full-information views.
//!
//! A view is the complete causal history a process holds at some point:
//! its input, and every view it has received together with its own
//! previous view. Structurally equal views share one node, so `~_p` is a
//! [`ViewId`] comparison inside a store and a [`Digest`] comparison across
//! stores.

use alloc::vec::Vec;
use core::fmt;

use hashbrown::HashMap;
use sha2::{Digest as _, Sha256};

use crate::model::{ProcSet, ProcessId, Value};

/// Index of an interned view inside its [`ViewStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ViewId(u32);

impl ViewId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// SHA-256 over the canonical encoding of a view. Independent of the store
/// the view lives in.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Digest(pub [u8; 32]);

impl Digest {
    pub fn to_hex(&self) -> alloc::string::String {
        use core::fmt::Write;
        let mut s = alloc::string::String::with_capacity(64);
        for b in self.0 {
            let _ = write!(s, "{b:02x}");
        }
        s
    }

    pub fn from_hex(hex: &str) -> Option<Digest> {
        if hex.len() != 64 || !hex.is_ascii() {
            return None;
        }
        let mut out = [0u8; 32];
        for (i, byte) in out.iter_mut().enumerate() {
            *byte = u8::from_str_radix(&hex[2 * i..2 * i + 2], 16).ok()?;
        }
        Some(Digest(out))
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({})", &self.to_hex()[..12])
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct Node {
    owner: ProcessId,
    clock: u32,
    input: Value,
    prev: u32,
    children: Vec<ViewId>,
    ho: ProcSet,
    min_input: Value,
    digest: Digest,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Key {
    owner: ProcessId,
    clock: u32,
    input: Value,
    children: Vec<ViewId>,
}

/// Arena of interned views for `n` processes.
#[derive(Debug, Clone)]
pub struct ViewStore {
    n: usize,
    nodes: Vec<Node>,
    /// `n` slots per node: the highest-clock view of each process
    /// contained in the node, or `NONE`.
    latest: Vec<u32>,
    index: HashMap<Key, ViewId>,
}

impl ViewStore {
    pub fn new(n: usize) -> Self {
        ViewStore {
            n,
            nodes: Vec::new(),
            latest: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The view of `owner` before any communication.
    pub fn initial(&mut self, owner: ProcessId, input: Value) -> ViewId {
        assert!(owner.index() < self.n, "process out of range");
        self.intern(Key {
            owner,
            clock: 0,
            input,
            children: Vec::new(),
        })
    }

    /// The view following `prev` after receiving `received`. Views of the
    /// owner itself among `received` are ignored unless they are `prev`.
    pub fn extend(&mut self, prev: ViewId, received: &[ViewId]) -> ViewId {
        let p = &self.nodes[prev.index()];
        let (owner, clock, input) = (p.owner, p.clock + 1, p.input);
        let mut children: Vec<ViewId> = received
            .iter()
            .copied()
            .filter(|&v| self.nodes[v.index()].owner != owner)
            .collect();
        children.push(prev);
        children.sort_unstable();
        children.dedup();
        self.intern(Key {
            owner,
            clock,
            input,
            children,
        })
    }

    fn intern(&mut self, key: Key) -> ViewId {
        if let Some(&id) = self.index.get(&key) {
            return id;
        }
        let id = ViewId(u32::try_from(self.nodes.len()).expect("view store overflow"));
        let mut ho = ProcSet::singleton(key.owner);
        let mut min_input = key.input;
        let mut prev = NONE;
        let base = self.latest.len();
        self.latest.extend(core::iter::repeat_n(NONE, self.n));
        self.latest[base + key.owner.index()] = id.0;
        let mut digests: Vec<[u8; 32]> = Vec::with_capacity(key.children.len());
        for &c in &key.children {
            let child = &self.nodes[c.index()];
            ho = ho.union(child.ho);
            min_input = min_input.min(child.min_input);
            digests.push(child.digest.0);
            if child.owner == key.owner && child.clock + 1 == key.clock {
                prev = c.0;
            }
            for x in 0..self.n {
                if x == key.owner.index() {
                    continue;
                }
                let theirs = self.latest[c.index() * self.n + x];
                let mine = self.latest[base + x];
                if theirs != NONE && (mine == NONE || self.nodes[theirs as usize].clock > self.nodes[mine as usize].clock) {
                    self.latest[base + x] = theirs;
                }
            }
        }
        digests.sort_unstable();
        let mut h = Sha256::new();
        h.update([key.owner.0]);
        h.update(key.clock.to_le_bytes());
        h.update(key.input.0.to_le_bytes());
        h.update((digests.len() as u32).to_le_bytes());
        for d in &digests {
            h.update(d);
        }
        let digest = Digest(h.finalize().into());
        self.nodes.push(Node {
            owner: key.owner,
            clock: key.clock,
            input: key.input,
            prev,
            children: key.children.clone(),
            ho,
            min_input,
            digest,
        });
        self.index.insert(key, id);
        id
    }

    pub fn owner(&self, v: ViewId) -> ProcessId {
        self.nodes[v.index()].owner
    }

    /// Round (synchronous) or step count (asynchronous) of the view.
    pub fn clock(&self, v: ViewId) -> u32 {
        self.nodes[v.index()].clock
    }

    pub fn input(&self, v: ViewId) -> Value {
        self.nodes[v.index()].input
    }

    /// Own previous view followed by received views, in store order.
    pub fn children(&self, v: ViewId) -> &[ViewId] {
        &self.nodes[v.index()].children
    }

    /// The owner's previous view, `None` at clock 0.
    pub fn own_prev(&self, v: ViewId) -> Option<ViewId> {
        let prev = self.nodes[v.index()].prev;
        (prev != NONE).then_some(ViewId(prev))
    }

    /// Received views of other processes.
    pub fn foreign_children(&self, v: ViewId) -> impl Iterator<Item = ViewId> + '_ {
        let owner = self.owner(v);
        self.children(v).iter().copied().filter(move |&c| self.owner(c) != owner)
    }

    /// Processes the owner has transitively heard of, itself included.
    pub fn ho(&self, v: ViewId) -> ProcSet {
        self.nodes[v.index()].ho
    }

    /// Minimum input over [`ViewStore::ho`].
    pub fn min_input(&self, v: ViewId) -> Value {
        self.nodes[v.index()].min_input
    }

    pub fn digest(&self, v: ViewId) -> Digest {
        self.nodes[v.index()].digest
    }

    /// The highest-clock view of `x` contained in `v`.
    pub fn latest(&self, v: ViewId, x: ProcessId) -> Option<ViewId> {
        let id = self.latest[v.index() * self.n + x.index()];
        (id != NONE).then_some(ViewId(id))
    }

    /// The owner's own view at an earlier clock.
    pub fn ancestor_at(&self, v: ViewId, clock: u32) -> Option<ViewId> {
        let mut cur = v;
        while self.clock(cur) > clock {
            cur = self.own_prev(cur)?;
        }
        (self.clock(cur) == clock).then_some(cur)
    }
}
