//! Pattern factories for the named two-process adversaries and a few
//! multi-process fixtures.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use super::{CommGraph, LassoPattern, Link, ProcSet, ProcessId};
use crate::error::{Error, Result};

/// The message adversaries the factories build patterns for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Adversary {
    /// Every round is one of `→`, `↔`, `←`.
    LossyLink,
    /// Finitely many silent rounds, then lossy-link forever.
    EventuallyLossyLink,
    /// Lossy-link rounds separated by at most `T` silent rounds.
    BoundedDelayed(usize),
    /// Lossy-link rounds separated by finite silent periods.
    Delayed,
    /// Exactly one message, `→` or `←`, in the whole execution.
    OneMessage,
}

impl Adversary {
    pub fn name(self) -> &'static str {
        match self {
            Adversary::LossyLink => "LL",
            Adversary::EventuallyLossyLink => "eventual LL",
            Adversary::BoundedDelayed(_) => "BDLL",
            Adversary::Delayed => "DLL",
            Adversary::OneMessage => "one-message LL",
        }
    }

    /// Checks that the pattern is admissible, with the reason if not.
    pub fn check(self, pattern: &LassoPattern) -> Result<()> {
        let fail = |reason: alloc::string::String| Error::Inadmissible {
            model: self.name(),
            reason,
        };
        let links = links_of(pattern).ok_or_else(|| fail(format!("needs 2 processes, got {}", pattern.n())))?;
        let (prefix, cycle) = links;
        let silent = |l: &Link| *l == Link::Silent;
        match self {
            Adversary::LossyLink => {
                if prefix.iter().chain(&cycle).any(silent) {
                    return Err(fail("silent round".into()));
                }
            }
            Adversary::EventuallyLossyLink => {
                let lead = prefix.iter().take_while(|l| silent(l)).count();
                if prefix[lead..].iter().chain(&cycle).any(silent) {
                    return Err(fail("silent round after the first message".into()));
                }
            }
            Adversary::Delayed => {
                if cycle.iter().all(silent) {
                    return Err(fail("silent forever".into()));
                }
            }
            Adversary::BoundedDelayed(bound) => {
                if cycle.iter().all(silent) {
                    return Err(fail("silent forever".into()));
                }
                let longest = longest_silence(&prefix, &cycle);
                if longest > bound {
                    return Err(fail(format!("{longest} consecutive silent rounds exceed T={bound}")));
                }
            }
            Adversary::OneMessage => {
                let sent: Vec<Link> = prefix.iter().chain(&cycle).copied().filter(|l| !silent(l)).collect();
                let ok = cycle.iter().all(silent) && sent.len() == 1 && sent[0] != Link::Both;
                if !ok {
                    return Err(fail("needs exactly one one-way message".into()));
                }
            }
        }
        Ok(())
    }

    pub fn admits(self, pattern: &LassoPattern) -> bool {
        self.check(pattern).is_ok()
    }
}

fn links_of(pattern: &LassoPattern) -> Option<(Vec<Link>, Vec<Link>)> {
    if pattern.n() != 2 {
        return None;
    }
    let prefix = pattern.prefix().iter().map(|g| g.as_link()).collect::<Option<Vec<_>>>()?;
    let cycle = pattern.cycle().iter().map(|g| g.as_link()).collect::<Option<Vec<_>>>()?;
    Some((prefix, cycle))
}

/// Longest run of silent rounds in `prefix · cycle^ω`; runs inside the
/// loop wrap around.
fn longest_silence(prefix: &[Link], cycle: &[Link]) -> usize {
    let seq: Vec<Link> = prefix.iter().chain(cycle).chain(cycle).chain(cycle).copied().collect();
    let (mut best, mut run) = (0, 0);
    for l in seq {
        run = if l == Link::Silent { run + 1 } else { 0 };
        best = best.max(run);
    }
    best
}

/// A lossy-link pattern; rejects silent rounds.
pub fn ll(prefix: &[Link], cycle: &[Link]) -> Result<LassoPattern> {
    let pattern = LassoPattern::from_links(prefix, cycle)?;
    Adversary::LossyLink.check(&pattern)?;
    Ok(pattern)
}

/// `silence` empty graphs followed by a lossy-link pattern.
pub fn diamond_ll(silence: usize, prefix: &[Link], cycle: &[Link]) -> Result<LassoPattern> {
    let inner = ll(prefix, cycle)?;
    inner.after(&alloc::vec![Link::Silent.graph(); silence])
}

/// `σ —^m tail^ω`, the parametrized delayed lossy-link executions.
pub fn dll_pattern(sigma: &[Link], m: usize, tail: Link) -> Result<LassoPattern> {
    let mut prefix = sigma.to_vec();
    prefix.extend(core::iter::repeat_n(Link::Silent, m));
    let pattern = LassoPattern::from_links(&prefix, &[tail])?;
    Adversary::Delayed.check(&pattern)?;
    Ok(pattern)
}

fn one_message(i: usize, link: Link) -> LassoPattern {
    let mut prefix = alloc::vec![Link::Silent; i];
    prefix.push(link);
    LassoPattern::from_links(&prefix, &[Link::Silent]).expect("two-process links")
}

/// `—^i → —^ω`: `r` hears from `l` once, in round `i + 1`.
pub fn one_message_alpha(i: usize) -> LassoPattern {
    one_message(i, Link::Right)
}

/// `—^i ← —^ω`: `l` hears from `r` once, in round `i + 1`.
pub fn one_message_beta(i: usize) -> LassoPattern {
    one_message(i, Link::Left)
}

/// `—^ω`.
pub fn one_message_eta() -> LassoPattern {
    LassoPattern::from_links(&[], &[Link::Silent]).expect("two-process links")
}

/// Every distinct lossy-link lasso with `|prefix| <= max_prefix` and
/// `|loop| <= max_loop`, deduplicated by infinite sequence.
pub fn ll_lassos(max_prefix: usize, max_loop: usize) -> Vec<LassoPattern> {
    lassos_over(&Link::LOSSY, max_prefix, max_loop)
}

/// Every distinct two-process lasso over `alphabet`, deduplicated by
/// infinite sequence, in a deterministic order.
pub fn lassos_over(alphabet: &[Link], max_prefix: usize, max_loop: usize) -> Vec<LassoPattern> {
    let mut seen = BTreeSet::new();
    for plen in 0..=max_prefix {
        for prefix in words(alphabet, plen) {
            for clen in 1..=max_loop {
                for cycle in words(alphabet, clen) {
                    let pat = LassoPattern::from_links(&prefix, &cycle).expect("two-process links");
                    seen.insert(pat.canonical());
                }
            }
        }
    }
    seen.into_iter().collect()
}

/// Every loop of length `<= max_len` admissible for bounded-delay `T`,
/// with empty prefix, deduplicated by infinite sequence.
pub fn bdll_loops(bound: usize, max_len: usize) -> Vec<LassoPattern> {
    let mut seen = BTreeSet::new();
    for len in 1..=max_len {
        for cycle in words(&Link::ALL, len) {
            let pat = LassoPattern::from_links(&[], &cycle).expect("two-process links");
            if Adversary::BoundedDelayed(bound).admits(&pat) {
                seen.insert(pat.canonical());
            }
        }
    }
    seen.into_iter().collect()
}

/// All words of length `len` over `alphabet`, lexicographic in alphabet
/// order.
pub fn words(alphabet: &[Link], len: usize) -> Vec<Vec<Link>> {
    let mut out = alloc::vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                alphabet.iter().map(move |&l| {
                    let mut w = w.clone();
                    w.push(l);
                    w
                })
            })
            .collect();
    }
    out
}

/// Two disjoint cliques `{0..a}` and `{a..a+b}`, every round.
pub fn two_cliques(a: usize, b: usize) -> Result<LassoPattern> {
    let left = ProcSet::full(a);
    let right = ProcSet::from_bits(ProcSet::full(a + b).bits() & !left.bits());
    let incoming = (0..a + b).map(|i| if i < a { left } else { right }).collect();
    LassoPattern::new(Vec::new(), alloc::vec![CommGraph::from_incoming(incoming)?])
}

/// The pattern with `p` cut off (no sends, no receives) for the first
/// `rounds` rounds, modelling a process that starts late.
pub fn with_passive_start(pattern: &LassoPattern, p: ProcessId, rounds: usize) -> Result<LassoPattern> {
    if p.index() >= pattern.n() {
        return Err(Error::ProcessOutOfRange(p));
    }
    let total = rounds.max(pattern.prefix_len());
    let me = ProcSet::singleton(p);
    let prefix = (1..=total)
        .map(|t| {
            let g = pattern.graph_at(t);
            if t > rounds {
                return g.clone();
            }
            let incoming = (0..pattern.n())
                .map(|i| {
                    let q = ProcessId(i as u8);
                    if q == p {
                        me
                    } else {
                        let mut set = g.incoming(q);
                        set.remove(p);
                        set
                    }
                })
                .collect();
            CommGraph::from_incoming(incoming).expect("self-loops kept")
        })
        .collect();
    let shift = total - pattern.prefix_len();
    let mut cycle = pattern.cycle().to_vec();
    let len = cycle.len();
    cycle.rotate_left(shift % len);
    LassoPattern::new(prefix, cycle)
}
