use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::{CommGraph, Link, ProcSet, ProcessId};
use crate::error::{Error, Result};

/// An eventually periodic communication pattern: `prefix` followed by
/// `cycle` repeated forever. Round `t >= 1` is governed by
/// [`LassoPattern::graph_at`].
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LassoPattern {
    n: usize,
    prefix: Vec<CommGraph>,
    cycle: Vec<CommGraph>,
}

impl LassoPattern {
    pub fn new(prefix: Vec<CommGraph>, cycle: Vec<CommGraph>) -> Result<Self> {
        let n = cycle.first().ok_or(Error::EmptyLoop)?.n();
        if let Some(g) = prefix.iter().chain(&cycle).find(|g| g.n() != n) {
            return Err(Error::MixedProcessCount {
                expected: n,
                got: g.n(),
            });
        }
        Ok(LassoPattern { n, prefix, cycle })
    }

    pub fn from_links(prefix: &[Link], cycle: &[Link]) -> Result<Self> {
        Self::new(
            prefix.iter().map(|l| l.graph()).collect(),
            cycle.iter().map(|l| l.graph()).collect(),
        )
    }

    /// Parses a two-process literal such as `"<--:>"` (prefix `←——`, loop
    /// `→`). Without a colon the whole literal is the loop.
    pub fn parse(literal: &str) -> Result<Self> {
        let bad = |reason: &str| Error::PatternLiteral {
            literal: literal.to_string(),
            reason: reason.to_string(),
        };
        let (prefix, cycle) = match literal.split_once(':') {
            Some((p, c)) => (p, c),
            None => ("", literal),
        };
        let links = |s: &str| -> Result<Vec<Link>> {
            s.chars()
                .map(|c| Link::from_symbol(c).ok_or_else(|| bad("expected one of '>', '<', '=', '-'")))
                .collect()
        };
        let prefix = links(prefix)?;
        let cycle = links(cycle)?;
        if cycle.is_empty() {
            return Err(bad("the loop part is empty"));
        }
        Self::from_links(&prefix, &cycle)
    }

    /// The literal form for two-process patterns.
    pub fn literal(&self) -> Option<String> {
        let mut out = String::new();
        for g in &self.prefix {
            out.push(g.as_link()?.symbol());
        }
        out.push(':');
        for g in &self.cycle {
            out.push(g.as_link()?.symbol());
        }
        Some(out)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn prefix(&self) -> &[CommGraph] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[CommGraph] {
        &self.cycle
    }

    pub fn prefix_len(&self) -> usize {
        self.prefix.len()
    }

    pub fn loop_len(&self) -> usize {
        self.cycle.len()
    }

    /// The graph of round `t`. Panics for `t = 0`; see
    /// [`LassoPattern::pattern_at`] for the checked form.
    pub fn graph_at(&self, t: usize) -> &CommGraph {
        assert!(t >= 1, "rounds are 1-indexed");
        if t <= self.prefix.len() {
            &self.prefix[t - 1]
        } else {
            &self.cycle[(t - 1 - self.prefix.len()) % self.cycle.len()]
        }
    }

    pub fn pattern_at(&self, t: usize) -> Result<&CommGraph> {
        if t == 0 {
            return Err(Error::RoundZero);
        }
        Ok(self.graph_at(t))
    }

    /// Graphs of rounds `1..=k`.
    pub fn first_rounds(&self, k: usize) -> Vec<CommGraph> {
        (1..=k).map(|t| self.graph_at(t).clone()).collect()
    }

    /// `graphs` followed by this pattern.
    pub fn after(&self, graphs: &[CommGraph]) -> Result<Self> {
        let mut prefix = graphs.to_vec();
        prefix.extend(self.prefix.iter().cloned());
        Self::new(prefix, self.cycle.clone())
    }

    /// The same infinite sequence with the shortest loop and prefix.
    pub fn canonical(&self) -> Self {
        let len = self.cycle.len();
        let period = (1..=len)
            .find(|&d| len.is_multiple_of(d) && (d..len).all(|i| self.cycle[i] == self.cycle[i - d]))
            .unwrap_or(len);
        let mut cycle: Vec<CommGraph> = self.cycle[..period].to_vec();
        let mut prefix = self.prefix.clone();
        while let Some(last) = prefix.last() {
            if *last != cycle[period - 1] {
                break;
            }
            prefix.pop();
            cycle.rotate_right(1);
        }
        LassoPattern {
            n: self.n,
            prefix,
            cycle,
        }
    }

    /// Whether both patterns describe the same infinite graph sequence.
    pub fn same_sequence(&self, other: &LassoPattern) -> bool {
        self.canonical() == other.canonical()
    }

    /// Processes reached from `from` by journeys using rounds
    /// `start..start + rounds`.
    pub fn reach_forward(&self, from: ProcSet, start: usize, rounds: usize) -> ProcSet {
        (start..start + rounds).fold(from, |set, t| self.graph_at(t).step(set))
    }

    /// Processes that reach every process from every start round.
    ///
    /// Waiting is free (self-loops), so only starts inside the loop matter.
    /// From each loop start the reach set is pushed one loop period at a
    /// time; a period that adds nothing means it never grows again.
    pub fn kernel(&self) -> ProcSet {
        let all = ProcSet::full(self.n);
        let len = self.cycle.len();
        let first = self.prefix.len() + 1;
        let mut kernel = ProcSet::EMPTY;
        'candidates: for p in all.iter() {
            for s in first..first + len {
                let mut reach = ProcSet::singleton(p);
                loop {
                    let next = self.reach_forward(reach, s, len);
                    if next == reach {
                        break;
                    }
                    reach = next;
                }
                if reach != all {
                    continue 'candidates;
                }
            }
            kernel.insert(p);
        }
        kernel
    }

    /// Whether `p` is silent towards every other process in every round.
    pub fn isolates(&self, p: ProcessId) -> bool {
        self.prefix
            .iter()
            .chain(&self.cycle)
            .all(|g| g.step(ProcSet::singleton(p)) == ProcSet::singleton(p))
    }
}

impl fmt::Debug for LassoPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.literal() {
            Some(lit) => write!(f, "LassoPattern({lit})"),
            None => f
                .debug_struct("LassoPattern")
                .field("n", &self.n)
                .field("prefix", &self.prefix)
                .field("cycle", &self.cycle)
                .finish(),
        }
    }
}

/// Least common multiple, used to align two loops.
pub fn lcm(a: usize, b: usize) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> LassoPattern {
        LassoPattern::parse(s).unwrap()
    }

    #[test]
    fn lookup_in_prefix_and_loop() {
        let pat = p(">:<");
        assert_eq!(pat.graph_at(1).as_link(), Some(Link::Right));
        assert_eq!(pat.graph_at(7).as_link(), Some(Link::Left));
        let pat = p("<--:>");
        assert_eq!(pat.graph_at(4).as_link(), Some(Link::Right));
        assert_eq!(pat.pattern_at(0), Err(Error::RoundZero));
    }

    #[test]
    fn literal_forms() {
        assert_eq!(p("<").literal().unwrap(), ":<");
        assert_eq!(p(":<").literal().unwrap(), ":<");
        assert_eq!(p("=<:->").literal().unwrap(), "=<:->");
        assert!(LassoPattern::parse("<:").is_err());
        assert!(LassoPattern::parse("x").is_err());
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(p("=").kernel(), ProcSet::full(2));
        assert_eq!(p(">").kernel(), ProcSet::singleton(ProcessId::LEFT));
        assert_eq!(p("-").kernel(), ProcSet::EMPTY);
        assert_eq!(p("<<<:-->").kernel(), ProcSet::singleton(ProcessId::LEFT));
        assert_eq!(p("><").kernel(), ProcSet::full(2));
    }

    #[test]
    fn canonical_shortens() {
        assert_eq!(p("<<:<<").canonical(), p("<"));
        assert_eq!(p("<>:<>").canonical(), p(":<>"));
        assert_eq!(p("><:<>").canonical(), p("><:<>"));
        assert_eq!(p("-<:><").canonical(), p("-:<>"));
        assert!(p("=:>").same_sequence(&p("=>:>>")));
        assert!(!p("=:>").same_sequence(&p(">")));
    }

    fn literal() -> impl Strategy<Value = String> {
        let sym = prop::sample::select(alloc::vec!['>', '<', '=', '-']);
        (
            prop::collection::vec(sym.clone(), 0..5),
            prop::collection::vec(sym, 1..5),
        )
            .prop_map(|(a, b)| {
                let mut s: String = a.into_iter().collect();
                s.push(':');
                s.extend(b);
                s
            })
    }

    proptest! {
        #[test]
        fn canonical_preserves_sequence(lit in literal()) {
            let pat = p(&lit);
            let c = pat.canonical();
            for t in 1..40 {
                prop_assert_eq!(pat.graph_at(t), c.graph_at(t));
            }
            prop_assert!(c.prefix_len() <= pat.prefix_len());
            prop_assert_eq!(c.canonical(), c.clone());
        }

        #[test]
        fn literal_round_trips(lit in literal()) {
            let pat = p(&lit);
            prop_assert_eq!(p(&pat.literal().unwrap()), pat);
        }
    }
}
