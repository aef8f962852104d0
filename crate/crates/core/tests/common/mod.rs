//! Reference computations written without the library's view store, used
//! to cross-check it.
#![allow(dead_code)]

pub mod families;

use std::collections::HashMap;

use stabcon_core::model::{InputAssignment, LassoPattern, ProcessId, Value};
use stabcon_core::simulator::{AsyncSchedule, Event};

/// In-neighbour bitmasks of round `t`.
pub fn incoming_masks(pattern: &LassoPattern, t: usize) -> Vec<u64> {
    let g = pattern.graph_at(t);
    (0..pattern.n()).map(|q| g.incoming(ProcessId(q as u8)).bits()).collect()
}

fn step_forward(masks: &[u64], reach: u64) -> u64 {
    masks
        .iter()
        .enumerate()
        .fold(reach, |acc, (q, &inc)| if inc & reach != 0 { acc | 1 << q } else { acc })
}

/// Views unrolled as interned strings: a view is the owner, its round and
/// the set of views it received (its own previous one included).
#[derive(Default)]
pub struct NaiveViews {
    ids: HashMap<String, usize>,
}

impl NaiveViews {
    fn intern(&mut self, key: String) -> usize {
        let next = self.ids.len();
        *self.ids.entry(key).or_insert(next)
    }

    /// `ids[t][p]` for configurations `0..=rounds`.
    pub fn unroll(&mut self, pattern: &LassoPattern, inputs: &InputAssignment, rounds: usize) -> Vec<Vec<usize>> {
        let n = pattern.n();
        let mut out = vec![(0..n)
            .map(|p| self.intern(format!("{p}:{}", inputs.get(ProcessId(p as u8)).0)))
            .collect::<Vec<_>>()];
        for t in 1..=rounds {
            let masks = incoming_masks(pattern, t);
            let prev = out[t - 1].clone();
            let row = (0..n)
                .map(|p| {
                    let mut got: Vec<usize> = (0..n).filter(|q| masks[p] >> q & 1 == 1).map(|q| prev[q]).collect();
                    got.sort_unstable();
                    self.intern(format!("{p}@{t}{got:?}"))
                })
                .collect();
            out.push(row);
        }
        out
    }
}

/// First configuration in which `p`'s unrolled views differ.
pub fn naive_divergence(a: &[Vec<usize>], b: &[Vec<usize>], p: usize) -> Option<usize> {
    a.iter().zip(b).position(|(x, y)| x[p] != y[p])
}

/// In-neighbour masks of every round of the prefix and the loop.
struct Rounds {
    prefix: Vec<Vec<u64>>,
    cycle: Vec<Vec<u64>>,
}

impl Rounds {
    fn new(pattern: &LassoPattern) -> Self {
        let p = pattern.prefix_len();
        Rounds {
            prefix: (1..=p).map(|t| incoming_masks(pattern, t)).collect(),
            cycle: (p + 1..=p + pattern.loop_len()).map(|t| incoming_masks(pattern, t)).collect(),
        }
    }

    fn at(&self, t: usize) -> &[u64] {
        match self.prefix.get(t - 1) {
            Some(m) => m,
            None => &self.cycle[(t - 1 - self.prefix.len()) % self.cycle.len()],
        }
    }
}

/// Processes that reach everybody from every start round, by explicit
/// unrolling over `|prefix| + 4·n·|loop|` rounds.
pub fn brute_kernel(pattern: &LassoPattern) -> u64 {
    let n = pattern.n();
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let rounds = Rounds::new(pattern);
    let span = pattern.prefix_len() + 4 * n * pattern.loop_len();
    let starts = 1..=pattern.prefix_len() + pattern.loop_len();
    (0..n)
        .filter(|&p| {
            starts.clone().all(|s| (s..s + span).fold(1u64 << p, |r, t| step_forward(rounds.at(t), r)) == all)
        })
        .fold(0, |k, p| k | 1 << p)
}

/// Processes that reach everybody starting from round 1.
pub fn brute_broadcasters(pattern: &LassoPattern) -> u64 {
    let n = pattern.n();
    let all = (1u64 << n) - 1;
    let rounds = Rounds::new(pattern);
    let span = pattern.prefix_len() + 4 * n * pattern.loop_len();
    (0..n)
        .filter(|&q| (1..=span).fold(1u64 << q, |r, t| step_forward(rounds.at(t), r)) == all)
        .fold(0, |k, q| k | 1 << q)
}

pub fn min_over(inputs: &InputAssignment, mask: u64) -> Option<Value> {
    (0..inputs.len()).filter(|q| mask >> q & 1 == 1).map(|q| inputs.get(ProcessId(q as u8))).min()
}

/// Heard-of bitmasks after replaying an asynchronous schedule, and the
/// set of crashed processes.
pub fn async_heard_of(schedule: &AsyncSchedule) -> (Vec<u64>, u64) {
    let n = schedule.n;
    let mut ho: Vec<u64> = (0..n).map(|p| 1u64 << p).collect();
    let mut inbox = vec![0u64; n];
    let mut sent = Vec::new();
    let mut crashed = 0u64;
    for e in &schedule.events {
        match *e {
            Event::Step(p) => {
                ho[p.index()] |= std::mem::take(&mut inbox[p.index()]);
                sent.push(ho[p.index()]);
            }
            Event::Deliver { broadcast, to } => inbox[to.index()] |= sent[broadcast],
            Event::Crash(p) => crashed |= 1 << p.0,
        }
    }
    (ho, crashed)
}

/// Exact value of a distance as a multiple of `2^-64`.
pub fn scaled(d: stabcon_core::topology::DistanceValue) -> u128 {
    use stabcon_core::topology::DistanceValue::*;
    match d {
        Zero => 0,
        Exact(t) => 1u128 << (64 - t),
        AtMost(_) => panic!("uncertified distance {d}"),
    }
}
