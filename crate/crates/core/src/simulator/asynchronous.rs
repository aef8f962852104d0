use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ExecutionSpec, ExecutionViews, Trace};
use crate::algorithms::DecisionFunction;
use crate::error::{Error, Result};
use crate::model::{check_process_count, InputAssignment, ProcSet, ProcessId};
use crate::view::{ViewId, ViewStore};

/// Default fair-lossy window.
pub const DEFAULT_WINDOW: u32 = 4;

/// One asynchronous event. Every step broadcasts the new view to all
/// other processes; broadcasts are numbered from 0 in step order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Event {
    Step(ProcessId),
    Deliver { broadcast: usize, to: ProcessId },
    Crash(ProcessId),
}

/// A finite event sequence. Undelivered messages of crashed processes
/// count as lost; between obedient processes the window rule below bounds
/// how long messages may be lost in a row.
///
/// Window rule: once an obedient `q` has broadcast, an obedient `p` may not
/// take `window` steps before some message of `q` is delivered to it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AsyncSchedule {
    pub n: usize,
    pub window: u32,
    pub events: Vec<Event>,
}

impl AsyncSchedule {
    /// Builds a schedule and checks it over its whole length.
    pub fn new(n: usize, window: u32, events: Vec<Event>) -> Result<Self> {
        let s = AsyncSchedule { n, window, events };
        s.validate(s.events.len())?;
        Ok(s)
    }

    pub fn crashed_within(&self, horizon: usize) -> ProcSet {
        self.events[..horizon.min(self.events.len())]
            .iter()
            .filter_map(|e| match e {
                Event::Crash(p) => Some(*p),
                _ => None,
            })
            .collect()
    }

    /// Checks well-formedness and the window rule for the first `horizon`
    /// events.
    pub fn validate(&self, horizon: usize) -> Result<()> {
        let mut state = ScheduleState::new(self, horizon)?;
        for (index, &event) in self.events[..horizon].iter().enumerate() {
            state.apply(index, event)?;
        }
        Ok(())
    }
}

/// Bookkeeping shared by validation, execution and generation.
struct ScheduleState {
    n: usize,
    window: u32,
    /// Obedient through the horizon; only these take part in the window rule.
    obedient: ProcSet,
    crashed: ProcSet,
    /// Sender and recipients so far of every broadcast.
    broadcasts: Vec<(ProcessId, ProcSet)>,
    last_broadcast: Vec<Option<usize>>,
    /// `waiting[p * n + q]`: steps of `p` since `q` broadcast something not
    /// yet followed by a delivery from `q`.
    waiting: Vec<Option<u32>>,
}

impl ScheduleState {
    fn new(schedule: &AsyncSchedule, horizon: usize) -> Result<Self> {
        check_process_count(schedule.n)?;
        if schedule.window == 0 {
            return Err(Error::Schedule {
                index: 0,
                reason: "the fairness window must be positive".into(),
            });
        }
        if horizon > schedule.events.len() {
            return Err(Error::Precondition(format!(
                "horizon {horizon} exceeds the {} scheduled events",
                schedule.events.len()
            )));
        }
        let n = schedule.n;
        Ok(ScheduleState {
            n,
            window: schedule.window,
            obedient: ProcSet::from_bits(ProcSet::full(n).bits() & !schedule.crashed_within(horizon).bits()),
            crashed: ProcSet::EMPTY,
            broadcasts: Vec::new(),
            last_broadcast: alloc::vec![None; n],
            waiting: alloc::vec![None; n * n],
        })
    }

    fn check_process(&self, index: usize, p: ProcessId) -> Result<()> {
        if p.index() >= self.n {
            return Err(Error::Schedule {
                index,
                reason: format!("unknown process {p}"),
            });
        }
        Ok(())
    }

    fn apply(&mut self, index: usize, event: Event) -> Result<()> {
        let bad = |reason: alloc::string::String| Error::Schedule { index, reason };
        match event {
            Event::Step(p) => {
                self.check_process(index, p)?;
                if self.crashed.contains(p) {
                    return Err(bad(format!("crashed process {p} takes a step")));
                }
                if self.obedient.contains(p) {
                    for q in self.obedient.iter().filter(|&q| q != p) {
                        if let Some(c) = &mut self.waiting[p.index() * self.n + q.index()] {
                            *c += 1;
                            if *c >= self.window {
                                return Err(Error::Fairness {
                                    window: self.window,
                                    receiver: p,
                                    sender: q,
                                    index,
                                });
                            }
                        }
                    }
                }
                self.last_broadcast[p.index()] = Some(self.broadcasts.len());
                self.broadcasts.push((p, ProcSet::singleton(p)));
                for r in 0..self.n {
                    let w = &mut self.waiting[r * self.n + p.index()];
                    if r != p.index() && w.is_none() {
                        *w = Some(0);
                    }
                }
            }
            Event::Deliver { broadcast, to } => {
                self.check_process(index, to)?;
                let Some(&(from, recipients)) = self.broadcasts.get(broadcast) else {
                    return Err(bad(format!("broadcast {broadcast} has not happened")));
                };
                if recipients.contains(to) {
                    return Err(bad(format!("broadcast {broadcast} already delivered to {to}")));
                }
                if self.crashed.contains(to) {
                    return Err(bad(format!("delivery to crashed process {to}")));
                }
                self.broadcasts[broadcast].1.insert(to);
                let latest = self.last_broadcast[from.index()].expect("sender has broadcast");
                self.waiting[to.index() * self.n + from.index()] =
                    (!self.broadcasts[latest].1.contains(to)).then_some(0);
            }
            Event::Crash(p) => {
                self.check_process(index, p)?;
                if self.crashed.contains(p) {
                    return Err(bad(format!("process {p} crashes twice")));
                }
                self.crashed.insert(p);
            }
        }
        Ok(())
    }
}

/// Views after each of the first `horizon` events. A step merges every
/// message delivered since the previous step of that process.
pub fn async_views(
    store: &mut ViewStore,
    schedule: &AsyncSchedule,
    inputs: &InputAssignment,
    horizon: usize,
) -> Result<ExecutionViews> {
    let n = schedule.n;
    if inputs.len() != n {
        return Err(Error::InputLength {
            expected: n,
            got: inputs.len(),
        });
    }
    let mut state = ScheduleState::new(schedule, horizon)?;
    let mut cur: Vec<ViewId> = (0..n)
        .map(|p| {
            let p = ProcessId(p as u8);
            store.initial(p, inputs.get(p))
        })
        .collect();
    let mut inbox: Vec<Vec<ViewId>> = alloc::vec![Vec::new(); n];
    let mut sent: Vec<ViewId> = Vec::new();
    let mut views = alloc::vec![cur.clone()];
    let mut obedient = alloc::vec![ProcSet::full(n)];
    for (index, &event) in schedule.events[..horizon].iter().enumerate() {
        state.apply(index, event)?;
        match event {
            Event::Step(p) => {
                let next = store.extend(cur[p.index()], &inbox[p.index()]);
                inbox[p.index()].clear();
                cur[p.index()] = next;
                sent.push(next);
            }
            Event::Deliver { broadcast, to } => inbox[to.index()].push(sent[broadcast]),
            Event::Crash(_) => {}
        }
        views.push(cur.clone());
        obedient.push(ProcSet::from_bits(ProcSet::full(n).bits() & !state.crashed.bits()));
    }
    Ok(ExecutionViews { views, obedient })
}

/// Asynchronous run of `algorithm` over the first `horizon` events.
pub fn run_async(
    schedule: &AsyncSchedule,
    inputs: &InputAssignment,
    algorithm: &dyn DecisionFunction,
    horizon: usize,
) -> Result<Trace> {
    let spec = ExecutionSpec::asynchronous(schedule.clone(), inputs.clone())?;
    Ok(super::simulate(&spec, algorithm, horizon)?.trace)
}

/// A seeded random schedule of `len` events obeying the window rule.
///
/// Up to `crashes` processes (at most `n - 1`) crash during the first
/// quarter. Each message is lost with probability 1/3 unless the window
/// rule forces its delivery.
pub fn random_fair_schedule(n: usize, window: u32, crashes: usize, len: usize, seed: u64) -> Result<AsyncSchedule> {
    check_process_count(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<ProcessId> = (0..n).map(|p| ProcessId(p as u8)).collect();
    order.shuffle(&mut rng);
    let mut crash_at: Vec<(usize, ProcessId)> = order[..crashes.min(n - 1)]
        .iter()
        .map(|&p| (rng.gen_range(0..len / 4 + 1), p))
        .collect();
    crash_at.sort();

    let draft = AsyncSchedule {
        n,
        window,
        events: Vec::new(),
    };
    let mut state = ScheduleState::new(&draft, 0)?;
    state.obedient = crash_at
        .iter()
        .fold(ProcSet::full(n), |mut acc, &(_, p)| {
            acc.remove(p);
            acc
        });
    let mut events = Vec::with_capacity(len);
    let mut pending: Vec<(usize, ProcessId)> = Vec::new();
    let push = |state: &mut ScheduleState, events: &mut Vec<Event>, e: Event| {
        state.apply(events.len(), e).expect("generator keeps the schedule well formed");
        events.push(e);
    };
    while events.len() < len {
        if let Some(&(at, p)) = crash_at.first() {
            if at <= events.len() {
                crash_at.remove(0);
                push(&mut state, &mut events, Event::Crash(p));
                pending.retain(|&(_, to)| to != p);
                continue;
            }
        }
        if !pending.is_empty() && rng.gen_bool(0.5) {
            let (b, to) = pending.swap_remove(rng.gen_range(0..pending.len()));
            push(&mut state, &mut events, Event::Deliver { broadcast: b, to });
            continue;
        }
        let alive: Vec<ProcessId> = (0..n)
            .map(|p| ProcessId(p as u8))
            .filter(|&p| !state.crashed.contains(p))
            .collect();
        let p = *alive.choose(&mut rng).expect("at most n - 1 crashes");
        for q in state.obedient.iter().filter(|&q| q != p) {
            if state.obedient.contains(p) && state.waiting[p.index() * n + q.index()] == Some(window - 1) {
                let b = state.last_broadcast[q.index()].expect("waiting implies a broadcast");
                pending.retain(|&(pb, to)| !(pb == b && to == p));
                push(&mut state, &mut events, Event::Deliver { broadcast: b, to: p });
            }
        }
        let b = state.broadcasts.len();
        push(&mut state, &mut events, Event::Step(p));
        for to in alive.iter().copied().filter(|&to| to != p) {
            if rng.gen_range(0..3) != 0 {
                pending.push((b, to));
            }
        }
    }
    events.truncate(len);
    AsyncSchedule::new(n, window, events)
}
