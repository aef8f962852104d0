use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{certification_horizon, ExecutionSpec, ExecutionViews, Timing};
use crate::algorithms::DecisionFunction;
use crate::error::{Error, Result};
use crate::model::{ProcSet, ProcessId, Value};
use crate::view::{Digest, ViewStore};

/// Configuration `t` of a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub t: usize,
    pub outputs: Vec<Value>,
    pub ho: Vec<ProcSet>,
    pub digests: Vec<Digest>,
    pub obedient: ProcSet,
    /// Rounds (synchronous) or own step counts (asynchronous).
    pub clocks: Vec<u32>,
}

/// Per-configuration record of a run, independent of any view store.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub algorithm: String,
    pub spec: ExecutionSpec,
    pub horizon: usize,
    pub rows: Vec<Row>,
}

impl Trace {
    pub fn build(store: &ViewStore, algorithm: &dyn DecisionFunction, spec: &ExecutionSpec, views: &ExecutionViews) -> Self {
        let mut rows: Vec<Row> = Vec::with_capacity(views.views.len());
        for (t, vs) in views.views.iter().enumerate() {
            // Asynchronous configurations mostly repeat the previous views.
            let outputs = vs
                .iter()
                .enumerate()
                .map(|(p, &v)| match rows.last() {
                    Some(_) if views.views[t - 1][p] == v => rows[t - 1].outputs[p],
                    _ => algorithm.decide(store, v),
                })
                .collect();
            rows.push(Row {
                t,
                outputs,
                ho: vs.iter().map(|&v| store.ho(v)).collect(),
                digests: vs.iter().map(|&v| store.digest(v)).collect(),
                obedient: views.obedient[t],
                clocks: vs.iter().map(|&v| store.clock(v)).collect(),
            });
        }
        Trace {
            algorithm: algorithm.name(),
            spec: spec.clone(),
            horizon: views.horizon(),
            rows,
        }
    }

    pub fn n(&self) -> usize {
        self.spec.n()
    }

    pub fn output(&self, p: ProcessId, t: usize) -> Value {
        self.rows[t].outputs[p.index()]
    }

    /// Processes obedient through the whole run.
    pub fn obedient(&self) -> ProcSet {
        self.rows.last().map_or(ProcSet::EMPTY, |r| r.obedient)
    }

    /// Number of output changes of `p` over the run.
    pub fn flips(&self, p: ProcessId) -> usize {
        self.rows
            .windows(2)
            .filter(|w| w[0].outputs[p.index()] != w[1].outputs[p.index()])
            .count()
    }
}

/// `HO_p(C^t)`.
pub fn ho_set(trace: &Trace, p: ProcessId, t: usize) -> Result<ProcSet> {
    let row = trace
        .rows
        .get(t)
        .ok_or_else(|| Error::Precondition(format!("configuration {t} is past the horizon {}", trace.horizon)))?;
    row.ho
        .get(p.index())
        .copied()
        .ok_or(Error::ProcessOutOfRange(p))
}

/// Processes every obedient process has heard of by configuration `t`.
pub fn broadcasters(trace: &Trace, t: usize) -> Result<ProcSet> {
    let row = trace
        .rows
        .get(t)
        .ok_or_else(|| Error::Precondition(format!("configuration {t} is past the horizon {}", trace.horizon)))?;
    Ok(row
        .obedient
        .iter()
        .fold(ProcSet::full(trace.n()), |acc, q| acc.intersection(row.ho[q.index()])))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// All obedient outputs equal `value` from configuration `round` to the
    /// horizon, and `round` is minimal.
    Stabilized { value: Value, round: usize },
    NotStabilized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verdict {
    pub outcome: Outcome,
    /// Synchronous: the horizon covers `|prefix| + 4·n·|loop|` rounds and
    /// the last loop period of outputs repeats the one before.
    /// Asynchronous: all obedient heard-of sets coincide at the horizon,
    /// so no later delivery can tell any of them something new.
    pub certified: bool,
}

impl Verdict {
    pub fn value(&self) -> Option<Value> {
        match self.outcome {
            Outcome::Stabilized { value, .. } => Some(value),
            Outcome::NotStabilized => None,
        }
    }

    pub fn round(&self) -> Option<usize> {
        match self.outcome {
            Outcome::Stabilized { round, .. } => Some(round),
            Outcome::NotStabilized => None,
        }
    }

    /// A certified stabilization to `v`.
    pub fn certified_to(&self, v: Value) -> bool {
        self.certified && self.value() == Some(v)
    }
}

/// Stabilization verdict over the processes obedient through the run.
pub fn stabilization_verdict(trace: &Trace) -> Verdict {
    let ob = trace.obedient();
    let agreed = |row: &Row| -> Option<Value> {
        let mut it = ob.iter().map(|p| row.outputs[p.index()]);
        let first = it.next()?;
        it.all(|v| v == first).then_some(first)
    };
    let last = trace.rows.last().and_then(agreed);
    let outcome = match last {
        None => Outcome::NotStabilized,
        Some(value) => {
            let round = trace
                .rows
                .iter()
                .rposition(|row| agreed(row) != Some(value))
                .map_or(0, |i| i + 1);
            Outcome::Stabilized { value, round }
        }
    };
    let certified = match &trace.spec.timing {
        Timing::Sync(pattern) => {
            let len = pattern.loop_len();
            let h = trace.horizon;
            h >= certification_horizon(pattern)
                && h >= 2 * len
                && (0..len).all(|i| trace.rows[h - i].outputs == trace.rows[h - len - i].outputs)
        }
        Timing::Async(_) => {
            let row = trace.rows.last().expect("configuration 0 is always present");
            let mut hos = ob.iter().map(|p| row.ho[p.index()]);
            match hos.next() {
                Some(first) => hos.all(|h| h == first),
                None => false,
            }
        }
    };
    Verdict { outcome, certified }
}
