//! Full-information execution engine.
//!
//! Executions are first turned into per-configuration views inside a
//! [`ViewStore`]; an algorithm is applied afterwards to obtain a [`Trace`].
//! Keeping the two apart lets many executions share one store, which is
//! what the distance computations rely on.

mod asynchronous;
mod sync;
mod trace;

use alloc::vec::Vec;

pub use asynchronous::{async_views, random_fair_schedule, run_async, AsyncSchedule, Event, DEFAULT_WINDOW};
pub use sync::{certification_horizon, run_sync, sync_views, CERTIFICATION_FACTOR};
pub use trace::{broadcasters, ho_set, stabilization_verdict, Outcome, Row, Trace, Verdict};

use crate::algorithms::DecisionFunction;
use crate::error::{Error, Result};
use crate::model::{InputAssignment, LassoPattern, ProcSet};
use crate::view::{ViewId, ViewStore};

/// How communication happens in an execution.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Timing {
    Sync(LassoPattern),
    Async(AsyncSchedule),
}

/// Everything that determines the views of an execution.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExecutionSpec {
    pub timing: Timing,
    pub inputs: InputAssignment,
}

impl ExecutionSpec {
    pub fn sync(pattern: LassoPattern, inputs: InputAssignment) -> Result<Self> {
        if inputs.len() != pattern.n() {
            return Err(Error::InputLength {
                expected: pattern.n(),
                got: inputs.len(),
            });
        }
        Ok(ExecutionSpec {
            timing: Timing::Sync(pattern),
            inputs,
        })
    }

    pub fn asynchronous(schedule: AsyncSchedule, inputs: InputAssignment) -> Result<Self> {
        if inputs.len() != schedule.n {
            return Err(Error::InputLength {
                expected: schedule.n,
                got: inputs.len(),
            });
        }
        Ok(ExecutionSpec {
            timing: Timing::Async(schedule),
            inputs,
        })
    }

    pub fn n(&self) -> usize {
        self.inputs.len()
    }

    pub fn pattern(&self) -> Option<&LassoPattern> {
        match &self.timing {
            Timing::Sync(p) => Some(p),
            Timing::Async(_) => None,
        }
    }

    /// The same execution up to the input values.
    pub fn remap_inputs(&self, inputs: InputAssignment) -> Result<Self> {
        if inputs.len() != self.n() {
            return Err(Error::InputLength {
                expected: self.n(),
                got: inputs.len(),
            });
        }
        Ok(ExecutionSpec {
            timing: self.timing.clone(),
            inputs,
        })
    }

    /// Spec equality up to the representation of the pattern.
    pub fn same_execution(&self, other: &ExecutionSpec) -> bool {
        self.inputs == other.inputs
            && match (&self.timing, &other.timing) {
                (Timing::Sync(a), Timing::Sync(b)) => a.same_sequence(b),
                (Timing::Async(a), Timing::Async(b)) => a == b,
                _ => false,
            }
    }
}

/// Free-function form of [`ExecutionSpec::remap_inputs`].
pub fn remap_inputs(spec: &ExecutionSpec, inputs: InputAssignment) -> Result<ExecutionSpec> {
    spec.remap_inputs(inputs)
}

/// Views of every process in configurations `0..=horizon`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionViews {
    /// `views[t][p]`.
    pub views: Vec<Vec<ViewId>>,
    /// Obedient processes per configuration.
    pub obedient: Vec<ProcSet>,
}

impl ExecutionViews {
    pub fn horizon(&self) -> usize {
        self.views.len() - 1
    }

    /// Processes obedient in every recorded configuration.
    pub fn final_obedient(&self) -> ProcSet {
        *self.obedient.last().expect("configuration 0 is always present")
    }
}

/// Simulates `spec` for `horizon` rounds (or events) into `store`.
pub fn simulate_views(store: &mut ViewStore, spec: &ExecutionSpec, horizon: usize) -> Result<ExecutionViews> {
    if store.n() != spec.n() {
        return Err(Error::IncomparableExecutions);
    }
    match &spec.timing {
        Timing::Sync(pattern) => Ok(sync_views(store, pattern, &spec.inputs, horizon)),
        Timing::Async(schedule) => async_views(store, schedule, &spec.inputs, horizon),
    }
}

/// A finished run together with its views.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub store: ViewStore,
    pub views: ExecutionViews,
    pub trace: Trace,
}

/// Runs `spec` under `algorithm` and keeps the view store around.
pub fn simulate(spec: &ExecutionSpec, algorithm: &dyn DecisionFunction, horizon: usize) -> Result<Simulation> {
    let mut store = ViewStore::new(spec.n());
    let views = simulate_views(&mut store, spec, horizon)?;
    let trace = Trace::build(&store, algorithm, spec, &views);
    Ok(Simulation { store, views, trace })
}
