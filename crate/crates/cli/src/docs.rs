//! Serialized documents. Field order is the output order, so documents are
//! byte-stable for identical inputs.

use serde::{Deserialize, Serialize};
use stabcon_core::impossibility::{ConflictWitness, KernelReport, NonStabilizationRun};
use stabcon_core::model::{CommGraph, InputAssignment, LassoPattern, Link, ProcSet, ProcessId, Value, ValueSet};
use stabcon_core::simulator::{AsyncSchedule, Event, ExecutionSpec, Outcome, Row, Timing, Trace, Verdict};
use stabcon_core::topology::Metric;
use stabcon_core::universal::{Approach, Component, DecisionLabeling, LabeledMember, StabilizingReport, Structure};
use stabcon_core::view::Digest;
use stabcon_core::Error;

use crate::CliError;

/// A lasso pattern: a two-process literal (`prefix:loop` over `> = < -`)
/// or explicit graphs given as in-neighbour lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PatternDoc {
    Literal(String),
    Graphs {
        n: usize,
        prefix: Vec<Vec<Vec<u8>>>,
        cycle: Vec<Vec<Vec<u8>>>,
    },
}

fn graph_doc(g: &CommGraph) -> Vec<Vec<u8>> {
    (0..g.n()).map(|p| g.incoming(ProcessId(p as u8)).iter().map(|q| q.0).collect()).collect()
}

fn graph_from(n: usize, incoming: &[Vec<u8>]) -> Result<CommGraph, Error> {
    if incoming.len() != n {
        return Err(Error::MixedProcessCount {
            expected: n,
            got: incoming.len(),
        });
    }
    let sets = incoming
        .iter()
        .map(|qs| {
            qs.iter().try_fold(ProcSet::EMPTY, |mut s, &q| {
                if q as usize >= n {
                    return Err(Error::ProcessOutOfRange(ProcessId(q)));
                }
                s.insert(ProcessId(q));
                Ok(s)
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    CommGraph::from_incoming(sets)
}

impl PatternDoc {
    pub fn from_pattern(p: &LassoPattern) -> Self {
        match p.literal() {
            Some(lit) => PatternDoc::Literal(lit),
            None => PatternDoc::Graphs {
                n: p.n(),
                prefix: p.prefix().iter().map(graph_doc).collect(),
                cycle: p.cycle().iter().map(graph_doc).collect(),
            },
        }
    }

    pub fn to_pattern(&self) -> Result<LassoPattern, Error> {
        match self {
            PatternDoc::Literal(s) => LassoPattern::parse(s),
            PatternDoc::Graphs { n, prefix, cycle } => {
                let conv = |gs: &[Vec<Vec<u8>>]| gs.iter().map(|g| graph_from(*n, g)).collect::<Result<Vec<_>, _>>();
                LassoPattern::new(conv(prefix)?, conv(cycle)?)
            }
        }
    }

    /// A literal, or a JSON pattern document when the text starts with `{`.
    pub fn parse_arg(s: &str) -> Result<LassoPattern, CliError> {
        if s.trim_start().starts_with('{') {
            let doc: PatternDoc = serde_json::from_str(s).map_err(|e| CliError::Usage(format!("pattern document: {e}")))?;
            Ok(doc.to_pattern()?)
        } else {
            Ok(LassoPattern::parse(s)?)
        }
    }
}

pub fn links_literal(links: &[Link]) -> String {
    links.iter().map(|l| l.symbol()).collect()
}

pub fn parse_links(s: &str) -> Result<Vec<Link>, CliError> {
    s.chars()
        .map(|c| Link::from_symbol(c).ok_or_else(|| CliError::Usage(format!("unknown link symbol {c:?} in {s:?}"))))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimingDoc {
    Sync(PatternDoc),
    Async { n: usize, window: u32, events: Vec<EventDoc> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventDoc {
    Step(u8),
    Deliver { broadcast: usize, to: u8 },
    Crash(u8),
}

impl From<Event> for EventDoc {
    fn from(e: Event) -> Self {
        match e {
            Event::Step(p) => EventDoc::Step(p.0),
            Event::Deliver { broadcast, to } => EventDoc::Deliver { broadcast, to: to.0 },
            Event::Crash(p) => EventDoc::Crash(p.0),
        }
    }
}

impl From<EventDoc> for Event {
    fn from(e: EventDoc) -> Self {
        match e {
            EventDoc::Step(p) => Event::Step(ProcessId(p)),
            EventDoc::Deliver { broadcast, to } => Event::Deliver {
                broadcast,
                to: ProcessId(to),
            },
            EventDoc::Crash(p) => Event::Crash(ProcessId(p)),
        }
    }
}

/// An execution: timing plus inputs. Inputs are value ranks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionDoc {
    pub timing: TimingDoc,
    pub inputs: Vec<u32>,
}

impl ExecutionDoc {
    pub fn from_spec(s: &ExecutionSpec) -> Self {
        let timing = match &s.timing {
            Timing::Sync(p) => TimingDoc::Sync(PatternDoc::from_pattern(p)),
            Timing::Async(a) => TimingDoc::Async {
                n: a.n,
                window: a.window,
                events: a.events.iter().map(|&e| e.into()).collect(),
            },
        };
        ExecutionDoc {
            timing,
            inputs: s.inputs.as_slice().iter().map(|v| v.0).collect(),
        }
    }

    pub fn to_spec(&self) -> Result<ExecutionSpec, Error> {
        let inputs = InputAssignment::of(&self.inputs);
        match &self.timing {
            TimingDoc::Sync(p) => ExecutionSpec::sync(p.to_pattern()?, inputs),
            TimingDoc::Async { n, window, events } => ExecutionSpec::asynchronous(
                AsyncSchedule::new(*n, *window, events.iter().map(|&e| e.into()).collect())?,
                inputs,
            ),
        }
    }
}

fn ids(set: ProcSet) -> Vec<u8> {
    set.iter().map(|p| p.0).collect()
}

fn set_of(ids: &[u8]) -> ProcSet {
    ids.iter().map(|&p| ProcessId(p)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowDoc {
    pub t: usize,
    pub outputs: Vec<u32>,
    pub heard_of: Vec<Vec<u8>>,
    pub obedient: Vec<u8>,
    pub clocks: Vec<u32>,
    pub digests: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictDoc {
    pub stabilized: bool,
    pub value: Option<u32>,
    pub round: Option<usize>,
    pub certified: bool,
}

impl From<&Verdict> for VerdictDoc {
    fn from(v: &Verdict) -> Self {
        VerdictDoc {
            stabilized: matches!(v.outcome, Outcome::Stabilized { .. }),
            value: v.value().map(|x| x.0),
            round: v.round(),
            certified: v.certified,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceDoc {
    pub algorithm: String,
    pub execution: ExecutionDoc,
    pub horizon: usize,
    pub verdict: VerdictDoc,
    pub rows: Vec<RowDoc>,
}

impl TraceDoc {
    pub fn from_trace(t: &Trace) -> Self {
        TraceDoc {
            algorithm: t.algorithm.clone(),
            execution: ExecutionDoc::from_spec(&t.spec),
            horizon: t.horizon,
            verdict: (&stabcon_core::simulator::stabilization_verdict(t)).into(),
            rows: t
                .rows
                .iter()
                .map(|r| RowDoc {
                    t: r.t,
                    outputs: r.outputs.iter().map(|v| v.0).collect(),
                    heard_of: r.ho.iter().map(|&s| ids(s)).collect(),
                    obedient: ids(r.obedient),
                    clocks: r.clocks.clone(),
                    digests: r.digests.iter().map(Digest::to_hex).collect(),
                })
                .collect(),
        }
    }

    pub fn to_trace(&self) -> Result<Trace, CliError> {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let digests = r
                    .digests
                    .iter()
                    .map(|h| Digest::from_hex(h).ok_or_else(|| CliError::Usage(format!("bad digest {h:?}"))))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Row {
                    t: r.t,
                    outputs: r.outputs.iter().map(|&v| Value(v)).collect(),
                    ho: r.heard_of.iter().map(|s| set_of(s)).collect(),
                    digests,
                    obedient: set_of(&r.obedient),
                    clocks: r.clocks.clone(),
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(Trace {
            algorithm: self.algorithm.clone(),
            spec: self.execution.to_spec()?,
            horizon: self.horizon,
            rows,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessDoc {
    pub algorithm: String,
    pub k: usize,
    pub sigma: String,
    pub m: usize,
    pub conflict_round: usize,
    pub lambda_conflict: [usize; 2],
    pub rho_conflict: [usize; 2],
    pub lambda: TraceDoc,
    pub rho: TraceDoc,
}

impl WitnessDoc {
    pub fn from_witness(w: &ConflictWitness) -> Self {
        WitnessDoc {
            algorithm: w.algorithm.clone(),
            k: w.k,
            sigma: links_literal(&w.sigma),
            m: w.m,
            conflict_round: w.conflict_round(),
            lambda_conflict: [w.lambda_conflict.0, w.lambda_conflict.1],
            rho_conflict: [w.rho_conflict.0, w.rho_conflict.1],
            lambda: TraceDoc::from_trace(&w.lambda),
            rho: TraceDoc::from_trace(&w.rho),
        }
    }

    pub fn to_witness(&self) -> Result<ConflictWitness, CliError> {
        Ok(ConflictWitness {
            algorithm: self.algorithm.clone(),
            k: self.k,
            sigma: parse_links(&self.sigma)?,
            m: self.m,
            lambda: self.lambda.to_trace()?,
            rho: self.rho.to_trace()?,
            lambda_conflict: (self.lambda_conflict[0], self.lambda_conflict[1]),
            rho_conflict: (self.rho_conflict[0], self.rho_conflict[1]),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageDoc {
    pub k: usize,
    pub sigma: String,
    pub m: usize,
    pub conflict_round: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainDoc {
    pub algorithm: String,
    pub stages: Vec<StageDoc>,
    pub pattern: PatternDoc,
    pub flips: Vec<usize>,
    pub trace: TraceDoc,
}

impl ChainDoc {
    pub fn from_run(r: &NonStabilizationRun) -> Self {
        ChainDoc {
            algorithm: r.trace.algorithm.clone(),
            stages: r
                .stages
                .iter()
                .map(|s| StageDoc {
                    k: s.k,
                    sigma: links_literal(&s.sigma),
                    m: s.m,
                    conflict_round: s.conflict_round,
                })
                .collect(),
            pattern: PatternDoc::from_pattern(&r.pattern),
            flips: r.flips.clone(),
            trace: TraceDoc::from_trace(&r.trace),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelDoc {
    pub pattern: PatternDoc,
    pub kernel: Vec<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub demo: Option<KernelDemoDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelDemoDoc {
    pub algorithm: String,
    pub inputs: Vec<u32>,
    pub horizon: usize,
    pub broadcasters: Vec<u8>,
    pub broadcasters_certified: bool,
    pub disagreement_rounds: Vec<usize>,
    pub persistent: bool,
    pub note: String,
}

impl From<&KernelReport> for KernelDemoDoc {
    fn from(r: &KernelReport) -> Self {
        KernelDemoDoc {
            algorithm: r.trace.algorithm.clone(),
            inputs: r.trace.spec.inputs.as_slice().iter().map(|v| v.0).collect(),
            horizon: r.trace.horizon,
            broadcasters: ids(r.broadcasters),
            broadcasters_certified: r.broadcasters_certified,
            disagreement_rounds: r.disagreement_rounds.clone(),
            persistent: r.persistent,
            note: r.note.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefixOrderDoc {
    pub k: usize,
    pub prefixes: Vec<PrefixEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefixEntry {
    pub index: usize,
    pub prefix: String,
    /// Process that cannot tell this prefix from the next one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub next_indistinguishable_to: Option<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StructureDoc {
    Interior,
    IncludedBoundary,
    Isolated,
}

impl From<Structure> for StructureDoc {
    fn from(s: Structure) -> Self {
        match s {
            Structure::Interior => StructureDoc::Interior,
            Structure::IncludedBoundary => StructureDoc::IncludedBoundary,
            Structure::Isolated => StructureDoc::Isolated,
        }
    }
}

impl From<StructureDoc> for Structure {
    fn from(s: StructureDoc) -> Self {
        match s {
            StructureDoc::Interior => Structure::Interior,
            StructureDoc::IncludedBoundary => Structure::IncludedBoundary,
            StructureDoc::Isolated => Structure::Isolated,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemberDoc {
    pub execution: ExecutionDoc,
    pub label: i64,
    pub structure: StructureDoc,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub second_boundary: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApproachDoc {
    pub target: usize,
    pub sequence: Vec<usize>,
    pub metric: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentDoc {
    pub members: Vec<usize>,
    pub broadcasters: Vec<u8>,
}

/// A labeled family. Labels and second-boundary flags are raw values;
/// inputs are ranks into `values`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelingDoc {
    pub values: Vec<i64>,
    pub members: Vec<MemberDoc>,
    #[serde(default)]
    pub approaches: Vec<ApproachDoc>,
    #[serde(default)]
    pub components: Vec<ComponentDoc>,
}

impl LabelingDoc {
    pub fn from_labeling(l: &DecisionLabeling) -> Self {
        LabelingDoc {
            values: l.values.raw_values().to_vec(),
            members: l
                .members
                .iter()
                .map(|m| MemberDoc {
                    execution: ExecutionDoc::from_spec(&m.spec),
                    label: l.values.raw(m.label),
                    structure: m.structure.into(),
                    second_boundary: m.second_boundary.iter().map(|&v| l.values.raw(v)).collect(),
                })
                .collect(),
            approaches: l
                .approaches
                .iter()
                .map(|a| ApproachDoc {
                    target: a.target,
                    sequence: a.sequence.clone(),
                    metric: a.metric.id(),
                })
                .collect(),
            components: l
                .components
                .iter()
                .map(|c| ComponentDoc {
                    members: c.members.clone(),
                    broadcasters: c.broadcasters.iter().map(|p| p.0).collect(),
                })
                .collect(),
        }
    }

    pub fn to_labeling(&self) -> Result<DecisionLabeling, Error> {
        let values = ValueSet::new(self.values.clone())?;
        let members = self
            .members
            .iter()
            .map(|m| {
                let spec = m.execution.to_spec()?;
                spec.inputs.check(spec.n(), &values)?;
                Ok(LabeledMember {
                    spec,
                    label: values.value(m.label)?,
                    structure: m.structure.into(),
                    second_boundary: m.second_boundary.iter().map(|&v| values.value(v)).collect::<Result<_, _>>()?,
                })
            })
            .collect::<Result<Vec<_>, Error>>()?;
        let approaches = self
            .approaches
            .iter()
            .map(|a| {
                Ok(Approach {
                    target: a.target,
                    sequence: a.sequence.clone(),
                    metric: Metric::parse(&a.metric)?,
                })
            })
            .collect::<Result<Vec<_>, Error>>()?;
        let components = self
            .components
            .iter()
            .map(|c| Component {
                members: c.members.clone(),
                broadcasters: c.broadcasters.iter().map(|&p| ProcessId(p)).collect(),
            })
            .collect();
        Ok(DecisionLabeling {
            values,
            members,
            approaches,
            components,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemberReportDoc {
    pub index: usize,
    pub label: i64,
    pub verdict: VerdictDoc,
    /// Firings of cases a, b, c and d over all processes and rounds.
    pub cases: [usize; 4],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniversalDoc {
    pub horizon: usize,
    pub passed: bool,
    pub members: Vec<MemberReportDoc>,
}

impl UniversalDoc {
    pub fn new(l: &DecisionLabeling, horizon: usize, r: &StabilizingReport) -> Self {
        UniversalDoc {
            horizon,
            passed: r.passed(),
            members: r
                .members
                .iter()
                .map(|m| MemberReportDoc {
                    index: m.index,
                    label: l.values.raw(l.members[m.index].label),
                    verdict: (&m.verdict).into(),
                    cases: m.cases,
                    violation: m.violation.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionDoc {
    pub member: usize,
    pub process: u8,
    pub round: usize,
    pub candidates: Vec<usize>,
    pub value: i64,
    pub case: String,
}

/// Structured failure report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureDoc {
    pub error: String,
    pub message: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use stabcon_core::algorithms::MinMax;
    use stabcon_core::impossibility::dll_attack;
    use stabcon_core::model::InputAssignment;
    use stabcon_core::simulator::{random_fair_schedule, run_async, run_sync};

    const FIXTURES: [&str; 4] = [
        include_str!("../tests/fixtures/one_message.json"),
        include_str!("../tests/fixtures/one_message_eta.json"),
        include_str!("../tests/fixtures/misplaced_corner.json"),
        include_str!("../tests/fixtures/relabel.json"),
    ];

    #[test]
    fn labeling_documents_round_trip() {
        for text in FIXTURES {
            let doc: LabelingDoc = serde_json::from_str(text).unwrap();
            let back = LabelingDoc::from_labeling(&doc.to_labeling().unwrap());
            assert_eq!(back, doc);
            let a: serde_json::Value = serde_json::from_str(text).unwrap();
            assert_eq!(serde_json::to_value(&back).unwrap(), a);
        }
    }

    #[test]
    fn unknown_labels_are_rejected() {
        let mut doc: LabelingDoc = serde_json::from_str(FIXTURES[3]).unwrap();
        doc.members[0].label = 7;
        assert_eq!(doc.to_labeling().unwrap_err(), Error::UnknownValue(7));
        let mut doc: LabelingDoc = serde_json::from_str(FIXTURES[3]).unwrap();
        doc.members[0].execution.inputs = vec![0, 2];
        assert!(doc.to_labeling().is_err());
    }

    #[test]
    fn traces_round_trip() {
        let p = LassoPattern::parse("<-:=>").unwrap();
        let t = run_sync(&p, &InputAssignment::of(&[0, 1]), &MinMax, 12).unwrap();
        assert_eq!(TraceDoc::from_trace(&t).to_trace().unwrap(), t);
        let s = random_fair_schedule(3, 4, 1, 90, 5).unwrap();
        let t = run_async(&s, &InputAssignment::of(&[2, 0, 1]), &MinMax, 90).unwrap();
        let doc = TraceDoc::from_trace(&t);
        let text = serde_json::to_string(&doc).unwrap();
        let back: TraceDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_trace().unwrap(), t);
    }

    #[test]
    fn explicit_graph_patterns_round_trip() {
        let text = r#"{"n":3,"prefix":[[[0],[1],[2]]],"cycle":[[[0,2],[0,1],[2]]]}"#;
        let doc: PatternDoc = serde_json::from_str(text).unwrap();
        let p = doc.to_pattern().unwrap();
        assert_eq!(p.prefix_len(), 1);
        assert_eq!(PatternDoc::from_pattern(&p), doc);
        let missing_self_loop: PatternDoc = serde_json::from_str(r#"{"n":2,"prefix":[],"cycle":[[[1],[1]]]}"#).unwrap();
        assert!(missing_self_loop.to_pattern().is_err());
        assert_eq!(PatternDoc::from_pattern(&LassoPattern::parse("<-:>").unwrap()), PatternDoc::Literal("<-:>".into()));
    }

    #[test]
    fn witnesses_round_trip() {
        let w = dll_attack(&MinMax, 2, 8).unwrap();
        let doc = WitnessDoc::from_witness(&w);
        let back: WitnessDoc = serde_json::from_str(&serde_json::to_string(&doc).unwrap()).unwrap();
        assert_eq!(back.to_witness().unwrap(), w);
    }
}
