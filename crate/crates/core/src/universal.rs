//! The universal stabilizing-consensus decision function over a finite,
//! labeled execution family with declared topological structure.
//!
//! A process that holds view `V` at time `t` considers the candidate set
//! of family members in which it holds the same view at time `t` and
//! decides by the four cases of [`Case`]. Topological predicates
//! (interior, included boundary, second boundary) are declarations; the
//! only computed evidence are limits checked with [`verify_limit`].

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::algorithms::DecisionFunction;
use crate::error::{Error, Result};
use crate::model::{lcm, LassoPattern, ProcSet, ProcessId, Value, ValueSet};
use crate::simulator::{certification_horizon, stabilization_verdict, ExecutionSpec, Timing, Trace, Verdict};
use crate::topology::{verify_limit, DistanceValue, ExecutionSet, Metric, SequenceFamily, DEFAULT_HORIZON_CAP};
use crate::view::{ViewId, ViewStore};

/// Declared position of a member inside its decision set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Structure {
    Interior,
    IncludedBoundary,
    Isolated,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledMember {
    pub spec: ExecutionSpec,
    pub label: Value,
    pub structure: Structure,
    /// Values `w` such that the member lies in the boundary of the
    /// included boundary of `Σ_w`, taken inside the union of all included
    /// boundaries.
    pub second_boundary: Vec<Value>,
}

/// Evidence that `target` is a limit of the members in `sequence`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Approach {
    pub target: usize,
    pub sequence: Vec<usize>,
    pub metric: Metric,
}

/// A declared connected component and its broadcasters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub members: Vec<usize>,
    pub broadcasters: Vec<ProcessId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionLabeling {
    pub values: ValueSet,
    pub members: Vec<LabeledMember>,
    pub approaches: Vec<Approach>,
    pub components: Vec<Component>,
}

impl DecisionLabeling {
    /// Members labeled `v` (`Σ_v`).
    pub fn decision_set(&self, v: Value) -> Vec<usize> {
        (0..self.members.len()).filter(|&i| self.members[i].label == v).collect()
    }

    fn approach_label(&self, a: &Approach) -> Value {
        self.members[a.sequence[0]].label
    }

    /// Whether some declared approach from members labeled `v` (only
    /// interior ones if `interior_only`) reaches member `i`.
    fn approached_from(&self, i: usize, v: Value, interior_only: bool) -> bool {
        self.approaches.iter().any(|a| {
            a.target == i
                && self.approach_label(a) == v
                && (!interior_only || a.sequence.iter().all(|&s| self.members[s].structure == Structure::Interior))
        })
    }

    /// Checks indices, labels, declared structure and the limit evidence.
    /// Does not require limit evidence for included-boundary members; see
    /// [`LabelingContext::new`].
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Precondition(msg));
        let Some(first) = self.members.first() else {
            return bad("a labeling needs at least one member".into());
        };
        let n = first.spec.n();
        for (i, m) in self.members.iter().enumerate() {
            if m.spec.n() != n {
                return Err(Error::IncomparableExecutions);
            }
            if !matches!(m.spec.timing, Timing::Sync(_)) {
                return bad(format!("member {i} is asynchronous; labelings hold synchronous executions"));
            }
            if !self.values.contains(m.label) || m.second_boundary.iter().any(|v| !self.values.contains(*v)) {
                return bad(format!("member {i} uses a value outside the value set"));
            }
            if !m.second_boundary.is_empty() && m.structure != Structure::IncludedBoundary {
                return bad(format!("member {i} is flagged in a second boundary but is not an included boundary point"));
            }
            if let Some(j) = (0..i).find(|&j| self.members[j].spec.same_execution(&m.spec)) {
                return bad(format!("members {j} and {i} are the same execution"));
            }
        }
        for (k, a) in self.approaches.iter().enumerate() {
            if a.target >= self.members.len() || a.sequence.iter().any(|&s| s >= self.members.len()) {
                return bad(format!("approach {k} refers to a missing member"));
            }
            if a.sequence.len() < 3 {
                return bad(format!("approach {k} needs at least 3 sequence members"));
            }
            let label = self.approach_label(a);
            if a.sequence.iter().any(|&s| self.members[s].label != label) {
                return bad(format!("approach {k} mixes labels"));
            }
            let target = &self.members[a.target];
            match target.structure {
                Structure::Isolated => return bad(format!("approach {k} targets isolated member {}", a.target)),
                Structure::Interior if label != target.label => {
                    return bad(format!("approach {k} from Σ_{label} targets interior member {}", a.target))
                }
                _ => {}
            }
            let seq = SequenceFamily {
                members: a.sequence.iter().map(|&s| self.members[s].spec.clone()).collect(),
                limit: target.spec.clone(),
            };
            if let Err(fail) = verify_limit(&seq, a.metric)? {
                return bad(format!("approach {k} does not converge (sequence index {})", fail.index));
            }
        }
        let mut seen = BTreeSet::new();
        for (k, c) in self.components.iter().enumerate() {
            if c.members.is_empty() {
                return bad(format!("component {k} is empty"));
            }
            for &i in &c.members {
                if i >= self.members.len() || !seen.insert(i) {
                    return bad(format!("component {k}: member {i} is missing or already in another component"));
                }
            }
            if c.broadcasters.iter().any(|p| p.index() >= n) {
                return bad(format!("component {k} declares an unknown broadcaster"));
            }
        }
        Ok(())
    }
}

/// Which row of the decision table fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Case {
    /// All candidates carry the same label.
    A,
    /// Included boundary candidates of a single label.
    B,
    /// The candidates in every relevant second boundary are included
    /// boundary points of a single label.
    C,
    /// Anything else: the smallest label among the candidates.
    D,
}

/// A validated labeling with all members simulated into one view store.
#[derive(Debug, Clone)]
pub struct LabelingContext {
    labeling: DecisionLabeling,
    set: ExecutionSet,
    horizon: usize,
    candidates: HashMap<ViewId, Vec<u32>>,
    decisions: HashMap<ViewId, (Value, Case)>,
}

/// `max |prefix| + 4·n·lcm(loops)`, capped.
pub fn family_horizon(specs: &[ExecutionSpec], cap: usize) -> usize {
    let patterns: Vec<&LassoPattern> = specs.iter().filter_map(|s| s.pattern()).collect();
    let n = specs.first().map_or(1, |s| s.n());
    let prefix = patterns.iter().map(|p| p.prefix_len()).max().unwrap_or(0);
    let period = patterns.iter().fold(1, |acc, p| lcm(acc, p.loop_len()).min(cap));
    (prefix + 4 * n * period).min(cap)
}

impl LabelingContext {
    /// Validates the labeling, additionally requiring every included
    /// boundary member to be a declared limit of its own decision set, and
    /// simulates every member for `horizon` rounds (default:
    /// [`family_horizon`]).
    pub fn new(labeling: DecisionLabeling, horizon: Option<usize>) -> Result<Self> {
        labeling.validate()?;
        for (i, m) in labeling.members.iter().enumerate() {
            if m.structure == Structure::IncludedBoundary && !labeling.approached_from(i, m.label, false) {
                return Err(Error::Precondition(format!(
                    "included boundary member {i} is not shown to be a limit of its own decision set"
                )));
            }
        }
        Self::build(labeling, horizon)
    }

    fn build(labeling: DecisionLabeling, horizon: Option<usize>) -> Result<Self> {
        let specs: Vec<ExecutionSpec> = labeling.members.iter().map(|m| m.spec.clone()).collect();
        let horizon = horizon.unwrap_or_else(|| family_horizon(&specs, DEFAULT_HORIZON_CAP));
        let mut set = ExecutionSet::new(specs[0].n());
        for spec in specs {
            set.add(spec, horizon)?;
        }
        let mut candidates: HashMap<ViewId, Vec<u32>> = HashMap::new();
        for i in 0..set.len() {
            for row in &set.views(i).views {
                for &v in row {
                    let list = candidates.entry(v).or_default();
                    if list.last() != Some(&(i as u32)) {
                        list.push(i as u32);
                    }
                }
            }
        }
        let mut ctx = LabelingContext {
            labeling,
            set,
            horizon,
            candidates,
            decisions: HashMap::new(),
        };
        let decisions = ctx
            .candidates
            .iter()
            .map(|(&v, d)| (v, ctx.table(d)))
            .collect();
        ctx.decisions = decisions;
        Ok(ctx)
    }

    pub fn labeling(&self) -> &DecisionLabeling {
        &self.labeling
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn executions(&self) -> &ExecutionSet {
        &self.set
    }

    fn view(&self, member: usize, p: ProcessId, t: usize) -> Result<ViewId> {
        if member >= self.set.len() {
            return Err(Error::Precondition(format!("no member {member}")));
        }
        let views = self.set.views(member);
        if t > views.horizon() {
            return Err(Error::Precondition(format!("round {t} is past the horizon {}", views.horizon())));
        }
        views.views[t]
            .get(p.index())
            .copied()
            .ok_or(Error::ProcessOutOfRange(p))
    }

    /// `D_p(γ, t)`: members in which `p` holds the same view at time `t`
    /// as in member `γ`. In lock-step executions a view fixes its round,
    /// so only round `t` of each member needs to be compared.
    pub fn candidate_set(&self, member: usize, p: ProcessId, t: usize) -> Result<Vec<usize>> {
        let v = self.view(member, p, t)?;
        Ok(self.candidates[&v].iter().map(|&i| i as usize).collect())
    }

    /// The universal decision of `p` at time `t` in member `γ`.
    pub fn universal_decide(&self, member: usize, p: ProcessId, t: usize) -> Result<(Value, Case)> {
        let v = self.view(member, p, t)?;
        Ok(self.decisions[&v])
    }

    fn table(&self, d: &[u32]) -> (Value, Case) {
        let members = &self.labeling.members;
        let label = |i: &u32| members[*i as usize].label;
        let first = label(&d[0]);
        if d.iter().all(|i| label(i) == first) {
            return (first, Case::A);
        }
        let boundary = |i: &&u32| members[**i as usize].structure == Structure::IncludedBoundary;
        let boundary_labels: BTreeSet<Value> = d.iter().filter(boundary).map(label).collect();
        if boundary_labels.len() == 1 {
            return (*boundary_labels.first().expect("one label"), Case::B);
        }
        if !boundary_labels.is_empty() {
            let x: Vec<&u32> = d
                .iter()
                .filter(|i| boundary_labels.iter().all(|w| members[**i as usize].second_boundary.contains(w)))
                .collect();
            if let Some(v) = x.first().map(|i| label(i)) {
                if x.iter().all(|i| boundary(i) && label(i) == v) {
                    return (v, Case::C);
                }
            }
        }
        (d.iter().map(label).min().expect("non-empty candidate set"), Case::D)
    }

    /// Simulates member `i` under the universal decision function.
    pub fn trace(&self, i: usize) -> Trace {
        Trace::build(self.set.store(), self, self.set.spec(i), self.set.views(i))
    }

    /// Runs the universal decision function on every member and checks
    /// that each certified-stabilizes to its own label.
    pub fn check_stabilizing(&self) -> StabilizingReport {
        let mut members = Vec::with_capacity(self.set.len());
        for i in 0..self.set.len() {
            let trace = self.trace(i);
            let verdict = stabilization_verdict(&trace);
            let mut cases = [0usize; 4];
            for row in &self.set.views(i).views {
                for v in row {
                    cases[self.decisions[v].1 as usize] += 1;
                }
            }
            let label = self.labeling.members[i].label;
            let violation = if !verdict.certified {
                Some(format!("no certified verdict within {} rounds", self.horizon))
            } else if verdict.value() != Some(label) {
                Some(match verdict.value() {
                    Some(v) => format!("stabilizes to {v}, labeled {label}"),
                    None => "obedient processes disagree at the horizon".into(),
                })
            } else {
                None
            };
            members.push(MemberReport {
                index: i,
                verdict,
                cases,
                violation,
            });
        }
        StabilizingReport { members }
    }

    /// Processes heard of by every process at the horizon of member `i`.
    pub fn broadcasters(&self, i: usize) -> ProcSet {
        let views = self.set.views(i);
        let last = &views.views[views.horizon()];
        last.iter()
            .fold(ProcSet::full(self.set.n()), |acc, &v| acc.intersection(self.set.store().ho(v)))
    }
}

impl DecisionFunction for LabelingContext {
    fn name(&self) -> String {
        "universal".into()
    }

    /// Views outside the family have no candidates; they keep the owner's
    /// input.
    fn decide(&self, store: &ViewStore, view: ViewId) -> Value {
        self.decisions.get(&view).map_or_else(|| store.input(view), |d| d.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemberReport {
    pub index: usize,
    pub verdict: Verdict,
    /// How often each of cases (a) to (d) fired over all processes and
    /// rounds.
    pub cases: [usize; 4],
    pub violation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizingReport {
    pub members: Vec<MemberReport>,
}

impl StabilizingReport {
    pub fn passed(&self) -> bool {
        self.members.iter().all(|m| m.violation.is_none())
    }

    pub fn violations(&self) -> impl Iterator<Item = &MemberReport> {
        self.members.iter().filter(|m| m.violation.is_some())
    }

    pub fn case_count(&self, case: Case) -> usize {
        self.members.iter().map(|m| m.cases[case as usize]).sum()
    }
}

/// Moves every included boundary member that is not a limit of its own
/// set's interior to the smallest other value whose interior it is a limit
/// of. Valent and isolated members are never moved.
pub fn properify(labeling: &DecisionLabeling) -> Result<DecisionLabeling> {
    labeling.validate()?;
    let mut out = labeling.clone();
    for (i, m) in labeling.members.iter().enumerate() {
        if m.structure != Structure::IncludedBoundary
            || m.spec.inputs.valent().is_some()
            || labeling.approached_from(i, m.label, true)
        {
            continue;
        }
        let target = labeling
            .values
            .members()
            .find(|&w| w != m.label && labeling.approached_from(i, w, true))
            .ok_or_else(|| {
                Error::Precondition(format!(
                    "member {i} is not a limit of any interior; declare the approach that puts it in some boundary"
                ))
            })?;
        out.members[i].label = target;
    }
    Ok(out)
}

/// Relabels every declared component with the input of its smallest
/// declared broadcaster, after checking that the components cover the
/// family, that their members are pairwise closer than 1, and that each
/// broadcaster is one in every member with the same input.
pub fn strong_reshuffle(labeling: &DecisionLabeling, horizon: Option<usize>) -> Result<DecisionLabeling> {
    labeling.validate()?;
    let covered: usize = labeling.components.iter().map(|c| c.members.len()).sum();
    if covered != labeling.members.len() {
        return Err(Error::Precondition("the declared components must cover every member".into()));
    }
    let ctx = LabelingContext::build(labeling.clone(), horizon)?;
    let mut out = labeling.clone();
    for (k, c) in labeling.components.iter().enumerate() {
        for (x, &i) in c.members.iter().enumerate() {
            for &j in &c.members[x + 1..] {
                if ctx.set.nonuniform(i, j) == DistanceValue::ONE {
                    return Err(Error::Precondition(format!(
                        "component {k}: members {i} and {j} are at distance 1"
                    )));
                }
            }
        }
        let b = *c.broadcasters.iter().min().ok_or_else(|| {
            Error::Precondition(format!(
                "component {k} has no broadcaster, so no strongly valid labeling exists for it"
            ))
        })?;
        for &q in &c.broadcasters {
            let input = labeling.members[c.members[0]].spec.inputs.get(q);
            for &i in &c.members {
                let view_horizon = ctx.horizon;
                let pattern = labeling.members[i].spec.pattern().expect("synchronous member");
                let needed = pattern.prefix_len() + (pattern.n() - 1) * pattern.loop_len() * pattern.n();
                if view_horizon < needed {
                    return Err(Error::Precondition(format!(
                        "horizon {view_horizon} too short to certify broadcasters of member {i}"
                    )));
                }
                if !ctx.broadcasters(i).contains(q) {
                    return Err(Error::Precondition(format!("component {k}: {q} is no broadcaster of member {i}")));
                }
                if labeling.members[i].spec.inputs.get(q) != input {
                    return Err(Error::Precondition(format!("component {k}: broadcaster {q} changes its input")));
                }
            }
        }
        let v = labeling.members[c.members[0]].spec.inputs.get(b);
        for &i in &c.members {
            out.members[i].label = v;
        }
    }
    Ok(out)
}

/// Labels executions by the certified stabilized value of `algorithm`.
pub fn label_by_algorithm(specs: &[ExecutionSpec], algorithm: &dyn DecisionFunction, horizon: Option<usize>) -> Result<Vec<Value>> {
    specs
        .iter()
        .enumerate()
        .map(|(i, spec)| {
            let h = horizon.unwrap_or_else(|| spec.pattern().map_or(0, certification_horizon));
            let trace = crate::simulator::simulate(spec, algorithm, h)?.trace;
            let verdict = stabilization_verdict(&trace);
            match (verdict.certified, verdict.value()) {
                (true, Some(v)) => Ok(v),
                _ => Err(Error::Precondition(format!("execution {i} has no certified stabilized value"))),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{one_message_alpha, one_message_beta, one_message_eta, InputAssignment};

    fn sync(pat: LassoPattern) -> ExecutionSpec {
        ExecutionSpec::sync(pat, InputAssignment::of(&[0, 1])).unwrap()
    }

    fn member(spec: ExecutionSpec, label: u32) -> LabeledMember {
        LabeledMember {
            spec,
            label: Value(label),
            structure: Structure::IncludedBoundary,
            second_boundary: Vec::new(),
        }
    }

    /// α_1..α_k labeled 0, β_1..β_k labeled 1, each a limit of its own set.
    fn one_message(k: usize) -> DecisionLabeling {
        let mut members: Vec<LabeledMember> = (1..=k).map(|i| member(sync(one_message_alpha(i)), 0)).collect();
        members.extend((1..=k).map(|i| member(sync(one_message_beta(i)), 1)));
        let mut approaches = Vec::new();
        for i in 0..k {
            let others = |base: usize| (base..base + k).filter(|&j| j != base + i).take(3).collect::<Vec<_>>();
            approaches.push(Approach {
                target: i,
                sequence: others(0),
                metric: Metric::NonUniform,
            });
            approaches.push(Approach {
                target: k + i,
                sequence: others(k),
                metric: Metric::NonUniform,
            });
        }
        DecisionLabeling {
            values: ValueSet::binary(),
            members,
            approaches,
            components: alloc::vec![
                Component { members: (0..k).collect(), broadcasters: alloc::vec![ProcessId::LEFT] },
                Component { members: (k..2 * k).collect(), broadcasters: alloc::vec![ProcessId::RIGHT] },
            ],
        }
    }

    #[test]
    fn one_message_family_stabilizes() {
        let ctx = LabelingContext::new(one_message(5), None).unwrap();
        let report = ctx.check_stabilizing();
        assert!(report.passed(), "{:?}", report.violations().collect::<Vec<_>>());
        assert_eq!(report.case_count(Case::C), 0);
        // α_3, r, after delivery: only α_3 remains.
        assert_eq!(ctx.candidate_set(2, ProcessId::RIGHT, 5).unwrap(), [2]);
        assert_eq!(ctx.universal_decide(2, ProcessId::RIGHT, 5).unwrap(), (Value(0), Case::A));
        for i in 0..10 {
            assert!(ctx.candidate_set(i, ProcessId::LEFT, 3).unwrap().contains(&i));
        }
    }

    #[test]
    fn reshuffle_keeps_broadcaster_labels() {
        let l = one_message(4);
        assert_eq!(strong_reshuffle(&l, None).unwrap(), l);
        let mut no_bc = l.clone();
        no_bc.components[0].broadcasters.clear();
        assert!(strong_reshuffle(&no_bc, None).is_err());
    }

    #[test]
    fn fully_boundary_labeling_cannot_be_made_proper() {
        assert!(properify(&one_message(4)).is_err());
    }

    #[test]
    fn rejects_malformed_labelings() {
        let mut l = one_message(4);
        l.approaches.retain(|a| a.target != 0);
        assert!(LabelingContext::new(l, None).is_err());
        let mut l = one_message(4);
        l.members[0].structure = Structure::Isolated;
        assert!(l.validate().is_err());
        let mut l = one_message(4);
        l.members.push(member(sync(one_message_eta()), 0));
        l.members[8].structure = Structure::Interior;
        l.members[8].spec = sync(one_message_alpha(1));
        assert!(l.validate().is_err(), "duplicate execution");
    }
}
