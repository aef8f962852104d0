mod common;

use common::families::{self, member, spec};
use proptest::prelude::*;
use stabcon_core::algorithms::MinMax;
use stabcon_core::model::{ll_lassos, InputAssignment, ProcessId, Value, ValueSet};
use stabcon_core::simulator::ExecutionSpec;
use stabcon_core::topology::Metric;
use stabcon_core::universal::{
    label_by_algorithm, properify, strong_reshuffle, Approach, Case, DecisionLabeling, LabelingContext, Structure,
};

const L: ProcessId = ProcessId::LEFT;
const R: ProcessId = ProcessId::RIGHT;

#[test]
fn one_message_candidate_sets() {
    let ctx = LabelingContext::new(families::one_message(5), None).unwrap();
    // α_2 = —— → —^ω: r hears l in round 3 and is then alone.
    assert_eq!(ctx.candidate_set(1, R, 3).unwrap(), [1]);
    assert_eq!(ctx.universal_decide(2, R, 5).unwrap(), (Value(0), Case::A));
    // l in α_1 hears nothing: every α, and the β that have not delivered.
    assert_eq!(ctx.candidate_set(0, L, 3).unwrap(), [0, 1, 2, 3, 4, 7, 8, 9]);
}

#[test]
fn eta_in_both_second_boundaries_decides_by_case_c() {
    let (labeling, eta) = families::one_message_with_eta(8);
    let ctx = LabelingContext::new(labeling, None).unwrap();
    // After round 9 r's candidates in η are η and every β.
    let d = ctx.candidate_set(eta, R, 9).unwrap();
    assert_eq!(d.len(), 9);
    assert_eq!(ctx.universal_decide(eta, R, 9).unwrap(), (Value(0), Case::C));
    // r cannot tell β_k from η, so the β side cannot settle on 1.
    let report = ctx.check_stabilizing();
    assert!(!report.passed());
    assert!(report.violations().all(|m| (8..16).contains(&m.index)));
}

/// Every lossy-link lasso with |prefix| <= 3 and |loop| <= 2 under all binary
/// inputs, labeled by MinMax. The corners ((←)^ω, (0,1)) and ((→)^ω, (1,0))
/// are included boundary points of Σ_1, approached by (←^k:↔, (1,1)) and
/// (→^k:↔, (1,1)).
fn minmax_family() -> DecisionLabeling {
    let mut specs = Vec::new();
    for p in ll_lassos(3, 2) {
        for inputs in InputAssignment::all_binary(2) {
            specs.push(ExecutionSpec::sync(p.clone(), inputs).unwrap());
        }
    }
    for extra in ["<<<:=", ">>>:="].iter().map(|s| spec(s, &[1, 1])) {
        if !specs.iter().any(|s| s.same_execution(&extra)) {
            specs.push(extra);
        }
    }
    let labels = label_by_algorithm(&specs, &MinMax, None).unwrap();
    let index = |lit: &str, i: &[u32]| specs.iter().position(|s| s.same_execution(&spec(lit, i))).unwrap();
    let corners = [(index("<", &[0, 1]), "<"), (index(">", &[1, 0]), ">")];
    let mut members: Vec<_> = specs
        .iter()
        .zip(&labels)
        .map(|(s, l)| member(s.clone(), l.0, Structure::Interior))
        .collect();
    let mut approaches = Vec::new();
    for (c, dir) in corners {
        members[c].structure = Structure::IncludedBoundary;
        let sequence = (1..=3).map(|k| index(&format!("{}:=", dir.repeat(k)), &[1, 1])).collect();
        approaches.push(Approach {
            target: c,
            sequence,
            metric: Metric::NonUniform,
        });
    }
    DecisionLabeling {
        values: ValueSet::binary(),
        members,
        approaches,
        components: Vec::new(),
    }
}

#[test]
fn lossy_link_family_with_minmax_labels() {
    let labeling = minmax_family();
    assert_eq!(properify(&labeling).unwrap(), labeling);
    let ctx = LabelingContext::new(labeling, None).unwrap();
    let report = ctx.check_stabilizing();
    assert!(report.passed(), "{:?}", report.violations().next());
}

#[test]
fn three_label_family_uses_every_case() {
    let ctx = LabelingContext::new(families::three_label(), None).unwrap();
    let report = ctx.check_stabilizing();
    assert!(report.passed(), "{:?}", report.violations().next());
    for case in [Case::A, Case::B, Case::C, Case::D] {
        assert!(report.case_count(case) > 0, "{case:?} never fired");
    }
}

#[test]
fn improper_labelings_rejected_before_deciding() {
    let err = LabelingContext::new(families::misplaced_corner(), None).unwrap_err();
    assert!(err.to_string().contains("own decision set"), "{err}");
    let moved = properify(&families::misplaced_corner()).unwrap();
    assert_eq!(moved.members[0].label, Value(1));
    // Isolated and valent members are never moved.
    let mut iso = families::misplaced_corner();
    iso.approaches.clear();
    iso.members[0].structure = Structure::Isolated;
    assert_eq!(properify(&iso).unwrap(), iso);
    let mut valent = families::misplaced_corner();
    valent.members[0].spec = spec("<", &[0, 0]);
    valent.approaches.clear();
    assert_eq!(properify(&valent).unwrap(), valent);
}

#[test]
fn reshuffle_by_broadcaster() {
    let moved = strong_reshuffle(&families::relabel_by_broadcaster(), None).unwrap();
    assert_eq!(moved.members[0].label, Value(0));
    let mut wrong = families::relabel_by_broadcaster();
    wrong.members[0].spec = spec(">", &[0, 1]);
    wrong.components[0].broadcasters = vec![R];
    assert!(strong_reshuffle(&wrong, None).is_err(), "r is no broadcaster of (→)^ω");
    let mut uncovered = families::relabel_by_broadcaster();
    uncovered.components.clear();
    assert!(strong_reshuffle(&uncovered, None).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn candidates_contain_the_query_and_shrink(member in 0usize..11, p in 0u8..2, t in 0usize..12) {
        let ctx = LabelingContext::new(families::three_label(), None).unwrap();
        let now = ctx.candidate_set(member, ProcessId(p), t).unwrap();
        let next = ctx.candidate_set(member, ProcessId(p), t + 1).unwrap();
        prop_assert!(now.contains(&member));
        prop_assert!(next.iter().all(|i| now.contains(i)));
    }

    #[test]
    fn decisions_agree_after_stabilization(member in 0usize..16) {
        let ctx = LabelingContext::new(families::one_message(8), None).unwrap();
        let trace = ctx.trace(member);
        let round = stabcon_core::simulator::stabilization_verdict(&trace).round().unwrap();
        for row in &trace.rows[round..] {
            prop_assert_eq!(row.outputs[0], row.outputs[1]);
        }
    }
}
