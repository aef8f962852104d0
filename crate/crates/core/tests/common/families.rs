//! Labeled execution families for the universal decision function.

use stabcon_core::model::{one_message_alpha, one_message_beta, one_message_eta, InputAssignment, LassoPattern, ProcessId, Value, ValueSet};
use stabcon_core::simulator::ExecutionSpec;
use stabcon_core::topology::Metric;
use stabcon_core::universal::{Approach, Component, DecisionLabeling, LabeledMember, Structure};

pub fn spec(literal: &str, inputs: &[u32]) -> ExecutionSpec {
    ExecutionSpec::sync(LassoPattern::parse(literal).unwrap(), InputAssignment::of(inputs)).unwrap()
}

pub fn member(spec: ExecutionSpec, label: u32, structure: Structure) -> LabeledMember {
    LabeledMember {
        spec,
        label: Value(label),
        structure,
        second_boundary: Vec::new(),
    }
}

fn approach(target: usize, sequence: impl IntoIterator<Item = usize>) -> Approach {
    Approach {
        target,
        sequence: sequence.into_iter().collect(),
        metric: Metric::NonUniform,
    }
}

/// `Σ_0 = {α_i}`, `Σ_1 = {β_i}` for `i <= k`, inputs `(0, 1)`, every member
/// an included boundary point that is a limit of the rest of its set.
pub fn one_message(k: usize) -> DecisionLabeling {
    let io = |p: LassoPattern| ExecutionSpec::sync(p, InputAssignment::of(&[0, 1])).unwrap();
    let mut members: Vec<_> = (1..=k).map(|i| member(io(one_message_alpha(i)), 0, Structure::IncludedBoundary)).collect();
    members.extend((1..=k).map(|i| member(io(one_message_beta(i)), 1, Structure::IncludedBoundary)));
    let mut approaches = Vec::new();
    for base in [0, k] {
        for i in base..base + k {
            approaches.push(approach(i, (base..base + k).filter(|&j| j != i).take(3)));
        }
    }
    DecisionLabeling {
        values: ValueSet::binary(),
        members,
        approaches,
        components: vec![
            Component {
                members: (0..k).collect(),
                broadcasters: vec![ProcessId::LEFT],
            },
            Component {
                members: (k..2 * k).collect(),
                broadcasters: vec![ProcessId::RIGHT],
            },
        ],
    }
}

/// [`one_message`] plus `η` labeled 0, flagged in the second boundary of
/// both included boundaries. Returns the labeling and `η`'s index.
pub fn one_message_with_eta(k: usize) -> (DecisionLabeling, usize) {
    let mut l = one_message(k);
    let eta = l.members.len();
    let eta_spec = ExecutionSpec::sync(one_message_eta(), InputAssignment::of(&[0, 1])).unwrap();
    let mut m = member(eta_spec, 0, Structure::IncludedBoundary);
    m.second_boundary = vec![Value(0), Value(1)];
    l.members.push(m);
    l.approaches.push(approach(eta, 0..3));
    l.components.clear();
    (l, eta)
}

/// Indices of the three-label family.
pub mod three {
    pub const GAMMA1: usize = 0;
    pub const GAMMA2: usize = 4;
    pub const U0: usize = 8;
    pub const U2: usize = 9;
    pub const U0_RIGHT: usize = 10;
}

/// Values {0, 1, 2}. `l` hears nothing in the first two rounds of the
/// boundary members, so its early candidate sets mix labels.
///
/// - `γ1 = (——:↔, (1,1))`, label 1, included boundary, in the second
///   boundary of labels 1 and 2; limit of `S1_i = (——↔^i:←, (1,1))`.
/// - `γ2 = (——:↔, (1,2))`, label 2, included boundary; limit of
///   `S2_i = (——↔^i:←, (1,2))`.
/// - interior `U0 = (↔, (0,1))` label 0, `U2 = (↔, (0,2))` label 2,
///   `U0' = (→, (0,2))` label 0.
pub fn three_label() -> DecisionLabeling {
    let s = |i: usize| format!("--{}:<", "=".repeat(i));
    let mut members = Vec::new();
    let mut g1 = member(spec("--:=", &[1, 1]), 1, Structure::IncludedBoundary);
    g1.second_boundary = vec![Value(1), Value(2)];
    members.push(g1);
    members.extend((1..=3).map(|i| member(spec(&s(i), &[1, 1]), 1, Structure::Interior)));
    members.push(member(spec("--:=", &[1, 2]), 2, Structure::IncludedBoundary));
    members.extend((1..=3).map(|i| member(spec(&s(i), &[1, 2]), 2, Structure::Interior)));
    members.push(member(spec("=", &[0, 1]), 0, Structure::Interior));
    members.push(member(spec("=", &[0, 2]), 2, Structure::Interior));
    members.push(member(spec(">", &[0, 2]), 0, Structure::Interior));
    DecisionLabeling {
        values: ValueSet::range(3),
        members,
        approaches: vec![approach(three::GAMMA1, 1..4), approach(three::GAMMA2, 5..8)],
        components: Vec::new(),
    }
}

/// `((←)^ω, (0,1))` labeled 0 whose only declared approach comes from the
/// interior of `Σ_1`: `(←^k:↔, (1,1))`.
pub fn misplaced_corner() -> DecisionLabeling {
    let mut members = vec![member(spec("<", &[0, 1]), 0, Structure::IncludedBoundary)];
    members.extend((1..=3).map(|k| member(spec(&format!("{}:=", "<".repeat(k)), &[1, 1]), 1, Structure::Interior)));
    DecisionLabeling {
        values: ValueSet::binary(),
        members,
        approaches: vec![approach(0, 1..4)],
        components: Vec::new(),
    }
}

/// `(↔, (0,1))` labeled 1 in a component whose declared broadcaster is `l`.
pub fn relabel_by_broadcaster() -> DecisionLabeling {
    DecisionLabeling {
        values: ValueSet::binary(),
        members: vec![member(spec("=", &[0, 1]), 1, Structure::Interior)],
        approaches: Vec::new(),
        components: vec![Component {
            members: vec![0],
            broadcasters: vec![ProcessId::LEFT],
        }],
    }
}
