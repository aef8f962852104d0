use alloc::vec::Vec;

use super::{ExecutionSpec, ExecutionViews, Trace};
use crate::algorithms::DecisionFunction;
use crate::error::Result;
use crate::model::{InputAssignment, LassoPattern, ProcSet, ProcessId};
use crate::view::ViewStore;

/// Loop periods (per process) a synchronous verdict needs before it is
/// certified: the horizon must reach `|prefix| + 4·n·|loop|`.
pub const CERTIFICATION_FACTOR: usize = 4;

/// `|prefix| + 4·n·|loop|`.
pub fn certification_horizon(pattern: &LassoPattern) -> usize {
    pattern.prefix_len() + CERTIFICATION_FACTOR * pattern.n() * pattern.loop_len()
}

/// Lock-step rounds: in round `t` every process extends its view with the
/// round `t-1` views of its in-neighbours in `G^t`.
pub fn sync_views(store: &mut ViewStore, pattern: &LassoPattern, inputs: &InputAssignment, horizon: usize) -> ExecutionViews {
    let n = pattern.n();
    assert_eq!(inputs.len(), n, "input assignment length");
    let mut views = Vec::with_capacity(horizon + 1);
    views.push(
        (0..n)
            .map(|p| {
                let p = ProcessId(p as u8);
                store.initial(p, inputs.get(p))
            })
            .collect::<Vec<_>>(),
    );
    let mut received = Vec::with_capacity(n);
    for t in 1..=horizon {
        let g = pattern.graph_at(t);
        let prev: &Vec<_> = &views[t - 1];
        let next = (0..n)
            .map(|p| {
                let p = ProcessId(p as u8);
                received.clear();
                received.extend(g.incoming(p).iter().filter(|&q| q != p).map(|q| prev[q.index()]));
                store.extend(prev[p.index()], &received)
            })
            .collect();
        views.push(next);
    }
    ExecutionViews {
        views,
        obedient: alloc::vec![ProcSet::full(n); horizon + 1],
    }
}

/// Synchronous run of `algorithm` for `horizon` rounds.
pub fn run_sync(
    pattern: &LassoPattern,
    inputs: &InputAssignment,
    algorithm: &dyn DecisionFunction,
    horizon: usize,
) -> Result<Trace> {
    let spec = ExecutionSpec::sync(pattern.clone(), inputs.clone())?;
    Ok(super::simulate(&spec, algorithm, horizon)?.trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{MinMax, OneMessageKeeper, SafeMinMax};
    use crate::model::{one_message_alpha, one_message_eta, Value};
    use crate::simulator::{broadcasters, ho_set, stabilization_verdict, Outcome};

    const L: ProcessId = ProcessId::LEFT;
    const R: ProcessId = ProcessId::RIGHT;

    fn pat(s: &str) -> LassoPattern {
        LassoPattern::parse(s).unwrap()
    }

    fn outputs(trace: &Trace, p: ProcessId) -> Vec<u32> {
        trace.rows.iter().map(|r| r.outputs[p.index()].0).collect()
    }

    #[test]
    fn minmax_left_forever() {
        let trace = run_sync(&pat("<"), &InputAssignment::of(&[0, 1]), &MinMax, 5).unwrap();
        assert_eq!(outputs(&trace, R), [1, 1, 1, 1, 1, 1]);
        assert_eq!(outputs(&trace, L), [0, 1, 1, 1, 1, 1]);
        let v = stabilization_verdict(&trace);
        assert_eq!(v.outcome, Outcome::Stabilized { value: Value(1), round: 1 });
        assert!(!v.certified, "5 rounds are below |prefix| + 4·n·|loop|");
        let long = run_sync(&pat("<"), &InputAssignment::of(&[0, 1]), &MinMax, 8).unwrap();
        assert!(stabilization_verdict(&long).certified_to(Value(1)));
    }

    #[test]
    fn minmax_right_forever() {
        let trace = run_sync(&pat(">"), &InputAssignment::of(&[0, 1]), &MinMax, 6).unwrap();
        assert_eq!(outputs(&trace, L), [0; 7]);
        assert_eq!(outputs(&trace, R), [1, 1, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn minmax_delayed_witness_pattern() {
        // ←———→^ω: l settles on 0 at round 2, r only learns min 0 through
        // the first → (round 5) and outputs it from round 6.
        let trace = run_sync(&pat("<---:>"), &InputAssignment::of(&[0, 1]), &MinMax, 20).unwrap();
        assert_eq!(&outputs(&trace, L)[..4], [0, 1, 0, 0]);
        assert_eq!(&outputs(&trace, R)[..8], [1, 1, 1, 1, 1, 1, 0, 0]);
        let v = stabilization_verdict(&trace);
        assert_eq!(v.outcome, Outcome::Stabilized { value: Value(0), round: 6 });
        assert!(v.certified);
    }

    #[test]
    fn valent_runs_are_constant() {
        for alg in [&MinMax as &dyn DecisionFunction, &SafeMinMax::default(), &OneMessageKeeper] {
            for lit in ["<", "=>:-", "-->", "><="] {
                let trace = run_sync(&pat(lit), &InputAssignment::of(&[1, 1]), alg, 30).unwrap();
                assert!(trace.rows.iter().all(|r| r.outputs == [Value(1), Value(1)]));
            }
        }
    }

    #[test]
    fn heard_of_and_broadcasters() {
        let i = InputAssignment::of(&[0, 1]);
        let right = run_sync(&pat(">"), &i, &MinMax, 3).unwrap();
        assert_eq!(ho_set(&right, R, 1).unwrap(), ProcSet::full(2));
        assert_eq!(ho_set(&right, R, 0).unwrap(), ProcSet::singleton(R));
        let both = run_sync(&pat("="), &i, &MinMax, 3).unwrap();
        assert_eq!(broadcasters(&both, 1).unwrap(), ProcSet::full(2));
        let alpha = run_sync(&one_message_alpha(1), &i, &MinMax, 4).unwrap();
        assert_eq!(broadcasters(&alpha, 2).unwrap(), ProcSet::singleton(L));
        let eta = run_sync(&one_message_eta(), &i, &MinMax, 4).unwrap();
        assert_eq!(broadcasters(&eta, 4).unwrap(), ProcSet::EMPTY);
        assert!(eta.rows.iter().all(|r| r.ho == [ProcSet::singleton(L), ProcSet::singleton(R)]));
    }

    #[test]
    fn keeper_adopts_single_message() {
        let trace = run_sync(&one_message_alpha(3), &InputAssignment::of(&[0, 1]), &OneMessageKeeper, 8).unwrap();
        assert_eq!(outputs(&trace, R), [1, 1, 1, 1, 0, 0, 0, 0, 0]);
        assert_eq!(outputs(&trace, L), [0; 9]);
    }

    #[test]
    fn safe_minmax_on_bounded_delay_loop() {
        let i = InputAssignment::of(&[0, 1]);
        let trace = run_sync(&pat("-->--<"), &i, &SafeMinMax::default(), 40).unwrap();
        assert_eq!(stabilization_verdict(&trace).value(), Some(Value(0)));
        let trace = run_sync(&pat("-->--<"), &i, &SafeMinMax::default(), 60).unwrap();
        assert!(stabilization_verdict(&trace).certified_to(Value(0)));
    }
}
