use stabcon_core::algorithms::{from_id, Constant, FnDecision, MinMax, SafeMinMax};
use stabcon_core::impossibility::{
    dll_attack, empty_kernel_demo, find_flip_prefix, nonstabilization_run, verify_witness, AttackError,
};
use stabcon_core::model::{InputAssignment, LassoPattern, Link, Value};

#[test]
fn minmax_has_witnesses_for_every_small_k() {
    for k in 1..=6 {
        assert_eq!(find_flip_prefix(&MinMax, k).unwrap(), vec![Link::Left; k]);
        let w = dll_attack(&MinMax, k, 32).unwrap();
        verify_witness(&w, &MinMax).unwrap();
        assert!(w.lambda_conflict.0 <= w.conflict_round() && w.conflict_round() <= w.lambda_conflict.1);
    }
}

#[test]
fn safe_minmax_witness_replays() {
    let alg = SafeMinMax::default();
    let w = dll_attack(&alg, 2, 64).unwrap();
    verify_witness(&w, &alg).unwrap();
    assert!(verify_witness(&w, &MinMax).is_err(), "replay with another algorithm");
}

#[test]
fn tampered_witnesses_fail() {
    let w = dll_attack(&MinMax, 2, 32).unwrap();
    let mut m = w.clone();
    m.m += 2;
    assert!(verify_witness(&m, &MinMax).is_err());
    let mut sigma = w.clone();
    sigma.sigma[0] = Link::Right;
    assert!(verify_witness(&sigma, &MinMax).is_err());
    let mut interval = w.clone();
    interval.rho_conflict.0 = 0;
    assert!(verify_witness(&interval, &MinMax).is_err());
    let mut outputs = w;
    outputs.lambda.rows[3].outputs[0] = Value(1);
    assert!(verify_witness(&outputs, &MinMax).is_err());
}

#[test]
fn validity_violations_are_reported() {
    let err = find_flip_prefix(&*from_id("constant(0)").unwrap(), 1).unwrap_err();
    assert!(matches!(err, AttackError::Validity { .. }), "{err}");
    let err = dll_attack(&Constant(Value(1)), 3, 8).unwrap_err();
    assert!(matches!(err, AttackError::Validity { expected: Value(0), .. }), "{err}");
}

#[test]
fn too_small_silence_budget_reports_stabilization_rounds() {
    // Decides 1 until round 5, then MinMax: the conflict needs m >= 4.
    let slow = FnDecision::new("slow-minmax", |store: &stabcon_core::view::ViewStore, v| {
        if store.clock(v) < 5 {
            Value(1)
        } else {
            stabcon_core::algorithms::DecisionFunction::decide(&MinMax, store, v)
        }
    });
    match dll_attack(&slow, 1, 2) {
        Err(AttackError::NoConflict { m_max: 2, .. }) => {}
        other => panic!("{other:?}"),
    }
    assert!(dll_attack(&slow, 1, 8).unwrap().m >= 4);
}

#[test]
fn chained_runs() {
    let run = nonstabilization_run(&MinMax, &[1, 2, 3], 32, 3).unwrap();
    assert!(run.max_flips() >= 3);
    let mut t = 0;
    for stage in &run.stages {
        t += stage.k + stage.m;
        assert_eq!(stage.conflict_round, t);
        assert_eq!(run.trace.output(stabcon_core::model::ProcessId::LEFT, t), Value(0));
        assert_eq!(run.trace.output(stabcon_core::model::ProcessId::RIGHT, t), Value(1));
    }
    assert!(nonstabilization_run(&MinMax, &[2], 32, 0).is_ok());
    let err = nonstabilization_run(&Constant(Value(0)), &[1, 2], 32, 1).unwrap_err();
    assert!(matches!(err, AttackError::Stage { stage: 0, .. }), "{err}");
}

#[test]
fn kernel_demo_requires_an_empty_kernel() {
    let p = LassoPattern::parse("=").unwrap();
    assert!(empty_kernel_demo(&MinMax, &p, InputAssignment::of(&[0, 1]), 16).is_err());
}
