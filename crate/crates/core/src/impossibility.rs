//! Finite impossibility witnesses: the conflicting-prefix attack on the
//! delayed lossy-link model and the empty-kernel disagreement.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::algorithms::DecisionFunction;
use crate::error::Error;
use crate::model::{InputAssignment, LassoPattern, Link, ProcSet, ProcessId, Value};
use crate::simulator::{broadcasters, certification_horizon, simulate, stabilization_verdict, ExecutionSpec, Trace, Verdict};
use crate::topology::{prefix_order_ll, view_distance, DistanceValue};

/// Why an attack produced no witness.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AttackError {
    #[error("{algorithm} does not admit the pattern {pattern}")]
    DomainMismatch { algorithm: String, pattern: String },
    #[error("validity violated: {pattern} stabilizes to {got:?} but must stabilize to {expected}")]
    Validity {
        pattern: String,
        expected: Value,
        got: Option<Value>,
    },
    #[error("no certified verdict for {pattern} within {horizon} rounds")]
    Uncertified { pattern: String, horizon: usize },
    #[error("no prefix of length {k} flips from 0 to 1")]
    NoFlip { k: usize },
    #[error("no silence length up to {m_max} conflicts; l stabilizes in round {k_l:?}, r in round {k_r:?}")]
    NoConflict {
        m_max: usize,
        k_l: Option<usize>,
        k_r: Option<usize>,
    },
    #[error("stage {stage}: {source}")]
    Stage {
        stage: usize,
        #[source]
        source: alloc::boxed::Box<AttackError>,
    },
    #[error(transparent)]
    Model(#[from] Error),
}

pub type AttackResult<T> = core::result::Result<T, AttackError>;

/// The binary inputs the attack runs with: `l` starts with 0, `r` with 1.
pub fn attack_inputs() -> InputAssignment {
    InputAssignment::of(&[0, 1])
}

fn pattern_name(p: &LassoPattern) -> String {
    p.literal().unwrap_or_else(|| format!("{p:?}"))
}

fn concat(parts: &[&[Link]]) -> Vec<Link> {
    parts.iter().flat_map(|p| p.iter().copied()).collect()
}

fn run(algorithm: &dyn DecisionFunction, pattern: LassoPattern, horizon: usize) -> AttackResult<Trace> {
    if !algorithm.admits(&pattern) {
        return Err(AttackError::DomainMismatch {
            algorithm: algorithm.name(),
            pattern: pattern_name(&pattern),
        });
    }
    let spec = ExecutionSpec::sync(pattern, attack_inputs())?;
    Ok(simulate(&spec, algorithm, horizon)?.trace)
}

fn verdict(algorithm: &dyn DecisionFunction, pattern: LassoPattern) -> AttackResult<(Verdict, LassoPattern)> {
    let h = certification_horizon(&pattern);
    let trace = run(algorithm, pattern.clone(), h)?;
    Ok((stabilization_verdict(&trace), pattern))
}

/// The first `σ` in the lossy-link prefix order such that after `history`
/// the border executions `σ→^ω` and `σ←^ω` certified-stabilize to 0 and
/// 1.
pub fn find_flip_after(algorithm: &dyn DecisionFunction, history: &[Link], k: usize) -> AttackResult<Vec<Link>> {
    let order = prefix_order_ll(k)?;
    let mut uncertified = None;
    for sigma in &order {
        let prefix = concat(&[history, sigma]);
        let (lambda, lp) = verdict(algorithm, LassoPattern::from_links(&prefix, &[Link::Right])?)?;
        if !lambda.certified {
            uncertified.get_or_insert((lp, certification_horizon_of(&prefix)));
            continue;
        }
        if lambda.value() != Some(Value(0)) {
            continue;
        }
        let (rho, rp) = verdict(algorithm, LassoPattern::from_links(&prefix, &[Link::Left])?)?;
        if !rho.certified {
            uncertified.get_or_insert((rp, certification_horizon_of(&prefix)));
            continue;
        }
        if rho.value() == Some(Value(1)) {
            return Ok(sigma.clone());
        }
    }
    if history.is_empty() {
        // The corner executions are indistinguishable to one process from
        // a valent execution, so validity fixes their values.
        for (tail, expected) in [(Link::Right, Value(0)), (Link::Left, Value(1))] {
            let (v, p) = verdict(algorithm, LassoPattern::from_links(&[], &[tail])?)?;
            if v.certified && v.value() != Some(expected) {
                return Err(AttackError::Validity {
                    pattern: pattern_name(&p),
                    expected,
                    got: v.value(),
                });
            }
        }
    }
    match uncertified {
        Some((p, horizon)) => Err(AttackError::Uncertified {
            pattern: pattern_name(&p),
            horizon,
        }),
        None => Err(AttackError::NoFlip { k }),
    }
}

fn certification_horizon_of(prefix: &[Link]) -> usize {
    certification_horizon(&LassoPattern::from_links(prefix, &[Link::Right]).expect("two-process links"))
}

/// [`find_flip_after`] with an empty history.
pub fn find_flip_prefix(algorithm: &dyn DecisionFunction, k: usize) -> AttackResult<Vec<Link>> {
    find_flip_after(algorithm, &[], k)
}

/// `λ(m) = σ —^m →^ω` and `ρ(m) = σ —^m ←^ω` with an output conflict in
/// round `k + m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictWitness {
    pub algorithm: String,
    pub k: usize,
    pub sigma: Vec<Link>,
    pub m: usize,
    pub lambda: Trace,
    pub rho: Trace,
    /// Maximal interval of rounds around `k + m` in which `O_l != O_r`,
    /// in `λ(m)` and `ρ(m)` respectively.
    pub lambda_conflict: (usize, usize),
    pub rho_conflict: (usize, usize),
}

impl ConflictWitness {
    pub fn conflict_round(&self) -> usize {
        self.k + self.m
    }
}

/// Rounds of the witness traces: the certification horizon of `λ(m)`.
pub fn witness_horizon(k: usize, m: usize) -> usize {
    k + m + 4 * 2
}

fn conflicts_at(trace: &Trace, t: usize) -> bool {
    trace.output(ProcessId::LEFT, t) == Value(0) && trace.output(ProcessId::RIGHT, t) == Value(1)
}

fn conflict_interval(trace: &Trace, t: usize) -> Option<(usize, usize)> {
    let differ = |s: usize| trace.output(ProcessId::LEFT, s) != trace.output(ProcessId::RIGHT, s);
    if !differ(t) {
        return None;
    }
    let mut lo = t;
    while lo > 0 && differ(lo - 1) {
        lo -= 1;
    }
    let mut hi = t;
    while hi < trace.horizon && differ(hi + 1) {
        hi += 1;
    }
    Some((lo, hi))
}

fn border_pair(algorithm: &dyn DecisionFunction, prefix: &[Link], m: usize, horizon: usize) -> AttackResult<(Trace, Trace)> {
    let silent = alloc::vec![Link::Silent; m];
    let p = concat(&[prefix, &silent]);
    let lambda = run(algorithm, LassoPattern::from_links(&p, &[Link::Right])?, horizon)?;
    let rho = run(algorithm, LassoPattern::from_links(&p, &[Link::Left])?, horizon)?;
    Ok((lambda, rho))
}

fn attack_after(
    algorithm: &dyn DecisionFunction,
    history: &[Link],
    k: usize,
    m_max: usize,
) -> AttackResult<(Vec<Link>, usize, Trace, Trace)> {
    let sigma = find_flip_after(algorithm, history, k)?;
    let prefix = concat(&[history, &sigma]);
    let base = prefix.len();
    for m in 0..=m_max {
        let (lambda, rho) = border_pair(algorithm, &prefix, m, witness_horizon(base, m))?;
        if conflicts_at(&lambda, base + m) && conflicts_at(&rho, base + m) {
            return Ok((sigma, m, lambda, rho));
        }
    }
    // Report when the unsilenced border executions stabilize.
    let (lambda, rho) = border_pair(algorithm, &prefix, 0, witness_horizon(base, 0))?;
    Err(AttackError::NoConflict {
        m_max,
        k_l: last_change(&lambda, ProcessId::LEFT),
        k_r: last_change(&rho, ProcessId::RIGHT),
    })
}

fn last_change(trace: &Trace, p: ProcessId) -> Option<usize> {
    let v = stabilization_verdict(trace);
    v.certified.then(|| {
        let last = trace.output(p, trace.horizon);
        (0..=trace.horizon)
            .rev()
            .find(|&t| trace.output(p, t) != last)
            .map_or(0, |t| t + 1)
    })
}

/// The smallest `m <= m_max` for which both `λ(m)` and `ρ(m)` show
/// `O_l = 0` and `O_r = 1` in round `k + m`.
pub fn dll_attack(algorithm: &dyn DecisionFunction, k: usize, m_max: usize) -> AttackResult<ConflictWitness> {
    let (sigma, m, lambda, rho) = attack_after(algorithm, &[], k, m_max)?;
    let t = k + m;
    Ok(ConflictWitness {
        algorithm: algorithm.name(),
        k,
        sigma,
        m,
        lambda_conflict: conflict_interval(&lambda, t).expect("conflict at k + m"),
        rho_conflict: conflict_interval(&rho, t).expect("conflict at k + m"),
        lambda,
        rho,
    })
}

/// Replays a witness with `algorithm` and returns the first broken claim.
pub fn verify_witness(w: &ConflictWitness, algorithm: &dyn DecisionFunction) -> core::result::Result<(), String> {
    if w.sigma.len() != w.k || w.sigma.iter().any(|l| !Link::LOSSY.contains(l)) {
        return Err(format!("σ is not a lossy-link prefix of length {}", w.k));
    }
    if algorithm.name() != w.algorithm {
        return Err(format!("witness is for {}, replayed with {}", w.algorithm, algorithm.name()));
    }
    let horizon = witness_horizon(w.k, w.m);
    let (lambda, rho) = border_pair(algorithm, &w.sigma, w.m, horizon).map_err(|e| format!("replay failed: {e}"))?;
    for (name, recorded, replayed) in [("λ(m)", &w.lambda, &lambda), ("ρ(m)", &w.rho, &rho)] {
        if recorded.horizon != horizon || recorded.rows.len() != replayed.rows.len() {
            return Err(format!("{name}: recorded horizon does not match σ and m"));
        }
        if !recorded.spec.same_execution(&replayed.spec) {
            return Err(format!("{name}: recorded execution is not σ —^m with the border tail"));
        }
        for (a, b) in recorded.rows.iter().zip(&replayed.rows) {
            if a.outputs != b.outputs || a.digests != b.digests {
                return Err(format!("{name}: replay differs in round {}", a.t));
            }
        }
    }
    let t = w.conflict_round();
    if let Some(s) = (0..=t).find(|&s| w.lambda.rows[s].digests != w.rho.rows[s].digests) {
        return Err(format!("λ(m) and ρ(m) are distinguishable in round {s} <= k + m"));
    }
    if !conflicts_at(&w.lambda, t) || !conflicts_at(&w.rho, t) {
        return Err(format!("no O_l = 0, O_r = 1 conflict in round {t}"));
    }
    if conflict_interval(&w.lambda, t) != Some(w.lambda_conflict) || conflict_interval(&w.rho, t) != Some(w.rho_conflict) {
        return Err("conflict interval does not match the replay".into());
    }
    let facts = [
        (&w.lambda, Link::Right, ProcessId::LEFT),
        (&w.rho, Link::Left, ProcessId::RIGHT),
    ];
    for (trace, tail, p) in facts {
        let border = ExecutionSpec::sync(
            LassoPattern::from_links(&w.sigma, &[tail]).map_err(|e| format!("{e}"))?,
            attack_inputs(),
        )
        .map_err(|e| format!("{e}"))?;
        let d = view_distance(&trace.spec, &border, p, None).map_err(|e| format!("{e}"))?;
        if d != DistanceValue::Zero {
            return Err(format!("{p} distance to the border execution is {d}, not certified 0"));
        }
    }
    Ok(())
}

/// One stage of a chained run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stage {
    pub k: usize,
    pub sigma: Vec<Link>,
    pub m: usize,
    /// Round of the stage's conflict in the chained run.
    pub conflict_round: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonStabilizationRun {
    pub stages: Vec<Stage>,
    /// The committed history followed by `→^ω`.
    pub pattern: LassoPattern,
    pub trace: Trace,
    /// Output changes per process over the run.
    pub flips: Vec<usize>,
}

impl NonStabilizationRun {
    pub fn max_flips(&self) -> usize {
        self.flips.iter().copied().max().unwrap_or(0)
    }
}

/// Chains conflicting prefixes: each stage searches a flip prefix and a
/// silence length for the continuation of everything committed so far,
/// then commits `σ —^m`.
pub fn nonstabilization_run(
    algorithm: &dyn DecisionFunction,
    k_schedule: &[usize],
    m_max: usize,
    flips_required: usize,
) -> AttackResult<NonStabilizationRun> {
    let mut history: Vec<Link> = Vec::new();
    let mut stages = Vec::new();
    for (stage, &k) in k_schedule.iter().enumerate() {
        let (sigma, m, _, _) = attack_after(algorithm, &history, k, m_max).map_err(|e| AttackError::Stage {
            stage,
            source: alloc::boxed::Box::new(e),
        })?;
        history.extend(&sigma);
        history.extend(core::iter::repeat_n(Link::Silent, m));
        stages.push(Stage {
            k,
            sigma,
            m,
            conflict_round: history.len(),
        });
    }
    let pattern = LassoPattern::from_links(&history, &[Link::Right])?;
    let trace = run(algorithm, pattern.clone(), history.len())?;
    let flips: Vec<usize> = (0..2).map(|p| trace.flips(ProcessId(p))).collect();
    let out = NonStabilizationRun {
        stages,
        pattern,
        trace,
        flips,
    };
    if out.max_flips() < flips_required {
        return Err(AttackError::Model(Error::Precondition(format!(
            "the chained run changes outputs only {} times, {flips_required} required",
            out.max_flips()
        ))));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelReport {
    pub kernel: ProcSet,
    pub broadcasters: ProcSet,
    /// The horizon covers `|prefix| + (n-1)·n·|loop|` rounds, after which
    /// heard-of sets of a lasso no longer grow.
    pub broadcasters_certified: bool,
    /// Rounds in which some obedient processes output different values.
    pub disagreement_rounds: Vec<usize>,
    /// Disagreement in every round from the certification horizon of the
    /// pattern to the run's horizon.
    pub persistent: bool,
    pub trace: Trace,
    pub note: String,
}

/// Runs `algorithm` on a pattern whose kernel is empty and reports the
/// disagreement it cannot avoid.
pub fn empty_kernel_demo(
    algorithm: &dyn DecisionFunction,
    pattern: &LassoPattern,
    inputs: InputAssignment,
    horizon: usize,
) -> crate::error::Result<KernelReport> {
    let kernel = pattern.kernel();
    if !kernel.is_empty() {
        return Err(Error::Precondition(format!("kernel is {kernel:?}, not empty")));
    }
    let valent = inputs.valent().is_some();
    let spec = ExecutionSpec::sync(pattern.clone(), inputs)?;
    let trace = simulate(&spec, algorithm, horizon)?.trace;
    let n = pattern.n();
    let bc = broadcasters(&trace, horizon)?;
    let needed = pattern.prefix_len() + (n - 1) * n * pattern.loop_len();
    let disagreement_rounds: Vec<usize> = trace
        .rows
        .iter()
        .filter(|row| row.outputs.iter().any(|&o| o != row.outputs[0]))
        .map(|row| row.t)
        .collect();
    let from = certification_horizon(pattern).min(horizon);
    let persistent = horizon >= certification_horizon(pattern) && (from..=horizon).all(|t| disagreement_rounds.binary_search(&t).is_ok());
    let note = if valent {
        "no witness for valent inputs".into()
    } else if persistent {
        format!("outputs disagree in every round from {from} to {horizon}")
    } else {
        "no persistent disagreement within the horizon".into()
    };
    Ok(KernelReport {
        kernel,
        broadcasters: bc,
        broadcasters_certified: horizon >= needed,
        disagreement_rounds,
        persistent,
        trace,
        note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{Constant, Cutoff, MinMax, OneMessageKeeper, SafeMinMax};
    use crate::model::{one_message_eta, two_cliques};

    #[test]
    fn minmax_flip_prefixes() {
        assert_eq!(find_flip_prefix(&MinMax, 1).unwrap(), [Link::Left]);
        assert_eq!(find_flip_prefix(&MinMax, 2).unwrap(), [Link::Left, Link::Left]);
    }

    #[test]
    fn constant_violates_validity() {
        let err = find_flip_prefix(&Constant(Value(0)), 2).unwrap_err();
        assert!(matches!(err, AttackError::Validity { expected: Value(1), .. }), "{err}");
    }

    #[test]
    fn keeper_is_out_of_domain() {
        assert!(matches!(dll_attack(&OneMessageKeeper, 1, 8), Err(AttackError::DomainMismatch { .. })));
    }

    #[test]
    fn minmax_witness() {
        let w = dll_attack(&MinMax, 1, 8).unwrap();
        assert_eq!((w.sigma.as_slice(), w.m), ([Link::Left].as_slice(), 1));
        // O_l = 0 from round 2. In λ(m) r still decides 1 when it first
        // hears l in round m + 2; in ρ(m) l switches to 1 in that round.
        assert_eq!(w.lambda_conflict, (2, w.m + 2));
        assert_eq!(w.rho_conflict, (2, w.m + 1));
        verify_witness(&w, &MinMax).unwrap();
        let mut bad = w.clone();
        bad.m += 1;
        assert!(verify_witness(&bad, &MinMax).is_err());
        let mut bad = w;
        bad.lambda_conflict.1 += 1;
        assert!(verify_witness(&bad, &MinMax).is_err());
    }

    #[test]
    fn safe_minmax_witness() {
        let w = dll_attack(&SafeMinMax::new(Cutoff::half()), 2, 64).unwrap();
        verify_witness(&w, &SafeMinMax::new(Cutoff::half())).unwrap();
    }

    #[test]
    fn chained_run_flips() {
        let run = nonstabilization_run(&MinMax, &[1, 2, 3], 32, 3).unwrap();
        assert_eq!(run.stages.len(), 3);
        assert!(run.max_flips() >= 3);
        assert!(nonstabilization_run(&MinMax, &[1], 32, 0).is_ok());
        assert!(nonstabilization_run(&MinMax, &[1], 32, 1).is_ok());
    }

    #[test]
    fn empty_kernels_disagree() {
        let r = empty_kernel_demo(&MinMax, &two_cliques(2, 2).unwrap(), InputAssignment::of(&[0, 0, 1, 1]), 64).unwrap();
        assert!(r.broadcasters.is_empty() && r.broadcasters_certified && r.persistent);
        assert_eq!(r.disagreement_rounds.len(), 65);
        let r = empty_kernel_demo(&MinMax, &one_message_eta(), attack_inputs(), 64).unwrap();
        assert_eq!(r.disagreement_rounds.len(), 65);
        let r = empty_kernel_demo(&MinMax, &one_message_eta(), InputAssignment::of(&[1, 1]), 64).unwrap();
        assert!(r.disagreement_rounds.is_empty());
        assert_eq!(r.note, "no witness for valent inputs");
    }
}
