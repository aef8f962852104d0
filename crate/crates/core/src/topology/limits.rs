use alloc::vec::Vec;

use super::{default_pair_horizon, ExecutionSet, Metric, DEFAULT_HORIZON_CAP};
use crate::error::{Error, Result};
use crate::model::Value;
use crate::simulator::ExecutionSpec;

/// A finite stretch `seq(1), .., seq(I_max)` of a sequence of executions
/// together with its claimed limit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceFamily {
    /// `members[i - 1]` is `seq(i)`.
    pub members: Vec<ExecutionSpec>,
    pub limit: ExecutionSpec,
}

impl SequenceFamily {
    /// `seq(1..=i_max)` from a generator.
    pub fn generate(i_max: usize, limit: ExecutionSpec, mut seq: impl FnMut(usize) -> ExecutionSpec) -> Self {
        SequenceFamily {
            members: (1..=i_max).map(&mut seq).collect(),
            limit,
        }
    }

    pub fn i_max(&self) -> usize {
        self.members.len()
    }
}

/// Passing evidence: the certified distance of `seq(i)` to the limit is at
/// most `2^-f(i)`; `None` stands for distance zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitEvidence {
    pub exponents: Vec<Option<u32>>,
}

/// Why a sequence failed to evidence convergence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitFailure {
    /// 1-based index of the first member breaking the pattern.
    pub index: usize,
    pub exponents: Vec<Option<u32>>,
}

/// Checks that `f(i)` is non-decreasing and `f(I_max) >= f(1) + I_max - 1`,
/// where `2^-f(i)` bounds the distance of `seq(i)` to the limit. Each
/// pair uses its default horizon.
pub fn verify_limit(seq: &SequenceFamily, metric: Metric) -> Result<core::result::Result<LimitEvidence, LimitFailure>> {
    let i_max = seq.i_max();
    if i_max < 3 {
        return Err(Error::Precondition(alloc::format!("a limit needs I_max >= 3, got {i_max}")));
    }
    let exponents = seq
        .members
        .iter()
        .map(|m| {
            let mut set = ExecutionSet::new(seq.limit.n());
            let h = default_pair_horizon(m, &seq.limit, DEFAULT_HORIZON_CAP)?;
            set.add(m.clone(), h)?;
            set.add(seq.limit.clone(), h)?;
            Ok(set.distance(0, 1, metric).bound_exponent())
        })
        .collect::<Result<Vec<_>>>()?;
    // `None` is +∞.
    let key = |e: Option<u32>| e.map_or(u64::MAX, u64::from);
    if let Some(i) = (1..i_max).find(|&i| key(exponents[i]) < key(exponents[i - 1])) {
        return Ok(Err(LimitFailure { index: i + 1, exponents }));
    }
    let first = key(exponents[0]);
    if key(exponents[i_max - 1]) < first.saturating_add(i_max as u64 - 1) {
        return Ok(Err(LimitFailure { index: i_max, exponents }));
    }
    Ok(Ok(LimitEvidence { exponents }))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FairUnfair {
    /// Both sequences converge to the same execution.
    Fair(ExecutionSpec),
    /// Distinct limits at distance zero.
    Unfair(ExecutionSpec, ExecutionSpec),
    None,
}

/// Classifies the limits of two convergent sequences with different
/// labels.
pub fn detect_fair_unfair(
    seq_a: &SequenceFamily,
    label_a: Value,
    seq_b: &SequenceFamily,
    label_b: Value,
    metric: Metric,
) -> Result<FairUnfair> {
    if label_a == label_b {
        return Err(Error::Precondition("the two sequences must carry different labels".into()));
    }
    for (name, seq) in [("first", seq_a), ("second", seq_b)] {
        if let Err(fail) = verify_limit(seq, metric)? {
            return Err(Error::Precondition(alloc::format!(
                "the {name} sequence does not converge (index {})",
                fail.index
            )));
        }
    }
    let (a, b) = (&seq_a.limit, &seq_b.limit);
    if a.same_execution(b) {
        return Ok(FairUnfair::Fair(a.clone()));
    }
    let mut set = ExecutionSet::new(a.n());
    let h = default_pair_horizon(a, b, DEFAULT_HORIZON_CAP)?;
    set.add(a.clone(), h)?;
    set.add(b.clone(), h)?;
    Ok(if set.distance(0, 1, metric).is_zero() {
        FairUnfair::Unfair(a.clone(), b.clone())
    } else {
        FairUnfair::None
    })
}
