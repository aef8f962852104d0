use alloc::vec::Vec;

use super::{DistanceValue, Metric};
use crate::error::{Error, Result};
use crate::model::{lcm, InputAssignment, LassoPattern, ProcSet, ProcessId};
use crate::simulator::{simulate_views, ExecutionSpec, ExecutionViews, Timing, CERTIFICATION_FACTOR};
use crate::view::ViewStore;

/// Upper limit for default horizons.
pub const DEFAULT_HORIZON_CAP: usize = 512;

/// `|prefixA| + |prefixB| + 4·n·lcm(|loopA|, |loopB|)` capped at `cap` for
/// two synchronous executions; the shorter schedule for asynchronous ones.
pub fn default_pair_horizon(a: &ExecutionSpec, b: &ExecutionSpec, cap: usize) -> Result<usize> {
    match (&a.timing, &b.timing) {
        (Timing::Sync(pa), Timing::Sync(pb)) => Ok((pa.prefix_len()
            + pb.prefix_len()
            + CERTIFICATION_FACTOR * a.n() * lcm(pa.loop_len(), pb.loop_len()))
        .min(cap)),
        (Timing::Async(sa), Timing::Async(sb)) => Ok(sa.events.len().min(sb.events.len())),
        _ => Err(Error::IncomparableExecutions),
    }
}

/// Whether `p` can never tell the two synchronous executions apart.
///
/// `p`'s view at any time is the unfolding of its causal past, so the
/// views agree forever iff, for every configuration `t`, the same
/// processes' round-`t` views lie in `p`'s eventual causal past, those
/// processes have the same in-neighbours in round `t`, and the processes
/// in the past of configuration 0 have the same inputs. Past the longer
/// prefix the causal past is periodic in `lcm` of the loops, and every
/// journey into `p` completes within `n - 1` loop periods, so one period
/// of configurations after the prefixes decides everything.
pub fn structurally_indistinguishable(
    a: &LassoPattern,
    ia: &InputAssignment,
    b: &LassoPattern,
    ib: &InputAssignment,
    p: ProcessId,
) -> bool {
    let n = a.n();
    if b.n() != n || ia.len() != n || ib.len() != n {
        return false;
    }
    let period = lcm(a.loop_len(), b.loop_len());
    let settled = a.prefix_len().max(b.prefix_len()) + period;
    let top = settled + (n + 1) * period;
    let back = |pat: &LassoPattern| -> Vec<ProcSet> {
        let mut sets = alloc::vec![ProcSet::EMPTY; top + 1];
        sets[top] = ProcSet::singleton(p);
        for t in (0..top).rev() {
            sets[t] = pat.graph_at(t + 1).step_back(sets[t + 1]);
        }
        sets.truncate(settled + 1);
        sets
    };
    let (back_a, back_b) = (back(a), back(b));
    if back_a != back_b {
        return false;
    }
    let columns_agree = (1..=settled)
        .all(|t| back_a[t].iter().all(|q| a.graph_at(t).incoming(q) == b.graph_at(t).incoming(q)));
    columns_agree && back_a[0].iter().all(|q| ia.get(q) == ib.get(q))
}

/// Executions simulated into one shared view store, so that equal views
/// are equal ids.
#[derive(Debug, Clone)]
pub struct ExecutionSet {
    store: ViewStore,
    members: Vec<(ExecutionSpec, ExecutionViews)>,
}

impl ExecutionSet {
    pub fn new(n: usize) -> Self {
        ExecutionSet {
            store: ViewStore::new(n),
            members: Vec::new(),
        }
    }

    /// Simulates `spec` for `horizon` configurations; returns its index.
    pub fn add(&mut self, spec: ExecutionSpec, horizon: usize) -> Result<usize> {
        if let Some((first, _)) = self.members.first() {
            if core::mem::discriminant(&first.timing) != core::mem::discriminant(&spec.timing) {
                return Err(Error::IncomparableExecutions);
            }
        }
        let views = simulate_views(&mut self.store, &spec, horizon)?;
        self.members.push((spec, views));
        Ok(self.members.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn n(&self) -> usize {
        self.store.n()
    }

    pub fn store(&self) -> &ViewStore {
        &self.store
    }

    pub fn spec(&self, i: usize) -> &ExecutionSpec {
        &self.members[i].0
    }

    pub fn views(&self, i: usize) -> &ExecutionViews {
        &self.members[i].1
    }

    /// `d_p`: `2^-t` for the first configuration `t` in which `p`'s views
    /// differ or `p` is disobedient in either execution.
    pub fn view_distance(&self, i: usize, j: usize, p: ProcessId) -> DistanceValue {
        let (sa, va) = &self.members[i];
        let (sb, vb) = &self.members[j];
        let h = va.horizon().min(vb.horizon());
        for t in 0..=h {
            let obedient = va.obedient[t].contains(p) && vb.obedient[t].contains(p);
            if !obedient || va.views[t][p.index()] != vb.views[t][p.index()] {
                return DistanceValue::Exact(t as u32);
            }
        }
        let zero = match (&sa.timing, &sb.timing) {
            (Timing::Sync(a), Timing::Sync(b)) => structurally_indistinguishable(a, &sa.inputs, b, &sb.inputs, p),
            _ => sa == sb,
        };
        if zero {
            DistanceValue::Zero
        } else {
            DistanceValue::AtMost(h as u32 + 1)
        }
    }

    /// `d_u`: minimum of `d_p` over all processes.
    pub fn uniform(&self, i: usize, j: usize) -> DistanceValue {
        (0..self.n())
            .map(|p| self.view_distance(i, j, ProcessId(p as u8)))
            .fold(DistanceValue::ONE, DistanceValue::min)
    }

    /// `d_nu`: minimum of `d_p` over processes obedient in both
    /// executions, 1 if there are none.
    pub fn nonuniform(&self, i: usize, j: usize) -> DistanceValue {
        let common = self.members[i].1.final_obedient().intersection(self.members[j].1.final_obedient());
        common
            .iter()
            .map(|p| self.view_distance(i, j, p))
            .fold(DistanceValue::ONE, DistanceValue::min)
    }

    pub fn distance(&self, i: usize, j: usize, metric: Metric) -> DistanceValue {
        match metric {
            Metric::Process(p) => self.view_distance(i, j, p),
            Metric::Uniform => self.uniform(i, j),
            Metric::NonUniform => self.nonuniform(i, j),
        }
    }

    /// Largest pairwise distance among the members.
    pub fn diameter(&self, metric: Metric) -> DistanceValue {
        let mut d = DistanceValue::Zero;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                d = d.max(self.distance(i, j, metric));
            }
        }
        d
    }
}

fn pair(a: &ExecutionSpec, b: &ExecutionSpec, horizon: Option<usize>) -> Result<ExecutionSet> {
    if a.n() != b.n() {
        return Err(Error::IncomparableExecutions);
    }
    let h = match horizon {
        Some(h) => h,
        None => default_pair_horizon(a, b, DEFAULT_HORIZON_CAP)?,
    };
    let mut set = ExecutionSet::new(a.n());
    set.add(a.clone(), h)?;
    set.add(b.clone(), h)?;
    Ok(set)
}

/// `d_p(a, b)` with the default horizon unless one is given.
pub fn view_distance(a: &ExecutionSpec, b: &ExecutionSpec, p: ProcessId, horizon: Option<usize>) -> Result<DistanceValue> {
    if p.index() >= a.n() {
        return Err(Error::ProcessOutOfRange(p));
    }
    Ok(pair(a, b, horizon)?.view_distance(0, 1, p))
}

/// `d_u(a, b)`.
pub fn d_uniform(a: &ExecutionSpec, b: &ExecutionSpec, horizon: Option<usize>) -> Result<DistanceValue> {
    Ok(pair(a, b, horizon)?.uniform(0, 1))
}

/// `d_nu(a, b)`.
pub fn d_nonuniform(a: &ExecutionSpec, b: &ExecutionSpec, horizon: Option<usize>) -> Result<DistanceValue> {
    Ok(pair(a, b, horizon)?.nonuniform(0, 1))
}

/// Largest pairwise distance in a finite family; zero for one member.
/// Without an explicit horizon, the largest default pair horizon is used.
pub fn diameter(family: &[ExecutionSpec], metric: Metric, horizon: Option<usize>) -> Result<DistanceValue> {
    let Some(first) = family.first() else {
        return Ok(DistanceValue::Zero);
    };
    let mut h = horizon.unwrap_or(0);
    if horizon.is_none() {
        for a in family {
            for b in family {
                h = h.max(default_pair_horizon(a, b, DEFAULT_HORIZON_CAP)?);
            }
        }
    }
    let mut set = ExecutionSet::new(first.n());
    for spec in family {
        if spec.n() != first.n() {
            return Err(Error::IncomparableExecutions);
        }
        set.add(spec.clone(), h)?;
    }
    Ok(set.diameter(metric))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{one_message_alpha, one_message_beta, one_message_eta};

    const L: ProcessId = ProcessId::LEFT;
    const R: ProcessId = ProcessId::RIGHT;

    fn spec(pat: LassoPattern, i: &[u32]) -> ExecutionSpec {
        ExecutionSpec::sync(pat, InputAssignment::of(i)).unwrap()
    }

    #[test]
    fn one_message_distances() {
        let eta = spec(one_message_eta(), &[0, 1]);
        let a3 = spec(one_message_alpha(3), &[0, 1]);
        assert_eq!(view_distance(&a3, &eta, R, None).unwrap(), DistanceValue::Exact(4));
        assert_eq!(view_distance(&a3, &eta, L, None).unwrap(), DistanceValue::Zero);
        assert_eq!(d_uniform(&a3, &eta, None).unwrap(), DistanceValue::Zero);
        let b5 = spec(one_message_beta(5), &[0, 1]);
        assert_eq!(d_nonuniform(&a3, &b5, None).unwrap(), DistanceValue::Exact(6));
    }

    #[test]
    fn self_distance_and_input_sensitivity() {
        let g = spec(LassoPattern::parse("<=:>").unwrap(), &[0, 1]);
        assert_eq!(view_distance(&g, &g, R, None).unwrap(), DistanceValue::Zero);
        let h = g.remap_inputs(InputAssignment::of(&[1, 1])).unwrap();
        assert_eq!(view_distance(&g, &h, L, None).unwrap(), DistanceValue::ONE);
        assert_eq!(view_distance(&g, &h, R, None).unwrap(), DistanceValue::Exact(2));
        let v0 = spec(LassoPattern::parse("=").unwrap(), &[0, 0]);
        let v1 = spec(LassoPattern::parse("=").unwrap(), &[1, 1]);
        assert_eq!(d_uniform(&v0, &v1, None).unwrap(), DistanceValue::ONE);
        assert_eq!(diameter(&[v0.clone(), v1], Metric::NonUniform, None).unwrap(), DistanceValue::ONE);
        assert_eq!(diameter(&[v0], Metric::NonUniform, None).unwrap(), DistanceValue::Zero);
    }

    #[test]
    fn delayed_prefix_is_left_indistinguishable() {
        // l never hears from r after the first round in either execution.
        let lam = LassoPattern::parse("<---:>").unwrap();
        let base = LassoPattern::parse("<:>").unwrap();
        let i = InputAssignment::of(&[0, 1]);
        assert!(structurally_indistinguishable(&lam, &i, &base, &i, L));
        assert!(!structurally_indistinguishable(&lam, &i, &base, &i, R));
    }

    #[test]
    fn undecided_pairs_stay_upper_bounds() {
        let a = spec(LassoPattern::parse("<<<<<<:=").unwrap(), &[0, 1]);
        let b = spec(LassoPattern::parse("<").unwrap(), &[0, 1]);
        assert_eq!(view_distance(&a, &b, R, Some(5)).unwrap(), DistanceValue::AtMost(6));
        assert_eq!(view_distance(&a, &b, R, None).unwrap(), DistanceValue::Exact(7));
    }
}
