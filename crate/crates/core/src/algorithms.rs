//! Decision functions over full-information views.
//!
//! Every algorithm is a pure map from a view to an output value, so the
//! simulator only ever stores views and asks the algorithm for outputs.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{Adversary, LassoPattern, ProcessId, Value};
use crate::view::{ViewId, ViewStore};

/// A decision function `Δ_p`. Implementations must only read the view.
pub trait DecisionFunction {
    /// Stable identifier, echoed in traces and witness documents.
    fn name(&self) -> String;

    fn decide(&self, store: &ViewStore, view: ViewId) -> Value;

    /// Whether the algorithm is meant to run under `pattern`. Drivers that
    /// build patterns of their own refuse to attack algorithms outside
    /// their domain.
    fn admits(&self, _pattern: &LassoPattern) -> bool {
        true
    }
}

impl<T: DecisionFunction + ?Sized> DecisionFunction for &T {
    fn name(&self) -> String {
        (**self).name()
    }
    fn decide(&self, store: &ViewStore, view: ViewId) -> Value {
        (**self).decide(store, view)
    }
    fn admits(&self, pattern: &LassoPattern) -> bool {
        (**self).admits(pattern)
    }
}

impl<T: DecisionFunction + ?Sized> DecisionFunction for Box<T> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn decide(&self, store: &ViewStore, view: ViewId) -> Value {
        (**self).decide(store, view)
    }
    fn admits(&self, pattern: &LassoPattern) -> bool {
        (**self).admits(pattern)
    }
}

/// MinMax: the maximum, over the round `t-1` views merged into the
/// current view, of the minimum input each of them has heard of.
#[derive(Debug, Clone, Copy, Default)]
pub struct MinMax;

impl DecisionFunction for MinMax {
    fn name(&self) -> String {
        "minmax".into()
    }

    fn decide(&self, store: &ViewStore, view: ViewId) -> Value {
        store
            .children(view)
            .iter()
            .map(|&c| store.min_input(c))
            .max()
            .unwrap_or_else(|| store.input(view))
    }
}

/// A cut-off function `θ` for safe MinMax.
#[derive(Clone)]
pub struct Cutoff {
    name: String,
    f: Arc<dyn Fn(u32) -> u32 + Send + Sync>,
}

impl core::fmt::Debug for Cutoff {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "Cutoff({})", self.name)
    }
}

impl Cutoff {
    /// Horizon up to which [`Cutoff::new`] checks the required shape.
    pub const CHECK_BOUND: u32 = 4096;

    /// `θ(t) = ⌊t/2⌋`.
    pub fn half() -> Self {
        Cutoff {
            name: "half".into(),
            f: Arc::new(|t| t / 2),
        }
    }

    /// Validates `θ(t) < t`, that both `θ(t)` and `t - θ(t)` are
    /// non-decreasing, and that both have grown past 8 by
    /// [`Cutoff::CHECK_BOUND`].
    pub fn new(name: &str, f: impl Fn(u32) -> u32 + Send + Sync + 'static) -> Result<Self> {
        let mut last = (0u32, 0u32);
        for t in 1..=Self::CHECK_BOUND {
            let theta = f(t);
            if theta >= t {
                return Err(Error::Cutoff(format!("θ({t}) = {theta} is not below {t}")));
            }
            let cur = (theta, t - theta);
            if cur.0 < last.0 || cur.1 < last.1 {
                return Err(Error::Cutoff(format!("θ or t-θ decreases at t = {t}")));
            }
            last = cur;
        }
        if last.0 < 8 || last.1 < 8 {
            return Err(Error::Cutoff(format!(
                "θ or t-θ stays below 8 up to t = {}",
                Self::CHECK_BOUND
            )));
        }
        Ok(Cutoff {
            name: name.to_string(),
            f: Arc::new(f),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn at(&self, t: u32) -> u32 {
        (self.f)(t)
    }
}

/// Safe MinMax: the maximum over processes heard of through views sent at
/// or after the cut-off of the minimum input they had heard of by the
/// cut-off round.
#[derive(Debug, Clone)]
pub struct SafeMinMax {
    cutoff: Cutoff,
}

impl SafeMinMax {
    pub fn new(cutoff: Cutoff) -> Self {
        SafeMinMax { cutoff }
    }

    pub fn cutoff(&self) -> &Cutoff {
        &self.cutoff
    }
}

impl Default for SafeMinMax {
    fn default() -> Self {
        SafeMinMax::new(Cutoff::half())
    }
}

impl DecisionFunction for SafeMinMax {
    fn name(&self) -> String {
        format!("safe-minmax(theta={})", self.cutoff.name)
    }

    fn decide(&self, store: &ViewStore, view: ViewId) -> Value {
        let t = store.clock(view);
        if t == 0 {
            return store.input(view);
        }
        let theta = self.cutoff.at(t);
        // A round-s message carries the sender's view at clock s-1, so
        // "sent in or after round θ+1" means a contained view with clock >= θ.
        (0..store.n())
            .filter_map(|x| store.latest(view, ProcessId(x as u8)))
            .filter(|&v| store.clock(v) >= theta)
            .filter_map(|v| store.ancestor_at(v, theta))
            .map(|v| store.min_input(v))
            .max()
            .unwrap_or_else(|| store.input(view))
    }
}

/// `O_p := min(O_p, received)`.
pub fn min_flood_step(current: Value, received: impl IntoIterator<Item = Value>) -> Value {
    received.into_iter().fold(current, Value::min)
}

/// Asynchronous min-flooding. Each received message carries the sender's
/// current output, itself the minimum over what the sender heard of, so
/// the flooded output is the minimum input over the heard-of set.
#[derive(Debug, Clone, Copy, Default)]
pub struct MinFlood;

impl DecisionFunction for MinFlood {
    fn name(&self) -> String {
        "min-flood".into()
    }

    fn decide(&self, store: &ViewStore, view: ViewId) -> Value {
        store.min_input(view)
    }
}

/// Keeps its own input until it receives a message, then adopts the
/// sender's output for good. Intended for the one-message model.
#[derive(Debug, Clone, Copy, Default)]
pub struct OneMessageKeeper;

impl DecisionFunction for OneMessageKeeper {
    fn name(&self) -> String {
        "one-message-keeper".into()
    }

    fn decide(&self, store: &ViewStore, view: ViewId) -> Value {
        let mut cur = view;
        loop {
            let latest_foreign = store.foreign_children(cur).max_by_key(|&c| (store.clock(c), store.digest(c)));
            match (latest_foreign, store.own_prev(cur)) {
                (Some(f), _) => cur = f,
                (None, Some(prev)) => cur = prev,
                (None, None) => return store.input(cur),
            }
        }
    }

    fn admits(&self, pattern: &LassoPattern) -> bool {
        Adversary::OneMessage.admits(pattern)
    }
}

/// Always outputs the same value; violates validity by design.
#[derive(Debug, Clone, Copy)]
pub struct Constant(pub Value);

impl DecisionFunction for Constant {
    fn name(&self) -> String {
        format!("constant({})", self.0)
    }

    fn decide(&self, _store: &ViewStore, _view: ViewId) -> Value {
        self.0
    }
}

/// A user-supplied decision callback.
pub struct FnDecision<F> {
    name: String,
    f: F,
}

impl<F: Fn(&ViewStore, ViewId) -> Value> FnDecision<F> {
    pub fn new(name: &str, f: F) -> Self {
        FnDecision {
            name: name.to_string(),
            f,
        }
    }
}

impl<F: Fn(&ViewStore, ViewId) -> Value> DecisionFunction for FnDecision<F> {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn decide(&self, store: &ViewStore, view: ViewId) -> Value {
        (self.f)(store, view)
    }
}

/// Resolves a built-in algorithm id: `minmax`, `safe-minmax(theta=half)`
/// (or `safe-minmax`), `min-flood`, `one-message-keeper`, `constant(<rank>)`.
pub fn from_id(id: &str) -> Result<Box<dyn DecisionFunction>> {
    let alg: Box<dyn DecisionFunction> = match id {
        "minmax" => Box::new(MinMax),
        "safe-minmax" | "safe-minmax(theta=half)" => Box::new(SafeMinMax::default()),
        "min-flood" => Box::new(MinFlood),
        "one-message-keeper" => Box::new(OneMessageKeeper),
        other => {
            let rank = other
                .strip_prefix("constant(")
                .and_then(|s| s.strip_suffix(')'))
                .and_then(|s| s.parse::<u32>().ok())
                .ok_or_else(|| Error::UnknownAlgorithm(other.to_string()))?;
            Box::new(Constant(Value(rank)))
        }
    };
    Ok(alg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_flood_step_examples() {
        assert_eq!(min_flood_step(Value(3), [Value(1), Value(2)]), Value(1));
        assert_eq!(min_flood_step(Value(0), []), Value(0));
    }

    #[test]
    fn half_cutoff_is_valid() {
        let half = Cutoff::new("half", |t| t / 2).unwrap();
        assert_eq!(half.at(9), 4);
        assert!(Cutoff::new("identity", |t| t).is_err());
        assert!(Cutoff::new("zero", |_| 0).is_err());
        assert!(Cutoff::new("lag1", |t| t - 1).is_err());
        assert!(Cutoff::new("sqrt", |t| (1..=t).take_while(|k| k * k <= t).last().unwrap_or(0).min(t - 1)).is_ok());
    }

    #[test]
    fn ids_resolve() {
        for id in ["minmax", "safe-minmax(theta=half)", "min-flood", "one-message-keeper", "constant(0)"] {
            assert_eq!(from_id(id).unwrap().name(), id);
        }
        assert!(matches!(from_id("maxmin"), Err(Error::UnknownAlgorithm(_))));
    }

    #[test]
    fn minmax_round_zero_is_own_input() {
        let mut s = ViewStore::new(2);
        let v = s.initial(ProcessId(1), Value(1));
        assert_eq!(MinMax.decide(&s, v), Value(1));
        assert_eq!(SafeMinMax::default().decide(&s, v), Value(1));
    }
}
