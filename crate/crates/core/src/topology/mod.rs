//! Distances between executions and what can be read off them: limits,
//! diameters, fair and unfair limit pairs, and the lossy-link prefix order.

mod distance;
mod limits;
mod prefix_order;

use alloc::string::String;
use core::fmt;

pub use distance::{
    d_nonuniform, d_uniform, default_pair_horizon, diameter, structurally_indistinguishable, view_distance,
    ExecutionSet, DEFAULT_HORIZON_CAP,
};
pub use limits::{detect_fair_unfair, verify_limit, FairUnfair, LimitEvidence, LimitFailure, SequenceFamily};
pub use prefix_order::{prefix_order_ll, prefix_order_with_witnesses};

use crate::error::{Error, Result};
use crate::model::ProcessId;

/// A distance `2^-t` between executions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistanceValue {
    /// Certified zero: the views never diverge.
    Zero,
    /// Exactly `2^-t`: first divergence at configuration `t`.
    Exact(u32),
    /// At most `2^-t`: no divergence before configuration `t`, and none
    /// could be ruled out beyond the horizon.
    AtMost(u32),
}

impl DistanceValue {
    /// 1, the distance of executions that differ from the start.
    pub const ONE: DistanceValue = DistanceValue::Exact(0);

    pub fn is_certified(self) -> bool {
        !matches!(self, DistanceValue::AtMost(_))
    }

    pub fn is_zero(self) -> bool {
        self == DistanceValue::Zero
    }

    /// Certified upper bound `2^-t` as `Some(t)`, `None` for zero.
    pub fn bound_exponent(self) -> Option<u32> {
        match self {
            DistanceValue::Zero => None,
            DistanceValue::Exact(t) | DistanceValue::AtMost(t) => Some(t),
        }
    }

    /// The smaller of two distances, as far as it is known.
    pub fn min(self, other: DistanceValue) -> DistanceValue {
        use DistanceValue::*;
        match (self, other) {
            (Zero, _) | (_, Zero) => Zero,
            (Exact(a), Exact(b)) => Exact(a.max(b)),
            (Exact(a), AtMost(b)) | (AtMost(b), Exact(a)) => AtMost(a.max(b)),
            (AtMost(a), AtMost(b)) => AtMost(a.max(b)),
        }
    }

    /// The larger of two distances, as far as it is known.
    pub fn max(self, other: DistanceValue) -> DistanceValue {
        use DistanceValue::*;
        match (self, other) {
            (Zero, x) | (x, Zero) => x,
            (Exact(a), Exact(b)) => Exact(a.min(b)),
            (Exact(a), AtMost(b)) | (AtMost(b), Exact(a)) => {
                if b >= a {
                    Exact(a)
                } else {
                    AtMost(b)
                }
            }
            (AtMost(a), AtMost(b)) => AtMost(a.min(b)),
        }
    }

    /// `Some(self <= other)` when both are certified.
    pub fn certified_le(self, other: DistanceValue) -> Option<bool> {
        use DistanceValue::*;
        match (self, other) {
            (Zero, Zero | Exact(_)) => Some(true),
            (Exact(_), Zero) => Some(false),
            (Exact(a), Exact(b)) => Some(a >= b),
            _ => None,
        }
    }
}

impl fmt::Display for DistanceValue {
    /// `0`, `2^-t` or `<=2^-t`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistanceValue::Zero => f.write_str("0"),
            DistanceValue::Exact(t) => write!(f, "2^-{t}"),
            DistanceValue::AtMost(t) => write!(f, "<=2^-{t}"),
        }
    }
}

impl core::str::FromStr for DistanceValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Precondition(alloc::format!("malformed distance {s:?}"));
        if s == "0" {
            return Ok(DistanceValue::Zero);
        }
        if let Some(t) = s.strip_prefix("<=2^-") {
            return t.parse().map(DistanceValue::AtMost).map_err(|_| bad());
        }
        s.strip_prefix("2^-")
            .and_then(|t| t.parse().ok())
            .map(DistanceValue::Exact)
            .ok_or_else(bad)
    }
}

/// Which distance to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    /// `d_p`, the `p`-view distance.
    Process(ProcessId),
    /// `d_u`, minimum over all processes.
    Uniform,
    /// `d_nu`, minimum over processes obedient in both executions.
    NonUniform,
}

impl Metric {
    /// Parses `p:<id>`, `uniform` or `nonuniform`.
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Metric::Uniform),
            "nonuniform" => Ok(Metric::NonUniform),
            _ => s
                .strip_prefix("p:")
                .and_then(|id| id.parse::<u8>().ok())
                .map(|id| Metric::Process(ProcessId(id)))
                .ok_or_else(|| Error::Precondition(alloc::format!("unknown metric {s:?}"))),
        }
    }

    pub fn id(self) -> String {
        match self {
            Metric::Process(p) => alloc::format!("p:{}", p.0),
            Metric::Uniform => "uniform".into(),
            Metric::NonUniform => "nonuniform".into(),
        }
    }
}
