//! Iterated logarithms and the slowly varying gap-threshold families.
//!
//! A threshold assigns to each element `t` a scale `y(t) = lambda(t) * ln t`;
//! a successor gap "qualifies" when it is at most `y(t)`. The families:
//!
//! * `fixed(lambda0)`: constant lambda.
//! * `divergent(k)`: `lambda(t) = 1 / (log_2 t * log_3 t * ... * log_k t)`,
//!   written `1/Logprod_k(t)` below; reciprocal sums over qualifying primes
//!   grow like `log_{k+1} x`.
//! * `convergent(k, eps)`: `1 / (Logprod_k(t) * (log_k t)^eps)`, a slightly
//!   smaller threshold whose reciprocal sum converges.
//! * `adaptive(k0)`: starts as `divergent(k0)` and moves to `k+1` whenever
//!   the accumulated reciprocal sum crosses 1 and the deeper family is
//!   defined at the current element.
//!
//! `log_j` means the j-fold iterated natural log throughout.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::kahan::KahanSum;

/// `log_k t`: the natural log applied `k >= 1` times. Every intermediate
/// application must receive a positive argument; the final value may be any
/// real.
pub fn iter_log(k: u32, t: f64) -> Result<f64> {
    if k < 1 {
        return Err(Error::InvalidParameter("iter_log needs k >= 1".into()));
    }
    let mut v = t;
    for j in 0..k {
        if !(v > 0.0) {
            return Err(Error::Domain(format!(
                "iter_log({k}, {t}): argument of log number {} is {v}, not positive",
                j + 1
            )));
        }
        v = v.ln();
    }
    Ok(v)
}

/// `Logprod_k(t) = log_2 t * log_3 t * ... * log_k t`, for `k >= 2`.
/// Requires `iter_log(k, t) > 0` so every factor is positive.
pub fn logorial(k: u32, t: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::InvalidParameter("logorial needs k >= 2".into()));
    }
    let (prod, _) = log_chain(k, t)?;
    Ok(prod)
}

/// Computes `(Logprod_k(t), log_k t)` in one pass over the log chain.
fn log_chain(k: u32, t: f64) -> Result<(f64, f64)> {
    let mut v = t;
    let mut prod = 1.0;
    for j in 1..=k {
        if !(v > 0.0) {
            return Err(Error::Domain(format!(
                "log_{j} of {t} is not defined (argument {v} <= 0)"
            )));
        }
        v = v.ln();
        if j >= 2 {
            prod *= v;
        }
    }
    if !(v > 0.0) {
        return Err(Error::Domain(format!(
            "log_{k} of {t} must be positive, got {v}"
        )));
    }
    Ok((prod, v))
}

/// Least integer `t` with `iter_log(k, t) > 0`; the threshold value is the
/// k-fold exponential of 0. Overflows the integer range for `k >= 5`.
pub fn domain_floor(k: u32) -> Result<u64> {
    if k < 2 {
        return Err(Error::InvalidParameter("domain_floor needs k >= 2".into()));
    }
    let mut t = 0.0f64;
    for _ in 0..k {
        t = t.exp();
        if !t.is_finite() || t >= u64::MAX as f64 {
            return Err(Error::Overflow(format!(
                "domain floor for k = {k} exceeds the integer range"
            )));
        }
    }
    let mut floor = t.floor() as u64 + 1;
    // settle boundary rounding by direct evaluation
    while floor > 3 && iter_log(k, (floor - 1) as f64).is_ok_and(|v| v > 0.0) {
        floor -= 1;
    }
    while !iter_log(k, floor as f64).is_ok_and(|v| v > 0.0) {
        floor += 1;
    }
    Ok(floor)
}

/// One of the four threshold families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdFamily {
    Fixed { lambda0: f64 },
    Divergent { k: u32 },
    Convergent { k: u32, eps: f64 },
    Adaptive { k0: u32 },
}

/// A validated family together with its domain floor, the smallest integer
/// argument where it evaluates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSpec {
    family: ThresholdFamily,
    floor: u64,
}

impl ThresholdSpec {
    pub fn new(family: ThresholdFamily) -> Result<Self> {
        let floor = match family {
            ThresholdFamily::Fixed { lambda0 } => {
                if !(lambda0 > 0.0) || !lambda0.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "fixed family needs lambda0 > 0, got {lambda0}"
                    )));
                }
                2
            }
            ThresholdFamily::Divergent { k } => domain_floor(k)?,
            ThresholdFamily::Convergent { k, eps } => {
                if !(eps > 0.0) || !eps.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "convergent family needs eps > 0, got {eps}"
                    )));
                }
                domain_floor(k)?
            }
            ThresholdFamily::Adaptive { k0 } => domain_floor(k0)?,
        };
        Ok(Self { family, floor })
    }

    pub fn family(&self) -> ThresholdFamily {
        self.family
    }

    /// Smallest integer argument where the family evaluates; statistics
    /// sweeps skip elements below it, point evaluation errors.
    pub fn domain_floor(&self) -> u64 {
        self.floor
    }

    /// `lambda(t)` for the non-adaptive families; the adaptive family needs
    /// stream state, see [`AdaptiveState::lambda`].
    pub fn lambda(&self, t: f64) -> Result<f64> {
        if !(t >= self.floor as f64) {
            return Err(Error::Domain(format!(
                "threshold evaluated at {t}, below its domain floor {}",
                self.floor
            )));
        }
        match self.family {
            ThresholdFamily::Fixed { lambda0 } => Ok(lambda0),
            ThresholdFamily::Divergent { k } => Ok(1.0 / log_chain(k, t)?.0),
            ThresholdFamily::Convergent { k, eps } => {
                let (prod, last) = log_chain(k, t)?;
                Ok(1.0 / (prod * last.powf(eps)))
            }
            ThresholdFamily::Adaptive { .. } => Err(Error::Domain(
                "adaptive lambda needs stream state; evaluate through AdaptiveState".into(),
            )),
        }
    }

    /// `y(t) = lambda(t) * ln t`, the gap scale at `t`.
    pub fn y(&self, t: f64) -> Result<f64> {
        Ok(self.lambda(t)? * t.ln())
    }

    /// Whether lambda shrinks no faster than `1/(log_2 t)^2`, the regime in
    /// which the exponential gap law is expected to apply without
    /// correction. Recorded as metadata only; nothing enforces it.
    pub fn within_slow_shrink_regime(&self) -> bool {
        matches!(self.family, ThresholdFamily::Fixed { .. })
    }
}

impl fmt::Display for ThresholdSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            ThresholdFamily::Fixed { lambda0 } => write!(f, "fixed:{lambda0}"),
            ThresholdFamily::Divergent { k } => write!(f, "logk:{k}"),
            ThresholdFamily::Convergent { k, eps } => write!(f, "logk-eps:{k},{eps}"),
            ThresholdFamily::Adaptive { k0 } => write!(f, "adaptive:{k0}"),
        }
    }
}

impl FromStr for ThresholdSpec {
    type Err = Error;

    /// Grammar: `fixed:<lambda0>`, `logk:<k>`, `logk-eps:<k>,<eps>`,
    /// `adaptive:<k0>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| Error::InvalidParameter(msg);
        let (name, rest) = s
            .split_once(':')
            .ok_or_else(|| bad(format!("threshold grammar needs name:params, got {s:?}")))?;
        let family = match name {
            "fixed" => ThresholdFamily::Fixed {
                lambda0: rest
                    .parse()
                    .map_err(|e| bad(format!("fixed lambda0 {rest:?}: {e}")))?,
            },
            "logk" => ThresholdFamily::Divergent {
                k: rest.parse().map_err(|e| bad(format!("logk k {rest:?}: {e}")))?,
            },
            "logk-eps" => {
                let (k, eps) = rest
                    .split_once(',')
                    .ok_or_else(|| bad(format!("logk-eps needs k,eps, got {rest:?}")))?;
                ThresholdFamily::Convergent {
                    k: k.parse().map_err(|e| bad(format!("logk-eps k {k:?}: {e}")))?,
                    eps: eps
                        .parse()
                        .map_err(|e| bad(format!("logk-eps eps {eps:?}: {e}")))?,
                }
            }
            "adaptive" => ThresholdFamily::Adaptive {
                k0: rest
                    .parse()
                    .map_err(|e| bad(format!("adaptive k0 {rest:?}: {e}")))?,
            },
            other => return Err(bad(format!("unknown threshold family {other:?}"))),
        };
        ThresholdSpec::new(family)
    }
}

/// A recorded depth switch of the adaptive family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchPoint {
    /// Element whose processing triggered the switch.
    pub at: u64,
    /// Depth in force for all later elements.
    pub new_k: u32,
    /// Running reciprocal sum at the moment of the switch.
    pub running_sum: f64,
}

/// Stream state of the adaptive family: current depth, the running
/// reciprocal sum of qualifying elements, and the switches taken.
///
/// Inherently sequential; sweeps using it refuse to run concurrently.
#[derive(Debug, Clone)]
pub struct AdaptiveState {
    current_k: u32,
    running: KahanSum,
    qualifying: u64,
    switch_points: Vec<SwitchPoint>,
}

impl AdaptiveState {
    pub fn new(k0: u32) -> Result<Self> {
        domain_floor(k0)?;
        Ok(Self {
            current_k: k0,
            running: KahanSum::new(),
            qualifying: 0,
            switch_points: Vec::new(),
        })
    }

    pub fn current_k(&self) -> u32 {
        self.current_k
    }

    pub fn running_sum(&self) -> f64 {
        self.running.value()
    }

    /// Number of elements whose gap qualified so far.
    pub fn qualifying_count(&self) -> u64 {
        self.qualifying
    }

    pub fn switch_points(&self) -> &[SwitchPoint] {
        &self.switch_points
    }

    /// `lambda(t) = 1/Logprod_k(t)` at the current depth.
    pub fn lambda(&self, t: f64) -> Result<f64> {
        Ok(1.0 / log_chain(self.current_k, t)?.0)
    }

    /// `y(t) = lambda(t) * ln t` at the current depth.
    pub fn y(&self, t: f64) -> Result<f64> {
        Ok(self.lambda(t)? * t.ln())
    }

    /// Advances the state after processing element `t` (ascending calls).
    ///
    /// Adds `1/t` when the element's gap qualified, then switches depth to
    /// `current_k + 1` if the running sum exceeds 1 and the deeper family is
    /// defined at `t`, i.e. `t >= domain_floor(current_k + 2)`. The depth
    /// increases by at most 1 per element; the switch applies to later
    /// elements only.
    pub fn observe(&mut self, t: u64, qualifies: bool) {
        if qualifies {
            self.running.add(1.0 / t as f64);
            self.qualifying += 1;
        }
        if self.running.value() > 1.0 {
            if let Ok(floor) = domain_floor(self.current_k + 2) {
                if t >= floor {
                    self.current_k += 1;
                    self.switch_points.push(SwitchPoint {
                        at: t,
                        new_k: self.current_k,
                        running_sum: self.running.value(),
                    });
                }
            }
        }
    }
}
