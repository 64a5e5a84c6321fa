//! Phase boundaries of a broadcast and the predictions they are compared to.
//!
//! A run splits into a doubling phase (until `εn` vertices are informed), a
//! short middle phase (until `(1 - ε)n`), and a tail in which the number of
//! uninformed vertices shrinks by roughly a factor `e` per round.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::push::Trace;

/// Density parameter `α` and the accuracy `ε` derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseParams {
    pub alpha: f64,
    pub epsilon: f64,
}

impl PhaseParams {
    /// `ε = α^{-1/2}`; requires `α ≥ 1` so that `ε ∈ (0, 1]`.
    pub fn from_alpha(alpha: f64) -> Result<Self> {
        if !(alpha >= 1.0) || !alpha.is_finite() {
            return Err(invalid(format!("alpha must be a finite value >= 1, got {alpha}")));
        }
        Ok(Self {
            alpha,
            epsilon: alpha.powf(-0.5),
        })
    }

    /// An explicit `ε` together with the `α` it is reported against.
    pub fn new(alpha: f64, epsilon: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(invalid(format!("alpha must be positive, got {alpha}")));
        }
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(invalid(format!("epsilon must lie in (0, 1], got {epsilon}")));
        }
        Ok(Self { alpha, epsilon })
    }

    /// Parameters for an edge probability `p` on `n` vertices, with
    /// `α = pn / ln n` and `ε = min(1, α^{-1/2})`.
    pub fn effective(n: usize, p: f64) -> Result<Self> {
        if n < 2 {
            return Err(invalid("effective density needs n >= 2"));
        }
        let alpha = p * n as f64 / (n as f64).ln();
        if !(alpha > 0.0) {
            return Err(invalid(format!("effective alpha must be positive, got {alpha}")));
        }
        Ok(Self {
            alpha,
            epsilon: alpha.powf(-0.5).min(1.0),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub struct PhaseReport {
    #[serde(rename = "T1")]
    pub t1: u32,
    #[serde(rename = "T2")]
    pub t2: u32,
    #[serde(rename = "Tprime")]
    pub t_prime: u32,
    #[serde(rename = "T")]
    pub t: u32,
    pub predicted_t: f64,
    pub predicted_t1: f64,
    pub predicted_tail: f64,
    pub uninformed_at_t2: u64,
}

impl PhaseReport {
    pub fn middle_duration(&self) -> u32 {
        self.t2 - self.t1
    }

    pub fn tail_duration(&self) -> u32 {
        self.t - self.t2
    }
}

/// `log₂ n + ln n`.
pub fn predicted_broadcast_time(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(invalid(format!("prediction needs n >= 2, got {n}")));
    }
    let n = n as f64;
    Ok(n.log2() + n.ln())
}

/// The three per-phase deviation bounds used to annotate reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseBounds {
    /// `9√ε · log₂ n`, on `|T1 - log₂ n|`.
    pub doubling: f64,
    /// `9ε⁻¹ ln ε⁻¹`, on `T2 - T1`.
    pub middle: f64,
    /// `ε^{1/3} · ln n`, on `|(T - T2) - ln n|`.
    pub tail: f64,
}

pub fn phase_bounds(n: usize, params: PhaseParams) -> PhaseBounds {
    let n = n as f64;
    let eps = params.epsilon;
    PhaseBounds {
        doubling: 9.0 * eps.sqrt() * n.log2(),
        middle: 9.0 / eps * (1.0 / eps).ln(),
        tail: eps.cbrt() * n.ln(),
    }
}

/// Phase boundaries from the informed counts `I_0, .., I_T` of a complete
/// run on `n` vertices.
pub fn detect_from_counts(counts: &[u64], n: usize, epsilon: f64) -> Result<PhaseReport> {
    let last = counts.len().checked_sub(1).ok_or_else(|| invalid("empty count sequence"))?;
    if counts[last] != n as u64 {
        return Err(Error::NotBroadcastable {
            n,
            reachable: counts[last] as usize,
        });
    }
    let nf = n as f64;
    let first = |pred: &dyn Fn(usize, u64) -> bool| {
        counts
            .iter()
            .enumerate()
            .find(|&(t, &c)| pred(t, c))
            .map(|(t, _)| t as u32)
            .expect("the final count satisfies every threshold")
    };
    let t1 = first(&|_, c| c as f64 >= epsilon * nf);
    // For ε > 1/2 the second threshold sits below the first; the middle
    // phase then starts and ends at T1.
    let t2 = first(&|t, c| t as u32 >= t1 && c as f64 >= (1.0 - epsilon) * nf);
    let tail_threshold = nf.ln().sqrt();
    let t_prime = first(&|t, c| t as u32 >= t2 && ((n as u64 - c) as f64) <= tail_threshold);
    // n = 1 has no meaningful prediction; report the trivial floor.
    let (predicted_t, predicted_t1, predicted_tail) = if n >= 2 {
        (predicted_broadcast_time(n)?, nf.log2(), nf.ln())
    } else {
        (0.0, 0.0, 0.0)
    };
    Ok(PhaseReport {
        t1,
        t2,
        t_prime,
        t: last as u32,
        predicted_t,
        predicted_t1,
        predicted_tail,
        uninformed_at_t2: n as u64 - counts[t2 as usize],
    })
}

pub fn detect_phases(trace: &Trace, params: PhaseParams) -> Result<PhaseReport> {
    if !trace.is_complete() {
        let reachable = *trace.informed_counts().last().unwrap() as usize;
        return Err(Error::NotBroadcastable {
            n: trace.n,
            reachable,
        });
    }
    detect_from_counts(&trace.informed_counts(), trace.n, params.epsilon)
}
