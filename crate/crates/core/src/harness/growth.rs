//! Per-round growth ratios split by regime.
//!
//! - early, `I_t ≤ max(1, n/1000)`: `I_{t+1} / I_t`, expected close to 2;
//! - middle, `εn ≤ I_t < (1-ε)n`: `I_{t+1} / I_t`;
//! - final, `√ln n ≤ U_t ≤ n/100`: `U_{t+1} / U_t`, expected close to `1/e`.

use serde::{Deserialize, Serialize};

use super::stats::quantile_sorted;
use crate::phases::PhaseParams;
use crate::push::Trace;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioStats {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    /// Fraction of ratios satisfying the regime's reference law.
    pub law_fraction: f64,
}

impl RatioStats {
    fn of(ratios: &[f64], law: impl Fn(f64) -> bool) -> Option<Self> {
        if ratios.is_empty() {
            return None;
        }
        let mut sorted = ratios.to_vec();
        sorted.sort_by(f64::total_cmp);
        let count = ratios.len();
        Some(Self {
            count,
            mean: ratios.iter().sum::<f64>() / count as f64,
            median: quantile_sorted(&sorted, 0.5),
            min: sorted[0],
            max: sorted[count - 1],
            law_fraction: ratios.iter().filter(|&&r| law(r)).count() as f64 / count as f64,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthDiagnostics {
    /// Upper end of the early regime, `max(1, n/1000)`.
    pub early_limit: f64,
    /// Early law: `I_{t+1} ≥ (2 - 7√ε) I_t`.
    pub early: Option<RatioStats>,
    /// Middle law: `I_{t+1} ≥ (1 + ε/4) I_t`.
    pub middle: Option<RatioStats>,
    /// Final law: `U_{t+1} ∈ U_t e⁻¹ (1 ± 50√ε)`.
    pub final_decay: Option<RatioStats>,
    /// Rounds examined for the at-most-doubling invariant.
    pub rounds_checked: u64,
    /// Rounds with `I_{t+1} > 2 I_t`; always zero for a correct engine.
    pub doubling_violations: u64,
}

/// Collects growth ratios over every complete trace.
pub fn growth_diagnostics(traces: &[Trace], params: PhaseParams) -> GrowthDiagnostics {
    let n = traces.first().map_or(0, |t| t.n);
    let nf = n as f64;
    let eps = params.epsilon;
    let early_limit = (nf / 1000.0).max(1.0);
    let (final_low, final_high) = (nf.ln().sqrt(), nf / 100.0);

    let mut early = Vec::new();
    let mut middle = Vec::new();
    let mut final_decay = Vec::new();
    let mut rounds_checked = 0;
    let mut doubling_violations = 0;

    for trace in traces.iter().filter(|t| t.is_complete()) {
        let counts = trace.informed_counts();
        for w in counts.windows(2) {
            let (now, next) = (w[0] as f64, w[1] as f64);
            rounds_checked += 1;
            if w[1] > 2 * w[0] {
                doubling_violations += 1;
            }
            if now <= early_limit {
                early.push(next / now);
            }
            if now >= eps * nf && now < (1.0 - eps) * nf {
                middle.push(next / now);
            }
            let (u_now, u_next) = (nf - now, nf - next);
            if u_now >= final_low && u_now <= final_high && u_now > 0.0 {
                final_decay.push(u_next / u_now);
            }
        }
    }

    let root = eps.sqrt();
    let inv_e = (-1.0f64).exp();
    GrowthDiagnostics {
        early_limit,
        early: RatioStats::of(&early, |r| r >= 2.0 - 7.0 * root),
        middle: RatioStats::of(&middle, |r| r >= 1.0 + eps / 4.0),
        final_decay: RatioStats::of(&final_decay, |r| {
            inv_e * (1.0 - 50.0 * root) < r && r < inv_e * (1.0 + 50.0 * root)
        }),
        rounds_checked,
        doubling_violations,
    }
}
