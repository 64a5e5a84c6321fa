//! Closed-form concentration bounds, reported raw (values above 1 are kept).

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Chernoff,
    Azuma,
    Talagrand,
}

/// A tail-bound evaluation request; only the fields relevant to `kind` are
/// consulted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBoundQuery {
    pub kind: BoundKind,
    pub mean: f64,
    pub sum_c_sq: f64,
    pub median: f64,
    pub x: f64,
}

impl TailBoundQuery {
    pub fn evaluate(&self) -> Result<f64> {
        match self.kind {
            BoundKind::Chernoff => chernoff_bound(self.mean, self.x),
            BoundKind::Azuma => azuma_bound(self.sum_c_sq, self.x),
            BoundKind::Talagrand => talagrand_bound(self.median, self.x),
        }
    }
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be a finite non-negative number, got {v}")))
    }
}

/// `2 exp(-x² / (2(μ + x/3)))` for a binomial variable with mean `μ`.
pub fn chernoff_bound(mean: f64, x: f64) -> Result<f64> {
    non_negative("mean", mean)?;
    non_negative("x", x)?;
    if x == 0.0 {
        return Ok(2.0);
    }
    Ok(2.0 * (-(x * x) / (2.0 * (mean + x / 3.0))).exp())
}

/// Bounded-differences bound `2 exp(-x² / (2 Σ c_i²))`.
pub fn azuma_bound(sum_c_sq: f64, x: f64) -> Result<f64> {
    if !(sum_c_sq > 0.0) || !sum_c_sq.is_finite() {
        return Err(invalid(format!("sum_c_sq must be positive, got {sum_c_sq}")));
    }
    non_negative("x", x)?;
    Ok(2.0 * (-(x * x) / (2.0 * sum_c_sq)).exp())
}

/// Median concentration `4 exp(-x² / (4 ψ(m + x)))` with certificate size
/// `ψ(r) = ⌈r⌉`.
pub fn talagrand_bound(median: f64, x: f64) -> Result<f64> {
    non_negative("median", median)?;
    non_negative("x", x)?;
    if x == 0.0 {
        return Ok(4.0);
    }
    let psi = (median + x).ceil();
    Ok(4.0 * (-(x * x) / (4.0 * psi)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MedianMeanGap {
    pub mean: f64,
    /// Lower median for even sample counts.
    pub median: f64,
    /// `|mean - median| / √mean`; zero when mean and median coincide.
    pub normalized_gap: f64,
}

pub fn median_mean_diagnostic(samples: &[f64]) -> Result<MedianMeanGap> {
    if samples.is_empty() {
        return Err(invalid("median/mean diagnostic needs at least one sample"));
    }
    if samples.iter().any(|s| !s.is_finite()) {
        return Err(invalid("samples must be finite"));
    }
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[(sorted.len() - 1) / 2];
    let diff = (mean - median).abs();
    let normalized_gap = if diff == 0.0 {
        0.0
    } else {
        diff / mean.max(0.0).sqrt()
    };
    Ok(MedianMeanGap {
        mean,
        median,
        normalized_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn prefactors_at_zero_deviation() {
        assert_eq!(chernoff_bound(10.0, 0.0).unwrap(), 2.0);
        assert_eq!(chernoff_bound(0.0, 0.0).unwrap(), 2.0);
        assert_eq!(azuma_bound(3.0, 0.0).unwrap(), 2.0);
        assert_eq!(talagrand_bound(0.0, 0.0).unwrap(), 4.0);
        assert_eq!(talagrand_bound(7.5, 0.0).unwrap(), 4.0);
    }

    // Reference values evaluated independently at 30 significant digits.
    #[test]
    fn hand_values() {
        assert!(rel(chernoff_bound(100.0, 30.0).unwrap(), 0.033_448_045_976_940_88) < 1e-12);
        assert!(rel(azuma_bound(100.0, 20.0).unwrap(), 0.270_670_566_473_225_4) < 1e-12);
        assert!(rel(talagrand_bound(100.0, 50.0).unwrap(), 0.062_015_414_396_037_28) < 1e-12);
    }

    #[test]
    fn talagrand_rounds_certificate_up() {
        // ψ(10.2 + 1) = 12
        let b = talagrand_bound(10.2, 1.0).unwrap();
        assert!(rel(b, 4.0 * (-1.0f64 / 48.0).exp()) < 1e-15);
    }

    #[test]
    fn monotone_in_deviation() {
        let xs: Vec<f64> = (0..200).map(|i| i as f64 * 0.5).collect();
        for w in xs.windows(2) {
            assert!(chernoff_bound(50.0, w[1]).unwrap() < chernoff_bound(50.0, w[0]).unwrap());
            assert!(azuma_bound(50.0, w[1]).unwrap() < azuma_bound(50.0, w[0]).unwrap());
            assert!(talagrand_bound(50.0, w[1]).unwrap() <= talagrand_bound(50.0, w[0]).unwrap());
        }
    }

    #[test]
    fn quadrupled_variance_weakens_azuma() {
        assert!(azuma_bound(400.0, 20.0).unwrap() > azuma_bound(100.0, 20.0).unwrap());
    }

    #[test]
    fn talagrand_beats_azuma_far_out() {
        assert!(talagrand_bound(100.0, 300.0).unwrap() < 1e-10 * azuma_bound(1e4, 300.0).unwrap());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(chernoff_bound(-1.0, 1.0).is_err());
        assert!(chernoff_bound(1.0, -1.0).is_err());
        assert!(azuma_bound(0.0, 1.0).is_err());
        assert!(talagrand_bound(-0.5, 1.0).is_err());
        assert!(median_mean_diagnostic(&[]).is_err());
    }

    #[test]
    fn query_dispatch() {
        let q = TailBoundQuery {
            kind: BoundKind::Azuma,
            mean: -5.0,
            sum_c_sq: 100.0,
            median: -5.0,
            x: 20.0,
        };
        assert_eq!(q.evaluate().unwrap(), azuma_bound(100.0, 20.0).unwrap());
    }

    #[test]
    fn diagnostic_examples() {
        let d = median_mean_diagnostic(&[4.0; 7]).unwrap();
        assert_eq!(d.normalized_gap, 0.0);
        let d = median_mean_diagnostic(&[3.0, 1.0, 2.0]).unwrap();
        assert_eq!((d.mean, d.median, d.normalized_gap), (2.0, 2.0, 0.0));
        let d = median_mean_diagnostic(&[1.0, 2.0, 3.0, 10.0]).unwrap();
        assert_eq!(d.median, 2.0);
        assert!((d.normalized_gap - 2.0 / 4.0f64.sqrt()).abs() < 1e-15);
    }
}
