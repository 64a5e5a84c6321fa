//! Seeded multi-trial experiments.
//!
//! Trials run in parallel but every trial derives its own streams from
//! `(master seed, trial index)`, and results are assembled in trial order,
//! so a report is byte-for-byte independent of the worker count.

mod growth;
mod report;
pub mod seed;
pub mod stats;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use growth::{growth_diagnostics, GrowthDiagnostics, RatioStats};
pub use report::{csv_rows, csv_sidecar, emit_report, load_report, ReportFormat};
pub use seed::{derive_seed, Purpose};
pub use stats::Summary;

use crate::error::{invalid, Result};
use crate::graph::{Graph, Vertex};
use crate::oracle::ExactDistribution;
use crate::phases::{self, PhaseBounds, PhaseParams, PhaseReport};
use crate::push::{run_push, Trace};

/// How the graph of each trial is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Density {
    /// `G(n, p)` with the given edge probability.
    P(f64),
    /// `G(n, p)` with `p = α ln n / n`.
    Alpha(f64),
    /// The complete graph.
    Complete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n: usize,
    pub density: Density,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub start: Vertex,
    /// Overrides the `ε` derived from the density.
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Sample one graph and reuse it for every trial.
    #[serde(default)]
    pub fixed_graph: bool,
    /// Keep full per-trial traces in the report.
    #[serde(default)]
    pub record_traces: bool,
    /// Worker threads; 0 uses the global pool. Never affects results, so it
    /// is left out of serialized reports.
    #[serde(skip)]
    pub parallelism: usize,
}

impl RunConfig {
    pub fn new(n: usize, density: Density, trials: usize, master_seed: u64) -> Self {
        Self {
            n,
            density,
            trials,
            master_seed,
            start: 0,
            epsilon: None,
            fixed_graph: false,
            record_traces: false,
            parallelism: 0,
        }
    }

    /// Edge probability after clamping to 1; rejected unless in `(0, 1]`.
    pub fn edge_probability(&self) -> Result<f64> {
        let n = self.n as f64;
        let p = match self.density {
            Density::P(p) => p,
            Density::Alpha(a) => {
                if !(a > 0.0) || !a.is_finite() {
                    return Err(invalid(format!("alpha must be positive, got {a}")));
                }
                a * n.ln() / n
            }
            Density::Complete => 1.0,
        };
        let p = p.min(1.0);
        if !(p > 0.0) {
            return Err(invalid(format!("edge probability must lie in (0, 1], got {p}")));
        }
        Ok(p)
    }

    /// `α` and `ε` for phase detection and audits.
    pub fn phase_params(&self) -> Result<PhaseParams> {
        let p = self.edge_probability()?;
        let base = match self.density {
            Density::Alpha(a) if self.epsilon.is_none() => PhaseParams::from_alpha(a)?,
            Density::Alpha(a) => PhaseParams { alpha: a, epsilon: 1.0 },
            _ if self.n >= 2 => PhaseParams::effective(self.n, p)?,
            _ => PhaseParams { alpha: 1.0, epsilon: 1.0 },
        };
        match self.epsilon {
            Some(eps) => PhaseParams::new(base.alpha, eps),
            None => Ok(base),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("n must be at least 1"));
        }
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if self.start as usize >= self.n {
            return Err(invalid(format!(
                "start vertex {} out of range for n = {}",
                self.start, self.n
            )));
        }
        self.edge_probability()?;
        self.phase_params()?;
        Ok(())
    }
}

/// Outcome of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub stalled: bool,
    /// Component size reached when stalled.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reachable: Option<usize>,
    pub phases: Option<PhaseReport>,
}

/// Reference values every trial is compared against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseAnnotation {
    pub alpha: f64,
    pub epsilon: f64,
    pub predicted_t: Option<f64>,
    pub predicted_t1: f64,
    pub predicted_tail: f64,
    pub bounds: PhaseBounds,
    /// `α^{-1/7} ln n`, the asymptotic deviation allowance for `T`.
    pub deviation_allowance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    #[serde(rename = "T")]
    pub t: Summary,
    #[serde(rename = "T1")]
    pub t1: Summary,
    /// `T2 - T1`.
    pub middle: Summary,
    /// `T - T2`.
    pub tail: Summary,
    /// `T' - T2`.
    pub tail_to_prime: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: RunConfig,
    /// Realized edge probability.
    pub p: f64,
    pub phases: PhaseAnnotation,
    pub trials: Vec<TrialRecord>,
    pub stalled_trials: usize,
    pub all_stalled: bool,
    pub aggregates: Option<Aggregates>,
    pub relative_deviation: Option<f64>,
    pub growth: GrowthDiagnostics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub traces: Option<Vec<Trace>>,
}

impl ExperimentReport {
    pub fn broadcast_times(&self) -> Vec<f64> {
        self.trials
            .iter()
            .filter_map(|t| t.phases.map(|p| p.t as f64))
            .collect()
    }
}

fn with_pool<T: Send>(parallelism: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    if parallelism == 0 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| invalid(format!("cannot build worker pool: {e}")))?;
    Ok(pool.install(job))
}

fn sample_graph(config: &RunConfig, p: f64, trial: u64) -> Result<Graph> {
    match config.density {
        Density::Complete => Ok(Graph::complete(config.n)),
        _ => Graph::gnp(config.n, p, derive_seed(config.master_seed, trial, Purpose::Graph)),
    }
}

pub fn run_experiment(config: &RunConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let p = config.edge_probability()?;
    let params = config.phase_params()?;
    let shared = if config.fixed_graph || config.density == Density::Complete {
        Some(sample_graph(config, p, 0)?)
    } else {
        None
    };

    let run_trial = |trial: usize| -> Result<(TrialRecord, Trace)> {
        let owned;
        let graph = match &shared {
            Some(g) => g,
            None => {
                owned = sample_graph(config, p, trial as u64)?;
                &owned
            }
        };
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
            config.master_seed,
            trial as u64,
            Purpose::Protocol,
        ));
        let trace = run_push(graph, config.start, &mut rng, false)?;
        let record = if trace.is_complete() {
            TrialRecord {
                trial,
                stalled: false,
                reachable: None,
                phases: Some(phases::detect_phases(&trace, params)?),
            }
        } else {
            TrialRecord {
                trial,
                stalled: true,
                reachable: trace.informed_counts().last().map(|&c| c as usize),
                phases: None,
            }
        };
        Ok((record, trace))
    };

    let outcomes: Result<Vec<_>> = with_pool(config.parallelism, || {
        (0..config.trials).into_par_iter().map(run_trial).collect()
    })?;
    let (trials, traces): (Vec<_>, Vec<_>) = outcomes?.into_iter().unzip();
    Ok(assemble(config, p, params, trials, traces))
}

fn assemble(
    config: &RunConfig,
    p: f64,
    params: PhaseParams,
    trials: Vec<TrialRecord>,
    traces: Vec<Trace>,
) -> ExperimentReport {
    let n = config.n;
    let nf = n as f64;
    let predicted_t = phases::predicted_broadcast_time(n).ok();
    let deviation_allowance = match config.density {
        Density::Alpha(a) if n >= 2 => Some(a.powf(-1.0 / 7.0) * nf.ln()),
        _ => None,
    };
    let annotation = PhaseAnnotation {
        alpha: params.alpha,
        epsilon: params.epsilon,
        predicted_t,
        predicted_t1: nf.log2(),
        predicted_tail: nf.ln(),
        bounds: phases::phase_bounds(n, params),
        deviation_allowance,
    };

    let done: Vec<&PhaseReport> = trials.iter().filter_map(|t| t.phases.as_ref()).collect();
    let column = |f: &dyn Fn(&PhaseReport) -> u32| -> Vec<f64> {
        done.iter().map(|r| f(r) as f64).collect()
    };
    let aggregates = Summary::of(&column(&|r| r.t)).map(|t| Aggregates {
        t,
        t1: Summary::of(&column(&|r| r.t1)).unwrap(),
        middle: Summary::of(&column(&|r| r.middle_duration())).unwrap(),
        tail: Summary::of(&column(&|r| r.tail_duration())).unwrap(),
        tail_to_prime: Summary::of(&column(&|r| r.t_prime - r.t2)).unwrap(),
    });
    let relative_deviation = match (&aggregates, predicted_t) {
        (Some(a), Some(pred)) => Some((a.t.mean - pred) / pred),
        _ => None,
    };
    let stalled_trials = trials.iter().filter(|t| t.stalled).count();
    let growth = growth_diagnostics(&traces, params);

    ExperimentReport {
        config: config.clone(),
        p,
        phases: annotation,
        all_stalled: stalled_trials == trials.len(),
        stalled_trials,
        trials,
        aggregates,
        relative_deviation,
        growth,
        traces: config.record_traces.then_some(traces),
    }
}

/// Histogram of broadcast times over seeded runs on one fixed graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    pub trials: u64,
    pub stalled: u64,
    pub counts: BTreeMap<u32, u64>,
}

impl EmpiricalDistribution {
    pub fn probability(&self, t: u32) -> f64 {
        self.counts.get(&t).copied().unwrap_or(0) as f64 / self.trials as f64
    }

    pub fn mean(&self) -> f64 {
        let done = self.trials - self.stalled;
        self.counts.iter().map(|(&t, &c)| t as f64 * c as f64).sum::<f64>() / done as f64
    }

    /// Total-variation distance to an exact law; the exact tail mass beyond
    /// truncation counts as disagreement.
    pub fn total_variation(&self, exact: &ExactDistribution) -> f64 {
        let mut rounds: Vec<u32> = self.counts.keys().copied().collect();
        rounds.extend(exact.pmf.iter().map(|e| e.t));
        rounds.sort_unstable();
        rounds.dedup();
        let diff: f64 = rounds
            .iter()
            .map(|&t| (self.probability(t) - exact.probability(t)).abs())
            .sum();
        0.5 * (diff + exact.tail_mass + self.stalled as f64 / self.trials as f64)
    }
}

const HISTOGRAM_BLOCK: u64 = 4096;

/// Runs `trials` seeded broadcasts from `start` on `g` and tallies their
/// broadcast times. Deterministic in `master_seed` for any `parallelism`.
pub fn empirical_time_distribution(
    g: &Graph,
    start: Vertex,
    trials: u64,
    master_seed: u64,
    parallelism: usize,
) -> Result<EmpiricalDistribution> {
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    if start as usize >= g.n() {
        return Err(invalid(format!("start vertex {start} out of range for n = {}", g.n())));
    }
    let blocks = trials.div_ceil(HISTOGRAM_BLOCK);
    let partial: Result<Vec<(BTreeMap<u32, u64>, u64)>> = with_pool(parallelism, || {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let mut counts = BTreeMap::new();
                let mut stalled = 0;
                for trial in b * HISTOGRAM_BLOCK..((b + 1) * HISTOGRAM_BLOCK).min(trials) {
                    let mut rng =
                        ChaCha8Rng::seed_from_u64(derive_seed(master_seed, trial, Purpose::Protocol));
                    match run_push(g, start, &mut rng, false)?.broadcast_time() {
                        Some(t) => *counts.entry(t).or_insert(0) += 1,
                        None => stalled += 1,
                    }
                }
                Ok((counts, stalled))
            })
            .collect()
    })?;
    let mut out = EmpiricalDistribution {
        trials,
        stalled: 0,
        counts: BTreeMap::new(),
    };
    for (counts, stalled) in partial? {
        out.stalled += stalled;
        for (t, c) in counts {
            *out.counts.entry(t).or_insert(0) += c;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k2_is_deterministic() {
        let report = run_experiment(&RunConfig::new(2, Density::Complete, 100, 5)).unwrap();
        let agg = report.aggregates.unwrap();
        assert_eq!((agg.t.mean, agg.t.std), (1.0, 0.0));
        assert_eq!(report.trials.len(), 100);
        assert_eq!(report.stalled_trials, 0);
    }

    #[test]
    fn config_validation() {
        assert!(run_experiment(&RunConfig::new(10, Density::P(0.0), 1, 0)).is_err());
        assert!(run_experiment(&RunConfig::new(10, Density::P(1.5), 1, 0)).is_ok());
        assert!(run_experiment(&RunConfig::new(10, Density::Alpha(-1.0), 1, 0)).is_err());
        assert!(run_experiment(&RunConfig::new(10, Density::Complete, 0, 0)).is_err());
        let mut c = RunConfig::new(10, Density::Complete, 1, 0);
        c.start = 10;
        assert!(run_experiment(&c).is_err());
        c.start = 0;
        c.epsilon = Some(2.0);
        assert!(run_experiment(&c).is_err());
    }

    #[test]
    fn alpha_density_probability() {
        let c = RunConfig::new(10_000, Density::Alpha(10.0), 1, 0);
        let p = c.edge_probability().unwrap();
        assert!((p - 10.0 * (10_000f64).ln() / 10_000.0).abs() < 1e-15);
        let eps = c.phase_params().unwrap().epsilon;
        assert!((eps - 10f64.powf(-0.5)).abs() < 1e-15);
        // Clamped to 1 on tiny graphs.
        assert_eq!(RunConfig::new(5, Density::Alpha(10.0), 1, 0).edge_probability().unwrap(), 1.0);
    }

    #[test]
    fn disconnected_graphs_stall() {
        // p small enough that G(50, p) is almost surely disconnected.
        let report = run_experiment(&RunConfig::new(50, Density::P(0.001), 20, 9)).unwrap();
        assert!(report.stalled_trials > 0);
        assert_eq!(
            report.aggregates.as_ref().map_or(0, |a| a.t.count),
            20 - report.stalled_trials
        );
        for t in report.trials.iter().filter(|t| t.stalled) {
            assert!(t.phases.is_none() && t.reachable.unwrap() < 50);
        }
    }

    #[test]
    fn fixed_graph_reuses_one_sample() {
        let mut c = RunConfig::new(200, Density::Alpha(3.0), 8, 77);
        c.fixed_graph = true;
        c.record_traces = true;
        let report = run_experiment(&c).unwrap();
        assert_eq!(report.traces.as_ref().unwrap().len(), 8);
        let g = Graph::gnp(200, report.p, derive_seed(77, 0, Purpose::Graph)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(77, 5, Purpose::Protocol));
        let again = run_push(&g, 0, &mut rng, false).unwrap();
        assert_eq!(&again, &report.traces.unwrap()[5]);
    }

    #[test]
    fn histogram_is_schedule_independent() {
        let g = Graph::complete(4);
        let a = empirical_time_distribution(&g, 0, 10_000, 3, 1).unwrap();
        let b = empirical_time_distribution(&g, 0, 10_000, 3, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.counts.values().sum::<u64>(), 10_000);
    }
}
