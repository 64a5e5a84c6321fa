//! Empirical audit of the degree and cut concentration properties a graph
//! needs for the broadcast analysis to apply.
//!
//! For a vertex set `S`:
//!
//! - (I), `|S| ≥ n/α`: all but `8n / ln n` vertices outside `S` have
//!   `(1 ± ε) p|S|` neighbors in `S`.
//! - (II), `|S| ≤ n/α`: all but `|S| / (εα)` vertices outside `S` have at
//!   most `εpn` neighbors in `S`.
//! - (III): `e(S, V \ S) = |S|(n - |S|) p (1 ± √8 ε)`.
//!
//! Intervals are open. Checking every subset is out of reach, so the audit
//! samples subsets in a few size classes and sweeps every singleton.

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graph::{Graph, Vertex, VertexSet};
use crate::phases::PhaseParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Property {
    I,
    II,
    III,
    /// The bound the doubling phase actually uses for `n/α ≤ |S| ≤ εn`:
    /// all but `8n / ln n` outside vertices have at most `2εpn` neighbors
    /// in `S`.
    #[serde(rename = "I_doubling")]
    IDoubling,
}

/// Measured cut against its allowed open interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutObservation {
    pub cut: u64,
    pub low: f64,
    pub high: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub property: Property,
    pub size: usize,
    /// The exceptional set `X_S`; always empty for (III).
    pub violating: Vec<Vertex>,
    /// Allowed exceptional count; `None` for (III).
    pub budget: Option<f64>,
    pub passed: bool,
    pub observed: Option<CutObservation>,
}

/// One line of the serialized report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetRecord {
    pub property: Property,
    pub size: usize,
    pub violating_count: usize,
    pub budget: Option<f64>,
    pub passed: bool,
}

impl PropertyResult {
    pub fn record(&self) -> SetRecord {
        SetRecord {
            property: self.property,
            size: self.size,
            violating_count: self.violating.len(),
            budget: self.budget,
            passed: self.passed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeClass {
    pub size: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypicalityReport {
    pub results: Vec<PropertyResult>,
    pub sampled_sets: Vec<SizeClass>,
    pub all_passed: bool,
}

impl TypicalityReport {
    fn new(results: Vec<PropertyResult>, sampled_sets: Vec<SizeClass>) -> Self {
        let all_passed = results.iter().all(|r| r.passed);
        Self {
            results,
            sampled_sets,
            all_passed,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &PropertyResult> {
        self.results.iter().filter(|r| !r.passed)
    }
}

impl Serialize for TypicalityReport {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Doc<'a> {
            all_passed: bool,
            sampled_sets: &'a [SizeClass],
            records: Vec<SetRecord>,
        }
        Doc {
            all_passed: self.all_passed,
            sampled_sets: &self.sampled_sets,
            records: self.results.iter().map(PropertyResult::record).collect(),
        }
        .serialize(serializer)
    }
}

fn check_inputs(g: &Graph, set: &VertexSet, p: f64, epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0) {
        return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("edge probability {p} outside [0, 1]")));
    }
    if set.universe() != g.n() {
        return Err(invalid(format!(
            "vertex set over {} vertices used with a graph on {}",
            set.universe(),
            g.n()
        )));
    }
    Ok(())
}

fn exceptional_budget_large(n: usize) -> f64 {
    8.0 * n as f64 / (n as f64).ln()
}

/// Outside vertices whose count into `S` fails `keep`.
fn outside_violators(g: &Graph, set: &VertexSet, keep: impl Fn(f64) -> bool) -> Vec<Vertex> {
    let counts = g.neighbor_counts(set);
    (0..g.n() as Vertex)
        .filter(|&v| !set.contains(v) && !keep(counts[v as usize] as f64))
        .collect()
}

/// Property (I). The size precondition `|S| ≥ n/α` is the caller's concern.
pub fn check_property_i(g: &Graph, set: &VertexSet, p: f64, epsilon: f64) -> Result<PropertyResult> {
    check_inputs(g, set, p, epsilon)?;
    let center = p * set.len() as f64;
    let (low, high) = ((1.0 - epsilon) * center, (1.0 + epsilon) * center);
    let violating = outside_violators(g, set, |c| low < c && c < high);
    let budget = exceptional_budget_large(g.n());
    Ok(PropertyResult {
        property: Property::I,
        size: set.len(),
        passed: violating.len() as f64 <= budget,
        violating,
        budget: Some(budget),
        observed: None,
    })
}

/// Property (II).
pub fn check_property_ii(
    g: &Graph,
    set: &VertexSet,
    p: f64,
    epsilon: f64,
    alpha: f64,
) -> Result<PropertyResult> {
    check_inputs(g, set, p, epsilon)?;
    if !(alpha > 0.0) {
        return Err(invalid(format!("alpha must be positive, got {alpha}")));
    }
    let limit = epsilon * p * g.n() as f64;
    let violating = outside_violators(g, set, |c| c <= limit);
    let budget = set.len() as f64 / (epsilon * alpha);
    Ok(PropertyResult {
        property: Property::II,
        size: set.len(),
        passed: violating.len() as f64 <= budget,
        violating,
        budget: Some(budget),
        observed: None,
    })
}

/// The `2εpn` variant of (I) used in the doubling phase.
pub fn check_property_i_doubling(
    g: &Graph,
    set: &VertexSet,
    p: f64,
    epsilon: f64,
) -> Result<PropertyResult> {
    check_inputs(g, set, p, epsilon)?;
    let limit = 2.0 * epsilon * p * g.n() as f64;
    let violating = outside_violators(g, set, |c| c <= limit);
    let budget = exceptional_budget_large(g.n());
    Ok(PropertyResult {
        property: Property::IDoubling,
        size: set.len(),
        passed: violating.len() as f64 <= budget,
        violating,
        budget: Some(budget),
        observed: None,
    })
}

fn cut_result(n: usize, size: usize, cut: u64, p: f64, epsilon: f64) -> PropertyResult {
    let center = size as f64 * (n - size) as f64 * p;
    let spread = 8f64.sqrt() * epsilon;
    let (low, high) = (center * (1.0 - spread), center * (1.0 + spread));
    let c = cut as f64;
    PropertyResult {
        property: Property::III,
        size,
        violating: Vec::new(),
        budget: None,
        passed: low < c && c < high,
        observed: Some(CutObservation { cut, low, high }),
    }
}

/// Property (III) on a proper nonempty subset.
pub fn check_property_iii(g: &Graph, set: &VertexSet, p: f64, epsilon: f64) -> Result<PropertyResult> {
    check_inputs(g, set, p, epsilon)?;
    if set.is_empty() || set.len() == g.n() {
        return Err(invalid("property III needs a nonempty proper subset"));
    }
    Ok(cut_result(g.n(), set.len(), g.cut_edges(set), p, epsilon))
}

/// Property (III) on `{v}`, which reduces to a degree check.
pub fn check_property_iii_singleton(g: &Graph, v: Vertex, p: f64, epsilon: f64) -> Result<PropertyResult> {
    if v as usize >= g.n() || g.n() < 2 {
        return Err(invalid("singleton check needs v in range and n >= 2"));
    }
    check_inputs(g, &VertexSet::empty(g.n()), p, epsilon)?;
    Ok(cut_result(g.n(), 1, g.degree(v) as u64, p, epsilon))
}

/// Runs the checks that apply to a set of this size: (II) below `n/α`,
/// (I) above it (both at equality), the doubling variant inside
/// `[n/α, εn]`, and (III) for every proper nonempty set.
fn check_set(g: &Graph, set: &VertexSet, p: f64, params: PhaseParams) -> Result<Vec<PropertyResult>> {
    let n = g.n() as f64;
    let size = set.len() as f64;
    let small_limit = n / params.alpha;
    let mut out = Vec::new();
    if size <= small_limit {
        out.push(check_property_ii(g, set, p, params.epsilon, params.alpha)?);
    }
    if size >= small_limit {
        out.push(check_property_i(g, set, p, params.epsilon)?);
        if size <= params.epsilon * n {
            out.push(check_property_i_doubling(g, set, p, params.epsilon)?);
        }
    }
    if !set.is_empty() && set.len() < g.n() {
        out.push(check_property_iii(g, set, p, params.epsilon)?);
    }
    Ok(out)
}

/// Subset sizes the audit samples: `1, ⌈εpn⌉, ⌈n/α⌉, ⌈n/2⌉, n - ⌈√ln n⌉`,
/// clamped to `[1, n-1]` and deduplicated.
pub fn audit_size_classes(n: usize, p: f64, params: PhaseParams) -> Vec<usize> {
    if n < 2 {
        return Vec::new();
    }
    let nf = n as f64;
    let raw = [
        1.0,
        (params.epsilon * p * nf).ceil(),
        (nf / params.alpha).ceil(),
        (nf / 2.0).ceil(),
        nf - nf.ln().sqrt().ceil(),
    ];
    let mut sizes: Vec<usize> = raw
        .iter()
        .map(|&s| (s.max(1.0) as usize).min(n - 1))
        .collect();
    sizes.sort_unstable();
    sizes.dedup();
    sizes
}

/// Samples `samples_per_class` uniform subsets per size class, runs the
/// matching checks, and sweeps (III) over every singleton.
pub fn audit<R: Rng + ?Sized>(
    g: &Graph,
    p: f64,
    params: PhaseParams,
    samples_per_class: usize,
    rng: &mut R,
) -> Result<TypicalityReport> {
    if samples_per_class == 0 {
        return Err(invalid("samples_per_class must be at least 1"));
    }
    let n = g.n();
    let classes = audit_size_classes(n, p, params);
    // Sets are drawn up front so the result does not depend on scheduling.
    let mut sets = Vec::with_capacity(classes.len() * samples_per_class);
    for &size in &classes {
        for _ in 0..samples_per_class {
            let ids = index::sample(rng, n, size).into_iter().map(|v| v as Vertex);
            sets.push(VertexSet::from_ids(n, ids)?);
        }
    }
    let checked: Result<Vec<Vec<PropertyResult>>> =
        sets.par_iter().map(|s| check_set(g, s, p, params)).collect();
    let mut results: Vec<PropertyResult> = checked?.into_iter().flatten().collect();
    if n >= 2 {
        let singles: Result<Vec<_>> = (0..n as Vertex)
            .into_par_iter()
            .map(|v| check_property_iii_singleton(g, v, p, params.epsilon))
            .collect();
        results.extend(singles?);
    }
    let sampled_sets = classes
        .into_iter()
        .map(|size| SizeClass {
            size,
            samples: samples_per_class,
        })
        .collect();
    Ok(TypicalityReport::new(results, sampled_sets))
}

/// Audits caller-supplied sets, e.g. the informed sets of a recorded trace.
pub fn audit_sets(g: &Graph, p: f64, params: PhaseParams, sets: &[VertexSet]) -> Result<TypicalityReport> {
    let checked: Result<Vec<Vec<PropertyResult>>> =
        sets.par_iter().map(|s| check_set(g, s, p, params)).collect();
    let results = checked?.into_iter().flatten().collect();
    let mut sizes: Vec<usize> = sets.iter().map(VertexSet::len).collect();
    sizes.sort_unstable();
    let mut sampled_sets: Vec<SizeClass> = Vec::new();
    for size in sizes {
        match sampled_sets.last_mut() {
            Some(c) if c.size == size => c.samples += 1,
            _ => sampled_sets.push(SizeClass { size, samples: 1 }),
        }
    }
    Ok(TypicalityReport::new(results, sampled_sets))
}
