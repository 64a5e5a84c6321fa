//! Exact law of the broadcast time on small graphs.
//!
//! The informed set evolves as a Markov chain on subsets of `V`. From a
//! state `A`, the probability that exactly `B` (disjoint from `A`) becomes
//! informed follows by inclusion–exclusion from the probability that every
//! push lands inside `A ∪ C`:
//!
//! ```text
//! P(A → A ∪ B) = Σ_{C ⊆ B} (-1)^{|B \ C|} Π_{v ∈ A, deg v ≥ 1} |Γ(v) ∩ (A ∪ C)| / |Γ(v)|
//! ```
//!
//! States are bitmasks, so the vertex count is capped.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::{Graph, Vertex, VertexSet};

pub const DEFAULT_CAP: usize = 14;
pub const DEFAULT_TAIL_CUTOFF: f64 = 1e-12;
/// Largest cap the bitmask representation supports.
pub const MAX_CAP: usize = 24;
const MAX_ROUNDS: u32 = 1_000_000;

/// Compensated summation.
#[derive(Debug, Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    #[inline]
    fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PmfEntry {
    pub t: u32,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactDistribution {
    pub n: usize,
    pub start: Vertex,
    pub mean: f64,
    pub truncated_at: u32,
    pub tail_mass: f64,
    /// Rounds with nonzero probability, ascending.
    pub pmf: Vec<PmfEntry>,
}

impl ExactDistribution {
    pub fn probability(&self, t: u32) -> f64 {
        self.pmf
            .iter()
            .find(|e| e.t == t)
            .map_or(0.0, |e| e.p)
    }

    pub fn total_mass(&self) -> f64 {
        let mut acc = Kahan::default();
        for e in &self.pmf {
            acc.add(e.p);
        }
        acc.add(self.tail_mass);
        acc.value()
    }
}

/// The subset chain of the push protocol on one graph.
#[derive(Debug, Clone)]
pub struct SubsetChain {
    n: usize,
    start: Vertex,
    nbr: Vec<u32>,
    deg: Vec<u32>,
}

/// Transition out of one state: `(newly informed mask, probability)`.
pub type Transition = (u32, f64);

impl SubsetChain {
    /// Validates size and connectivity, then captures the adjacency as
    /// bitmasks.
    pub fn new(g: &Graph, start: Vertex, cap: usize) -> Result<Self> {
        let n = g.n();
        if cap > MAX_CAP {
            return Err(invalid(format!("oracle cap {cap} exceeds the supported maximum {MAX_CAP}")));
        }
        if n > cap {
            return Err(Error::Capacity { n, cap });
        }
        if start as usize >= n {
            return Err(invalid(format!("start vertex {start} out of range for n = {n}")));
        }
        let reachable = g.component_of(start).len();
        if reachable < n {
            return Err(Error::NotBroadcastable { n, reachable });
        }
        let nbr = (0..n as Vertex)
            .map(|v| g.neighbors(v).fold(0u32, |m, u| m | (1 << u)))
            .collect();
        let deg = (0..n as Vertex).map(|v| g.degree(v) as u32).collect();
        Ok(Self { n, start, nbr, deg })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn full(&self) -> u32 {
        if self.n == 32 {
            u32::MAX
        } else {
            (1u32 << self.n) - 1
        }
    }

    pub fn initial(&self) -> u32 {
        1 << self.start
    }

    /// Uninformed vertices with at least one informed neighbor.
    pub fn frontier(&self, informed: u32) -> u32 {
        let reach = bits(informed).fold(0u32, |m, v| m | self.nbr[v]);
        reach & !informed
    }

    /// Every `B` with `P(A → A ∪ B) > 0`, including `B = ∅` for the
    /// self-loop.
    pub fn transitions(&self, informed: u32) -> Vec<Transition> {
        let frontier = self.frontier(informed);
        let fbits: Vec<usize> = bits(frontier).collect();
        let k = fbits.len();
        let pushers: Vec<usize> = bits(informed).filter(|&v| self.deg[v] > 0).collect();

        // all_inside[c] = P(every push lands in A ∪ C), C indexed over the
        // frontier's compact bit positions.
        let mut law = vec![0.0f64; 1 << k];
        for (c, slot) in law.iter_mut().enumerate() {
            let mut set = informed;
            for (i, &v) in fbits.iter().enumerate() {
                if c >> i & 1 == 1 {
                    set |= 1 << v;
                }
            }
            *slot = pushers
                .iter()
                .map(|&v| (self.nbr[v] & set).count_ones() as f64 / self.deg[v] as f64)
                .product();
        }
        // Möbius inversion over the subset lattice turns "all inside A ∪ C"
        // into "exactly B newly informed".
        for i in 0..k {
            for c in 0..1usize << k {
                if c >> i & 1 == 1 {
                    law[c] -= law[c ^ (1 << i)];
                }
            }
        }
        // Cancellation leaves rounding residue on impossible outcomes, so
        // the support is decided exactly: every newly informed vertex needs
        // a pusher of its own.
        let reach: Vec<u32> = pushers.iter().map(|&v| self.nbr[v] & frontier).collect();
        law.into_iter()
            .enumerate()
            .filter(|&(_, p)| p > 0.0)
            .map(|(c, p)| {
                let mask = fbits
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| c >> i & 1 == 1)
                    .fold(0u32, |m, (_, &v)| m | (1 << v));
                (mask, p)
            })
            .filter(|&(mask, _)| has_distinct_pushers(mask, &reach))
            .collect()
    }

    /// Reachable non-absorbing states with their outgoing transitions,
    /// indexed densely by mask.
    fn explore(&self) -> Vec<Option<Vec<Transition>>> {
        let full = self.full();
        let mut table: Vec<Option<Vec<Transition>>> = vec![None; 1usize << self.n];
        let mut seen = vec![false; 1usize << self.n];
        let mut stack = vec![self.initial()];
        seen[self.initial() as usize] = true;
        while let Some(a) = stack.pop() {
            if a == full {
                continue;
            }
            let out = self.transitions(a);
            for &(b, _) in &out {
                let next = a | b;
                if !seen[next as usize] {
                    seen[next as usize] = true;
                    stack.push(next);
                }
            }
            table[a as usize] = Some(out);
        }
        table
    }
}

/// Whether each vertex of `targets` can be matched to a different pusher
/// adjacent to it; `reach[i]` is pusher `i`'s neighborhood.
fn has_distinct_pushers(targets: u32, reach: &[u32]) -> bool {
    if targets.count_ones() as usize > reach.len() {
        return false;
    }
    // owner[i] = target currently matched to pusher i
    let mut owner: Vec<Option<usize>> = vec![None; reach.len()];
    bits(targets).all(|b| {
        let mut visited = vec![false; reach.len()];
        augment(b, reach, &mut owner, &mut visited)
    })
}

fn augment(b: usize, reach: &[u32], owner: &mut [Option<usize>], visited: &mut [bool]) -> bool {
    for i in 0..reach.len() {
        if reach[i] >> b & 1 == 0 || visited[i] {
            continue;
        }
        visited[i] = true;
        let free = match owner[i] {
            None => true,
            Some(other) => augment(other, reach, owner, visited),
        };
        if free {
            owner[i] = Some(b);
            return true;
        }
    }
    false
}

fn bits(mask: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |&i| mask >> i & 1 == 1)
}

/// `Π_{u ∈ Γ(v) ∩ I} (1 - 1/|Γ(u)|)`: the chance that `v` stays uninformed
/// for one round when `I` is informed.
pub fn stay_uninformed_probability(g: &Graph, informed: &VertexSet, v: Vertex) -> f64 {
    g.neighbors(v)
        .filter(|&u| informed.contains(u))
        .map(|u| 1.0 - 1.0 / g.degree(u) as f64)
        .product()
}

/// Distribution of the broadcast time from `start`, accumulated round by
/// round until the unabsorbed mass drops below `tail_cutoff`.
pub fn exact_time_distribution(g: &Graph, start: Vertex, tail_cutoff: f64) -> Result<ExactDistribution> {
    exact_time_distribution_capped(g, start, tail_cutoff, DEFAULT_CAP)
}

pub fn exact_time_distribution_capped(
    g: &Graph,
    start: Vertex,
    tail_cutoff: f64,
    cap: usize,
) -> Result<ExactDistribution> {
    if !(tail_cutoff > 0.0 && tail_cutoff < 1.0) {
        return Err(invalid(format!("tail cutoff must lie in (0, 1), got {tail_cutoff}")));
    }
    let chain = SubsetChain::new(g, start, cap)?;
    let full = chain.full();
    if chain.initial() == full {
        return Ok(ExactDistribution {
            n: chain.n,
            start,
            mean: 0.0,
            truncated_at: 0,
            tail_mass: 0.0,
            pmf: vec![PmfEntry { t: 0, p: 1.0 }],
        });
    }
    let table = chain.explore();
    let live: Vec<u32> = (0..table.len() as u32)
        .filter(|&a| table[a as usize].is_some())
        .collect();

    let mut cur = vec![Kahan::default(); table.len()];
    cur[chain.initial() as usize].add(1.0);
    let mut pmf = Vec::new();
    let mut mean = Kahan::default();
    let mut t = 0u32;
    let tail_mass = loop {
        t += 1;
        let mut next = vec![Kahan::default(); table.len()];
        for &a in &live {
            let mass = cur[a as usize].value();
            if mass == 0.0 {
                continue;
            }
            for &(b, p) in table[a as usize].as_deref().unwrap() {
                next[(a | b) as usize].add(mass * p);
            }
        }
        let absorbed = next[full as usize].value();
        next[full as usize] = Kahan::default();
        if absorbed > 0.0 {
            pmf.push(PmfEntry { t, p: absorbed });
            mean.add(t as f64 * absorbed);
        }
        let mut residual = Kahan::default();
        for &a in &live {
            residual.add(next[a as usize].value());
        }
        cur = next;
        if residual.value() < tail_cutoff || t >= MAX_ROUNDS {
            break residual.value();
        }
    };

    Ok(ExactDistribution {
        n: chain.n,
        start,
        mean: mean.value(),
        truncated_at: t,
        tail_mass,
        pmf,
    })
}

/// Expected broadcast time by backward substitution over the subset chain.
/// Transitions only enlarge the informed set, so states are solved in
/// decreasing size with the self-loop divided out.
pub fn exact_mean_time(g: &Graph, start: Vertex) -> Result<f64> {
    exact_mean_time_capped(g, start, DEFAULT_CAP)
}

pub fn exact_mean_time_capped(g: &Graph, start: Vertex, cap: usize) -> Result<f64> {
    let chain = SubsetChain::new(g, start, cap)?;
    let full = chain.full();
    if chain.initial() == full {
        return Ok(0.0);
    }
    let table = chain.explore();
    let mut order: Vec<u32> = (0..table.len() as u32)
        .filter(|&a| table[a as usize].is_some())
        .collect();
    order.sort_by_key(|a| std::cmp::Reverse(a.count_ones()));
    let mut expect = vec![0.0f64; table.len()];
    for a in order {
        let mut stay = 0.0;
        let mut acc = Kahan::default();
        acc.add(1.0);
        for &(b, p) in table[a as usize].as_deref().unwrap() {
            if b == 0 {
                stay = p;
            } else {
                acc.add(p * expect[(a | b) as usize]);
            }
        }
        expect[a as usize] = acc.value() / (1.0 - stay);
    }
    Ok(expect[chain.initial() as usize])
}
