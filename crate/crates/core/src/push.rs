//! The synchronous push protocol.
//!
//! In every round each informed vertex picks one neighbor uniformly at random
//! and sends it the rumor, regardless of whether that neighbor already has it.
//! All choices of a round are made against the informed set at the start of
//! the round, and they are drawn in ascending vertex-id order so that a seed
//! fixes the whole run.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graph::{Graph, Vertex, VertexSet};

/// Bookkeeping for one round of the protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// 1-based round index.
    pub t: u32,
    pub informed_before: u64,
    pub newly_informed: u64,
    /// Pushes whose target was uninformed at the start of the round.
    pub pushes_to_uninformed: u64,
    /// Pushes to uninformed targets that were wasted because another push
    /// reached the same target in the same round.
    pub collisions: u64,
}

impl RoundRecord {
    pub fn informed_after(&self) -> u64 {
        self.informed_before + self.newly_informed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    /// Every vertex was informed after `rounds` rounds.
    Complete { rounds: u32 },
    /// The informed set has no edge leaving it; `reachable` is its size.
    Stalled { reachable: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub n: usize,
    pub start: Vertex,
    pub outcome: Outcome,
    pub rounds: Vec<RoundRecord>,
    /// Informed ids after each round, starting with round 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub informed_sets: Option<Vec<Vec<Vertex>>>,
}

impl Trace {
    /// `I_0, I_1, .., I_T`.
    pub fn informed_counts(&self) -> Vec<u64> {
        std::iter::once(1)
            .chain(self.rounds.iter().map(RoundRecord::informed_after))
            .collect()
    }

    /// `U_t = n - I_t` for every recorded round.
    pub fn uninformed_counts(&self) -> Vec<u64> {
        self.informed_counts()
            .into_iter()
            .map(|i| self.n as u64 - i)
            .collect()
    }

    pub fn broadcast_time(&self) -> Option<u32> {
        match self.outcome {
            Outcome::Complete { rounds } => Some(rounds),
            Outcome::Stalled { .. } => None,
        }
    }

    pub fn is_complete(&self) -> bool {
        matches!(self.outcome, Outcome::Complete { .. })
    }
}

/// Draws one push per informed vertex, in ascending id order, and collects
/// the distinct uninformed targets into `fresh` (sorted ascending). Returns
/// the number of pushes that hit an uninformed vertex.
///
/// `hit` is scratch space of length `n`, all `false` on entry; the marks for
/// `fresh` are left set so the caller can inspect them before clearing.
fn draw_round<R: Rng + ?Sized>(
    g: &Graph,
    informed: &VertexSet,
    rng: &mut R,
    hit: &mut [bool],
    fresh: &mut Vec<Vertex>,
) -> u64 {
    fresh.clear();
    let mut pushes = 0;
    for &v in informed.ids() {
        let deg = g.degree(v);
        if deg == 0 {
            continue;
        }
        let target = g.neighbor(v, rng.random_range(0..deg as u32) as usize);
        if !informed.contains(target) {
            pushes += 1;
            if !hit[target as usize] {
                hit[target as usize] = true;
                fresh.push(target);
            }
        }
    }
    fresh.sort_unstable();
    pushes
}

/// One round of the protocol from `informed`. Returns the newly informed
/// vertices (ascending) and the count of pushes that reached an uninformed
/// vertex.
pub fn push_round<R: Rng + ?Sized>(
    g: &Graph,
    informed: &VertexSet,
    rng: &mut R,
) -> (Vec<Vertex>, u64) {
    let mut hit = vec![false; g.n()];
    let mut fresh = Vec::new();
    let pushes = draw_round(g, informed, rng, &mut hit, &mut fresh);
    (fresh, pushes)
}

/// Runs the protocol from `start` until everyone is informed or the informed
/// set can no longer grow.
pub fn run_push<R: Rng + ?Sized>(
    g: &Graph,
    start: Vertex,
    rng: &mut R,
    snapshot: bool,
) -> Result<Trace> {
    let n = g.n();
    if start as usize >= n {
        return Err(invalid(format!("start vertex {start} out of range for n = {n}")));
    }
    let mut informed = VertexSet::from_ids(n, [start])?;
    let mut hit = vec![false; n];
    let mut fresh = Vec::new();
    let mut rounds = Vec::new();
    let mut snapshots = snapshot.then(|| vec![informed.ids().to_vec()]);
    // e(I, V \ I), maintained incrementally.
    let mut cut = g.degree(start) as u64;

    let outcome = loop {
        if informed.len() == n {
            break Outcome::Complete {
                rounds: rounds.len() as u32,
            };
        }
        if cut == 0 {
            break Outcome::Stalled {
                reachable: informed.len(),
            };
        }
        let before = informed.len() as u64;
        let pushes = draw_round(g, &informed, rng, &mut hit, &mut fresh);

        if g.is_complete() {
            let k = before + fresh.len() as u64;
            cut = k * (n as u64 - k);
        } else {
            // Adding b to S changes the cut by deg(b) - 2|Γ(b) ∩ S|. Fresh
            // vertices are folded in ascending order, so the earlier ones
            // are those still marked in `hit` with a smaller id.
            for &b in &fresh {
                let inside = g
                    .neighbors(b)
                    .filter(|&w| informed.contains(w) || (hit[w as usize] && w < b))
                    .count() as u64;
                cut = cut + g.degree(b) as u64 - 2 * inside;
            }
        }
        for &b in &fresh {
            hit[b as usize] = false;
        }
        informed.merge_sorted(&fresh);

        let newly = fresh.len() as u64;
        rounds.push(RoundRecord {
            t: rounds.len() as u32 + 1,
            informed_before: before,
            newly_informed: newly,
            pushes_to_uninformed: pushes,
            collisions: pushes - newly,
        });
        if let Some(s) = snapshots.as_mut() {
            s.push(informed.ids().to_vec());
        }
    };

    Ok(Trace {
        n,
        start,
        outcome,
        rounds,
        informed_sets: snapshots,
    })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn k2_completes_in_one_round() {
        let trace = run_push(&Graph::complete(2), 0, &mut rng(1), false).unwrap();
        assert_eq!(trace.outcome, Outcome::Complete { rounds: 1 });
        assert_eq!(trace.informed_counts(), vec![1, 2]);
    }

    #[test]
    fn single_vertex_needs_no_rounds() {
        let trace = run_push(&Graph::complete(1), 0, &mut rng(1), false).unwrap();
        assert_eq!(trace.outcome, Outcome::Complete { rounds: 0 });
    }

    #[test]
    fn unreachable_vertex_stalls() {
        let g = Graph::from_edges(3, [(0, 1)]).unwrap();
        let trace = run_push(&g, 0, &mut rng(3), true).unwrap();
        assert_eq!(trace.outcome, Outcome::Stalled { reachable: 2 });
        let last = trace.informed_sets.as_ref().unwrap().last().unwrap().clone();
        let set = VertexSet::from_ids(3, last).unwrap();
        assert_eq!(g.cut_edges(&set), 0);
        assert_eq!(set, g.component_of(0));
    }

    #[test]
    fn isolated_start_stalls_immediately() {
        let g = Graph::from_edges(2, []).unwrap();
        let trace = run_push(&g, 1, &mut rng(0), false).unwrap();
        assert_eq!(trace.outcome, Outcome::Stalled { reachable: 1 });
        assert!(trace.rounds.is_empty());
    }

    #[test]
    fn start_out_of_range() {
        assert!(run_push(&Graph::complete(3), 3, &mut rng(0), false).is_err());
    }

    #[test]
    fn round_from_full_set_is_empty() {
        let g = Graph::complete(5);
        let (fresh, pushes) = push_round(&g, &VertexSet::full(5), &mut rng(9));
        assert!(fresh.is_empty());
        assert_eq!(pushes, 0);
    }

    #[test]
    fn round_on_k2() {
        let g = Graph::complete(2);
        let s = VertexSet::from_ids(2, [0]).unwrap();
        assert_eq!(push_round(&g, &s, &mut rng(0)), (vec![1], 1));
    }

    #[test]
    fn star_round_is_uniform_over_leaves() {
        // Exhaustive: the center's single draw is uniform over its 3 leaves,
        // so each leaf is the lone new vertex with probability 1/3.
        let g = Graph::star(3);
        let s = VertexSet::from_ids(4, [0]).unwrap();
        let trials = 60_000;
        let mut counts = [0u32; 4];
        let mut r = rng(42);
        for _ in 0..trials {
            let (fresh, pushes) = push_round(&g, &s, &mut r);
            assert_eq!(fresh.len(), 1);
            assert_eq!(pushes, 1);
            counts[fresh[0] as usize] += 1;
        }
        assert_eq!(counts[0], 0);
        let sd = (trials as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        for leaf in 1..4 {
            assert!((counts[leaf] as f64 - trials as f64 / 3.0).abs() < 5.0 * sd);
        }
    }

    #[test]
    fn complete_graph_first_round_doubles() {
        for n in [2, 3, 10, 1000] {
            let trace = run_push(&Graph::complete(n), 0, &mut rng(n as u64), false).unwrap();
            assert_eq!(trace.informed_counts()[1], 2, "n = {n}");
        }
    }

    #[test]
    fn same_seed_same_trace() {
        let g = Graph::gnp(500, 0.05, 4).unwrap();
        let a = run_push(&g, 0, &mut rng(77), true).unwrap();
        let b = run_push(&g, 0, &mut rng(77), true).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn trace_json_shape() {
        let trace = run_push(&Graph::complete(2), 0, &mut rng(0), false).unwrap();
        let v: serde_json::Value = serde_json::to_value(&trace).unwrap();
        assert_eq!(v["n"], 2);
        assert_eq!(v["start"], 0);
        assert_eq!(v["outcome"]["kind"], "complete");
        assert_eq!(v["outcome"]["rounds"], 1);
        let r = &v["rounds"][0];
        for key in ["t", "informed_before", "newly_informed", "pushes_to_uninformed", "collisions"] {
            assert!(r.get(key).is_some(), "missing {key}");
        }
        assert!(v.get("informed_sets").is_none());
    }
}
