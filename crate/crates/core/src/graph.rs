//! Undirected simple graphs: sampled `G(n, p)` instances, fixed graphs read
//! from edge lists, and an implicit complete graph that stores nothing.
//!
//! Vertices are `0..n`. Explicit graphs use a compressed adjacency layout
//! with every neighbor list sorted ascending. A constructed [`Graph`] is
//! immutable and can be shared read-only across threads.

use std::fmt::Write as _;
use std::io::BufRead;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub type Vertex = u32;

/// Parameters a sampled graph was generated from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenMeta {
    pub p: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Complete,
    Adjacency {
        offsets: Vec<usize>,
        neighbors: Vec<Vertex>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    repr: Repr,
    gen_meta: Option<GenMeta>,
}

/// A subset of the vertices, kept both as a membership mask and as an
/// ascending id list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexSet {
    mask: Vec<bool>,
    ids: Vec<Vertex>,
}

impl VertexSet {
    pub fn empty(n: usize) -> Self {
        Self {
            mask: vec![false; n],
            ids: Vec::new(),
        }
    }

    pub fn full(n: usize) -> Self {
        Self {
            mask: vec![true; n],
            ids: (0..n as Vertex).collect(),
        }
    }

    /// Builds a set over `0..n`. Duplicates are folded; ids out of range are
    /// rejected.
    pub fn from_ids(n: usize, ids: impl IntoIterator<Item = Vertex>) -> Result<Self> {
        let mut mask = vec![false; n];
        for v in ids {
            let slot = mask
                .get_mut(v as usize)
                .ok_or_else(|| invalid(format!("vertex {v} out of range for n = {n}")))?;
            *slot = true;
        }
        Ok(Self::from_mask(mask))
    }

    pub fn from_mask(mask: Vec<bool>) -> Self {
        let ids = mask
            .iter()
            .enumerate()
            .filter_map(|(v, &m)| m.then_some(v as Vertex))
            .collect();
        Self { mask, ids }
    }

    /// Universe size.
    pub fn universe(&self) -> usize {
        self.mask.len()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    #[inline]
    pub fn contains(&self, v: Vertex) -> bool {
        self.mask.get(v as usize).copied().unwrap_or(false)
    }

    pub fn ids(&self) -> &[Vertex] {
        &self.ids
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn complement(&self) -> Self {
        Self::from_mask(self.mask.iter().map(|&m| !m).collect())
    }

    /// Adds a batch of vertices not already present. `batch` must be sorted
    /// ascending and disjoint from the set.
    pub(crate) fn merge_sorted(&mut self, batch: &[Vertex]) {
        if batch.is_empty() {
            return;
        }
        for &v in batch {
            debug_assert!(!self.mask[v as usize]);
            self.mask[v as usize] = true;
        }
        let mut merged = Vec::with_capacity(self.ids.len() + batch.len());
        let (mut i, mut j) = (0, 0);
        while i < self.ids.len() && j < batch.len() {
            if self.ids[i] < batch[j] {
                merged.push(self.ids[i]);
                i += 1;
            } else {
                merged.push(batch[j]);
                j += 1;
            }
        }
        merged.extend_from_slice(&self.ids[i..]);
        merged.extend_from_slice(&batch[j..]);
        self.ids = merged;
    }
}

/// Iterator over one vertex's neighbors in ascending order.
pub enum Neighbors<'a> {
    Complete {
        next: Vertex,
        end: Vertex,
        skip: Vertex,
    },
    List(std::iter::Copied<std::slice::Iter<'a, Vertex>>),
}

impl Iterator for Neighbors<'_> {
    type Item = Vertex;

    #[inline]
    fn next(&mut self) -> Option<Vertex> {
        match self {
            Neighbors::Complete { next, end, skip } => {
                if *next == *skip {
                    *next += 1;
                }
                if *next >= *end {
                    return None;
                }
                let v = *next;
                *next += 1;
                Some(v)
            }
            Neighbors::List(it) => it.next(),
        }
    }
}

/// Linear index of the pair `(u, v)`, `u < v`, in the row-major ordering
/// `(0,1), (0,2), .., (0,n-1), (1,2), ..`.
pub fn pair_index(n: usize, u: Vertex, v: Vertex) -> u64 {
    debug_assert!(u < v && (v as usize) < n);
    let (n, u, v) = (n as u64, u as u64, v as u64);
    u * (2 * n - u - 1) / 2 + (v - u - 1)
}

pub fn pair_count(n: usize) -> u64 {
    let n = n as u64;
    n * n.saturating_sub(1) / 2
}

/// The stream of selected pair indices used by [`Graph::gnp`].
///
/// Each pair is selected independently with probability `q`; gaps between
/// selections are drawn as geometric variables by inversion, so the cost is
/// proportional to the number of selected pairs.
pub struct PairSelection {
    rng: ChaCha8Rng,
    log_keep: f64,
    total: u64,
    // index of the next candidate pair
    cursor: u64,
    active: bool,
}

impl PairSelection {
    pub fn new(n: usize, q: f64, seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            log_keep: (-q).ln_1p(),
            total: pair_count(n),
            cursor: 0,
            active: q > 0.0,
        }
    }
}

impl Iterator for PairSelection {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if !self.active {
            return None;
        }
        // u in (0, 1]
        let u = 1.0 - self.rng.random::<f64>();
        let gap = (u.ln() / self.log_keep).floor();
        let remaining = (self.total - self.cursor) as f64;
        if !(gap < remaining) {
            self.active = false;
            self.cursor = self.total;
            return None;
        }
        let idx = self.cursor + gap as u64;
        self.cursor = idx + 1;
        if self.cursor >= self.total {
            self.active = false;
        }
        Some(idx)
    }
}

/// Decodes increasing linear pair indices back into `(u, v)` pairs.
struct PairDecoder {
    n: u64,
    row: u64,
    row_start: u64,
}

impl PairDecoder {
    fn new(n: usize) -> Self {
        Self {
            n: n as u64,
            row: 0,
            row_start: 0,
        }
    }

    #[inline]
    fn decode(&mut self, idx: u64) -> (Vertex, Vertex) {
        loop {
            let row_len = self.n - 1 - self.row;
            if idx < self.row_start + row_len {
                break;
            }
            self.row_start += row_len;
            self.row += 1;
        }
        let v = self.row + 1 + (idx - self.row_start);
        (self.row as Vertex, v as Vertex)
    }
}

/// Visits every edge of `G(n, p)` for the given seed in row-major pair order.
fn for_each_gnp_edge(n: usize, p: f64, seed: u64, mut visit: impl FnMut(Vertex, Vertex)) {
    let mut decoder = PairDecoder::new(n);
    if p < 0.5 {
        for idx in PairSelection::new(n, p, seed) {
            let (u, v) = decoder.decode(idx);
            visit(u, v);
        }
        return;
    }
    // Dense regime: sample the non-edges and emit everything else.
    let mut missing = PairSelection::new(n, 1.0 - p, seed)
        .map(|idx| decoder.decode(idx))
        .peekable();
    for u in 0..n as Vertex {
        for v in u + 1..n as Vertex {
            if missing.peek() == Some(&(u, v)) {
                missing.next();
            } else {
                visit(u, v);
            }
        }
    }
}

impl Graph {
    /// Samples `G(n, p)`. Deterministic in `(n, p, seed)`.
    pub fn gnp(n: usize, p: f64, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n must be at least 1"));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid(format!("edge probability {p} outside [0, 1]")));
        }
        if n > Vertex::MAX as usize {
            return Err(invalid(format!("n = {n} exceeds the vertex id range")));
        }
        // Two passes over the same stream: degrees, then placement. This
        // avoids buffering the edge list.
        let mut degree = vec![0usize; n];
        for_each_gnp_edge(n, p, seed, |u, v| {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        });
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor: Vec<usize> = offsets[..n].to_vec();
        let mut neighbors = vec![0 as Vertex; offsets[n]];
        // Row-major emission leaves each list sorted: smaller partners arrive
        // from earlier rows, larger ones from the vertex's own row.
        for_each_gnp_edge(n, p, seed, |u, v| {
            neighbors[cursor[u as usize]] = v;
            cursor[u as usize] += 1;
            neighbors[cursor[v as usize]] = u;
            cursor[v as usize] += 1;
        });
        Ok(Self {
            n,
            repr: Repr::Adjacency { offsets, neighbors },
            gen_meta: Some(GenMeta { p, seed }),
        })
    }

    /// Implicit complete graph `K_n`.
    pub fn complete(n: usize) -> Self {
        assert!(n >= 1 && n <= Vertex::MAX as usize, "complete graph needs 1 <= n < 2^32");
        Self {
            n,
            repr: Repr::Complete,
            gen_meta: None,
        }
    }

    /// Builds an explicit graph from an edge list. Self-loops, duplicate
    /// edges (in either orientation) and out-of-range endpoints are rejected.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (Vertex, Vertex)>) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n must be at least 1"));
        }
        let mut lists: Vec<Vec<Vertex>> = vec![Vec::new(); n];
        for (u, v) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(invalid(format!("edge ({u}, {v}) out of range for n = {n}")));
            }
            if u == v {
                return Err(invalid(format!("self-loop at vertex {u}")));
            }
            lists[u as usize].push(v);
            lists[v as usize].push(u);
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut neighbors = Vec::new();
        for (v, list) in lists.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(invalid(format!("duplicate edge ({v}, {})", w[0])));
            }
            neighbors.extend_from_slice(list);
            offsets.push(neighbors.len());
        }
        Ok(Self {
            n,
            repr: Repr::Adjacency { offsets, neighbors },
            gen_meta: None,
        })
    }

    /// Star with center 0 and leaves `1..=leaves`.
    pub fn star(leaves: usize) -> Self {
        Self::from_edges(leaves + 1, (1..=leaves as Vertex).map(|l| (0, l)))
            .expect("star edges are valid")
    }

    /// Path `0 - 1 - .. - (n-1)`.
    pub fn path(n: usize) -> Self {
        Self::from_edges(n, (1..n as Vertex).map(|v| (v - 1, v))).expect("path edges are valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gen_meta(&self) -> Option<GenMeta> {
        self.gen_meta
    }

    pub fn is_complete(&self) -> bool {
        matches!(self.repr, Repr::Complete)
    }

    pub fn edge_count(&self) -> u64 {
        match &self.repr {
            Repr::Complete => pair_count(self.n),
            Repr::Adjacency { neighbors, .. } => neighbors.len() as u64 / 2,
        }
    }

    #[inline]
    pub fn degree(&self, v: Vertex) -> usize {
        match &self.repr {
            Repr::Complete => self.n - 1,
            Repr::Adjacency { offsets, .. } => offsets[v as usize + 1] - offsets[v as usize],
        }
    }

    /// The `i`-th neighbor of `v` in ascending order, `i < degree(v)`.
    #[inline]
    pub fn neighbor(&self, v: Vertex, i: usize) -> Vertex {
        match &self.repr {
            Repr::Complete => {
                let i = i as Vertex;
                if i < v {
                    i
                } else {
                    i + 1
                }
            }
            Repr::Adjacency { offsets, neighbors } => neighbors[offsets[v as usize] + i],
        }
    }

    pub fn neighbors(&self, v: Vertex) -> Neighbors<'_> {
        match &self.repr {
            Repr::Complete => Neighbors::Complete {
                next: 0,
                end: self.n as Vertex,
                skip: v,
            },
            Repr::Adjacency { offsets, neighbors } => Neighbors::List(
                neighbors[offsets[v as usize]..offsets[v as usize + 1]]
                    .iter()
                    .copied(),
            ),
        }
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        if u == v || u as usize >= self.n || v as usize >= self.n {
            return false;
        }
        match &self.repr {
            Repr::Complete => true,
            Repr::Adjacency { offsets, neighbors } => neighbors
                [offsets[u as usize]..offsets[u as usize + 1]]
                .binary_search(&v)
                .is_ok(),
        }
    }

    /// Edges `(u, v)` with `u < v` in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        (0..self.n as Vertex).flat_map(move |u| {
            self.neighbors(u)
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// `|Γ(v) ∩ S|`.
    pub fn neighbors_in(&self, v: Vertex, set: &VertexSet) -> Result<usize> {
        if v as usize >= self.n {
            return Err(invalid(format!("vertex {v} out of range for n = {}", self.n)));
        }
        Ok(match &self.repr {
            Repr::Complete => set.len() - usize::from(set.contains(v)),
            Repr::Adjacency { .. } => {
                let deg = self.degree(v);
                if set.len() < deg {
                    set.ids()
                        .iter()
                        .filter(|&&u| u != v && self.has_edge(v, u))
                        .count()
                } else {
                    self.neighbors(v).filter(|&u| set.contains(u)).count()
                }
            }
        })
    }

    /// `|Γ(v) ∩ S|` for every vertex `v` at once, in `O(Σ_{u∈S} deg u)`.
    pub fn neighbor_counts(&self, set: &VertexSet) -> Vec<u32> {
        match &self.repr {
            Repr::Complete => {
                let k = set.len() as u32;
                (0..self.n as Vertex)
                    .map(|v| k - u32::from(set.contains(v)))
                    .collect()
            }
            Repr::Adjacency { .. } => {
                let mut counts = vec![0u32; self.n];
                for &u in set.ids() {
                    for w in self.neighbors(u) {
                        counts[w as usize] += 1;
                    }
                }
                counts
            }
        }
    }

    /// `e_G(S, V \ S)`: edges with exactly one endpoint in `S`.
    pub fn cut_edges(&self, set: &VertexSet) -> u64 {
        match &self.repr {
            Repr::Complete => {
                let k = set.len() as u64;
                k * (self.n as u64 - k)
            }
            Repr::Adjacency { .. } => set
                .ids()
                .iter()
                .map(|&u| self.neighbors(u).filter(|&w| !set.contains(w)).count() as u64)
                .sum(),
        }
    }

    /// Vertices reachable from `start`, including `start`.
    pub fn component_of(&self, start: Vertex) -> VertexSet {
        let mut mask = vec![false; self.n];
        if self.is_complete() {
            return VertexSet::full(self.n);
        }
        let mut stack = vec![start];
        mask[start as usize] = true;
        while let Some(u) = stack.pop() {
            for w in self.neighbors(u) {
                if !mask[w as usize] {
                    mask[w as usize] = true;
                    stack.push(w);
                }
            }
        }
        VertexSet::from_mask(mask)
    }

    /// Renders the edge-list text format: a `n m` header line, then one
    /// `u v` line per edge with `u < v`.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.n, self.edge_count());
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    pub fn read_edge_list(reader: impl BufRead) -> Result<Self> {
        let parse_err = |line: usize, msg: String| Error::Parse { line, msg };
        let mut content = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| parse_err(i + 1, e.to_string()))?;
            if !line.trim().is_empty() {
                content.push((i + 1, line));
            }
        }
        let mut lines = content.into_iter();
        let (hline, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "missing `n m` header".into()))?;
        let [n, m] = parse_pair::<usize>(&header).ok_or_else(|| {
            parse_err(hline, format!("expected `n m`, found {header:?}"))
        })?;
        if n == 0 {
            return Err(parse_err(hline, "n must be at least 1".into()));
        }
        let mut edges = Vec::with_capacity(m);
        for (lno, line) in lines {
            let [u, v] = parse_pair::<Vertex>(&line)
                .ok_or_else(|| parse_err(lno, format!("expected `u v`, found {line:?}")))?;
            if u as usize >= n || v as usize >= n {
                return Err(parse_err(lno, format!("vertex id out of range for n = {n}")));
            }
            if u == v {
                return Err(parse_err(lno, format!("self-loop at vertex {u}")));
            }
            if u > v {
                return Err(parse_err(lno, format!("edge ({u}, {v}) must be written with u < v")));
            }
            edges.push((u, v, lno));
        }
        if edges.len() != m {
            return Err(parse_err(
                hline,
                format!("header declares {m} edges, found {}", edges.len()),
            ));
        }
        let mut sorted: Vec<_> = edges.iter().map(|&(u, v, l)| ((u, v), l)).collect();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0].0 == w[1].0) {
            let (u, v) = w[1].0;
            return Err(parse_err(w[1].1.max(w[0].1), format!("duplicate edge ({u}, {v})")));
        }
        Self::from_edges(n, edges.into_iter().map(|(u, v, _)| (u, v)))
    }
}

fn parse_pair<T: std::str::FromStr>(line: &str) -> Option<[T; 2]> {
    let mut it = line.split_whitespace();
    let a = it.next()?.parse().ok()?;
    let b = it.next()?.parse().ok()?;
    if it.next().is_some() {
        return None;
    }
    Some([a, b])
}
