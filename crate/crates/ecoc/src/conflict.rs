//! Column-separation analysis: infeasible pairs, conflict graphs, and edge
//! clique covers.
//!
//! The column-separation criterion admits a pair of candidate columns only
//! when their generalized Hamming distance lies in `[rho, upper]`. Pairs
//! outside the band cannot coexist in a selection, which a conflict graph
//! records as one edge per forbidden pair. Since every clique of that graph
//! collapses to a single inequality `sum x_i <= 1`, an edge clique cover
//! compresses the pairwise constraint set; covers computed on edge-disjoint
//! subgraphs merge into a cover of the whole graph, so the compression also
//! distributes.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::codebook::Codebook;
use crate::{Error, Result};

/// Right end of the admissible column-distance band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpperBound {
    /// No upper restriction. The default: with complement-free candidate
    /// columns of length `k`, any upper bound of at least `k` never binds.
    Inactive,
    Value(f64),
}

impl UpperBound {
    /// Whether `d` satisfies the right end of the band.
    pub fn admits(self, d: f64) -> bool {
        match self {
            UpperBound::Inactive => true,
            UpperBound::Value(u) => d <= u,
        }
    }
}

impl fmt::Display for UpperBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UpperBound::Inactive => write!(f, "inactive"),
            UpperBound::Value(u) => write!(f, "{u}"),
        }
    }
}

/// Split of all unordered column pairs into separation-feasible and
/// separation-infeasible sets.
#[derive(Debug, Clone)]
pub struct PairClassification {
    pub k: usize,
    pub n_columns: usize,
    pub rho: u32,
    pub upper: UpperBound,
    /// `C(n_columns, 2)`.
    pub n_pairs_total: u64,
    /// Pairs `(i, j)` with `i < j` whose distance falls outside the band,
    /// in lexicographic order.
    pub infeasible_pairs: Vec<(u32, u32)>,
    pub n_feasible: u64,
}

/// Classifies every column pair of `m` against the band `[rho, upper]`.
///
/// A pair is feasible iff `rho <= column_distance <= upper`; an inactive
/// upper bound drops the right inequality. Requires `rho >= 1`.
pub fn classify_pairs(m: &Codebook, rho: u32, upper: UpperBound) -> PairClassification {
    assert!(rho >= 1, "separation parameter rho must be at least 1");
    if let UpperBound::Value(u) = upper {
        assert!(u >= f64::from(rho), "upper bound below rho admits nothing");
    }
    let n = m.n_columns();
    let lo = f64::from(rho);
    let mut infeasible = Vec::new();
    if m.k() <= 64 {
        // Pack each column into sign masks; the distance between two columns
        // is then (#opposite signs) + (#positions where either entry is 0)/2.
        let mut pos = vec![0u64; n];
        let mut neg = vec![0u64; n];
        let mut zero = vec![0u64; n];
        for c in 0..n {
            for r in 0..m.k() {
                let bit = 1u64 << r;
                match m.get(r, c) {
                    1 => pos[c] |= bit,
                    -1 => neg[c] |= bit,
                    _ => zero[c] |= bit,
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                let opp = (pos[i] & neg[j]).count_ones() + (neg[i] & pos[j]).count_ones();
                let any_zero = (zero[i] | zero[j]).count_ones();
                let d = f64::from(opp) + f64::from(any_zero) / 2.0;
                if !(d >= lo && upper.admits(d)) {
                    infeasible.push((i as u32, j as u32));
                }
            }
        }
    } else {
        for i in 0..n {
            for j in i + 1..n {
                let d = m.column_distance(i, j);
                if !(d >= lo && upper.admits(d)) {
                    infeasible.push((i as u32, j as u32));
                }
            }
        }
    }
    let n_pairs_total = (n as u64) * (n as u64 - 1) / 2;
    let n_feasible = n_pairs_total - infeasible.len() as u64;
    PairClassification {
        k: m.k(),
        n_columns: n,
        rho,
        upper,
        n_pairs_total,
        infeasible_pairs: infeasible,
        n_feasible,
    }
}

/// Closed-form size of the infeasible set for the canonical exhaustive code
/// with an inactive upper bound: `(2^(k-2) - 1) * sum_{d=1}^{rho-1} C(k-1, d)`.
///
/// Among all `2^(k-1)` first-entry-fixed sign patterns, exactly
/// `2^(k-2) * C(k-1, d)` unordered pairs sit at distance `d`; dropping the
/// excluded all-ones pattern removes `C(k-1, d)` of them, and distances
/// `1..rho-1` are precisely the infeasible ones.
pub fn infeasible_count_closed_form(k: usize, rho: u32) -> Result<u64> {
    if !(3..=40).contains(&k) {
        return Err(Error::SizeLimit {
            what: "closed-form infeasible count",
            param: "k",
            min: 3,
            max: 40,
            value: k,
        });
    }
    if rho < 1 || rho as usize > k - 1 {
        return Err(Error::invalid(
            "separation parameter",
            format!("need 1 <= rho <= k-1, got rho={rho} for k={k}"),
        ));
    }
    let mut sum: u64 = 0;
    for d in 1..rho {
        sum = sum
            .checked_add(binomial(k - 1, d as usize)?)
            .ok_or(Error::Overflow("infeasible pair count"))?;
    }
    let patterns_per_distance = (1u64 << (k - 2)) - 1;
    sum.checked_mul(patterns_per_distance)
        .ok_or(Error::Overflow("infeasible pair count"))
}

fn binomial(n: usize, r: usize) -> Result<u64> {
    if r > n {
        return Ok(0);
    }
    let r = r.min(n - r);
    let mut c: u128 = 1;
    for i in 0..r {
        c = c
            .checked_mul((n - i) as u128)
            .ok_or(Error::Overflow("binomial coefficient"))?
            / (i as u128 + 1);
    }
    u64::try_from(c).map_err(|_| Error::Overflow("binomial coefficient"))
}

/// Undirected graph with one node per candidate column and one edge per
/// separation-infeasible pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ConflictGraph {
    n_nodes: usize,
    /// Normalized `(u, v)` with `u < v`, lexicographically sorted, deduped.
    edges: Vec<(u32, u32)>,
    /// CSR adjacency: `neighbors[offsets[v]..offsets[v+1]]` sorted ascending.
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
}

impl ConflictGraph {
    pub fn from_edges(n_nodes: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Result<ConflictGraph> {
        let mut norm: Vec<(u32, u32)> = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::invalid("conflict graph", format!("self-loop at node {a}")));
            }
            if a as usize >= n_nodes || b as usize >= n_nodes {
                return Err(Error::invalid(
                    "conflict graph",
                    format!("edge ({a}, {b}) exceeds node count {n_nodes}"),
                ));
            }
            norm.push((a.min(b), a.max(b)));
        }
        norm.sort_unstable();
        norm.dedup();
        let mut degree = vec![0usize; n_nodes];
        for &(u, v) in &norm {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = vec![0usize; n_nodes + 1];
        for v in 0..n_nodes {
            offsets[v + 1] = offsets[v] + degree[v];
        }
        let mut cursor = offsets.clone();
        let mut neighbors = vec![0u32; 2 * norm.len()];
        for &(u, v) in &norm {
            neighbors[cursor[u as usize]] = v;
            cursor[u as usize] += 1;
            neighbors[cursor[v as usize]] = u;
            cursor[v as usize] += 1;
        }
        for v in 0..n_nodes {
            neighbors[offsets[v]..offsets[v + 1]].sort_unstable();
        }
        Ok(ConflictGraph {
            n_nodes,
            edges: norm,
            offsets,
            neighbors,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.neighbors[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }

    pub fn degree(&self, v: u32) -> usize {
        self.neighbors(v).len()
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// One edge per line as `i j`, 1-based, lexicographic order.
    pub fn to_edge_list_string(&self) -> String {
        let mut s = String::new();
        for &(u, v) in &self.edges {
            s.push_str(&format!("{} {}\n", u + 1, v + 1));
        }
        s
    }

    /// Parses a 1-based edge list. The node count is inferred as the largest
    /// mentioned index; trailing isolated nodes carry no constraints and
    /// need no representation.
    pub fn from_edge_list_str(text: &str, source_name: &str) -> Result<ConflictGraph> {
        let mut edges = Vec::new();
        let mut max_node = 0u32;
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(Error::format(
                    source_name,
                    line_no,
                    format!("expected 'i j', got {} fields", fields.len()),
                ));
            }
            let mut pair = [0u32; 2];
            for (slot, f) in pair.iter_mut().zip(&fields) {
                let v: u64 = f
                    .parse()
                    .map_err(|_| Error::format(source_name, line_no, format!("'{f}' is not a node index")))?;
                if v == 0 {
                    return Err(Error::format(source_name, line_no, "node indices are 1-based"));
                }
                *slot = (v - 1) as u32;
            }
            max_node = max_node.max(pair[0]).max(pair[1]);
            edges.push((pair[0], pair[1]));
        }
        let n_nodes = if edges.is_empty() { 0 } else { max_node as usize + 1 };
        ConflictGraph::from_edges(n_nodes, edges)
    }

    pub fn write_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_edge_list_string())?;
        Ok(())
    }

    pub fn read_edge_list(path: impl AsRef<Path>) -> Result<ConflictGraph> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        ConflictGraph::from_edge_list_str(&text, &path.display().to_string())
    }
}

/// Builds the conflict graph of a pair classification: one node per column,
/// one edge per infeasible pair.
pub fn build_graph(pc: &PairClassification) -> ConflictGraph {
    ConflictGraph::from_edges(pc.n_columns, pc.infeasible_pairs.iter().copied())
        .expect("classification pairs are in range and loop-free")
}

/// A set of cliques covering every edge of a graph, with no clique contained
/// in another.
#[derive(Debug, Clone, PartialEq)]
pub struct CliqueCover {
    /// Sorted member lists, each of size >= 2, in discovery order.
    pub cliques: Vec<Vec<u32>>,
    /// Provenance: heuristic name and seed.
    pub source: String,
}

/// Defect found by [`validate_cover`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoverViolation {
    CliqueTooSmall { clique: usize, size: usize },
    NodeOutOfRange { clique: usize, node: u32 },
    MissingEdge { clique: usize, u: u32, v: u32 },
    UncoveredEdge { u: u32, v: u32 },
    ContainedClique { inner: usize, outer: usize },
}

impl fmt::Display for CoverViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use CoverViolation::*;
        match self {
            CliqueTooSmall { clique, size } => write!(f, "clique {clique} has size {size} < 2"),
            NodeOutOfRange { clique, node } => write!(f, "clique {clique} names node {node} outside the graph"),
            MissingEdge { clique, u, v } => {
                write!(f, "clique {clique} claims edge ({u}, {v}) absent from the graph")
            }
            UncoveredEdge { u, v } => write!(f, "uncovered edge ({u}, {v})"),
            ContainedClique { inner, outer } => write!(f, "clique {inner} is contained in clique {outer}"),
        }
    }
}

/// Dense bit adjacency used by the cover heuristic and validator.
struct BitMatrix {
    words: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    fn adjacency(g: &ConflictGraph) -> BitMatrix {
        let words = g.n_nodes().div_ceil(64);
        let mut bits = vec![0u64; words * g.n_nodes()];
        for &(u, v) in g.edges() {
            bits[u as usize * words + (v as usize >> 6)] |= 1 << (v & 63);
            bits[v as usize * words + (u as usize >> 6)] |= 1 << (u & 63);
        }
        BitMatrix { words, bits }
    }

    fn row(&self, r: u32) -> &[u64] {
        &self.bits[r as usize * self.words..(r as usize + 1) * self.words]
    }

    fn test(&self, r: u32, c: u32) -> bool {
        self.bits[r as usize * self.words + (c as usize >> 6)] >> (c & 63) & 1 == 1
    }

    fn and_rows_into(&self, a: u32, b: u32, out: &mut Vec<u64>) {
        out.clear();
        out.extend(self.row(a).iter().zip(self.row(b)).map(|(x, y)| x & y));
    }

    fn and_count(&self, r: u32, mask: &[u64]) -> u32 {
        self.row(r).iter().zip(mask).map(|(x, y)| (x & y).count_ones()).sum()
    }

    fn clear_masked(&mut self, r: u32, mask: &[u64]) {
        let start = r as usize * self.words;
        for (w, m) in self.bits[start..start + self.words].iter_mut().zip(mask) {
            *w &= !m;
        }
    }
}

fn iter_bits(mask: &[u64]) -> impl Iterator<Item = u32> + '_ {
    mask.iter().enumerate().flat_map(|(w, &word)| {
        let mut bits = word;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let b = bits.trailing_zeros();
                bits &= bits - 1;
                Some(w as u32 * 64 + b)
            }
        })
    })
}

/// Greedy edge-driven clique cover.
///
/// While uncovered edges remain: seed a clique with the uncovered edge whose
/// endpoints have the largest combined degree in the input graph (ties to
/// the lexicographically smallest pair), then repeatedly absorb the common
/// neighbor of all current members that covers the most currently-uncovered
/// edges (ties to the lowest node index) until no common neighbor remains.
/// Recorded cliques that end up as subsets of later ones are deleted. The
/// procedure is deterministic; the seed is only recorded as provenance.
pub fn edge_clique_cover(g: &ConflictGraph, seed: u64) -> CliqueCover {
    let adj = BitMatrix::adjacency(g);
    let mut uncovered = BitMatrix::adjacency(g);
    let mut order: Vec<usize> = (0..g.n_edges()).collect();
    order.sort_unstable_by_key(|&e| {
        let (u, v) = g.edges()[e];
        (usize::MAX - (g.degree(u) + g.degree(v)), u, v)
    });

    let mut cliques: Vec<Vec<u32>> = Vec::new();
    let mut cand = Vec::new();
    let mut clique_mask = vec![0u64; adj.words];
    for e in order {
        let (u, v) = g.edges()[e];
        if !uncovered.test(u, v) {
            continue;
        }
        let mut members = vec![u, v];
        clique_mask.iter_mut().for_each(|w| *w = 0);
        clique_mask[u as usize >> 6] |= 1 << (u & 63);
        clique_mask[v as usize >> 6] |= 1 << (v & 63);
        adj.and_rows_into(u, v, &mut cand);
        loop {
            let mut best: Option<(u32, u32)> = None;
            for w in iter_bits(&cand) {
                let gain = uncovered.and_count(w, &clique_mask);
                if best.map_or(true, |(bg, _)| gain > bg) {
                    best = Some((gain, w));
                }
            }
            let Some((_, w)) = best else { break };
            members.push(w);
            clique_mask[w as usize >> 6] |= 1 << (w & 63);
            let row_start = w as usize * adj.words;
            for (c, a) in cand.iter_mut().zip(&adj.bits[row_start..row_start + adj.words]) {
                *c &= a;
            }
        }
        members.sort_unstable();
        for &a in &members {
            uncovered.clear_masked(a, &clique_mask);
        }
        cliques.push(members);
    }

    let kept = drop_contained(cliques);
    CliqueCover {
        cliques: kept,
        source: format!("greedy-edge-growth seed={seed}"),
    }
}

/// Removes cliques contained in another clique of the list; of two identical
/// cliques the later one is dropped. Preserves order of the survivors.
fn drop_contained(cliques: Vec<Vec<u32>>) -> Vec<Vec<u32>> {
    let mut by_node: HashMap<u32, Vec<usize>> = HashMap::new();
    for (t, c) in cliques.iter().enumerate() {
        for &v in c {
            by_node.entry(v).or_default().push(t);
        }
    }
    let mut dropped = vec![false; cliques.len()];
    for (t, c) in cliques.iter().enumerate() {
        let Some(&anchor) = c.first() else { continue };
        for &s in &by_node[&anchor] {
            if s == t || dropped[s] {
                continue;
            }
            let strictly_larger = cliques[s].len() > c.len();
            let duplicate_earlier = cliques[s].len() == c.len() && s < t;
            if (strictly_larger || duplicate_earlier) && is_subset(c, &cliques[s]) {
                dropped[t] = true;
                break;
            }
        }
    }
    cliques
        .into_iter()
        .zip(dropped)
        .filter_map(|(c, d)| (!d).then_some(c))
        .collect()
}

/// Subset test on sorted slices.
fn is_subset(small: &[u32], big: &[u32]) -> bool {
    let mut it = big.iter();
    small.iter().all(|x| it.any(|y| y == x))
}

/// Checks the three cover invariants against a graph; empty result means
/// the cover is valid.
pub fn validate_cover(g: &ConflictGraph, cover: &CliqueCover) -> Vec<CoverViolation> {
    let mut out = Vec::new();
    let adj = BitMatrix::adjacency(g);
    let mut uncovered = BitMatrix::adjacency(g);
    let mut clique_mask = vec![0u64; adj.words.max(1)];
    for (t, c) in cover.cliques.iter().enumerate() {
        if c.len() < 2 {
            out.push(CoverViolation::CliqueTooSmall { clique: t, size: c.len() });
            continue;
        }
        if let Some(&node) = c.iter().find(|&&v| v as usize >= g.n_nodes()) {
            out.push(CoverViolation::NodeOutOfRange { clique: t, node });
            continue;
        }
        let mut complete = true;
        for (i, &u) in c.iter().enumerate() {
            for &v in &c[i + 1..] {
                if !adj.test(u, v) {
                    out.push(CoverViolation::MissingEdge { clique: t, u, v });
                    complete = false;
                }
            }
        }
        if complete {
            clique_mask.iter_mut().for_each(|w| *w = 0);
            for &v in c {
                clique_mask[v as usize >> 6] |= 1 << (v & 63);
            }
            for &v in c {
                uncovered.clear_masked(v, &clique_mask);
            }
        }
    }
    for &(u, v) in g.edges() {
        if uncovered.test(u, v) {
            out.push(CoverViolation::UncoveredEdge { u, v });
        }
    }
    let mut by_node: HashMap<u32, Vec<usize>> = HashMap::new();
    for (t, c) in cover.cliques.iter().enumerate() {
        for &v in c {
            by_node.entry(v).or_default().push(t);
        }
    }
    for (t, c) in cover.cliques.iter().enumerate() {
        if c.len() < 2 {
            continue;
        }
        let mut sorted = c.clone();
        sorted.sort_unstable();
        for &s in &by_node[&sorted[0]] {
            if s == t {
                continue;
            }
            let other = &cover.cliques[s];
            let mut other_sorted = other.clone();
            other_sorted.sort_unstable();
            let strictly_larger = other.len() > c.len();
            let duplicate_earlier = other.len() == c.len() && s < t;
            if (strictly_larger || duplicate_earlier) && is_subset(&sorted, &other_sorted) {
                out.push(CoverViolation::ContainedClique { inner: t, outer: s });
                break;
            }
        }
    }
    out
}

/// Splits the edge set into `m` edge-disjoint subgraphs over the same node
/// set.
///
/// Edges are ordered by a seeded SplitMix64 hash of their endpoints and
/// dealt round-robin, so parts are deterministic for a seed, balanced to
/// within one edge, and all nonempty whenever `m <= |E|`.
pub fn partition_edges(g: &ConflictGraph, m: usize, seed: u64) -> Result<Vec<ConflictGraph>> {
    if m < 1 || m > g.n_edges() {
        return Err(Error::invalid(
            "edge partition",
            format!("need 1 <= m <= {} edges, got m={m}", g.n_edges()),
        ));
    }
    let mut keyed: Vec<(u64, (u32, u32))> = g
        .edges()
        .iter()
        .map(|&(u, v)| {
            let h = crate::splitmix64(seed ^ ((u64::from(u) << 32) | u64::from(v)));
            (h, (u, v))
        })
        .collect();
    keyed.sort_unstable();
    let mut parts: Vec<Vec<(u32, u32)>> = vec![Vec::new(); m];
    for (i, (_, e)) in keyed.into_iter().enumerate() {
        parts[i % m].push(e);
    }
    parts
        .into_iter()
        .map(|edges| ConflictGraph::from_edges(g.n_nodes(), edges))
        .collect()
}

/// Unions per-part covers into a cover of the whole graph and validates it.
///
/// For covers computed on edge-disjoint subgraphs the union is always valid:
/// a containment between cliques from different parts would force a shared
/// edge.
pub fn merge_covers(parts: &[CliqueCover], g: &ConflictGraph) -> Result<CliqueCover> {
    let mut seen: HashMap<Vec<u32>, ()> = HashMap::new();
    let mut cliques = Vec::new();
    for part in parts {
        for c in &part.cliques {
            let mut key = c.clone();
            key.sort_unstable();
            if seen.insert(key.clone(), ()).is_none() {
                cliques.push(key);
            }
        }
    }
    let mut sources: Vec<&str> = parts.iter().map(|p| p.source.as_str()).collect();
    sources.dedup();
    let cover = CliqueCover {
        cliques,
        source: format!("merged[{}]", sources.join("; ")),
    };
    let violations = validate_cover(g, &cover);
    if !violations.is_empty() {
        let sample: Vec<String> = violations.iter().take(3).map(CoverViolation::to_string).collect();
        return Err(Error::InvalidCover(format!(
            "merge of {} parts produced {} violations: {}",
            parts.len(),
            violations.len(),
            sample.join("; ")
        )));
    }
    Ok(cover)
}

#[derive(Serialize, Deserialize)]
struct CoverWire {
    /// 1-based column indices, matching the edge-list and LP naming.
    cliques: Vec<Vec<u32>>,
    source: String,
}

impl Serialize for CliqueCover {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        CoverWire {
            cliques: self
                .cliques
                .iter()
                .map(|c| c.iter().map(|v| v + 1).collect())
                .collect(),
            source: self.source.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CliqueCover {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = CoverWire::deserialize(deserializer)?;
        let mut cliques = Vec::with_capacity(wire.cliques.len());
        for c in wire.cliques {
            if let Some(&z) = c.iter().find(|&&v| v == 0) {
                return Err(serde::de::Error::custom(format!(
                    "clique node index {z} is 0; the wire format is 1-based"
                )));
            }
            cliques.push(c.into_iter().map(|v| v - 1).collect());
        }
        Ok(CliqueCover {
            cliques,
            source: wire.source,
        })
    }
}

impl CliqueCover {
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("cover serializes");
        s.push('\n');
        s
    }

    pub fn from_json_str(text: &str) -> Result<CliqueCover> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<CliqueCover> {
        CliqueCover::from_json_str(&std::fs::read_to_string(path)?)
    }
}
