//! Weighted undirected graphs in canonical edge order, their incidence,
//! Laplacian and edge-Laplacian matrices, and spectral reports.
//!
//! Nodes are 0-based internally; the text format is 1-based. Every edge
//! `(k, l)` has `k < l`, with `k` the initial node (`-1` in the incidence
//! column) and `l` the terminal node (`+1`). Edges are sorted by `k`, then `l`.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::{sym_eig, Matrix};

/// One weighted edge; `k < l`, 0-based.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub k: usize,
    pub l: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
}

impl WeightedGraph {
    /// Validates and stores a graph whose edges are already in canonical order.
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGraph(format!("need at least 2 nodes, got {n}")));
        }
        for (idx, e) in edges.iter().enumerate() {
            if e.k >= e.l {
                return Err(Error::InvalidGraph(format!(
                    "edge {idx}: endpoints ({}, {}) not in increasing order",
                    e.k + 1,
                    e.l + 1
                )));
            }
            if e.l >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge {idx}: node {} out of range 1..={n}",
                    e.l + 1
                )));
            }
            if !(e.weight > 0.0 && e.weight.is_finite()) {
                return Err(Error::InvalidGraph(format!(
                    "edge {idx}: weight {} must be positive and finite",
                    e.weight
                )));
            }
            if idx > 0 {
                let prev = edges[idx - 1];
                if (prev.k, prev.l) >= (e.k, e.l) {
                    return Err(Error::InvalidGraph(format!(
                        "edge {idx}: ({}, {}) breaks canonical order or duplicates ({}, {})",
                        e.k + 1,
                        e.l + 1,
                        prev.k + 1,
                        prev.l + 1
                    )));
                }
            }
        }
        Ok(Self { n, edges })
    }

    /// Sorts arbitrary `(a, b, w)` triples (0-based, any endpoint order) into
    /// canonical form before validating.
    pub fn from_unordered(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut list: Vec<Edge> = edges
            .into_iter()
            .map(|(a, b, weight)| Edge {
                k: a.min(b),
                l: a.max(b),
                weight,
            })
            .collect();
        list.sort_by_key(|e| (e.k, e.l));
        Self::new(n, list)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn weights(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.weight).collect()
    }

    /// Same topology with every weight multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                weight: e.weight * factor,
                ..*e
            })
            .collect();
        Self::new(self.n, edges)
    }

    /// Relabels node `i` as `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "permutation of length {} for {} nodes",
                perm.len(),
                self.n
            )));
        }
        Self::from_unordered(
            self.n,
            self.edges.iter().map(|e| (perm[e.k], perm[e.l], e.weight)),
        )
    }

    /// Neighbours of `node` with the connecting weight.
    pub fn neighbours(&self, node: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.edges.iter().filter_map(move |e| {
            if e.k == node {
                Some((e.l, e.weight))
            } else if e.l == node {
                Some((e.k, e.weight))
            } else {
                None
            }
        })
    }

    /// Stable 64-bit FNV-1a fingerprint of the node count and edge list.
    pub fn fingerprint(&self) -> u64 {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h = OFFSET;
        let mut feed = |bytes: &[u8]| {
            for &b in bytes {
                h ^= u64::from(b);
                h = h.wrapping_mul(PRIME);
            }
        };
        feed(&(self.n as u64).to_le_bytes());
        for e in &self.edges {
            feed(&(e.k as u64).to_le_bytes());
            feed(&(e.l as u64).to_le_bytes());
            feed(&e.weight.to_bits().to_le_bytes());
        }
        h
    }
}

/// Number of connected components (union-find over the edge list).
pub fn components(g: &WeightedGraph) -> usize {
    let mut parent: Vec<usize> = (0..g.n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut count = g.n;
    for e in &g.edges {
        let (a, b) = (find(&mut parent, e.k), find(&mut parent, e.l));
        if a != b {
            parent[a] = b;
            count -= 1;
        }
    }
    count
}

/// Incidence-derived matrices of a graph with at least one edge.
#[derive(Debug, Clone)]
pub struct GraphMatrices {
    /// Incidence, `N×Q`.
    pub e: Matrix,
    /// Terminal-node part of `e` (the `+1` entries).
    pub e_l: Matrix,
    /// Initial-node part of `e` (absolute value of the `-1` entries).
    pub e_k: Matrix,
    /// Diagonal edge weights, `Q×Q`.
    pub w: Matrix,
    /// Laplacian `E W Eᵀ`.
    pub l: Matrix,
    /// Edge Laplacian `Eᵀ E W`.
    pub l_e: Matrix,
}

impl GraphMatrices {
    pub fn node_count(&self) -> usize {
        self.e.rows()
    }

    pub fn edge_count(&self) -> usize {
        self.e.cols()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.w.diagonal()
    }

    /// Largest edge weight.
    pub fn max_weight(&self) -> f64 {
        self.weights().into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Matrices for the same graph with edge `j` oriented the other way.
    pub fn with_flipped_edge(&self, j: usize) -> Self {
        let mut e = self.e.clone();
        let mut e_l = self.e_l.clone();
        let mut e_k = self.e_k.clone();
        for i in 0..e.rows() {
            e[(i, j)] = -e[(i, j)];
            e_l[(i, j)] = self.e_k[(i, j)];
            e_k[(i, j)] = self.e_l[(i, j)];
        }
        Self::from_parts(e, e_l, e_k, self.w.clone())
    }

    fn from_parts(e: Matrix, e_l: Matrix, e_k: Matrix, w: Matrix) -> Self {
        let l = &(&e * &w) * &e.transpose();
        let l_e = &(&e.transpose() * &e) * &w;
        Self { e, e_l, e_k, w, l, l_e }
    }
}

/// Builds `E`, `E_l`, `E_k`, `W`, `L` and `L_e`. Fails only for an empty edge set.
pub fn build_matrices(g: &WeightedGraph) -> Result<GraphMatrices> {
    let q = g.edge_count();
    if q == 0 {
        return Err(Error::NoEdges);
    }
    let n = g.node_count();
    let mut e_l = Matrix::zeros(n, q);
    let mut e_k = Matrix::zeros(n, q);
    for (j, edge) in g.edges().iter().enumerate() {
        e_k[(edge.k, j)] = 1.0;
        e_l[(edge.l, j)] = 1.0;
    }
    let e = &e_l - &e_k;
    let w = Matrix::from_diag(&g.weights());
    Ok(GraphMatrices::from_parts(e, e_l, e_k, w))
}

#[derive(Debug, Clone)]
pub struct SpectralReport {
    /// Ascending, length `N`.
    pub laplacian_eigs: Vec<f64>,
    /// Ascending, length `Q`.
    pub edge_laplacian_eigs: Vec<f64>,
    /// Algebraic connectivity (second-smallest Laplacian eigenvalue).
    pub lambda2: f64,
    pub components: usize,
}

impl SpectralReport {
    /// Smallest Laplacian eigenvalue above `tol·max(1, λ_max)`.
    pub fn smallest_nonzero(&self, tol: f64) -> Option<f64> {
        let cutoff = tol * self.laplacian_eigs.last().copied().unwrap_or(0.0).max(1.0);
        self.laplacian_eigs.iter().copied().find(|&l| l > cutoff)
    }
}

/// Spectra of `L` and `L_e`.
///
/// `L_e = EᵀEW` is similar to the symmetric `W^{1/2} EᵀE W^{1/2}`, which is
/// what gets decomposed.
pub fn spectral_report(m: &GraphMatrices, g: &WeightedGraph) -> Result<SpectralReport> {
    let laplacian_eigs = sym_eig(&m.l)?.eigenvalues;
    let sqrt_w = Matrix::from_diag(&m.weights().iter().map(|w| w.sqrt()).collect::<Vec<_>>());
    let gram = &m.e.transpose() * &m.e;
    let sym = &(&sqrt_w * &gram) * &sqrt_w;
    let edge_laplacian_eigs = sym_eig(&sym)?.eigenvalues;
    Ok(SpectralReport {
        lambda2: laplacian_eigs[1],
        laplacian_eigs,
        edge_laplacian_eigs,
        components: components(g),
    })
}

/// Seeded random connected graph: a spanning tree over a random permutation
/// plus each remaining pair with probability `edge_probability`.
pub fn random_connected_graph(
    n: usize,
    edge_probability: f64,
    weight_range: (f64, f64),
    seed: u64,
) -> Result<WeightedGraph> {
    check_random_args(n, edge_probability, weight_range)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = connected_block(&mut rng, &(0..n).collect::<Vec<_>>(), edge_probability, weight_range);
    WeightedGraph::from_unordered(n, edges)
}

/// Disjoint union of random connected blocks with the given sizes, under a
/// random relabelling. The result has exactly `sizes.len()` components.
pub fn random_multi_component_graph(
    sizes: &[usize],
    edge_probability: f64,
    weight_range: (f64, f64),
    seed: u64,
) -> Result<WeightedGraph> {
    let n: usize = sizes.iter().sum();
    check_random_args(n, edge_probability, weight_range)?;
    if sizes.contains(&0) {
        return Err(Error::InvalidArgument("component sizes must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<usize> = (0..n).collect();
    labels.shuffle(&mut rng);
    let mut edges = Vec::new();
    let mut start = 0;
    for &size in sizes {
        let block = &labels[start..start + size];
        edges.extend(connected_block(&mut rng, block, edge_probability, weight_range));
        start += size;
    }
    WeightedGraph::from_unordered(n, edges)
}

fn check_random_args(n: usize, p: f64, (lo, hi): (f64, f64)) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need n >= 2, got {n}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("edge probability {p} outside [0, 1]")));
    }
    if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
        return Err(Error::InvalidArgument(format!("weight range ({lo}, {hi}) invalid")));
    }
    Ok(())
}

fn sample_weight(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

fn connected_block(
    rng: &mut ChaCha8Rng,
    nodes: &[usize],
    p: f64,
    weights: (f64, f64),
) -> Vec<(usize, usize, f64)> {
    let mut order = nodes.to_vec();
    order.shuffle(rng);
    let mut present = std::collections::HashSet::new();
    let mut edges = Vec::new();
    for i in 1..order.len() {
        let j = rng.random_range(0..i);
        let (a, b) = (order[i].min(order[j]), order[i].max(order[j]));
        present.insert((a, b));
        edges.push((a, b, sample_weight(rng, weights)));
    }
    let mut sorted = nodes.to_vec();
    sorted.sort_unstable();
    for (x, &a) in sorted.iter().enumerate() {
        for &b in &sorted[x + 1..] {
            if present.contains(&(a, b)) {
                continue;
            }
            if rng.random_bool(p) {
                edges.push((a, b, sample_weight(rng, weights)));
            }
        }
    }
    edges
}

/// The 15-agent, 18-edge network used by the Lorenz demonstration.
///
/// The edge weights, in canonical edge order, are
/// `0.5, 2, 4, 0.5, 5, 0.5, 4, 2, 1, 3, 3, 1, 6, 0.1, 0.1, 2, 4, 1`. The
/// topology itself is a stand-in: a connected 15-node graph with 18 edges
/// (four independent cycles) chosen to carry those weights.
pub fn lorenz15() -> WeightedGraph {
    const EDGES: [(usize, usize); 18] = [
        (1, 2),
        (1, 3),
        (2, 3),
        (2, 4),
        (3, 5),
        (4, 5),
        (4, 6),
        (5, 7),
        (6, 8),
        (7, 9),
        (8, 9),
        (8, 10),
        (9, 11),
        (10, 12),
        (11, 13),
        (12, 14),
        (13, 15),
        (14, 15),
    ];
    const WEIGHTS: [f64; 18] = [
        0.5, 2.0, 4.0, 0.5, 5.0, 0.5, 4.0, 2.0, 1.0, 3.0, 3.0, 1.0, 6.0, 0.1, 0.1, 2.0, 4.0, 1.0,
    ];
    let edges = EDGES
        .iter()
        .zip(WEIGHTS)
        .map(|(&(k, l), weight)| Edge {
            k: k - 1,
            l: l - 1,
            weight,
        })
        .collect();
    WeightedGraph::new(15, edges).expect("static topology is canonical")
}

/// Error from the graph text format, with a 1-based line number.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct GraphParseError {
    pub line: usize,
    pub message: String,
}

/// Parses graph text lines: `nodes N`, then `k l w` per edge (1-based).
///
/// `first_line` is the line number of the first item, for error messages.
/// Blank lines and `#` comments are skipped.
pub fn parse_graph_lines<'a>(
    lines: impl IntoIterator<Item = (usize, &'a str)>,
) -> Result<WeightedGraph, GraphParseError> {
    let mut n: Option<usize> = None;
    let mut edges: Vec<Edge> = Vec::new();
    let mut last_line = 0;
    for (line, raw) in lines {
        last_line = line;
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let err = |message: String| GraphParseError { line, message };
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields[0] == "nodes" {
            if n.is_some() {
                return Err(err("duplicate `nodes` line".into()));
            }
            if fields.len() != 2 {
                return Err(err("expected `nodes N`".into()));
            }
            let count: usize = fields[1]
                .parse()
                .map_err(|_| err(format!("invalid node count `{}`", fields[1])))?;
            if count < 2 {
                return Err(err(format!("need at least 2 nodes, got {count}")));
            }
            n = Some(count);
            continue;
        }
        let Some(count) = n else {
            return Err(err("edge before `nodes` line".into()));
        };
        if fields.len() != 3 {
            return Err(err("expected `k l w`".into()));
        }
        let k: usize = fields[0]
            .parse()
            .map_err(|_| err(format!("invalid node index `{}`", fields[0])))?;
        let l: usize = fields[1]
            .parse()
            .map_err(|_| err(format!("invalid node index `{}`", fields[1])))?;
        let w: f64 = fields[2]
            .parse()
            .map_err(|_| err(format!("invalid weight `{}`", fields[2])))?;
        if k == 0 || l == 0 || k > count || l > count {
            return Err(err(format!("node index out of range 1..={count}")));
        }
        if k >= l {
            return Err(err(format!("edge ({k}, {l}) must satisfy k < l")));
        }
        if !(w > 0.0 && w.is_finite()) {
            return Err(err(format!("weight {w} must be positive")));
        }
        if let Some(prev) = edges.last() {
            if (prev.k + 1, prev.l + 1) >= (k, l) {
                return Err(err(format!(
                    "edge ({k}, {l}) out of canonical order after ({}, {})",
                    prev.k + 1,
                    prev.l + 1
                )));
            }
        }
        edges.push(Edge {
            k: k - 1,
            l: l - 1,
            weight: w,
        });
    }
    let n = n.ok_or(GraphParseError {
        line: last_line.max(1),
        message: "missing `nodes` line".into(),
    })?;
    WeightedGraph::new(n, edges).map_err(|e| GraphParseError {
        line: last_line,
        message: e.to_string(),
    })
}

impl FromStr for WeightedGraph {
    type Err = GraphParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_graph_lines(s.lines().enumerate().map(|(i, l)| (i + 1, l)))
    }
}

/// Writes the graph in its text format (round-trips through `FromStr`).
impl fmt::Display for WeightedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "nodes {}", self.n)?;
        for e in &self.edges {
            writeln!(f, "{} {} {:e}", e.k + 1, e.l + 1, e.weight)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize, pairs: &[(usize, usize)]) -> WeightedGraph {
        WeightedGraph::from_unordered(n, pairs.iter().map(|&(a, b)| (a - 1, b - 1, 1.0))).unwrap()
    }

    fn rows(m: &Matrix) -> Vec<Vec<f64>> {
        (0..m.rows()).map(|i| m.row_slice(i).to_vec()).collect()
    }

    #[test]
    fn p2_matrices() {
        let m = build_matrices(&unit(2, &[(1, 2)])).unwrap();
        assert_eq!(m.e.as_slice(), &[-1.0, 1.0]);
        assert_eq!(rows(&m.l), vec![vec![1.0, -1.0], vec![-1.0, 1.0]]);
        assert_eq!(m.l_e.as_slice(), &[2.0]);
    }

    #[test]
    fn p3_matrices() {
        let m = build_matrices(&unit(3, &[(1, 2), (2, 3)])).unwrap();
        assert_eq!(
            rows(&m.l),
            vec![vec![1.0, -1.0, 0.0], vec![-1.0, 2.0, -1.0], vec![0.0, -1.0, 1.0]]
        );
        assert_eq!(rows(&m.l_e), vec![vec![2.0, -1.0], vec![-1.0, 2.0]]);
    }

    #[test]
    fn c3_matrices() {
        let m = build_matrices(&unit(3, &[(1, 2), (1, 3), (2, 3)])).unwrap();
        assert_eq!(
            rows(&m.l),
            vec![vec![2.0, -1.0, -1.0], vec![-1.0, 2.0, -1.0], vec![-1.0, -1.0, 2.0]]
        );
        assert_eq!(
            rows(&m.l_e),
            vec![vec![2.0, 1.0, -1.0], vec![1.0, 2.0, 1.0], vec![-1.0, 1.0, 2.0]]
        );
        assert_eq!(&m.e_l - &m.e_k, m.e);
    }

    #[test]
    fn component_counts() {
        assert_eq!(components(&unit(3, &[(1, 2), (2, 3)])), 1);
        assert_eq!(components(&unit(4, &[(1, 2)])), 3);
        assert_eq!(components(&WeightedGraph::new(2, vec![]).unwrap()), 2);
    }

    #[test]
    fn empty_edge_set_has_no_matrices() {
        let g = WeightedGraph::new(2, vec![]).unwrap();
        assert_eq!(build_matrices(&g).unwrap_err(), Error::NoEdges);
    }

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn spectra_of_small_graphs() {
        let g = unit(2, &[(1, 2)]);
        let r = spectral_report(&build_matrices(&g).unwrap(), &g).unwrap();
        assert!(close(&r.laplacian_eigs, &[0.0, 2.0]));
        assert!(close(&r.edge_laplacian_eigs, &[2.0]));

        let g = unit(3, &[(1, 2), (1, 3), (2, 3)]);
        let r = spectral_report(&build_matrices(&g).unwrap(), &g).unwrap();
        assert!(close(&r.laplacian_eigs, &[0.0, 3.0, 3.0]));
        assert!(close(&r.edge_laplacian_eigs, &[0.0, 3.0, 3.0]));
        assert!((r.lambda2 - 3.0).abs() < 1e-12);

        let g = unit(3, &[(1, 2), (2, 3)]);
        let r = spectral_report(&build_matrices(&g).unwrap(), &g).unwrap();
        assert!(close(&r.laplacian_eigs, &[0.0, 1.0, 3.0]));
        assert!(close(&r.edge_laplacian_eigs, &[1.0, 3.0]));
        assert_eq!(r.components, 1);
    }

    #[test]
    fn random_connected_examples() {
        let g = random_connected_graph(2, 0.3, (1.0, 2.0), 5).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!((g.edges()[0].k, g.edges()[0].l), (0, 1));

        let g = random_connected_graph(5, 0.0, (1.0, 1.0), 5).unwrap();
        assert_eq!(g.edge_count(), 4);
        assert_eq!(components(&g), 1);

        let g = random_connected_graph(5, 1.0, (0.5, 3.0), 5).unwrap();
        assert_eq!(g.edge_count(), 10);
        assert!(g.weights().iter().all(|w| (0.5..=3.0).contains(w)));

        assert_eq!(
            random_connected_graph(9, 0.3, (0.1, 6.0), 42).unwrap(),
            random_connected_graph(9, 0.3, (0.1, 6.0), 42).unwrap()
        );
        assert!(random_connected_graph(1, 0.3, (1.0, 2.0), 0).is_err());
        assert!(random_connected_graph(3, 1.5, (1.0, 2.0), 0).is_err());
        assert!(random_connected_graph(3, 0.5, (0.0, 2.0), 0).is_err());
    }

    #[test]
    fn multi_component_generator() {
        for seed in 0..20 {
            let g = random_multi_component_graph(&[3, 1, 4], 0.4, (0.1, 6.0), seed).unwrap();
            assert_eq!(g.node_count(), 8);
            assert_eq!(components(&g), 3);
        }
    }

    #[test]
    fn lorenz15_shape() {
        let g = lorenz15();
        assert_eq!(g.node_count(), 15);
        assert_eq!(g.edge_count(), 18);
        assert_eq!(components(&g), 1);
        assert_eq!(
            g.weights(),
            vec![0.5, 2.0, 4.0, 0.5, 5.0, 0.5, 4.0, 2.0, 1.0, 3.0, 3.0, 1.0, 6.0, 0.1, 0.1, 2.0, 4.0, 1.0]
        );
    }

    #[test]
    fn constructor_rejects_invalid_edges() {
        let e = |k, l, weight| Edge { k, l, weight };
        assert!(WeightedGraph::new(1, vec![]).is_err());
        assert!(WeightedGraph::new(3, vec![e(1, 0, 1.0)]).is_err());
        assert!(WeightedGraph::new(3, vec![e(0, 3, 1.0)]).is_err());
        assert!(WeightedGraph::new(3, vec![e(0, 1, 0.0)]).is_err());
        assert!(WeightedGraph::new(3, vec![e(0, 2, 1.0), e(0, 1, 1.0)]).is_err());
        assert!(WeightedGraph::new(3, vec![e(0, 1, 1.0), e(0, 1, 2.0)]).is_err());
    }

    #[test]
    fn text_format() {
        let g: WeightedGraph = "# triangle\nnodes 3\n1 2 1.0\n1 3 0.5\n\n2 3 2\n".parse().unwrap();
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.edges()[1].weight, 0.5);
        assert_eq!(g.to_string().parse::<WeightedGraph>().unwrap(), g);

        let cases = [
            ("1 2 1.0\n", 1),
            ("nodes 3\n1 2 1\n2 1 1\n", 3),
            ("nodes 3\n1 3 1\n1 2 1\n", 3),
            ("nodes 3\n1 2 1\n1 2 1\n", 3),
            ("nodes 3\n1 4 1\n", 2),
            ("nodes 3\n1 2 -1\n", 2),
            ("nodes 3\n1 2\n", 2),
            ("nodes x\n", 1),
            ("nodes 3\nnodes 3\n", 2),
            ("", 1),
        ];
        for (text, line) in cases {
            let err = text.parse::<WeightedGraph>().unwrap_err();
            assert_eq!(err.line, line, "{text:?}: {err}");
        }
    }
}
