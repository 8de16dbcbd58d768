//! The subset graph `Γ(n)`, generalized Kneser graphs, exact colouring, and
//! the independent-set view of two-agent EF-1.

mod color;

use std::fmt::Write as _;

use serde::Serialize;

use crate::model::Instance;
use crate::numeric::Rational;

/// Colouring and clique search work on at most this many vertices.
pub const DEFAULT_VERTEX_CAP: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("{vertices} vertices exceed the cap of {cap}")]
    CapExceeded { vertices: usize, cap: usize },
    #[error("invalid parameters: {0}")]
    BadParameters(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// A simple undirected graph whose vertices are subsets of `{0, …, ground-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    ground: usize,
    /// Vertex `i` is the subset with bitmask `labels[i]`.
    labels: Vec<u64>,
    /// Row-major adjacency bitsets, `words` u64 per row.
    adjacency: Vec<u64>,
    words: usize,
}

impl Graph {
    fn build(ground: usize, labels: Vec<u64>, adjacent: impl Fn(u64, u64) -> bool) -> Self {
        let n = labels.len();
        let words = n.div_ceil(64).max(1);
        let mut adjacency = vec![0u64; n * words];
        for a in 0..n {
            for b in a + 1..n {
                if adjacent(labels[a], labels[b]) {
                    adjacency[a * words + b / 64] |= 1 << (b % 64);
                    adjacency[b * words + a / 64] |= 1 << (a % 64);
                }
            }
        }
        Graph {
            ground,
            labels,
            adjacency,
            words,
        }
    }

    /// `Γ(n)`: every subset of `[n]`, with `A ~ B` iff `|A∩B| ≤ 1` and `|A∪B| ≥ n−1`.
    /// Vertex `i` is the subset with bitmask `i`.
    pub fn gamma(n: usize) -> Result<Self, GraphError> {
        if n > 20 {
            return Err(GraphError::CapExceeded {
                vertices: 1 << n.min(63),
                cap: 1 << 20,
            });
        }
        let labels = (0..1u64 << n).collect();
        Ok(Self::build(n, labels, |a, b| {
            (a & b).count_ones() <= 1 && (a | b).count_ones() as usize + 1 >= n
        }))
    }

    /// `K(n, k, s)`: the `k`-subsets of `[n]` in lexicographic order, adjacent
    /// when they share at most `s` elements.
    pub fn kneser(n: usize, k: usize, s: usize) -> Result<Self, GraphError> {
        if k > n || n > 64 {
            return Err(GraphError::BadParameters(format!("need k <= n <= 64, got n={n}, k={k}")));
        }
        let mut labels = Vec::new();
        let mut subset: Vec<usize> = (0..k).collect();
        loop {
            labels.push(subset.iter().fold(0u64, |acc, &x| acc | 1 << x));
            if labels.len() > 1 << 16 {
                return Err(GraphError::CapExceeded {
                    vertices: labels.len(),
                    cap: 1 << 16,
                });
            }
            let Some(pos) = (0..k).rev().find(|&p| subset[p] < n - k + p) else {
                break;
            };
            subset[pos] += 1;
            for q in pos + 1..k {
                subset[q] = subset[q - 1] + 1;
            }
        }
        Ok(Self::build(n, labels, |a, b| (a & b).count_ones() as usize <= s))
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn ground_size(&self) -> usize {
        self.ground
    }

    /// The subset behind vertex `v`, ascending.
    pub fn label(&self, v: usize) -> Vec<usize> {
        (0..self.ground).filter(|&x| self.labels[v] >> x & 1 == 1).collect()
    }

    pub fn vertex_of(&self, subset: &[usize]) -> Option<usize> {
        let mask = subset.iter().fold(0u64, |acc, &x| acc | 1 << x);
        self.labels.iter().position(|&l| l == mask)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a * self.words + b / 64] >> (b % 64) & 1 == 1
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v * self.words..(v + 1) * self.words]
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum()
    }

    pub fn edge_count(&self) -> usize {
        (0..self.vertex_count()).map(|v| self.degree(v)).sum::<usize>() / 2
    }

    pub fn is_independent(&self, set: &[usize]) -> bool {
        set.iter()
            .enumerate()
            .all(|(i, &a)| set[i + 1..].iter().all(|&b| !self.has_edge(a, b)))
    }

    pub fn is_clique(&self, set: &[usize]) -> bool {
        set.iter()
            .enumerate()
            .all(|(i, &a)| set[i + 1..].iter().all(|&b| a != b && self.has_edge(a, b)))
    }

    fn small_adjacency(&self, cap: usize) -> Result<Vec<u64>, GraphError> {
        let n = self.vertex_count();
        let cap = cap.min(DEFAULT_VERTEX_CAP);
        if n > cap {
            return Err(GraphError::CapExceeded { vertices: n, cap });
        }
        Ok((0..n).map(|v| self.adjacency[v * self.words]).collect())
    }

    /// A maximum clique, ascending.
    pub fn max_clique(&self) -> Result<Vec<usize>, GraphError> {
        let adj = self.small_adjacency(DEFAULT_VERTEX_CAP)?;
        let mask = color::max_clique(&adj);
        Ok((0..adj.len()).filter(|&v| mask >> v & 1 == 1).collect())
    }

    pub fn chromatic_number(&self) -> Result<Coloring, GraphError> {
        self.chromatic_number_with_cap(DEFAULT_VERTEX_CAP)
    }

    /// Exact `χ` by DSATUR branch and bound seeded with a maximum clique.
    /// Caps above 64 are clamped to 64.
    pub fn chromatic_number_with_cap(&self, cap: usize) -> Result<Coloring, GraphError> {
        let adj = self.small_adjacency(cap)?;
        let (chi, colors) = color::chromatic(&adj);
        let clique_bound = color::max_clique(&adj).count_ones() as usize;
        Ok(Coloring {
            chi,
            colors,
            clique_bound,
        })
    }

    /// DIMACS `.col` text with 1-based vertices.
    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        writeln!(out, "c ground set size {}", self.ground).unwrap();
        writeln!(out, "p edge {} {}", self.vertex_count(), self.edge_count()).unwrap();
        for a in 0..self.vertex_count() {
            for b in a + 1..self.vertex_count() {
                if self.has_edge(a, b) {
                    writeln!(out, "e {} {}", a + 1, b + 1).unwrap();
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Coloring {
    pub chi: usize,
    /// Colour of each vertex, in `0..chi`.
    pub colors: Vec<usize>,
    /// Size of a maximum clique.
    pub clique_bound: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KneserCheck {
    pub n: usize,
    pub k: usize,
    pub s: usize,
    /// `n − 2k + 2s + 2`.
    pub bound: i64,
    pub chi: usize,
    pub holds: bool,
}

/// Computes `χ(K(n, k, s))` exactly and compares it with `n − 2k + 2s + 2`.
pub fn check_kneser_lower_bound(n: usize, k: usize, s: usize) -> Result<KneserCheck, GraphError> {
    if !(s < k && k < n) {
        return Err(GraphError::BadParameters(format!("need s < k < n, got ({n}, {k}, {s})")));
    }
    let chi = Graph::kneser(n, k, s)?.chromatic_number()?.chi;
    let bound = n as i64 - 2 * k as i64 + 2 * s as i64 + 2;
    Ok(KneserCheck {
        n,
        k,
        s,
        bound,
        chi,
        holds: chi as i64 >= bound,
    })
}

/// Which splits `(A, M \ A)` fail EF-1 for each of `v_1, v_2, u_1, u_2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Ef1Cover {
    /// Vertices of `Γ(m)` (bitmask = agent 1's bundle) per row, ascending.
    pub failure_sets: [Vec<usize>; 4],
    pub independent: [bool; 4],
    /// Vertices outside every failure set, i.e. doubly EF-1 splits.
    pub uncovered: Vec<usize>,
    pub verdict: bool,
}

fn ef1_for(row: &[Rational], own: u64, other: u64) -> bool {
    let sum = |mask: u64| -> Rational { (0..row.len()).filter(|&g| mask >> g & 1 == 1).map(|g| &row[g]).sum() };
    let top = (0..row.len())
        .filter(|&g| other >> g & 1 == 1)
        .map(|g| row[g].clone())
        .max()
        .unwrap_or_else(Rational::zero);
    sum(own) >= sum(other) - top
}

/// For a two-agent instance, collects the EF-1 failure set of each of the four
/// rows, checks each is independent in `Γ(m)`, and checks that together they
/// leave some vertex uncovered.
pub fn non_ef1_independent_set(instance: &Instance, graph: &Graph) -> Result<Ef1Cover, GraphError> {
    let m = instance.m();
    if instance.n() != 2 {
        return Err(GraphError::DimensionMismatch(format!("need 2 agents, got {}", instance.n())));
    }
    if graph.ground_size() != m || graph.vertex_count() != 1 << m {
        return Err(GraphError::DimensionMismatch(format!(
            "graph is not Γ({m}) over the instance's {m} items"
        )));
    }
    let full = (1u64 << m) - 1;
    let rows = [
        (instance.v().row(0), true),
        (instance.v().row(1), false),
        (instance.u().row(0), true),
        (instance.u().row(1), false),
    ];
    let failure_sets: [Vec<usize>; 4] = rows.map(|(row, first)| {
        (0..graph.vertex_count())
            .filter(|&vtx| {
                let a = graph.labels[vtx];
                let (own, other) = if first { (a, full & !a) } else { (full & !a, a) };
                !ef1_for(row, own, other)
            })
            .collect()
    });
    let independent = [0, 1, 2, 3].map(|k| graph.is_independent(&failure_sets[k]));
    let mut covered = vec![false; graph.vertex_count()];
    for set in &failure_sets {
        set.iter().for_each(|&v| covered[v] = true);
    }
    let uncovered: Vec<usize> = (0..graph.vertex_count()).filter(|&v| !covered[v]).collect();
    let verdict = independent.iter().all(|&b| b) && !uncovered.is_empty();
    Ok(Ef1Cover {
        failure_sets,
        independent,
        uncovered,
        verdict,
    })
}
