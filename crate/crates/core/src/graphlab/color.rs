//! Exact maximum clique and chromatic number on graphs of at most 64 vertices.

fn bits(mut set: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        (set != 0).then(|| {
            let v = set.trailing_zeros() as usize;
            set &= set - 1;
            v
        })
    })
}

/// Bron–Kerbosch with pivoting; returns a maximum clique as a bitmask.
pub(crate) fn max_clique(adj: &[u64]) -> u64 {
    fn expand(adj: &[u64], r: u64, mut p: u64, mut x: u64, best: &mut u64) {
        if p == 0 {
            if x == 0 && r.count_ones() > best.count_ones() {
                *best = r;
            }
            return;
        }
        if r.count_ones() + p.count_ones() <= best.count_ones() {
            return;
        }
        let pivot = bits(p | x).max_by_key(|&u| (adj[u] & p).count_ones()).expect("p nonempty");
        for v in bits(p & !adj[pivot]) {
            expand(adj, r | 1 << v, p & adj[v], x & adj[v], best);
            p &= !(1 << v);
            x |= 1 << v;
        }
    }
    let all = if adj.len() == 64 { u64::MAX } else { (1u64 << adj.len()) - 1 };
    let mut best = 0;
    expand(adj, 0, all, 0, &mut best);
    best
}

struct Search<'a> {
    adj: &'a [u64],
    colors: Vec<Option<usize>>,
    uncolored: u64,
    /// `counts[v][c]` counts neighbours of `v` coloured `c`.
    counts: Vec<Vec<u32>>,
    /// Bit `c` of `seen[v]` is set while some neighbour of `v` has colour `c`.
    seen: Vec<u64>,
    best: Vec<usize>,
    best_k: usize,
    lower: usize,
}

impl Search<'_> {
    fn assign(&mut self, v: usize, c: usize) {
        self.colors[v] = Some(c);
        self.uncolored &= !(1 << v);
        for u in bits(self.adj[v]) {
            self.counts[u][c] += 1;
            self.seen[u] |= 1 << c;
        }
    }

    fn unassign(&mut self, v: usize, c: usize) {
        self.colors[v] = None;
        self.uncolored |= 1 << v;
        for u in bits(self.adj[v]) {
            self.counts[u][c] -= 1;
            if self.counts[u][c] == 0 {
                self.seen[u] &= !(1 << c);
            }
        }
    }

    /// DSATUR choice: most distinct neighbour colours; ties go to the vertex
    /// sharing the most still-open colours with the other tied vertices it
    /// touches, then to the lowest index.
    fn pick(&self, used: usize) -> Option<usize> {
        let top = bits(self.uncolored).map(|v| self.seen[v].count_ones()).max()?;
        let tied: u64 = bits(self.uncolored)
            .filter(|&v| self.seen[v].count_ones() == top)
            .fold(0, |acc, v| acc | 1 << v);
        if tied.count_ones() == 1 {
            return Some(tied.trailing_zeros() as usize);
        }
        let open = if used >= 64 { u64::MAX } else { (1u64 << used) - 1 };
        bits(tied).max_by_key(|&v| {
            let mine = !self.seen[v] & open;
            let shared: u32 = bits(self.adj[v] & tied).map(|u| (mine & !self.seen[u]).count_ones()).sum();
            (shared, (self.adj[v] & self.uncolored).count_ones(), std::cmp::Reverse(v))
        })
    }

    fn run(&mut self, used: usize) {
        if self.best_k <= self.lower {
            return;
        }
        let Some(v) = self.pick(used) else {
            self.best_k = used;
            self.best = self.colors.iter().map(|c| c.expect("all coloured")).collect();
            return;
        };
        // colours 0..used, then one fresh colour, all below the incumbent
        let limit = (used + 1).min(self.best_k - 1);
        let allowed = !self.seen[v] & if limit >= 64 { u64::MAX } else { (1u64 << limit) - 1 };
        for c in bits(allowed) {
            self.assign(v, c);
            self.run(used.max(c + 1));
            self.unassign(v, c);
            if self.best_k <= self.lower {
                return;
            }
        }
    }
}

/// Exact chromatic number and an optimal colouring.
pub(crate) fn chromatic(adj: &[u64]) -> (usize, Vec<usize>) {
    let n = adj.len();
    if n == 0 {
        return (0, Vec::new());
    }
    let clique = max_clique(adj);
    let mut search = Search {
        adj,
        colors: vec![None; n],
        uncolored: if n == 64 { u64::MAX } else { (1u64 << n) - 1 },
        counts: vec![vec![0; n]; n],
        seen: vec![0; n],
        best: (0..n).collect(),
        best_k: n + 1,
        lower: clique.count_ones() as usize,
    };
    // Seed the clique with distinct colours; this loses no generality.
    let seeded: Vec<usize> = bits(clique).collect();
    for (c, &v) in seeded.iter().enumerate() {
        search.assign(v, c);
    }
    search.run(seeded.len());
    (search.best_k, search.best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_edges(n: usize, edges: &[(usize, usize)]) -> Vec<u64> {
        let mut adj = vec![0u64; n];
        for &(a, b) in edges {
            adj[a] |= 1 << b;
            adj[b] |= 1 << a;
        }
        adj
    }

    fn proper(adj: &[u64], colors: &[usize]) -> bool {
        (0..adj.len()).all(|v| bits(adj[v]).all(|u| colors[u] != colors[v]))
    }

    #[test]
    fn small_graphs() {
        assert_eq!(chromatic(&from_edges(4, &[])).0, 1);
        let odd_cycle = from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);
        let (k, colors) = chromatic(&odd_cycle);
        assert_eq!(k, 3);
        assert!(proper(&odd_cycle, &colors));
        assert_eq!(max_clique(&odd_cycle).count_ones(), 2);
        let k4 = from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert_eq!(chromatic(&k4).0, 4);
    }

    #[test]
    fn brute_force_agreement() {
        // Every graph on 5 vertices: compare with trying all colourings.
        let pairs: Vec<(usize, usize)> = (0..5).flat_map(|a| (a + 1..5).map(move |b| (a, b))).collect();
        for mask in 0u32..1 << pairs.len() {
            let edges: Vec<_> = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
            let adj = from_edges(5, &edges);
            let brute = (1usize..=5)
                .find(|&k| {
                    (0..k.pow(5)).any(|code| {
                        let colors: Vec<usize> = (0..5).map(|v| code / k.pow(v as u32) % k).collect();
                        proper(&adj, &colors)
                    })
                })
                .unwrap();
            let (got, colors) = chromatic(&adj);
            assert_eq!(got, brute, "mask {mask}");
            assert!(proper(&adj, &colors));
        }
    }
}
