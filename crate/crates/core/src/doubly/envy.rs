use std::collections::BTreeSet;

use crate::model::{Allocation, ValuationProfile};
use crate::numeric::Rational;

/// Edge `i → j` iff `v_i(A_i) < v_i(A_j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvyGraph {
    envies: Vec<Vec<bool>>,
}

impl EnvyGraph {
    pub fn from_bundles(profile: &ValuationProfile, bundles: &[Vec<usize>]) -> Self {
        let n = bundles.len();
        let values: Vec<Vec<Rational>> = (0..n)
            .map(|i| bundles.iter().map(|b| profile.bundle_value(i, b)).collect())
            .collect();
        let envies = (0..n)
            .map(|i| (0..n).map(|j| values[i][i] < values[i][j]).collect())
            .collect();
        EnvyGraph { envies }
    }

    pub fn n(&self) -> usize {
        self.envies.len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.envies[i][j]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.envies[i][j])
            .collect()
    }

    /// A directed cycle, found by depth-first search from the lowest vertex.
    pub fn find_cycle(&self) -> Option<Vec<usize>> {
        let n = self.n();
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; n];
        let mut path: Vec<usize> = Vec::new();
        for root in 0..n {
            if state[root] != 0 {
                continue;
            }
            let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
            state[root] = 1;
            path.push(root);
            while let Some(&mut (v, ref mut next)) = stack.last_mut() {
                if let Some(w) = (*next..n).find(|&w| self.envies[v][w]) {
                    *next = w + 1;
                    match state[w] {
                        0 => {
                            state[w] = 1;
                            path.push(w);
                            stack.push((w, 0));
                        }
                        1 => {
                            let start = path.iter().position(|&x| x == w).unwrap();
                            return Some(path[start..].to_vec());
                        }
                        _ => {}
                    }
                } else {
                    state[v] = 2;
                    path.pop();
                    stack.pop();
                }
            }
        }
        None
    }

    pub fn is_acyclic(&self) -> bool {
        self.find_cycle().is_none()
    }

    /// Kahn's order taking the lowest-index source first; `None` on a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.n();
        let mut indegree: Vec<usize> = (0..n).map(|j| (0..n).filter(|&i| self.envies[i][j]).count()).collect();
        let mut ready: BTreeSet<usize> = (0..n).filter(|&j| indegree[j] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for w in 0..n {
                if self.envies[v][w] {
                    indegree[w] -= 1;
                    if indegree[w] == 0 {
                        ready.insert(w);
                    }
                }
            }
        }
        (order.len() == n).then_some(order)
    }
}

/// Rotates bundles along envy cycles until the envy graph is acyclic.
pub(crate) fn eliminate_cycles_in(profile: &ValuationProfile, bundles: &mut [Vec<usize>]) {
    loop {
        let graph = EnvyGraph::from_bundles(profile, bundles);
        let Some(cycle) = graph.find_cycle() else {
            return;
        };
        // Each agent on the cycle takes the bundle it envies.
        let taken: Vec<Vec<usize>> = cycle
            .iter()
            .enumerate()
            .map(|(k, _)| bundles[cycle[(k + 1) % cycle.len()]].clone())
            .collect();
        for (agent, bundle) in cycle.iter().zip(taken) {
            bundles[*agent] = bundle;
        }
    }
}

/// Cycle elimination on a complete allocation under `profile`.
pub fn eliminate_cycles(profile: &ValuationProfile, allocation: &Allocation) -> Allocation {
    let mut bundles = allocation.bundles().to_vec();
    eliminate_cycles_in(profile, &mut bundles);
    Allocation::new(bundles, allocation.m()).expect("a bundle permutation stays a partition")
}
