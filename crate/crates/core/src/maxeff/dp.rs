use std::collections::HashMap;

use super::{finish, Guarantee, MaxEffError, MaxEffResult, Method};
use crate::fairness::Criterion;
use crate::model::{Allocation, Instance};
use crate::numeric::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DpConfig {
    pub max_agents: usize,
    /// Upper bound on the states stored in any one layer.
    pub max_states: usize,
}

impl Default for DpConfig {
    fn default() -> Self {
        DpConfig {
            max_agents: 4,
            max_states: 2_000_000,
        }
    }
}

struct Node {
    best: Rational,
    parent: usize,
    agent: usize,
}

/// [`maximize_binary_ef_dp_with`] under [`DpConfig::default`].
pub fn maximize_binary_ef_dp(instance: &Instance, c: usize) -> Result<MaxEffResult, MaxEffError> {
    maximize_binary_ef_dp_with(instance, c, DpConfig::default())
}

/// Forward DP over items in index order on the differences
/// `t_ij = v_i(A_i) − v_i(A_j)`; a final state is EF-c iff every `t_ij ≥ −c`.
pub fn maximize_binary_ef_dp_with(instance: &Instance, c: usize, config: DpConfig) -> Result<MaxEffResult, MaxEffError> {
    if !instance.v().is_binary() {
        return Err(MaxEffError::NotBinary);
    }
    let (n, m) = (instance.n(), instance.m());
    if n > config.max_agents {
        return Err(MaxEffError::TooManyAgents {
            n,
            max: config.max_agents,
        });
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|(i, j)| i != j)
        .collect();
    let v = instance.v();
    let u = instance.u();

    // layers[k] holds nodes for allocations of the first k items.
    let mut layers: Vec<Vec<Node>> = Vec::with_capacity(m + 1);
    let mut keys: Vec<Vec<i32>> = vec![vec![0; pairs.len()]];
    layers.push(vec![Node {
        best: Rational::zero(),
        parent: usize::MAX,
        agent: usize::MAX,
    }]);

    for g in 0..m {
        let mut index: HashMap<Vec<i32>, usize> = HashMap::new();
        let mut next_keys: Vec<Vec<i32>> = Vec::new();
        let mut next: Vec<Node> = Vec::new();
        for (p, state) in keys.iter().enumerate() {
            for a in 0..n {
                let key: Vec<i32> = pairs
                    .iter()
                    .zip(state)
                    .map(|(&(i, j), &t)| {
                        let w = if v.value(i, g).is_one() { 1 } else { 0 };
                        if i == a {
                            t + w
                        } else if j == a {
                            t - w
                        } else {
                            t
                        }
                    })
                    .collect();
                let value = &layers[g][p].best + u.value(a, g);
                match index.get(&key) {
                    Some(&k) => {
                        if value > next[k].best {
                            next[k] = Node {
                                best: value,
                                parent: p,
                                agent: a,
                            };
                        }
                    }
                    None => {
                        if next.len() == config.max_states {
                            return Err(MaxEffError::StateSpaceExceeded {
                                cap: config.max_states,
                            });
                        }
                        index.insert(key.clone(), next.len());
                        next_keys.push(key);
                        next.push(Node {
                            best: value,
                            parent: p,
                            agent: a,
                        });
                    }
                }
            }
        }
        layers.push(next);
        keys = next_keys;
    }

    let bound = -(c as i32);
    let mut winner: Option<usize> = None;
    for (k, state) in keys.iter().enumerate() {
        if state.iter().all(|&t| t >= bound) && winner.is_none_or(|w| layers[m][k].best > layers[m][w].best) {
            winner = Some(k);
        }
    }
    let mut node = winner.ok_or(MaxEffError::NoFeasibleAllocation)?;
    let mut owners = vec![0; m];
    for g in (0..m).rev() {
        let Node { parent, agent, .. } = layers[g + 1][node];
        owners[g] = agent;
        node = parent;
    }
    let allocation = Allocation::from_owners(&owners, n).expect("owners are agents");
    finish(instance, allocation, Criterion::Ef, c, Method::DpBinary, Guarantee::Exact)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_example() {
        let inst = Instance::from_integers(&[vec![1, 1, 0], vec![0, 1, 1]], &[vec![3, 1, 0], vec![0, 1, 2]]).unwrap();
        let r = maximize_binary_ef_dp(&inst, 1).unwrap();
        // g0 → 0, g2 → 1, g1 either way: 3 + 1 + 2.
        assert_eq!(r.objective, Rational::from(6));
    }

    #[test]
    fn zero_agents_valuations_are_unconstrained() {
        let inst = Instance::from_integers(&vec![vec![0; 4]; 3], &[vec![1, 0, 2, 0], vec![0, 3, 0, 0], vec![1, 1, 1, 1]]).unwrap();
        let r = maximize_binary_ef_dp(&inst, 0).unwrap();
        assert_eq!(r.objective, Rational::from(1 + 3 + 2 + 1));
    }

    #[test]
    fn guards() {
        let inst = Instance::from_integers(&vec![vec![1, 1]; 5], &vec![vec![1, 1]; 5]).unwrap();
        assert_eq!(
            maximize_binary_ef_dp(&inst, 1),
            Err(MaxEffError::TooManyAgents { n: 5, max: 4 })
        );
        let inst = Instance::from_integers(&vec![vec![1; 6]; 3], &vec![vec![1; 6]; 3]).unwrap();
        let tiny = DpConfig {
            max_agents: 4,
            max_states: 3,
        };
        assert_eq!(
            maximize_binary_ef_dp_with(&inst, 1, tiny),
            Err(MaxEffError::StateSpaceExceeded { cap: 3 })
        );
        // Two agents, one item both value: EF-0 impossible.
        let inst = Instance::from_integers(&vec![vec![1]; 2], &vec![vec![1]; 2]).unwrap();
        assert_eq!(maximize_binary_ef_dp(&inst, 0), Err(MaxEffError::NoFeasibleAllocation));
    }
}
