use serde::Serialize;

use super::DoublyError;
use crate::model::{bivalued_partition, Allocation, BivaluedPartition, Instance, ValuationProfile};
use crate::numeric::Rational;

/// Per-agent counts behind `κ_i^(j) = |A_i ∩ S_i^j| − |P ∩ S_i^j| / n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KappaState {
    n: usize,
    own: Vec<[usize; 4]>,
    allocated: Vec<[usize; 4]>,
}

impl KappaState {
    pub fn new(n: usize) -> Self {
        KappaState {
            n,
            own: vec![[0; 4]; n],
            allocated: vec![[0; 4]; n],
        }
    }

    fn record(&mut self, partitions: &[BivaluedPartition], agent: usize, item: usize) {
        for (i, part) in partitions.iter().enumerate() {
            let class = part.class_of(item);
            self.allocated[i][class] += 1;
            if i == agent {
                self.own[i][class] += 1;
            }
        }
    }

    /// `κ_i^(j)` with `j` in `0..4` standing for `S^1..S^4`.
    pub fn kappa(&self, agent: usize, class: usize) -> Rational {
        Rational::from(self.own[agent][class]) - Rational::new(self.allocated[agent][class] as i64, self.n as i64)
    }

    /// `κ_i^(1) + κ_i^(2)` and `κ_i^(1) + κ_i^(3)`.
    pub fn sums(&self, agent: usize) -> (Rational, Rational) {
        let k1 = self.kappa(agent, 0);
        (&k1 + self.kappa(agent, 1), k1 + self.kappa(agent, 2))
    }

    /// Both sums are at least `-2`, and they are not both below `-1`.
    pub fn invariants_hold(&self) -> bool {
        let (minus_one, minus_two) = (Rational::from(-1), Rational::from(-2));
        (0..self.n).all(|i| {
            let (a, b) = self.sums(i);
            a >= minus_two && b >= minus_two && !(a < minus_one && b < minus_one)
        })
    }
}

/// One pick of the algorithm and the κ values right after it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KappaStep {
    pub agent: usize,
    pub item: usize,
    /// Class of `item` for the picking agent, `0..4`.
    pub class: usize,
    /// `kappas[i][j]` after the pick.
    pub kappas: Vec<[Rational; 4]>,
    pub invariants_hold: bool,
}

fn partitions(instance: &Instance) -> Result<Vec<BivaluedPartition>, DoublyError> {
    (0..instance.n())
        .map(|i| bivalued_partition(instance, i).map_err(DoublyError::from))
        .collect()
}

/// Round robin over class-preferring picks, recording κ after every pick.
pub fn solve_bivalued_prop2_traced(instance: &Instance) -> Result<(Allocation, Vec<KappaStep>), DoublyError> {
    let parts = partitions(instance)?;
    let (n, m) = (instance.n(), instance.m());
    let mut taken = vec![false; m];
    let mut bundles = vec![Vec::new(); n];
    let mut state = KappaState::new(n);
    let mut trace = Vec::with_capacity(m);
    let mut remaining = m;

    let first_free = |set: &[usize], taken: &[bool]| set.iter().copied().find(|&g| !taken[g]);

    while remaining > 0 {
        for i in 0..n {
            if remaining == 0 {
                break;
            }
            let sets = &parts[i].sets;
            let free: Vec<Option<usize>> = sets.iter().map(|s| first_free(s, &taken)).collect();
            let pick = match (free[0], free[1], free[2]) {
                (Some(g), _, _) => (g, 0),
                (None, Some(g2), Some(g3)) => {
                    if state.kappa(i, 1) <= state.kappa(i, 2) {
                        (g2, 1)
                    } else {
                        (g3, 2)
                    }
                }
                (None, Some(g), None) => (g, 1),
                (None, None, Some(g)) => (g, 2),
                (None, None, None) => (free[3].expect("some item is unallocated"), 3),
            };
            let (item, class) = pick;
            taken[item] = true;
            remaining -= 1;
            bundles[i].push(item);
            state.record(&parts, i, item);
            trace.push(KappaStep {
                agent: i,
                item,
                class,
                kappas: (0..n)
                    .map(|a| std::array::from_fn(|j| state.kappa(a, j)))
                    .collect(),
                invariants_hold: state.invariants_hold(),
            });
        }
    }
    Ok((Allocation::new(bundles, m).expect("each item picked once"), trace))
}

/// Doubly PROP-2 allocation for personalized bi-valued `v` and `u`.
pub fn solve_bivalued_prop2(instance: &Instance) -> Result<Allocation, DoublyError> {
    solve_bivalued_prop2_traced(instance).map(|(a, _)| a)
}

fn bound_holds(profile: &ValuationProfile, allocation: &Allocation, p: &Rational, q: &Rational, agent: usize) -> bool {
    let n = Rational::from(allocation.n());
    let own = profile.bundle_value(agent, allocation.bundle(agent));
    own >= profile.total(agent) / n - q - q + p
}

/// `w_i(A_i) ≥ w_i(M)/n − 2q_{i,w} + p_{i,w}` for every agent and both `w = v, u`.
pub fn bivalued_bound_holds(instance: &Instance, allocation: &Allocation) -> Result<bool, DoublyError> {
    let parts = partitions(instance)?;
    Ok(parts.iter().enumerate().all(|(i, part)| {
        bound_holds(instance.v(), allocation, &part.p_v, &part.q_v, i)
            && bound_holds(instance.u(), allocation, &part.p_u, &part.q_u, i)
    }))
}
