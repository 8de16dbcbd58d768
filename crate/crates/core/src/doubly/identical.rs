use super::envy::{eliminate_cycles_in, EnvyGraph};
use super::DoublyError;
use crate::fairness::{holds, Criterion};
use crate::model::{Allocation, Instance, ValuationProfile};
use crate::numeric::Rational;

/// Pads every row of `profile` with `extra` zero-valued items.
pub(crate) fn pad_profile(profile: &ValuationProfile, extra: usize) -> ValuationProfile {
    let rows = profile
        .rows()
        .iter()
        .map(|r| {
            let mut r = r.clone();
            r.resize(r.len() + extra, Rational::zero());
            r
        })
        .collect();
    ValuationProfile::new(rows).expect("padding keeps a valid profile")
}

/// Envy-cycle round robin over items in descending allocator value.
///
/// Requires all rows of `u` to be equal. The result is EF-1 under `v` and under `u`.
pub fn solve_identical_allocator_ef1(instance: &Instance) -> Result<Allocation, DoublyError> {
    if !instance.u().has_identical_rows() {
        return Err(DoublyError::NotIdenticalAllocator);
    }
    let (n, m) = (instance.n(), instance.m());
    let padded_m = m.div_ceil(n) * n;
    let v = pad_profile(instance.v(), padded_m - m);
    let u = pad_profile(instance.u(), padded_m - m);

    let mut order: Vec<usize> = (0..padded_m).collect();
    order.sort_by(|&a, &b| u.value(0, b).cmp(u.value(0, a)));

    let mut bundles: Vec<Vec<usize>> = vec![Vec::new(); n];
    for round in order.chunks(n) {
        let mut pool: Vec<usize> = round.to_vec();
        let graph = EnvyGraph::from_bundles(&v, &bundles);
        let agents = graph
            .topological_order()
            .ok_or_else(|| DoublyError::Invariant("envy graph has a cycle between rounds".into()))?;
        for i in agents {
            let pick = (0..pool.len())
                .max_by(|&a, &b| {
                    v.value(i, pool[a])
                        .cmp(v.value(i, pool[b]))
                        .then(pool[b].cmp(&pool[a]))
                })
                .expect("one item per agent per round");
            bundles[i].push(pool.swap_remove(pick));
        }
        eliminate_cycles_in(&v, &mut bundles);
        debug_assert!(holds(&v, &bundles, Criterion::Ef, 1), "round left agents' EF-1");
        debug_assert!(holds(&u, &bundles, Criterion::Ef, 1), "round left allocator's EF-1");
    }

    for bundle in bundles.iter_mut() {
        bundle.retain(|&g| g < m);
    }
    Ok(Allocation::new(bundles, m).expect("every real item is assigned once"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fairness::check_doubly;

    #[test]
    fn fewer_items_than_agents() {
        let inst = Instance::from_integers(&[vec![1, 2], vec![2, 1], vec![0, 0]], &vec![vec![0, 0]; 3]).unwrap();
        let a = solve_identical_allocator_ef1(&inst).unwrap();
        assert!(a.bundles().iter().all(|b| b.len() <= 1));
        assert!(check_doubly(&inst, &a, Criterion::Ef, 1).unwrap().verdict);
    }

    #[test]
    fn small_shared_allocator() {
        let inst = Instance::from_integers(&[vec![2, 1, 0, 0], vec![0, 1, 2, 0]], &vec![vec![3, 2, 1, 0]; 2]).unwrap();
        let a = solve_identical_allocator_ef1(&inst).unwrap();
        assert!(check_doubly(&inst, &a, Criterion::Ef, 1).unwrap().verdict);
    }

    #[test]
    fn rejects_distinct_allocator_rows() {
        let inst = Instance::from_integers(&[vec![1], vec![1]], &[vec![1], vec![2]]).unwrap();
        assert_eq!(solve_identical_allocator_ef1(&inst), Err(DoublyError::NotIdenticalAllocator));
    }
}
