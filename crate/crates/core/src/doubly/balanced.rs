use serde::Serialize;

use super::DoublyError;
use crate::fairness::top_values;
use crate::model::{Allocation, Instance, ValuationProfile};
use crate::numeric::{solve_vertex_optimal, LinearProgram, Rational, Relation, VariableBounds};

/// A two-way split of an item set between agent groups `N1` and `N2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BalancedSplit {
    pub x1: Vec<usize>,
    pub x2: Vec<usize>,
    /// LP value of each item, in the order of the split's item list.
    pub lp_values: Vec<Rational>,
    /// Number of items with a strictly fractional LP value.
    pub fractional: usize,
}

fn group_value(profile: &ValuationProfile, agent: usize, items: &[usize]) -> Rational {
    profile.bundle_value(agent, items)
}

/// Checks `w(X1) ≥ |N1|/n·w(M) − L(w, k1, X2)` for every `v_i, u_i` with `i ∈ N1`
/// and the mirrored inequality with `k2` for `N2`, where `M = X1 ∪ X2`.
#[allow(clippy::too_many_arguments)]
pub fn is_two_balanced_prop(
    instance: &Instance,
    n1: &[usize],
    n2: &[usize],
    x1: &[usize],
    x2: &[usize],
    k1: usize,
    k2: usize,
) -> bool {
    let n = Rational::from(n1.len() + n2.len());
    let items: Vec<usize> = x1.iter().chain(x2).copied().collect();
    let side_ok = |group: &[usize], mine: &[usize], theirs: &[usize], k: usize| {
        let share = Rational::from(group.len()) / &n;
        group.iter().all(|&i| {
            [instance.v(), instance.u()].iter().all(|w| {
                let total = group_value(w, i, &items);
                group_value(w, i, mine) >= &share * &total - top_values(w.row(i), k, theirs)
            })
        })
    };
    side_ok(n1, x1, x2, k1) && side_ok(n2, x2, x1, k2)
}

/// The LP split of `items` for groups `N1`, `N2`, followed by rounding of the
/// fractional items in list order. The result is 2-balanced PROP-`(n−1, n)`.
pub fn balanced_split_on(
    instance: &Instance,
    n1: &[usize],
    n2: &[usize],
    items: &[usize],
) -> Result<BalancedSplit, DoublyError> {
    let n = n1.len() + n2.len();
    if n1.len() != n / 2 || n2.len() != n.div_ceil(2) || n1.is_empty() {
        return Err(DoublyError::BadPartition(format!(
            "|N1| = {}, |N2| = {}, expected {} and {}",
            n1.len(),
            n2.len(),
            n / 2,
            n.div_ceil(2)
        )));
    }
    let share = Rational::new((n / 2) as i64, n as i64);
    let restrict = |w: &ValuationProfile, i: usize| -> Vec<Rational> { items.iter().map(|&g| w.value(i, g).clone()).collect() };
    let lead = n1[0];

    let objective = restrict(instance.v(), lead);
    let mut lp = LinearProgram::new(objective.clone());
    lp.objective_offset = -(&share * objective.iter().sum::<Rational>());
    for j in 0..items.len() {
        lp.set_bounds(j, VariableBounds::between(Rational::zero(), Rational::one()));
    }
    let mut add_row = |row: Vec<Rational>, relation: Relation| {
        let rhs = &share * row.iter().sum::<Rational>();
        lp.add_constraint(row, relation, rhs);
    };
    for &i in n1 {
        add_row(restrict(instance.u(), i), Relation::Ge);
    }
    for &i in &n1[1..] {
        add_row(restrict(instance.v(), i), Relation::Ge);
    }
    for &i in n2 {
        add_row(restrict(instance.u(), i), Relation::Le);
        add_row(restrict(instance.v(), i), Relation::Le);
    }

    let solution = solve_vertex_optimal(&lp)?;
    if solution.objective_value.is_negative() {
        return Err(DoublyError::Invariant("split LP optimum is negative".into()));
    }
    let fractional: Vec<usize> = (0..items.len())
        .filter(|&j| !solution.values[j].is_integer())
        .collect();
    let take = fractional.len().div_ceil(2);
    let mut x1: Vec<usize> = (0..items.len())
        .filter(|&j| solution.values[j].is_one())
        .chain(fractional[..take].iter().copied())
        .map(|j| items[j])
        .collect();
    x1.sort_unstable();
    let x2: Vec<usize> = items.iter().copied().filter(|g| x1.binary_search(g).is_err()).collect();

    if !is_two_balanced_prop(instance, n1, n2, &x1, &x2, n - 1, n) {
        return Err(DoublyError::Invariant("rounded split is not 2-balanced PROP-(n-1, n)".into()));
    }
    Ok(BalancedSplit {
        x1,
        x2,
        fractional: fractional.len(),
        lp_values: solution.values,
    })
}

/// [`balanced_split_on`] over all items.
pub fn balanced_split(instance: &Instance, n1: &[usize], n2: &[usize]) -> Result<BalancedSplit, DoublyError> {
    let items: Vec<usize> = (0..instance.m()).collect();
    balanced_split_on(instance, n1, n2, &items)
}

fn recurse(instance: &Instance, agents: &[usize], items: Vec<usize>, bundles: &mut [Vec<usize>]) -> Result<(), DoublyError> {
    if agents.len() == 1 {
        bundles[agents[0]] = items;
        return Ok(());
    }
    let (n1, n2) = agents.split_at(agents.len() / 2);
    let split = balanced_split_on(instance, n1, n2, &items)?;
    recurse(instance, n1, split.x1, bundles)?;
    recurse(instance, n2, split.x2, bundles)
}

/// Recursive halving: split the agents by index, split the items with the LP,
/// recurse on each side. The result is doubly PROP-`2⌈log₂ n⌉`.
pub fn solve_doubly_prop_log(instance: &Instance) -> Result<Allocation, DoublyError> {
    let agents: Vec<usize> = (0..instance.n()).collect();
    let mut bundles = vec![Vec::new(); instance.n()];
    recurse(instance, &agents, (0..instance.m()).collect(), &mut bundles)?;
    Ok(Allocation::new(bundles, instance.m()).expect("splits partition the items"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doubly::log_prop_slack;
    use crate::fairness::{check_doubly, Criterion};

    #[test]
    fn uniform_two_agents() {
        let inst = Instance::from_integers(&vec![vec![1; 6]; 2], &vec![vec![1; 6]; 2]).unwrap();
        let split = balanced_split(&inst, &[0], &[1]).unwrap();
        assert!(is_two_balanced_prop(&inst, &[0], &[1], &split.x1, &split.x2, 0, 0));
    }

    #[test]
    fn uniform_lp_optimum_is_zero() {
        let inst = Instance::from_integers(&vec![vec![2; 5]; 3], &vec![vec![2; 5]; 3]).unwrap();
        let split = balanced_split(&inst, &[0], &[1, 2]).unwrap();
        let ones = split.lp_values.iter().sum::<Rational>();
        // objective = 2·Σx − (1/3)·10; optimum is where Σx = 5/3
        assert_eq!(ones, Rational::new(5, 3));
        assert!(split.fractional < 2 * 3);
    }

    #[test]
    fn rejects_unbalanced_partition() {
        let inst = Instance::from_integers(&vec![vec![1]; 3], &vec![vec![1]; 3]).unwrap();
        assert!(matches!(balanced_split(&inst, &[0, 1], &[2]), Err(DoublyError::BadPartition(_))));
    }

    #[test]
    fn single_agent_takes_everything() {
        let inst = Instance::from_integers(&[vec![1, 2, 3]], &[vec![0, 1, 0]]).unwrap();
        let a = solve_doubly_prop_log(&inst).unwrap();
        assert_eq!(a.bundle(0), &[0, 1, 2]);
        assert!(check_doubly(&inst, &a, Criterion::Prop, 0).unwrap().verdict);
    }

    #[test]
    fn slack_values() {
        assert_eq!(
            (1..=9).map(log_prop_slack).collect::<Vec<_>>(),
            vec![0, 2, 4, 4, 6, 6, 6, 6, 8]
        );
    }
}
