use super::{finish, Guarantee, MaxEffError, MaxEffResult, Method};
use crate::fairness::Criterion;
use crate::model::{Allocation, Instance};
use crate::numeric::{is_totally_unimodular_bipartite_form, solve_vertex_optimal, LinearProgram, LpError, Rational, Relation};

/// `max Σ u_i(g_j)·x_ij` s.t. `Σ_j v_i(g_j)·x_ij ≥ ⌈v_i(M)/n⌉ − c`, `Σ_i x_ij ≤ 1`, `x ≥ 0`.
///
/// Variable `x_ij` has index `i·m + j`. Fairness rows come first, then capacity rows.
pub fn binary_prop_program(instance: &Instance, c: usize) -> LinearProgram {
    let (n, m) = (instance.n(), instance.m());
    let objective = (0..n)
        .flat_map(|i| instance.u().row(i).iter().cloned())
        .collect();
    let mut lp = LinearProgram::new(objective);
    for i in 0..n {
        let mut row = vec![Rational::zero(); n * m];
        row[i * m..(i + 1) * m].clone_from_slice(instance.v().row(i));
        let share = (instance.v().total(i) / Rational::from(n)).ceil();
        lp.add_constraint(row, Relation::Ge, share - Rational::from(c));
    }
    for j in 0..m {
        let mut row = vec![Rational::zero(); n * m];
        for i in 0..n {
            row[i * m + j] = Rational::one();
        }
        lp.add_constraint(row, Relation::Le, Rational::one());
    }
    lp
}

/// Exact PROP-c optimum for binary `v` through an integral LP vertex.
pub fn maximize_binary_prop_lp(instance: &Instance, c: usize) -> Result<MaxEffResult, MaxEffError> {
    if !instance.v().is_binary() {
        return Err(MaxEffError::NotBinary);
    }
    let (n, m) = (instance.n(), instance.m());
    let lp = binary_prop_program(instance, c);
    let matrix: Vec<Vec<Rational>> = lp.constraints.iter().map(|r| r.coefficients.clone()).collect();
    if !is_totally_unimodular_bipartite_form(&matrix).map_err(|_| MaxEffError::NotTotallyUnimodular)? {
        return Err(MaxEffError::NotTotallyUnimodular);
    }
    let solution = match solve_vertex_optimal(&lp) {
        Ok(s) => s,
        Err(LpError::Infeasible) => return Err(MaxEffError::NoFeasibleAllocation),
        Err(e) => return Err(MaxEffError::Lp(e)),
    };

    let mut owner: Vec<Option<usize>> = vec![None; m];
    for i in 0..n {
        for j in 0..m {
            let x = &solution.values[i * m + j];
            if !x.is_integer() {
                return Err(MaxEffError::NonIntegralVertex {
                    agent: i,
                    item: j,
                    value: x.clone(),
                });
            }
            if x.is_one() {
                owner[j] = Some(i);
            }
        }
    }
    let owners: Vec<usize> = owner.into_iter().map(|o| o.unwrap_or(0)).collect();
    let allocation = Allocation::from_owners(&owners, n).expect("owners are agents");
    let result = finish(instance, allocation, Criterion::Prop, c, Method::LpBinary, Guarantee::Exact)?;
    debug_assert_eq!(result.objective, solution.objective_value);
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_example() {
        let inst = Instance::from_integers(&[vec![1, 1], vec![1, 1]], &[vec![5, 4], vec![0, 3]]).unwrap();
        let r = maximize_binary_prop_lp(&inst, 0).unwrap();
        assert_eq!(r.objective, Rational::from(8));
        assert_eq!(r.allocation.bundles(), &[vec![0], vec![1]]);
    }

    #[test]
    fn vacuous_rows_give_the_unconstrained_optimum() {
        let inst = Instance::from_integers(&[vec![1, 1, 0], vec![0, 1, 1]], &[vec![5, 4, 1], vec![0, 3, 2]]).unwrap();
        let r = maximize_binary_prop_lp(&inst, 2).unwrap();
        assert_eq!(r.objective, Rational::from(5 + 4 + 2));
    }

    #[test]
    fn infeasible_and_non_binary() {
        // One item, two agents who both want it with c = 0.
        let inst = Instance::from_integers(&[vec![1], vec![1]], &[vec![1], vec![1]]).unwrap();
        assert_eq!(maximize_binary_prop_lp(&inst, 0), Err(MaxEffError::NoFeasibleAllocation));
        let inst = Instance::from_integers(&[vec![2]], &[vec![1]]).unwrap();
        assert_eq!(maximize_binary_prop_lp(&inst, 0), Err(MaxEffError::NotBinary));
    }
}
