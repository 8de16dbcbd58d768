use std::fmt;

use serde::Serialize;

use super::identical::pad_profile;
use super::DoublyError;
use crate::fairness::{holds, Criterion};
use crate::model::{Allocation, Instance};

/// One `+`/`-` label per group: `+` puts `a_i` in agent 1's bundle, `-` puts `b_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct LabelSequence(pub Vec<bool>);

impl fmt::Display for LabelSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &plus in &self.0 {
            f.write_str(if plus { "+" } else { "-" })?;
        }
        Ok(())
    }
}

/// The `k + 1` sequences: alternating `+-+-…`, then each next one flips every
/// label except the `(i+1)`-th.
pub fn label_sequences(k: usize) -> Vec<LabelSequence> {
    let mut current: Vec<bool> = (0..k).map(|i| i % 2 == 0).collect();
    let mut out = vec![LabelSequence(current.clone())];
    for i in 0..k {
        for (j, label) in current.iter_mut().enumerate() {
            if j != i {
                *label = !*label;
            }
        }
        out.push(LabelSequence(current.clone()));
    }
    out
}

/// The groups and candidate bundles for agent 1 over the padded item set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TwoAgentCandidates {
    /// Items including zero-valued dummies `m..padded_m`.
    pub padded_m: usize,
    /// `(a_i, b_i)` sorted by descending `u_1(a_i) - u_1(b_i)`.
    pub groups: Vec<(usize, usize)>,
    pub sequences: Vec<LabelSequence>,
    /// Agent 1's bundle for each sequence, ascending.
    pub first_bundles: Vec<Vec<usize>>,
}

pub fn two_agent_candidates(instance: &Instance) -> Result<TwoAgentCandidates, DoublyError> {
    if instance.n() != 2 {
        return Err(DoublyError::NotTwoAgents(instance.n()));
    }
    let m = instance.m();
    let padded_m = m.div_ceil(4) * 4;
    let v = pad_profile(instance.v(), padded_m - m);
    let u = pad_profile(instance.u(), padded_m - m);

    let mut by_v: Vec<usize> = (0..padded_m).collect();
    by_v.sort_by(|&a, &b| v.value(0, b).cmp(v.value(0, a)));
    let mut groups: Vec<(usize, usize)> = by_v
        .chunks(2)
        .map(|pair| {
            let (x, y) = (pair[0], pair[1]);
            if u.value(0, y) > u.value(0, x) {
                (y, x)
            } else {
                (x, y)
            }
        })
        .collect();
    groups.sort_by(|&(a1, b1), &(a2, b2)| {
        let gap1 = u.value(0, a1) - u.value(0, b1);
        let gap2 = u.value(0, a2) - u.value(0, b2);
        gap2.cmp(&gap1)
    });

    let sequences = label_sequences(groups.len());
    let first_bundles = sequences
        .iter()
        .map(|seq| {
            let mut bundle: Vec<usize> = groups
                .iter()
                .zip(&seq.0)
                .map(|(&(a, b), &plus)| if plus { a } else { b })
                .collect();
            bundle.sort_unstable();
            bundle
        })
        .collect();
    Ok(TwoAgentCandidates {
        padded_m,
        groups,
        sequences,
        first_bundles,
    })
}

/// Returns the first candidate that is EF-1 under both `v` and `u`.
pub fn solve_two_agent_doubly_ef1(instance: &Instance) -> Result<Allocation, DoublyError> {
    let cand = two_agent_candidates(instance)?;
    let m = instance.m();
    let v = pad_profile(instance.v(), cand.padded_m - m);
    let u = pad_profile(instance.u(), cand.padded_m - m);
    for first in &cand.first_bundles {
        let second: Vec<usize> = (0..cand.padded_m).filter(|g| first.binary_search(g).is_err()).collect();
        let bundles = vec![first.clone(), second];
        if holds(&v, &bundles, Criterion::Ef, 1) && holds(&u, &bundles, Criterion::Ef, 1) {
            let real: Vec<Vec<usize>> = bundles
                .into_iter()
                .map(|b| b.into_iter().filter(|&g| g < m).collect())
                .collect();
            return Ok(Allocation::new(real, m).expect("candidates partition the items"));
        }
    }
    Err(DoublyError::Invariant("no candidate is EF-1 under both v and u".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fairness::check_doubly;

    #[test]
    fn eight_item_sequences() {
        let got: Vec<String> = label_sequences(4).iter().map(ToString::to_string).collect();
        assert_eq!(got, ["+-+-", "++-+", "-++-", "+-++", "-+-+"]);
    }

    #[test]
    fn candidate_structure() {
        let inst = Instance::from_integers(
            &[vec![5, 3, 8, 1, 0, 2, 7, 4], vec![1; 8]],
            &[vec![2, 9, 4, 4, 1, 0, 3, 6], vec![0; 8]],
        )
        .unwrap();
        let cand = two_agent_candidates(&inst).unwrap();
        let k = cand.groups.len();
        assert_eq!(k, 4);
        for w in cand.first_bundles.windows(2) {
            assert_eq!(w[0].iter().filter(|g| w[1].contains(g)).count(), 1);
        }
        for b in &cand.first_bundles {
            assert_eq!(b.len(), k);
        }
        let (first, last) = (&cand.first_bundles[0], &cand.first_bundles[k]);
        assert!(first.iter().all(|g| !last.contains(g)));
    }

    #[test]
    fn intro_instance_is_doubly_ef1() {
        let inst = Instance::from_integers(&[vec![2, 1, 0], vec![0, 1, 2]], &[vec![0, 2, 1], vec![1, 2, 0]]).unwrap();
        let a = solve_two_agent_doubly_ef1(&inst).unwrap();
        assert!(check_doubly(&inst, &a, Criterion::Ef, 1).unwrap().verdict);
    }

    #[test]
    fn identical_valuations_take_the_alternating_candidate() {
        let inst = Instance::from_integers(&vec![vec![4, 3, 2, 1]; 2], &vec![vec![4, 3, 2, 1]; 2]).unwrap();
        let cand = two_agent_candidates(&inst).unwrap();
        let a = solve_two_agent_doubly_ef1(&inst).unwrap();
        assert_eq!(a.bundle(0), cand.first_bundles[0].as_slice());
    }

    #[test]
    fn rejects_three_agents() {
        let inst = Instance::from_integers(&vec![vec![1]; 3], &vec![vec![1]; 3]).unwrap();
        assert_eq!(solve_two_agent_doubly_ef1(&inst), Err(DoublyError::NotTwoAgents(3)));
    }
}
