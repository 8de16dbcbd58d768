//! Exact EF-c / PROP-c checkers and the allocator's efficiency.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::{Allocation, Instance, ModelError, Side, ValuationProfile};
use crate::numeric::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Ef,
    Prop,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Ef => "EF",
            Criterion::Prop => "PROP",
        })
    }
}

impl FromStr for Criterion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ef" => Ok(Criterion::Ef),
            "prop" => Ok(Criterion::Prop),
            other => Err(format!("unknown criterion {other:?}, expected ef or prop")),
        }
    }
}

/// Whose valuations the criterion is evaluated under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perspective {
    Agents,
    Allocator,
    Doubly,
    /// An arbitrary list of `t` profiles.
    Multi(usize),
}

/// One agent (PROP) or ordered pair (EF) under one profile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    /// Index into the checked profile list.
    pub profile: usize,
    pub agent: usize,
    /// The envied agent for EF; absent for PROP.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub other: Option<usize>,
    /// `v_i(A_i)`.
    pub own_value: Rational,
    /// `v_i(A_j)` for EF, `v_i(M)/n` for PROP.
    pub target: Rational,
    /// The removal set `B`, at most `c` items taken largest-first.
    pub removal: Vec<usize>,
    pub removal_value: Rational,
    pub satisfied: bool,
    /// `target - removal_value - own_value` when positive.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deficit: Option<Rational>,
}

impl Witness {
    fn new(profile: usize, agent: usize, other: Option<usize>, own_value: Rational, target: Rational, removal: Vec<usize>, removal_value: Rational) -> Self {
        let gap = &target - &removal_value - &own_value;
        let satisfied = !gap.is_positive();
        Witness {
            profile,
            agent,
            other,
            own_value,
            target,
            removal,
            removal_value,
            satisfied,
            deficit: (!satisfied).then_some(gap),
        }
    }

    /// Re-evaluates the defining inequality from the stored numbers.
    pub fn holds(&self) -> bool {
        self.own_value >= &self.target - &self.removal_value
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FairnessReport {
    pub criterion: Criterion,
    pub c: usize,
    pub perspective: Perspective,
    pub verdict: bool,
    pub witnesses: Vec<Witness>,
}

impl FairnessReport {
    pub fn violations(&self) -> impl Iterator<Item = &Witness> {
        self.witnesses.iter().filter(|w| !w.satisfied)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// The `min(t, |items|)` most valuable items of `items` under `row`,
/// larger values first and lower indices first on ties.
pub fn top_items(row: &[Rational], t: usize, items: &[usize]) -> Vec<usize> {
    let mut sorted = items.to_vec();
    sorted.sort_by(|&a, &b| row[b].cmp(&row[a]).then(a.cmp(&b)));
    sorted.truncate(t);
    sorted
}

/// `L(row, t, items)`: the sum of the `t` largest values in `items`.
pub fn top_values(row: &[Rational], t: usize, items: &[usize]) -> Rational {
    top_items(row, t, items).iter().map(|&g| &row[g]).sum()
}

fn complement(bundle: &[usize], m: usize) -> Vec<usize> {
    let mut inside = vec![false; m];
    for &g in bundle {
        inside[g] = true;
    }
    (0..m).filter(|&g| !inside[g]).collect()
}

fn ef_witnesses(profile: &ValuationProfile, bundles: &[Vec<usize>], c: usize, index: usize, out: &mut Vec<Witness>) {
    for i in 0..bundles.len() {
        let row = profile.row(i);
        let own = profile.bundle_value(i, &bundles[i]);
        for j in 0..bundles.len() {
            if i == j {
                continue;
            }
            let removal = top_items(row, c, &bundles[j]);
            let removal_value = removal.iter().map(|&g| &row[g]).sum();
            let target = profile.bundle_value(i, &bundles[j]);
            out.push(Witness::new(index, i, Some(j), own.clone(), target, removal, removal_value));
        }
    }
}

fn prop_witnesses(profile: &ValuationProfile, bundles: &[Vec<usize>], c: usize, index: usize, out: &mut Vec<Witness>) {
    let n = bundles.len();
    let m = profile.m();
    for (i, bundle) in bundles.iter().enumerate() {
        let row = profile.row(i);
        let own = profile.bundle_value(i, bundle);
        let outside = complement(bundle, m);
        let removal = top_items(row, c, &outside);
        let removal_value = removal.iter().map(|&g| &row[g]).sum();
        let target = profile.total(i) / Rational::from(n);
        out.push(Witness::new(index, i, None, own, target, removal, removal_value));
    }
}

/// Fast verdict without witnesses. `bundles` must partition the profile's items.
pub fn holds(profile: &ValuationProfile, bundles: &[Vec<usize>], criterion: Criterion, c: usize) -> bool {
    let n = bundles.len();
    match criterion {
        Criterion::Ef => (0..n).all(|i| {
            let row = profile.row(i);
            let own = profile.bundle_value(i, &bundles[i]);
            (0..n).filter(|&j| j != i).all(|j| {
                let other = profile.bundle_value(i, &bundles[j]);
                own >= other - top_values(row, c, &bundles[j])
            })
        }),
        Criterion::Prop => (0..n).all(|i| {
            let row = profile.row(i);
            let own = profile.bundle_value(i, &bundles[i]);
            let share = profile.total(i) / Rational::from(n);
            own >= share - top_values(row, c, &complement(&bundles[i], profile.m()))
        }),
    }
}

fn check_profiles(
    profiles: &[&ValuationProfile],
    allocation: &Allocation,
    criterion: Criterion,
    c: usize,
    perspective: Perspective,
) -> Result<FairnessReport, ModelError> {
    let mut witnesses = Vec::new();
    for (k, profile) in profiles.iter().enumerate() {
        allocation.check_dimensions(profile.n(), profile.m())?;
        match criterion {
            Criterion::Ef => ef_witnesses(profile, allocation.bundles(), c, k, &mut witnesses),
            Criterion::Prop => prop_witnesses(profile, allocation.bundles(), c, k, &mut witnesses),
        }
    }
    let verdict = witnesses.iter().all(|w| w.satisfied);
    Ok(FairnessReport {
        criterion,
        c,
        perspective,
        verdict,
        witnesses,
    })
}

fn single(side: Side) -> Perspective {
    match side {
        Side::Agents => Perspective::Agents,
        Side::Allocator => Perspective::Allocator,
    }
}

/// EF-c under one matrix: `v_i(A_i) ≥ v_i(A_j) − L(v_i, c, A_j)` for all `i ≠ j`.
pub fn check_ef_c(instance: &Instance, allocation: &Allocation, c: usize, side: Side) -> Result<FairnessReport, ModelError> {
    check_profiles(&[instance.profile(side)], allocation, Criterion::Ef, c, single(side))
}

/// PROP-c under one matrix: `v_i(A_i) ≥ v_i(M)/n − L(v_i, c, M \ A_i)` for all `i`.
pub fn check_prop_c(instance: &Instance, allocation: &Allocation, c: usize, side: Side) -> Result<FairnessReport, ModelError> {
    check_profiles(&[instance.profile(side)], allocation, Criterion::Prop, c, single(side))
}

/// The criterion under both `v` and `u`.
pub fn check_doubly(instance: &Instance, allocation: &Allocation, criterion: Criterion, c: usize) -> Result<FairnessReport, ModelError> {
    check_profiles(&[instance.v(), instance.u()], allocation, criterion, c, Perspective::Doubly)
}

/// The criterion under every profile in `profiles`.
pub fn check_multi_fair(
    profiles: &[ValuationProfile],
    allocation: &Allocation,
    criterion: Criterion,
    c: usize,
) -> Result<FairnessReport, ModelError> {
    if let Some(first) = profiles.first() {
        if let Some(k) = profiles.iter().position(|p| p.n() != first.n() || p.m() != first.m()) {
            return Err(ModelError::DimensionMismatch(format!(
                "profile {k} is {}x{}, profile 0 is {}x{}",
                profiles[k].n(),
                profiles[k].m(),
                first.n(),
                first.m()
            )));
        }
    }
    let refs: Vec<&ValuationProfile> = profiles.iter().collect();
    check_profiles(&refs, allocation, criterion, c, Perspective::Multi(profiles.len()))
}

/// Dispatches on `perspective`; `Multi` is not valid here.
pub fn check(
    instance: &Instance,
    allocation: &Allocation,
    criterion: Criterion,
    c: usize,
    perspective: Perspective,
) -> Result<FairnessReport, ModelError> {
    match perspective {
        Perspective::Agents => check_profiles(&[instance.v()], allocation, criterion, c, perspective),
        Perspective::Allocator => check_profiles(&[instance.u()], allocation, criterion, c, perspective),
        Perspective::Doubly => check_doubly(instance, allocation, criterion, c),
        Perspective::Multi(_) => Err(ModelError::Validation(
            "multi-profile checks take an explicit profile list".into(),
        )),
    }
}

/// `SW(A) = Σ_i u_i(A_i)`.
pub fn allocator_efficiency(instance: &Instance, allocation: &Allocation) -> Rational {
    allocation
        .bundles()
        .iter()
        .enumerate()
        .map(|(i, b)| instance.u().bundle_value(i, b))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn intro() -> Instance {
        Instance::from_integers(&[vec![2, 1, 0], vec![0, 1, 2]], &[vec![0, 2, 1], vec![1, 2, 0]]).unwrap()
    }

    fn alloc(bundles: &[&[usize]], m: usize) -> Allocation {
        Allocation::new(bundles.iter().map(|b| b.to_vec()).collect(), m).unwrap()
    }

    #[test]
    fn top_values_examples() {
        let row: Vec<Rational> = [2, 1, 0].iter().map(|&x| Rational::from(x)).collect();
        assert_eq!(top_values(&row, 3, &[]), Rational::zero());
        assert_eq!(top_values(&row, 5, &[0, 1, 2]), Rational::from(3));
        assert_eq!(top_values(&row, 2, &[0, 1, 2]), Rational::from(3));
        let flat: Vec<Rational> = vec![Rational::one(); 4];
        assert_eq!(top_items(&flat, 2, &[3, 1, 2]), vec![1, 2]);
    }

    #[test]
    fn intro_round_robin_fails_allocator_side() {
        let inst = intro();
        let a = alloc(&[&[0, 1], &[2]], 3);
        let u = check_ef_c(&inst, &a, 1, Side::Allocator).unwrap();
        assert!(!u.verdict);
        let bad: Vec<_> = u.violations().collect();
        assert_eq!(bad.len(), 1);
        assert_eq!((bad[0].agent, bad[0].other), (1, Some(0)));
        assert!(check_ef_c(&inst, &a, 1, Side::Agents).unwrap().verdict);
        assert_eq!(allocator_efficiency(&inst, &a), Rational::from(2));
    }

    #[test]
    fn intro_doubly_ef1_allocation() {
        let inst = intro();
        let a = alloc(&[&[0, 2], &[1]], 3);
        assert!(check_doubly(&inst, &a, Criterion::Ef, 1).unwrap().verdict);
        assert!(check_doubly(&inst, &a, Criterion::Prop, 1).unwrap().verdict);
    }

    #[test]
    fn degenerate_cases() {
        let inst = Instance::from_integers(&[vec![], vec![]], &[vec![], vec![]]).unwrap();
        let a = alloc(&[&[], &[]], 0);
        for c in 0..3 {
            assert!(check_doubly(&inst, &a, Criterion::Ef, c).unwrap().verdict);
        }
        assert_eq!(allocator_efficiency(&inst, &a), Rational::zero());

        let inst = Instance::from_integers(&[vec![3, 1]], &[vec![1, 1]]).unwrap();
        let a = alloc(&[&[0, 1]], 2);
        assert!(check_doubly(&inst, &a, Criterion::Prop, 0).unwrap().verdict);
    }

    #[test]
    fn triple_profiles_have_no_common_ef1_allocation() {
        let profiles = [
            ValuationProfile::from_integers(&[vec![1, 0, 1], vec![1, 0, 1]]).unwrap(),
            ValuationProfile::from_integers(&[vec![1, 1, 0], vec![1, 1, 0]]).unwrap(),
            ValuationProfile::from_integers(&[vec![0, 1, 1], vec![0, 1, 1]]).unwrap(),
        ];
        for code in 0..8usize {
            let owners: Vec<usize> = (0..3).map(|g| (code >> (2 - g)) & 1).collect();
            let a = Allocation::from_owners(&owners, 2).unwrap();
            assert!(!check_multi_fair(&profiles, &a, Criterion::Ef, 1).unwrap().verdict, "{owners:?}");
        }
    }

    #[test]
    fn multi_rejects_mismatched_profiles() {
        let profiles = [
            ValuationProfile::from_integers(&[vec![1, 0]]).unwrap(),
            ValuationProfile::from_integers(&[vec![1]]).unwrap(),
        ];
        let a = alloc(&[&[0, 1]], 2);
        assert!(matches!(
            check_multi_fair(&profiles, &a, Criterion::Ef, 1),
            Err(ModelError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn report_serializes() {
        let inst = intro();
        let a = alloc(&[&[0, 1], &[2]], 3);
        let json = check_doubly(&inst, &a, Criterion::Ef, 1).unwrap().to_json();
        assert!(json.contains("\"verdict\": false"));
        assert!(json.contains("\"deficit\""));
    }
}
