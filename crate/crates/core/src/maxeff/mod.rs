//! Maximizing the allocator's efficiency subject to the agents' fairness.

mod dp;
mod gadgets;
mod lp;

use serde::{Deserialize, Serialize};

pub use dp::{maximize_binary_ef_dp, maximize_binary_ef_dp_with, DpConfig};
pub use gadgets::{build_gadget, Gadget, GadgetKind, GadgetParams};
pub use lp::{binary_prop_program, maximize_binary_prop_lp};

use crate::fairness::{allocator_efficiency, check, Criterion, FairnessReport, Perspective};
use crate::model::{Allocation, Instance};
use crate::numeric::{LpError, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    TwoAgentEf,
    RoundRobin,
    LpBinary,
    DpBinary,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::TwoAgentEf, Method::RoundRobin, Method::LpBinary, Method::DpBinary];

    pub fn name(self) -> &'static str {
        match self {
            Method::TwoAgentEf => "two-agent-ef",
            Method::RoundRobin => "round-robin",
            Method::LpBinary => "lp-binary",
            Method::DpBinary => "dp-binary",
        }
    }

    /// The fairness notion the method optimizes under.
    pub fn criterion(self) -> Criterion {
        match self {
            Method::LpBinary => Criterion::Prop,
            _ => Criterion::Ef,
        }
    }

    pub fn run(self, instance: &Instance, c: usize) -> Result<MaxEffResult, MaxEffError> {
        match self {
            Method::TwoAgentEf => maximize_two_agent_ef(instance, c),
            Method::RoundRobin => maximize_round_robin(instance, c),
            Method::LpBinary => maximize_binary_prop_lp(instance, c),
            Method::DpBinary => maximize_binary_ef_dp(instance, c),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Guarantee {
    Exact,
    #[serde(rename = "2-approx")]
    TwoApprox,
    #[serde(rename = "m-approx")]
    MApprox,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MaxEffResult {
    pub allocation: Allocation,
    pub objective: Rational,
    pub method: Method,
    pub guarantee: Guarantee,
    /// The agents-side fairness check, recomputed on the returned allocation.
    pub fairness_certificate: FairnessReport,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MaxEffError {
    #[error("expected exactly two agents, got {0}")]
    NotTwoAgents(usize),
    #[error("the agents' valuations are not binary")]
    NotBinary,
    #[error("this method needs c >= 1")]
    ZeroSlack,
    #[error("{n} agents exceed the configured limit of {max}")]
    TooManyAgents { n: usize, max: usize },
    #[error("more than {cap} reachable states")]
    StateSpaceExceeded { cap: usize },
    #[error("no allocation satisfies the fairness constraint")]
    NoFeasibleAllocation,
    #[error("linear program failed: {0}")]
    Lp(LpError),
    #[error("vertex coordinate {value} of x[{agent}][{item}] is not integral")]
    NonIntegralVertex { agent: usize, item: usize, value: Rational },
    #[error("constraint matrix does not have the two-block form")]
    NotTotallyUnimodular,
    #[error("returned allocation failed its own fairness certificate")]
    CertificateFailed,
    #[error("bad gadget parameters: {0}")]
    BadParameters(String),
}

fn finish(
    instance: &Instance,
    allocation: Allocation,
    criterion: Criterion,
    c: usize,
    method: Method,
    guarantee: Guarantee,
) -> Result<MaxEffResult, MaxEffError> {
    let certificate = check(instance, &allocation, criterion, c, Perspective::Agents).expect("dimensions match the instance");
    if !certificate.verdict {
        return Err(MaxEffError::CertificateFailed);
    }
    Ok(MaxEffResult {
        objective: allocator_efficiency(instance, &allocation),
        allocation,
        method,
        guarantee,
        fairness_certificate: certificate,
    })
}

/// Two-agent EF-1 pairing: items sorted by `v_1`, each consecutive pair split
/// so that the currently `v_2`-richer bundle gets the `v_2`-smaller item; the
/// better orientation by allocator's efficiency is returned.
pub fn maximize_two_agent_ef(instance: &Instance, c: usize) -> Result<MaxEffResult, MaxEffError> {
    if instance.n() != 2 {
        return Err(MaxEffError::NotTwoAgents(instance.n()));
    }
    if c == 0 {
        return Err(MaxEffError::ZeroSlack);
    }
    let m = instance.m();
    let (v, u) = (instance.v(), instance.u());
    let zero = Rational::zero();
    let v2 = |g: usize| if g < m { v.value(1, g) } else { &zero };

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| v.value(0, b).cmp(v.value(0, a)));
    if m % 2 == 1 {
        // zero-valued dummy, dropped at the end
        order.push(m);
    }

    let (mut s1, mut s2): (Vec<usize>, Vec<usize>) = (Vec::new(), Vec::new());
    let (mut w1, mut w2) = (Rational::zero(), Rational::zero());
    for pair in order.chunks(2) {
        let (first, second) = (pair[0], pair[1]);
        let (to_richer, to_poorer) = if v2(first) >= v2(second) { (second, first) } else { (first, second) };
        let s1_richer = w1 >= w2;
        let (rich, poor, rich_w, poor_w) = if s1_richer {
            (&mut s1, &mut s2, &mut w1, &mut w2)
        } else {
            (&mut s2, &mut s1, &mut w2, &mut w1)
        };
        *rich_w += v2(to_richer);
        *poor_w += v2(to_poorer);
        rich.push(to_richer);
        poor.push(to_poorer);
    }
    s1.retain(|&g| g < m);
    s2.retain(|&g| g < m);

    let forward = u.bundle_value(0, &s1) + u.bundle_value(1, &s2);
    let backward = u.bundle_value(0, &s2) + u.bundle_value(1, &s1);
    let bundles = if forward >= backward { vec![s1, s2] } else { vec![s2, s1] };
    let allocation = Allocation::new(bundles, m).expect("pairs partition the items");
    finish(instance, allocation, Criterion::Ef, c, Method::TwoAgentEf, Guarantee::TwoApprox)
}

/// The single best `(agent, item)` pair by `u` goes first; the rest is round
/// robin by `v` in ascending agent order with the favoured agent last.
pub fn maximize_round_robin(instance: &Instance, c: usize) -> Result<MaxEffResult, MaxEffError> {
    if c == 0 {
        return Err(MaxEffError::ZeroSlack);
    }
    let (n, m) = (instance.n(), instance.m());
    let mut bundles = vec![Vec::new(); n];
    if m == 0 {
        let allocation = Allocation::new(bundles, 0).expect("empty allocation");
        return finish(instance, allocation, Criterion::Ef, c, Method::RoundRobin, Guarantee::MApprox);
    }
    let u = instance.u();
    let mut best = (0, 0);
    for i in 0..n {
        for g in 0..m {
            if u.value(i, g) > u.value(best.0, best.1) {
                best = (i, g);
            }
        }
    }
    let (favoured, first) = best;
    bundles[favoured].push(first);

    let mut remaining: Vec<usize> = (0..m).filter(|&g| g != first).collect();
    let order: Vec<usize> = (0..n).filter(|&i| i != favoured).chain([favoured]).collect();
    let v = instance.v();
    'rounds: loop {
        for &i in &order {
            if remaining.is_empty() {
                break 'rounds;
            }
            let pick = (0..remaining.len())
                .max_by(|&a, &b| {
                    v.value(i, remaining[a])
                        .cmp(v.value(i, remaining[b]))
                        .then(remaining[b].cmp(&remaining[a]))
                })
                .expect("nonempty");
            bundles[i].push(remaining.remove(pick));
        }
    }
    let allocation = Allocation::new(bundles, m).expect("round robin partitions the items");
    finish(instance, allocation, Criterion::Ef, c, Method::RoundRobin, Guarantee::MApprox)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fairness::check_ef_c;
    use crate::model::Side;

    fn intro() -> Instance {
        Instance::from_integers(&[vec![2, 1, 0], vec![0, 1, 2]], &[vec![0, 2, 1], vec![1, 2, 0]]).unwrap()
    }

    #[test]
    fn two_agent_intro_trace() {
        let r = maximize_two_agent_ef(&intro(), 1).unwrap();
        assert_eq!(r.allocation.bundles(), &[vec![0, 2], vec![1]]);
        assert_eq!(r.objective, Rational::from(3));
        assert!(r.fairness_certificate.verdict);
    }

    #[test]
    fn two_agent_single_item() {
        let inst = Instance::from_integers(&[vec![1], vec![1]], &[vec![0], vec![5]]).unwrap();
        let r = maximize_two_agent_ef(&inst, 1).unwrap();
        assert_eq!(r.objective, Rational::from(5));
    }

    #[test]
    fn two_agent_rejects_bad_input() {
        let inst = Instance::from_integers(&vec![vec![1]; 3], &vec![vec![1]; 3]).unwrap();
        assert_eq!(maximize_two_agent_ef(&inst, 1), Err(MaxEffError::NotTwoAgents(3)));
        assert_eq!(maximize_two_agent_ef(&intro(), 0), Err(MaxEffError::ZeroSlack));
    }

    #[test]
    fn round_robin_single_item_goes_to_argmax() {
        let inst = Instance::from_integers(&[vec![1], vec![1], vec![1]], &[vec![2], vec![7], vec![7]]).unwrap();
        let r = maximize_round_robin(&inst, 1).unwrap();
        assert_eq!(r.allocation.bundle(1), &[0]);
        assert_eq!(r.objective, Rational::from(7));
    }

    #[test]
    fn round_robin_zero_allocator_is_ef1() {
        let inst = Instance::from_integers(&[vec![3, 1, 4, 1, 5], vec![9, 2, 6, 5, 3]], &vec![vec![0; 5]; 2]).unwrap();
        let r = maximize_round_robin(&inst, 1).unwrap();
        assert_eq!(r.objective, Rational::zero());
        assert!(check_ef_c(&inst, &r.allocation, 1, Side::Agents).unwrap().verdict);
    }
}
