use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::MaxEffError;
use crate::model::{Instance, ValuationProfile};
use crate::numeric::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GadgetKind {
    /// Two agents, partition items plus two allocator-marked items; EF-1 constraint.
    Thm51PartitionEf,
    /// `n = 2s` agents, `s` copies of the partition items plus `n + 2` pool items; PROP-1 constraint.
    Thm57PartitionProp,
    /// One item per vertex, one agent per edge, and a super agent at index 0.
    Thm55IndependentSet,
    /// Two agents, three items, three binary profiles with no common EF-1 allocation.
    Thm66Triple,
}

impl GadgetKind {
    pub const ALL: [GadgetKind; 4] = [
        GadgetKind::Thm51PartitionEf,
        GadgetKind::Thm57PartitionProp,
        GadgetKind::Thm55IndependentSet,
        GadgetKind::Thm66Triple,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GadgetKind::Thm51PartitionEf => "thm51_partition_ef",
            GadgetKind::Thm57PartitionProp => "thm57_partition_prop",
            GadgetKind::Thm55IndependentSet => "thm55_independent_set",
            GadgetKind::Thm66Triple => "thm66_triple",
        }
    }
}

impl fmt::Display for GadgetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GadgetKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GadgetKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown gadget kind `{s}`"))
    }
}

/// Parameters for every kind; each kind reads only the fields it needs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GadgetParams {
    /// Partition multiset, must sum to 1.
    pub e: Vec<Rational>,
    /// Agent count for the PROP gadget (even, at least 2).
    pub n: usize,
    pub vertices: usize,
    pub edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Gadget {
    pub kind: GadgetKind,
    pub instance: Instance,
    /// Profiles beyond `v` and `u`; only the triple gadget has one.
    pub extra_profiles: Vec<ValuationProfile>,
}

fn bad(msg: impl Into<String>) -> MaxEffError {
    MaxEffError::BadParameters(msg.into())
}

fn check_partition(e: &[Rational]) -> Result<(), MaxEffError> {
    if e.is_empty() {
        return Err(bad("e must be nonempty"));
    }
    if e.iter().any(Rational::is_negative) {
        return Err(bad("e must be non-negative"));
    }
    if !e.iter().sum::<Rational>().is_one() {
        return Err(bad("e must sum to 1"));
    }
    Ok(())
}

fn instance(v: Vec<Vec<Rational>>, u: Vec<Vec<Rational>>) -> Result<Instance, MaxEffError> {
    let v = ValuationProfile::new(v).map_err(|e| bad(e.to_string()))?;
    let u = ValuationProfile::new(u).map_err(|e| bad(e.to_string()))?;
    Instance::new(v, u).map_err(|e| bad(e.to_string()))
}

fn ints(rows: &[[i64; 3]]) -> Vec<Vec<Rational>> {
    rows.iter().map(|r| r.iter().map(|&x| Rational::from(x)).collect()).collect()
}

pub fn build_gadget(kind: GadgetKind, params: &GadgetParams) -> Result<Gadget, MaxEffError> {
    let (zero, one) = (Rational::zero(), Rational::one());
    let (instance, extra_profiles) = match kind {
        GadgetKind::Thm51PartitionEf => {
            check_partition(&params.e)?;
            let m = params.e.len();
            let row = |tail: [&Rational; 2]| -> Vec<Rational> {
                params.e.iter().chain(tail).cloned().collect()
            };
            let pad = |tail: [&Rational; 2]| -> Vec<Rational> {
                std::iter::repeat_n(&zero, m).chain(tail).cloned().collect()
            };
            let v = vec![row([&one, &zero]), row([&zero, &one])];
            let u = vec![pad([&zero, &one]), pad([&one, &zero])];
            (instance(v, u)?, Vec::new())
        }
        GadgetKind::Thm57PartitionProp => {
            check_partition(&params.e)?;
            let n = params.n;
            if n < 2 || n % 2 == 1 {
                return Err(bad("n must be even and at least 2"));
            }
            let (s, m) = (n / 2, params.e.len());
            let total = s * m + n + 2;
            let c = Rational::from(s - 1);
            let mut v = vec![vec![zero.clone(); total]; n];
            let mut u = vec![vec![zero.clone(); total]; n];
            for (i, (vrow, urow)) in v.iter_mut().zip(u.iter_mut()).enumerate() {
                let group = i / 2;
                vrow[group * m..(group + 1) * m].clone_from_slice(&params.e);
                for k in 0..n + 2 {
                    if k != i {
                        vrow[s * m + k] = c.clone();
                    }
                }
                urow[s * m + i] = one.clone();
            }
            (instance(v, u)?, Vec::new())
        }
        GadgetKind::Thm55IndependentSet => {
            let k = params.vertices;
            if k == 0 {
                return Err(bad("the graph needs at least one vertex"));
            }
            let mut v = vec![vec![zero.clone(); k]];
            let mut u = vec![vec![one.clone(); k]];
            for &(a, b) in &params.edges {
                if a >= k || b >= k || a == b {
                    return Err(bad(format!("bad edge ({a}, {b})")));
                }
                let mut row = vec![zero.clone(); k];
                row[a] = one.clone();
                row[b] = one.clone();
                v.push(row);
                u.push(vec![zero.clone(); k]);
            }
            (instance(v, u)?, Vec::new())
        }
        GadgetKind::Thm66Triple => {
            let u = ints(&[[1, 1, 0], [1, 1, 0]]);
            let v = ints(&[[1, 0, 1], [1, 0, 1]]);
            let w = ValuationProfile::new(ints(&[[0, 1, 1], [0, 1, 1]])).expect("valid rows");
            (instance(v, u)?, vec![w])
        }
    };
    Ok(Gadget {
        kind,
        instance,
        extra_profiles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::ratio;

    fn halves() -> GadgetParams {
        GadgetParams {
            e: vec![ratio(1, 2), ratio(1, 2)],
            n: 4,
            ..Default::default()
        }
    }

    fn q(rows: &[&[(i64, i64)]]) -> Vec<Vec<Rational>> {
        rows.iter().map(|r| r.iter().map(|&(p, d)| ratio(p, d)).collect()).collect()
    }

    #[test]
    fn thm51_tables() {
        let g = build_gadget(GadgetKind::Thm51PartitionEf, &halves()).unwrap();
        let h = (1, 2);
        assert_eq!(g.instance.v().rows(), q(&[&[h, h, (1, 1), (0, 1)], &[h, h, (0, 1), (1, 1)]]));
        let z = (0, 1);
        assert_eq!(g.instance.u().rows(), q(&[&[z, z, z, (1, 1)], &[z, z, (1, 1), z]]));
    }

    #[test]
    fn thm57_pool_and_groups() {
        let g = build_gadget(GadgetKind::Thm57PartitionProp, &halves()).unwrap();
        let inst = &g.instance;
        assert_eq!((inst.n(), inst.m()), (4, 2 * 2 + 4 + 2));
        let cval = Rational::one();
        for i in 0..4 {
            for j in 0..inst.m() {
                let expected = if j < 4 {
                    if j / 2 == i / 2 { ratio(1, 2) } else { Rational::zero() }
                } else if j - 4 == i {
                    Rational::zero()
                } else {
                    cval.clone()
                };
                assert_eq!(inst.v().value(i, j), &expected, "v[{i}][{j}]");
                let alloc = if j == 4 + i { Rational::one() } else { Rational::zero() };
                assert_eq!(inst.u().value(i, j), &alloc, "u[{i}][{j}]");
            }
        }
    }

    #[test]
    fn thm55_triangle() {
        let p = GadgetParams {
            vertices: 3,
            edges: vec![(0, 1), (1, 2), (0, 2)],
            ..Default::default()
        };
        let g = build_gadget(GadgetKind::Thm55IndependentSet, &p).unwrap();
        assert_eq!((g.instance.n(), g.instance.m()), (4, 3));
        assert!(g.instance.u().row(0).iter().all(Rational::is_one));
        for i in 1..4 {
            assert!(g.instance.u().row(i).iter().all(Rational::is_zero));
            assert_eq!(g.instance.v().total(i), Rational::from(2));
        }
    }

    #[test]
    fn triple_profiles() {
        let g = build_gadget(GadgetKind::Thm66Triple, &GadgetParams::default()).unwrap();
        assert_eq!(g.extra_profiles.len(), 1);
        assert!(g.instance.v().has_identical_rows() && g.instance.u().has_identical_rows());
    }

    #[test]
    fn bad_parameters() {
        let mut p = halves();
        p.e.push(ratio(1, 3));
        assert!(matches!(build_gadget(GadgetKind::Thm51PartitionEf, &p), Err(MaxEffError::BadParameters(_))));
        let mut p = halves();
        p.n = 3;
        assert!(matches!(build_gadget(GadgetKind::Thm57PartitionProp, &p), Err(MaxEffError::BadParameters(_))));
        let p = GadgetParams {
            vertices: 2,
            edges: vec![(0, 2)],
            ..Default::default()
        };
        assert!(matches!(build_gadget(GadgetKind::Thm55IndependentSet, &p), Err(MaxEffError::BadParameters(_))));
        assert_eq!("thm66_triple".parse::<GadgetKind>(), Ok(GadgetKind::Thm66Triple));
    }
}
