//! Brute-force enumeration of all `n^m` allocations.
//!
//! Assignment vectors are enumerated as a mixed-radix counter with item 0 as
//! the most significant digit, so index order is lexicographic order and the
//! smallest index is the canonical witness. The index space is cut into fixed
//! chunks; with the `parallel` feature and `jobs != 1` chunks run on rayon and
//! are merged by a total order, which makes the result independent of the
//! schedule.

mod eval;
mod search;

use std::ops::Range;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

pub use search::{search_counterexamples, search_counterexamples_with_progress, Counterexample, SearchConfig, SearchMode, SearchReport};

use crate::fairness::{Criterion, Perspective};
use crate::model::{Allocation, Instance, ValuationProfile};
use crate::numeric::Rational;

pub const DEFAULT_CAP: u64 = 10_000_000;
const CHUNK: u64 = 1 << 12;

/// [`DEFAULT_CAP`], unless `DUALFAIR_CAP` holds a valid integer.
pub fn default_cap() -> u64 {
    std::env::var("DUALFAIR_CAP")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_CAP)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    /// Largest number of allocations a single call may enumerate.
    pub cap: u64,
    /// `1` runs sequentially, `0` uses the global thread pool, `k > 1` a pool of `k` threads.
    pub jobs: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            cap: default_cap(),
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("{count} allocations exceed the enumeration cap of {cap}")]
    CapExceeded { count: String, cap: u64 },
    #[error("perspective {0:?} needs explicit profiles")]
    UnsupportedPerspective(Perspective),
    #[error("profiles disagree on dimensions")]
    DimensionMismatch,
    #[error("scaled values overflow 128-bit integers")]
    Overflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FairnessConstraint {
    pub criterion: Criterion,
    pub c: usize,
    pub perspective: Perspective,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    AllocatorEfficiency,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Optimum {
    /// Zero when the objective is [`Objective::None`].
    pub optimum: Rational,
    pub witness: Allocation,
    /// Item → agent vector of the witness.
    pub assignment: Vec<usize>,
    pub examined: u64,
}

/// Number of allocations, or `CapExceeded`.
pub fn allocation_count(n: usize, m: usize, cap: u64) -> Result<u64, OracleError> {
    let count = (n as u64).checked_pow(m as u32);
    match count {
        Some(k) if k <= cap => Ok(k),
        _ => Err(OracleError::CapExceeded {
            count: BigInt::from(n).pow(m as u32).to_string(),
            cap,
        }),
    }
}

fn decode(mut index: u64, n: usize, owner: &mut [usize]) {
    for slot in owner.iter_mut().rev() {
        *slot = (index % n as u64) as usize;
        index /= n as u64;
    }
}

fn increment(owner: &mut [usize], n: usize) {
    for slot in owner.iter_mut().rev() {
        *slot += 1;
        if *slot < n {
            return;
        }
        *slot = 0;
    }
}

/// Visits `range` in index order until `visit` returns `Some`.
fn scan<T>(range: Range<u64>, n: usize, m: usize, mut visit: impl FnMut(u64, &[usize]) -> Option<T>) -> Option<T> {
    let mut owner = vec![0; m];
    decode(range.start, n, &mut owner);
    for index in range {
        if let Some(t) = visit(index, &owner) {
            return Some(t);
        }
        increment(&mut owner, n);
    }
    None
}

fn chunks(total: u64) -> Vec<Range<u64>> {
    (0..total.div_ceil(CHUNK))
        .map(|k| k * CHUNK..((k + 1) * CHUNK).min(total))
        .collect()
}

/// Maps `f` over `items`, preserving order; parallel when allowed.
pub(crate) fn map_ordered<I, T, F>(jobs: usize, items: Vec<I>, f: F) -> Vec<T>
where
    I: Send,
    T: Send,
    F: Fn(I) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if jobs == 0 {
            return items.into_par_iter().map(f).collect();
        }
        if jobs > 1 {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().expect("thread pool");
            return pool.install(|| items.into_par_iter().map(f).collect());
        }
    }
    let _ = jobs;
    items.into_iter().map(f).collect()
}

struct Problem {
    n: usize,
    m: usize,
    fairness: Vec<Vec<Vec<i128>>>,
    criterion: Criterion,
    c: usize,
    objective: Option<(Vec<Vec<i128>>, BigInt)>,
}

impl Problem {
    fn new(profiles: &[&ValuationProfile], criterion: Criterion, c: usize, objective: Option<&ValuationProfile>) -> Result<Self, OracleError> {
        let first = profiles.first().copied().or(objective).ok_or(OracleError::DimensionMismatch)?;
        let (n, m) = (first.n(), first.m());
        if profiles.iter().copied().chain(objective).any(|p| p.n() != n || p.m() != m) {
            return Err(OracleError::DimensionMismatch);
        }
        Ok(Problem {
            n,
            m,
            fairness: profiles.iter().map(|p| eval::scale_rows(p)).collect::<Result<_, _>>()?,
            criterion,
            c,
            objective: objective.map(eval::scale_common).transpose()?,
        })
    }

    fn feasible(&self, owner: &[usize], scratch: &mut Vec<i128>) -> bool {
        self.fairness
            .iter()
            .all(|rows| eval::fair(rows, owner, self.n, self.criterion, self.c, scratch))
    }

    /// Best `(value, index)` in the chunk: larger value, then smaller index.
    fn best_in(&self, range: Range<u64>) -> Option<(i128, u64)> {
        let mut scratch = Vec::new();
        let mut best: Option<(i128, u64)> = None;
        let objective = self.objective.as_ref().map(|(rows, _)| rows);
        scan(range, self.n, self.m, |index, owner| {
            if self.feasible(owner, &mut scratch) {
                let Some(rows) = objective else {
                    best = Some((0, index));
                    return Some(());
                };
                let value = eval::welfare(rows, owner);
                if best.is_none_or(|(b, _)| value > b) {
                    best = Some((value, index));
                }
            }
            None
        });
        best
    }

    fn solve(&self, config: &OracleConfig) -> Result<Option<Optimum>, OracleError> {
        let total = allocation_count(self.n, self.m, config.cap)?;
        let best = if self.objective.is_some() {
            map_ordered(config.jobs, chunks(total), |r| self.best_in(r))
                .into_iter()
                .flatten()
                .fold(None, |acc: Option<(i128, u64)>, x| match acc {
                    Some(a) if a.0 > x.0 || (a.0 == x.0 && a.1 <= x.1) => Some(a),
                    _ => Some(x),
                })
        } else {
            self.first_feasible(total, config.jobs)
        };
        Ok(best.map(|(value, index)| {
            let mut assignment = vec![0; self.m];
            decode(index, self.n, &mut assignment);
            let optimum = match &self.objective {
                Some((_, factor)) => Rational::from(BigRational::new(BigInt::from(value), factor.clone())),
                None => Rational::zero(),
            };
            Optimum {
                optimum,
                witness: Allocation::from_owners(&assignment, self.n).expect("digits are agents"),
                assignment,
                examined: total,
            }
        }))
    }

    fn first_feasible(&self, total: u64, jobs: usize) -> Option<(i128, u64)> {
        let all = chunks(total);
        // Batches of chunks keep early exit while letting a batch run in parallel.
        let batch = if jobs == 1 { 1 } else { 64 };
        for group in all.chunks(batch) {
            let found = map_ordered(jobs, group.to_vec(), |r| self.best_in(r));
            if let Some(hit) = found.into_iter().flatten().next() {
                return Some(hit);
            }
        }
        None
    }
}

pub fn enumerate_best(instance: &Instance, constraint: FairnessConstraint, objective: Objective) -> Result<Option<Optimum>, OracleError> {
    enumerate_best_with(instance, constraint, objective, &OracleConfig::default())
}

/// Exact constrained optimum by full enumeration. `Ok(None)` means no
/// allocation satisfies the constraint. The witness is the lexicographically
/// smallest optimal assignment vector.
pub fn enumerate_best_with(
    instance: &Instance,
    constraint: FairnessConstraint,
    objective: Objective,
    config: &OracleConfig,
) -> Result<Option<Optimum>, OracleError> {
    let profiles: Vec<&ValuationProfile> = match constraint.perspective {
        Perspective::Agents => vec![instance.v()],
        Perspective::Allocator => vec![instance.u()],
        Perspective::Doubly => vec![instance.v(), instance.u()],
        p @ Perspective::Multi(_) => return Err(OracleError::UnsupportedPerspective(p)),
    };
    let objective = match objective {
        Objective::AllocatorEfficiency => Some(instance.u()),
        Objective::None => None,
    };
    Problem::new(&profiles, constraint.criterion, constraint.c, objective)?.solve(config)
}

pub fn exists_multi_fair(profiles: &[ValuationProfile], criterion: Criterion, c: usize) -> Result<Option<Allocation>, OracleError> {
    exists_multi_fair_with(profiles, criterion, c, &OracleConfig::default())
}

/// The first allocation, in index order, that satisfies the criterion under every profile.
pub fn exists_multi_fair_with(
    profiles: &[ValuationProfile],
    criterion: Criterion,
    c: usize,
    config: &OracleConfig,
) -> Result<Option<Allocation>, OracleError> {
    let refs: Vec<&ValuationProfile> = profiles.iter().collect();
    Ok(Problem::new(&refs, criterion, c, None)?.solve(config)?.map(|o| o.witness))
}

/// `(X1, X2)`, both ascending.
pub type Split = (Vec<usize>, Vec<usize>);

/// Searches splits `(X1, M \ X1)` with `|X1| = ⌊m/2⌋` (and also `⌈m/2⌉` when
/// `m` is odd) for one that is 2-balanced PROP-`(k1, k2)` with respect to
/// `(N1, N2)` under both `v` and `u`. Subsets are tried in lexicographic order.
pub fn exists_two_balanced(
    instance: &Instance,
    n1: &[usize],
    n2: &[usize],
    k1: usize,
    k2: usize,
) -> Result<Option<Split>, OracleError> {
    let m = instance.m();
    if m >= 63 {
        return Err(OracleError::CapExceeded {
            count: format!("2^{m}"),
            cap: default_cap(),
        });
    }
    let v = eval::scale_rows(instance.v())?;
    let u = eval::scale_rows(instance.u())?;
    let rows = [v.as_slice(), u.as_slice()];
    let mut sizes = vec![m / 2];
    if m % 2 == 1 {
        sizes.push(m / 2 + 1);
    }
    let mut scratch = Vec::new();
    let mut in_x1 = vec![false; m];
    for size in sizes {
        let mut subset: Vec<usize> = (0..size).collect();
        loop {
            in_x1.iter_mut().for_each(|x| *x = false);
            subset.iter().for_each(|&g| in_x1[g] = true);
            if eval::two_balanced(&rows, n1, n2, &in_x1, k1, k2, &mut scratch) {
                let x2 = (0..m).filter(|&g| !in_x1[g]).collect();
                return Ok(Some((subset, x2)));
            }
            // next combination in lexicographic order
            let Some(pos) = (0..size).rev().find(|&p| subset[p] < m - size + p) else {
                break;
            };
            subset[pos] += 1;
            for q in pos + 1..size {
                subset[q] = subset[q - 1] + 1;
            }
        }
    }
    Ok(None)
}
