use std::collections::BTreeSet;

use rand::Rng;
use serde::Serialize;

use super::{allocation_count, map_ordered, scan, Problem};
use crate::fairness::{holds, Criterion};
use crate::generate::{random_rows, rng, ValueSpace};
use crate::model::{Allocation, Instance, ValuationProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum SearchMode {
    /// Every matrix pair in the space, up to `limit` instances in total.
    Exhaustive { limit: u64 },
    /// `samples` instances drawn from one seeded stream.
    Random { seed: u64, samples: u64 },
}

/// Looks for instances where no allocation is fair under both `v` and `u`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchConfig {
    pub space: ValueSpace,
    /// Inclusive range of agent counts.
    pub agents: (usize, usize),
    /// Inclusive range of item counts.
    pub items: (usize, usize),
    pub criterion: Criterion,
    pub c: usize,
    pub mode: SearchMode,
    /// Per-instance enumeration cap.
    pub cap: u64,
    /// See [`super::OracleConfig::jobs`].
    pub jobs: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub instance: Instance,
    pub criterion: Criterion,
    pub c: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchReport {
    pub instances_examined: u64,
    pub counterexamples_found: Vec<Counterexample>,
    /// True when every instance of the space was examined.
    pub exhaustive: bool,
    /// Instances skipped because `n^m` exceeded the cap.
    pub skipped_over_cap: u64,
    pub config: SearchConfig,
}

impl SearchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

const BATCH: usize = 512;

/// Every distinct row of length `m` in the space, in a fixed order.
fn row_candidates(space: ValueSpace, m: usize) -> Vec<Vec<i64>> {
    let levels: Vec<Vec<i64>> = match space {
        ValueSpace::Binary => vec![vec![0, 1]],
        ValueSpace::SmallInteger { max } => vec![(0..=max as i64).collect()],
        ValueSpace::Bivalued { max } => {
            let max = max.max(1) as i64;
            (0..max).flat_map(|p| (p + 1..=max).map(move |q| vec![p, q])).collect()
        }
    };
    let mut rows = BTreeSet::new();
    for alphabet in levels {
        let k = alphabet.len();
        let mut digits = vec![0; m];
        loop {
            rows.insert(digits.iter().map(|&d| alphabet[d]).collect::<Vec<_>>());
            let Some(pos) = (0..m).rev().find(|&p| digits[p] + 1 < k) else {
                break;
            };
            digits[pos] += 1;
            digits[pos + 1..].iter_mut().for_each(|d| *d = 0);
        }
    }
    rows.into_iter().collect()
}

fn profile(rows: Vec<Vec<i64>>) -> ValuationProfile {
    ValuationProfile::from_integers(&rows).expect("candidate rows are valid")
}

enum Outcome {
    Fair,
    Counterexample,
    OverCap,
}

fn examine(instance: &Instance, criterion: Criterion, c: usize, cap: u64) -> Outcome {
    let Ok(total) = allocation_count(instance.n(), instance.m(), cap) else {
        return Outcome::OverCap;
    };
    let problem = Problem::new(&[instance.v(), instance.u()], criterion, c, None).expect("consistent dimensions");
    if problem.first_feasible(total, 1).is_some() {
        return Outcome::Fair;
    }
    // Re-verify with the exact checker before reporting.
    let (n, m) = (instance.n(), instance.m());
    let found = scan(0..total, n, m, |_, owner| {
        let bundles = Allocation::from_owners(owner, n).expect("digits are agents").into_bundles();
        (holds(instance.v(), &bundles, criterion, c) && holds(instance.u(), &bundles, criterion, c)).then_some(())
    });
    assert!(found.is_none(), "integer and exact evaluators disagree");
    Outcome::Counterexample
}

pub fn search_counterexamples(config: &SearchConfig) -> SearchReport {
    search_counterexamples_with_progress(config, &mut |_| {})
}

/// Like [`search_counterexamples`], calling `progress` with the running
/// instance count after every batch.
pub fn search_counterexamples_with_progress(config: &SearchConfig, progress: &mut dyn FnMut(u64)) -> SearchReport {
    let mut report = SearchReport {
        instances_examined: 0,
        counterexamples_found: Vec::new(),
        exhaustive: matches!(config.mode, SearchMode::Exhaustive { .. }),
        skipped_over_cap: 0,
        config: config.clone(),
    };
    let mut run_batch = |report: &mut SearchReport, batch: Vec<Instance>| {
        let outcomes = map_ordered(config.jobs, batch, |inst| {
            let outcome = examine(&inst, config.criterion, config.c, config.cap);
            (inst, outcome)
        });
        for (instance, outcome) in outcomes {
            report.instances_examined += 1;
            match outcome {
                Outcome::Fair => {}
                Outcome::OverCap => report.skipped_over_cap += 1,
                Outcome::Counterexample => report.counterexamples_found.push(Counterexample {
                    instance,
                    criterion: config.criterion,
                    c: config.c,
                }),
            }
        }
        progress(report.instances_examined);
    };

    match config.mode {
        SearchMode::Exhaustive { limit } => {
            'sizes: for n in config.agents.0.max(1)..=config.agents.1 {
                for m in config.items.0..=config.items.1 {
                    let rows = row_candidates(config.space, m);
                    let r = rows.len() as u64;
                    let count = r.checked_pow(2 * n as u32);
                    let left = limit - report.instances_examined;
                    let take = match count {
                        Some(k) if k <= left => k,
                        _ => {
                            report.exhaustive = false;
                            left
                        }
                    };
                    let mut batch = Vec::with_capacity(BATCH);
                    let mut digits = vec![0usize; 2 * n];
                    for _ in 0..take {
                        let pick = |ds: &[usize]| profile(ds.iter().map(|&d| rows[d].clone()).collect());
                        let inst = Instance::new(pick(&digits[..n]), pick(&digits[n..])).expect("matching dimensions");
                        batch.push(inst);
                        if batch.len() == BATCH {
                            run_batch(&mut report, std::mem::take(&mut batch));
                        }
                        for d in digits.iter_mut().rev() {
                            *d += 1;
                            if (*d as u64) < r {
                                break;
                            }
                            *d = 0;
                        }
                    }
                    if !batch.is_empty() {
                        run_batch(&mut report, batch);
                    }
                    if !report.exhaustive {
                        break 'sizes;
                    }
                }
            }
        }
        SearchMode::Random { seed, samples } => {
            let mut rng = rng(seed);
            let mut done = 0;
            while done < samples {
                let size = (samples - done).min(BATCH as u64);
                let batch: Vec<Instance> = (0..size)
                    .map(|_| {
                        let n = rng.gen_range(config.agents.0.max(1)..=config.agents.1.max(1));
                        let m = rng.gen_range(config.items.0..=config.items.1);
                        let v = ValuationProfile::new(random_rows(&mut rng, n, m, config.space)).expect("valid rows");
                        let u = ValuationProfile::new(random_rows(&mut rng, n, m, config.space)).expect("valid rows");
                        Instance::new(v, u).expect("matching dimensions")
                    })
                    .collect();
                done += size;
                run_batch(&mut report, batch);
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn candidate_rows() {
        assert_eq!(row_candidates(ValueSpace::Binary, 2), [vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(row_candidates(ValueSpace::Binary, 0), [Vec::<i64>::new()]);
        // levels (0,1), (0,2), (1,2): 4 + 4 + 4 rows, minus shared constant rows.
        assert_eq!(row_candidates(ValueSpace::Bivalued { max: 2 }, 2).len(), 9);
        assert_eq!(row_candidates(ValueSpace::SmallInteger { max: 2 }, 2).len(), 9);
    }

    fn config(mode: SearchMode) -> SearchConfig {
        SearchConfig {
            space: ValueSpace::Binary,
            agents: (2, 2),
            items: (0, 2),
            criterion: Criterion::Prop,
            c: 1,
            mode,
            cap: 1000,
            jobs: 1,
        }
    }

    #[test]
    fn exhaustive_counts() {
        let report = search_counterexamples(&config(SearchMode::Exhaustive { limit: u64::MAX }));
        // m = 0, 1, 2 give 1, 2^4, 4^4 matrix pairs.
        assert_eq!(report.instances_examined, 1 + 16 + 256);
        assert!(report.exhaustive);
        assert!(report.counterexamples_found.is_empty());
        let report = search_counterexamples(&config(SearchMode::Exhaustive { limit: 100 }));
        assert_eq!(report.instances_examined, 100);
        assert!(!report.exhaustive);
    }

    #[test]
    fn zero_slack_finds_counterexamples() {
        let mut cfg = config(SearchMode::Exhaustive { limit: u64::MAX });
        cfg.c = 0;
        cfg.items = (1, 1);
        let report = search_counterexamples(&cfg);
        // One item both agents value under v or u: PROP-0 fails.
        assert!(!report.counterexamples_found.is_empty());
    }

    #[test]
    fn random_is_deterministic_and_reports_single_agent_trivially() {
        let mut cfg = config(SearchMode::Random { seed: 9, samples: 40 });
        cfg.agents = (1, 1);
        cfg.items = (0, 5);
        let a = search_counterexamples(&cfg);
        assert_eq!(a.instances_examined, 40);
        assert!(!a.exhaustive && a.counterexamples_found.is_empty());
        assert_eq!(a, search_counterexamples(&cfg));
    }
}
