//! Seeded solver-vs-oracle suites.
//!
//! A suite file looks like
//!
//! ```json
//! {"cases": [{"name": "pairing", "solver": "two-agent-ef", "c": 1,
//!             "agents": [2, 2], "items": [1, 8],
//!             "agents_space": {"small_integer": {"max": 20}},
//!             "seeds": {"start": 0, "count": 500}}]}
//! ```
//!
//! `solver` is a maximize method (compared with the oracle optimum under the
//! agents' constraint) or a doubly algorithm (checked against its guarantee).

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;

use dualfair_core::doubly::Algorithm;
use dualfair_core::fairness::{allocator_efficiency, check_doubly, Perspective};
use dualfair_core::generate::{random_sized_instance, ValueSpace};
use dualfair_core::maxeff::{Guarantee, MaxEffError, Method};
use dualfair_core::model::Instance;
use dualfair_core::oracle::{default_cap, enumerate_best_with, FairnessConstraint, Objective, OracleConfig, OracleError};
use dualfair_core::Rational;

use crate::{Failure, EXIT_INFEASIBLE, EXIT_OK};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    Maximize(Method),
    Doubly(Algorithm),
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Solver::Maximize(m) => m.fmt(f),
            Solver::Doubly(a) => a.fmt(f),
        }
    }
}

impl FromStr for Solver {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse()
            .map(Solver::Maximize)
            .or_else(|_| s.parse().map(Solver::Doubly))
            .map_err(|_: String| format!("unknown solver `{s}`"))
    }
}

impl<'de> Deserialize<'de> for Solver {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

impl Serialize for Solver {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seeds {
    pub start: u64,
    pub count: u64,
}

fn small_integers() -> ValueSpace {
    ValueSpace::SmallInteger { max: 20 }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Case {
    pub name: String,
    pub solver: Solver,
    /// Slack for maximize methods; doubly algorithms use their own guarantee.
    #[serde(default)]
    pub c: usize,
    /// Inclusive ranges.
    pub agents: (usize, usize),
    pub items: (usize, usize),
    #[serde(default = "small_integers")]
    pub agents_space: ValueSpace,
    #[serde(default = "small_integers")]
    pub allocator_space: ValueSpace,
    #[serde(default)]
    pub identical_allocator: bool,
    pub seeds: Seeds,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Suite {
    #[serde(default)]
    pub cases: Vec<Case>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseSummary {
    pub name: String,
    pub solver: Solver,
    pub runs: u64,
    pub passes: u64,
    pub failures: Vec<u64>,
    /// Largest OPT / SW over runs with SW > 0.
    pub max_ratio: Option<Rational>,
    pub cap_exceeded: Vec<u64>,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub cases: Vec<CaseSummary>,
    pub runs: u64,
    pub passes: u64,
    pub all_passed: bool,
}

/// One CSV row.
#[derive(Debug, Clone, Serialize)]
struct Row<'a> {
    case: &'a str,
    seed: u64,
    method: String,
    objective: String,
    oracle: String,
    ratio: String,
    micros: u128,
}

enum Verdict {
    Pass,
    Fail,
    Cap,
    Error(String),
}

struct Run {
    objective: Option<Rational>,
    oracle: Option<Rational>,
    ratio: Option<Rational>,
    verdict: Verdict,
}

fn ratio(opt: &Rational, sw: &Rational) -> Option<Rational> {
    (!sw.is_zero()).then(|| opt.clone() / sw.clone())
}

fn within(guarantee: Guarantee, m: usize, opt: &Rational, sw: &Rational) -> bool {
    let factor = match guarantee {
        Guarantee::Exact => 1,
        Guarantee::TwoApprox => 2,
        Guarantee::MApprox => m.max(1) as i64,
    };
    sw.clone() * Rational::from(factor) >= *opt
}

fn maximize_run(instance: &Instance, method: Method, c: usize) -> Run {
    let constraint = FairnessConstraint {
        criterion: method.criterion(),
        c,
        perspective: Perspective::Agents,
    };
    let config = OracleConfig { cap: default_cap(), jobs: 1 };
    let oracle = match enumerate_best_with(instance, constraint, Objective::AllocatorEfficiency, &config) {
        Ok(best) => best.map(|b| b.optimum),
        Err(OracleError::CapExceeded { .. }) => {
            return Run {
                objective: None,
                oracle: None,
                ratio: None,
                verdict: Verdict::Cap,
            }
        }
        Err(e) => {
            return Run {
                objective: None,
                oracle: None,
                ratio: None,
                verdict: Verdict::Error(e.to_string()),
            }
        }
    };
    match (method.run(instance, c), oracle) {
        (Ok(result), Some(opt)) => Run {
            ratio: ratio(&opt, &result.objective),
            verdict: if within(result.guarantee, instance.m(), &opt, &result.objective) {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            objective: Some(result.objective),
            oracle: Some(opt),
        },
        // the solver found a fair allocation the oracle says does not exist
        (Ok(result), None) => Run {
            objective: Some(result.objective),
            oracle: None,
            ratio: None,
            verdict: Verdict::Fail,
        },
        (Err(MaxEffError::NoFeasibleAllocation), None) => Run {
            objective: None,
            oracle: None,
            ratio: None,
            verdict: Verdict::Pass,
        },
        (Err(MaxEffError::NoFeasibleAllocation), Some(opt)) => Run {
            objective: None,
            oracle: Some(opt),
            ratio: None,
            verdict: Verdict::Fail,
        },
        (Err(MaxEffError::StateSpaceExceeded { .. } | MaxEffError::TooManyAgents { .. }), oracle) => Run {
            objective: None,
            oracle,
            ratio: None,
            verdict: Verdict::Cap,
        },
        (Err(e), oracle) => Run {
            objective: None,
            oracle,
            ratio: None,
            verdict: Verdict::Error(e.to_string()),
        },
    }
}

fn doubly_run(instance: &Instance, algorithm: Algorithm) -> Run {
    let (criterion, c) = algorithm.guarantee(instance.n());
    match algorithm.run(instance) {
        Ok(allocation) => {
            let pass = check_doubly(instance, &allocation, criterion, c).is_ok_and(|r| r.verdict);
            Run {
                objective: Some(allocator_efficiency(instance, &allocation)),
                oracle: None,
                ratio: None,
                verdict: if pass { Verdict::Pass } else { Verdict::Fail },
            }
        }
        Err(e) => Run {
            objective: None,
            oracle: None,
            ratio: None,
            verdict: Verdict::Error(e.to_string()),
        },
    }
}

fn text(x: &Option<Rational>) -> String {
    x.as_ref().map(ToString::to_string).unwrap_or_default()
}

/// Runs every case, appending CSV rows to `csv` when given.
pub fn run_suite(suite: &Suite, mut csv: Option<&mut csv::Writer<Box<dyn std::io::Write>>>) -> Result<Summary, String> {
    let mut cases = Vec::new();
    for case in &suite.cases {
        if case.agents.0 == 0 || case.agents.0 > case.agents.1 || case.items.0 > case.items.1 {
            return Err(format!("case `{}`: bad agents or items range", case.name));
        }
        let mut summary = CaseSummary {
            name: case.name.clone(),
            solver: case.solver,
            runs: 0,
            passes: 0,
            failures: Vec::new(),
            max_ratio: None,
            cap_exceeded: Vec::new(),
            errors: Vec::new(),
        };
        for seed in case.seeds.start..case.seeds.start.saturating_add(case.seeds.count) {
            let identical = case.identical_allocator || case.solver == Solver::Doubly(Algorithm::IdenticalEf1);
            let agents = match case.solver {
                Solver::Doubly(Algorithm::TwoAgentEf1) | Solver::Maximize(Method::TwoAgentEf) => (2, 2),
                _ => case.agents,
            };
            let instance = random_sized_instance(seed, agents, case.items, case.agents_space, case.allocator_space, identical);
            let start = Instant::now();
            let run = match case.solver {
                Solver::Maximize(method) => maximize_run(&instance, method, case.c),
                Solver::Doubly(algorithm) => doubly_run(&instance, algorithm),
            };
            let micros = start.elapsed().as_micros();
            summary.runs += 1;
            match &run.verdict {
                Verdict::Pass => summary.passes += 1,
                Verdict::Fail => summary.failures.push(seed),
                Verdict::Cap => summary.cap_exceeded.push(seed),
                Verdict::Error(e) => summary.errors.push(format!("seed {seed}: {e}")),
            }
            if let Some(r) = &run.ratio {
                if summary.max_ratio.as_ref().is_none_or(|best| r > best) {
                    summary.max_ratio = Some(r.clone());
                }
            }
            if let Some(writer) = csv.as_deref_mut() {
                writer
                    .serialize(Row {
                        case: &case.name,
                        seed,
                        method: case.solver.to_string(),
                        objective: text(&run.objective),
                        oracle: text(&run.oracle),
                        ratio: text(&run.ratio),
                        micros,
                    })
                    .map_err(|e| e.to_string())?;
            }
        }
        cases.push(summary);
    }
    let runs = cases.iter().map(|c| c.runs).sum();
    let passes = cases.iter().map(|c| c.passes).sum();
    Ok(Summary {
        all_passed: runs == passes,
        cases,
        runs,
        passes,
    })
}

pub(crate) fn run(suite: &Path, csv_path: Option<&Path>) -> Result<(String, i32), Failure> {
    let text = std::fs::read_to_string(suite).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", suite.display())))?;
    let suite: Suite = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", suite.display())))?;
    let mut writer = match csv_path {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
            let mut w = csv::WriterBuilder::new()
                .has_headers(false)
                .from_writer(Box::new(file) as Box<dyn std::io::Write>);
            // written by hand so an empty suite still gets a header
            w.write_record(["case", "seed", "method", "objective", "oracle", "ratio", "micros"])
                .map_err(|e| Failure::Usage(e.to_string()))?;
            Some(w)
        }
        None => None,
    };
    let summary = run_suite(&suite, writer.as_mut()).map_err(Failure::Usage)?;
    if let Some(mut w) = writer {
        w.flush().map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let code = if summary.all_passed { EXIT_OK } else { EXIT_INFEASIBLE };
    Ok((serde_json::to_string_pretty(&json!(summary)).expect("serializable"), code))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solver_names() {
        assert_eq!("lp-binary".parse::<Solver>().unwrap(), Solver::Maximize(Method::LpBinary));
        assert_eq!("prop-log".parse::<Solver>().unwrap(), Solver::Doubly(Algorithm::PropLog));
        assert!("nope".parse::<Solver>().is_err());
    }

    #[test]
    fn empty_suite() {
        let summary = run_suite(&Suite::default(), None).unwrap();
        assert_eq!(summary.runs, 0);
        assert!(summary.all_passed);
    }

    #[test]
    fn pairing_ratio_within_two() {
        let suite: Suite = serde_json::from_str(
            r#"{"cases": [{"name": "p", "solver": "two-agent-ef", "c": 1, "agents": [2, 2], "items": [1, 6],
                "seeds": {"start": 0, "count": 40}}]}"#,
        )
        .unwrap();
        let summary = run_suite(&suite, None).unwrap();
        assert_eq!(summary.passes, 40, "{summary:?}");
        assert!(summary.cases[0].max_ratio.as_ref().is_none_or(|r| *r <= Rational::from(2)));
    }
}
