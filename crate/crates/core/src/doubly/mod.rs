//! Constructive doubly-fair algorithms.

mod balanced;
mod bivalued;
mod envy;
mod identical;
mod two_agent;

pub use balanced::{balanced_split, balanced_split_on, is_two_balanced_prop, solve_doubly_prop_log, BalancedSplit};
pub use bivalued::{bivalued_bound_holds, solve_bivalued_prop2, solve_bivalued_prop2_traced, KappaState, KappaStep};
pub use envy::{eliminate_cycles, EnvyGraph};
pub use identical::solve_identical_allocator_ef1;
pub use two_agent::{label_sequences, solve_two_agent_doubly_ef1, two_agent_candidates, LabelSequence, TwoAgentCandidates};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::fairness::Criterion;
use crate::model::{Allocation, Instance, ModelError, Side};
use crate::numeric::LpError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DoublyError {
    #[error("the allocator's rows are not identical")]
    NotIdenticalAllocator,
    #[error("expected exactly two agents, got {0}")]
    NotTwoAgents(usize),
    #[error("agent {agent} is not personalized bi-valued under {side}")]
    NotBivalued { agent: usize, side: Side },
    #[error("bad agent partition: {0}")]
    BadPartition(String),
    #[error("linear program failed: {0}")]
    Lp(#[from] LpError),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl From<ModelError> for DoublyError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::NotBivalued { agent, side } => DoublyError::NotBivalued { agent, side },
            other => DoublyError::Invariant(other.to_string()),
        }
    }
}

/// `2⌈log₂ n⌉`, the PROP slack guaranteed by the recursive halving solver.
pub fn log_prop_slack(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        2 * (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    IdenticalEf1,
    TwoAgentEf1,
    PropLog,
    BivaluedProp2,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::IdenticalEf1,
        Algorithm::TwoAgentEf1,
        Algorithm::PropLog,
        Algorithm::BivaluedProp2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::IdenticalEf1 => "identical-ef1",
            Algorithm::TwoAgentEf1 => "two-agent-ef1",
            Algorithm::PropLog => "prop-log",
            Algorithm::BivaluedProp2 => "bivalued-prop2",
        }
    }

    /// The doubly-fair criterion and slack the output satisfies for `n` agents.
    pub fn guarantee(self, n: usize) -> (Criterion, usize) {
        match self {
            Algorithm::IdenticalEf1 | Algorithm::TwoAgentEf1 => (Criterion::Ef, 1),
            Algorithm::PropLog => (Criterion::Prop, log_prop_slack(n)),
            Algorithm::BivaluedProp2 => (Criterion::Prop, 2),
        }
    }

    /// Checks the instance class the algorithm needs, without running it.
    pub fn precondition(self, instance: &Instance) -> Result<(), DoublyError> {
        match self {
            Algorithm::IdenticalEf1 if !instance.u().has_identical_rows() => Err(DoublyError::NotIdenticalAllocator),
            Algorithm::TwoAgentEf1 if instance.n() != 2 => Err(DoublyError::NotTwoAgents(instance.n())),
            Algorithm::BivaluedProp2 => {
                for (side, profile) in [(Side::Agents, instance.v()), (Side::Allocator, instance.u())] {
                    if let Some(agent) = (0..instance.n()).find(|&i| crate::model::bivalued_levels(profile.row(i)).is_none()) {
                        return Err(DoublyError::NotBivalued { agent, side });
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn run(self, instance: &Instance) -> Result<Allocation, DoublyError> {
        match self {
            Algorithm::IdenticalEf1 => solve_identical_allocator_ef1(instance),
            Algorithm::TwoAgentEf1 => solve_two_agent_doubly_ef1(instance),
            Algorithm::PropLog => solve_doubly_prop_log(instance),
            Algorithm::BivaluedProp2 => solve_bivalued_prop2(instance),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm `{s}`"))
    }
}
