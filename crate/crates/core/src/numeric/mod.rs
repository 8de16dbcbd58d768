//! Exact arithmetic and linear programming.

pub mod lp;
mod rational;
pub mod tum;

pub use lp::{
    solve_vertex_optimal, Constraint, LinearProgram, LpError, Relation, Tight, VariableBounds,
    VertexSolution,
};
pub use rational::{ratio, ParseRationalError, Rational};
pub use tum::{is_totally_unimodular_bipartite_form, TumError};
