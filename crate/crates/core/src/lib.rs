//! Fair division of indivisible goods when the allocator has preferences too.
//!
//! Agents value items through `v`, the allocator through `u`. The crate builds
//! allocations that are fair under both, maximizes the allocator's welfare
//! subject to the agents' fairness, and ships a brute-force oracle and a small
//! graph lab for checking the combinatorial claims at desk scale.

#![allow(clippy::needless_range_loop)]

pub mod doubly;
pub mod fairness;
pub mod generate;
pub mod graphlab;
pub mod maxeff;
pub mod model;
pub mod numeric;
pub mod oracle;

pub use fairness::{Criterion, FairnessReport, Perspective};
pub use model::{Allocation, Instance, ModelError, Side, ValuationProfile};
pub use numeric::{ratio, Rational};
