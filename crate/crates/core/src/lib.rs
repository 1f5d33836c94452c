//! Basic process algebra (BPA) bisimilarity checking, hit-or-run and
//! countdown counter games, and the reductions connecting them.
//!
//! The crate is organised bottom-up:
//!
//! * [`lts`]: transition systems, bisimulation partitions, approximants.
//! * [`bpa`]: BPA syntax, generated transition systems, norms.
//! * [`check`]: exact, refutation-based and one-action decision procedures.
//! * [`games`]: hit-or-run and countdown games with exact solvers.
//! * [`atm`]: alternating Turing machines and their encoding as games.
//! * [`reduction`]: hit-or-run games as BPA bisimilarity instances.
//! * [`prob`]: probabilistic transition systems and the fully
//!   probabilistic variant of the reduction.
//! * [`gen`]: seeded random games and BPAs.
//! * [`pipeline`]: seeded end-to-end consistency harness.

pub mod atm;
pub mod bpa;
pub mod check;
pub mod error;
pub mod games;
pub mod gen;
pub mod lts;
pub mod pipeline;
pub mod prob;
pub mod reduction;
pub mod symbol;
mod text;

pub use error::{Error, Result};
pub use symbol::{Action, StackSymbol};
