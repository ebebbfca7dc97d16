//! Explicit-state model checking for models written as ordinary Rust code.
//!
//! A model implements [`Model`]: it declares bit-packed state variables,
//! numbers its deterministic transitions, and optionally supplies safety,
//! deadlock and progress predicates, stubborn set obligation rules, and a
//! symmetry representative. [`run`] explores the state space breadth first
//! and performs the configured checks in stages.

pub mod engine;
pub mod explore;
pub mod layout;
pub mod model;
pub mod models;
pub mod progress;
pub mod run;
pub mod store;
pub mod stubborn;
pub mod symmetry;

pub use explore::{explore, stats_line, ExplorationResult, ExploreVerdict};
pub use layout::{LayoutError, PackedState, StateLayout, Var, VarDecl};
pub use model::{
    validate, Capabilities, Checks, Model, Plan, RunConfig, SetupError, View, ViewMut,
};
pub use run::{run, Line, RunOutcome, Stage, Verdict};
pub use stubborn::Obligations;
