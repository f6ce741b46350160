//! Stable roommates with ties and incomplete lists, extended with
//! criteria-based inferred preferences and friend-of-a-friend network
//! candidates.
//!
//! The usual flow: load an [`Instance`], build k-extended lists with
//! [`knet::k_extend`], then search for a k-stable matching with
//! [`solver::find_k_stable`] or check one with [`solver::verify_k_stable`].

pub mod error;
pub mod gen;
pub mod knet;
pub mod model;
pub mod personalize;
pub mod solver;
pub mod stability;

pub use error::{Error, Result};
pub use knet::{k_extend, AcceptGraph, KExtendedLists, Provenance};
pub use model::{
    AgentId, Instance, Matching, Pair, PreferenceLists, RankedList, ValidationReport, Violation,
};
pub use solver::{Budget, Certificate, Outcome, SolveResult};

/// Checks every instance invariant and reports all violations.
pub fn validate_instance(inst: &Instance) -> ValidationReport {
    inst.validate()
}
