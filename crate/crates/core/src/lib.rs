//! Well-formedness checking, structuring, simulation, and grading for UML
//! activity and sequence diagrams written in a small text format.
//!
//! The pipeline is: [`dsl`] parses text into the [`model`] types, [`lint`]
//! applies the rule catalog, [`structure`] reduces a well-formed activity
//! graph to sequence/branch/loop/parallel blocks and prints pseudocode,
//! [`sim`] executes graphs and pseudocode, [`seqdiag`] checks sequence
//! diagrams against activity diagrams, and [`grading`] scores submissions.

pub mod dsl;
pub mod expr;
pub mod grading;
pub mod lint;
pub mod model;
pub mod seqdiag;
pub mod sim;
pub mod structure;
#[cfg(any(test, feature = "testkit"))]
pub mod testkit;

#[cfg(test)]
mod fixtures;
