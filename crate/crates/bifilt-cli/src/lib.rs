//! Experiment harness around the `bifilt` filters: declarative
//! scenarios, a Monte-Carlo runner with CSV traces, the complexity
//! table emitter, and the verification suite.

pub mod runner;
pub mod scenario;
pub mod verify;
