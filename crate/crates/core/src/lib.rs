//! Pulse-coupled oscillator synchronization on graphs: exact phases, graph
//! families, the continuous 4-coupling engines, observables, the discrete
//! A4C/M automaton and the layered self-stabilizing stack.

pub mod continuous;
pub mod discrete;
pub mod error;
pub mod graph;
pub mod layered;
pub mod observables;
pub mod phase;

pub use error::{Error, Result};
