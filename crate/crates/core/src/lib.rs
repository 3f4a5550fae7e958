//! Span-program path-edge sampling.
//!
//! The crate builds the st-connectivity span program of a graph, simulates the
//! witness-state generation algorithm and the path and cut-set finders built on
//! it with exact query accounting, and checks every output against classical
//! flow, spanning-tree and random-walk oracles.

pub mod algorithms;
pub mod commands;
pub mod config;
pub mod corpus;
pub mod error;
pub mod families;
pub mod flow;
pub mod graph;
pub mod ledger;
pub mod linalg;
pub mod quantum;
pub mod span;
pub mod verify;

pub use config::Config;
pub use error::{Error, Result};
pub use graph::{Edge, Graph, InputOracle, SubgraphView, Vertex};
pub use ledger::QueryLedger;
