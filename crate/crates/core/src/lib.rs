//! Vulnerability analysis of evolving power-grid topologies.
//!
//! The crate rebuilds the grid graph valid in any year from commission and
//! decommission records ([`data`]), computes complex-network metrics for each
//! snapshot ([`metrics`], [`community`], [`degree`]), measures vulnerability as
//! the relative drop in global efficiency under simultaneous random or worst-case
//! removal of nodes or edges ([`attack`]), and tracks all of it across years
//! ([`timeline`]).

pub mod attack;
pub mod community;
pub mod data;
pub mod degree;
pub mod error;
pub mod fixture;
pub mod generate;
pub mod graph;
pub mod metrics;
pub mod paths;
pub mod rng;
pub mod timeline;

pub use error::{Error, Result};
pub use graph::Snapshot;
