//! Feeder-link interference modeling and subchannel allocation for mega LEO
//! constellations served by multi-antenna gateway stations (MAGS).
//!
//! The per-slot pipeline is:
//!
//! 1. [`scenario`]: propagate the constellation and place gateways.
//! 2. [`selection`]: every gateway picks satellites by maximum elevation.
//! 3. [`rf`]: pairwise interference-to-noise ratios between working links.
//! 4. [`igraph`]: adaptive-threshold interference graph and gateway cliques.
//! 5. [`coloring`]: subchannel assignment (Random, Global, GG, CTS and their
//!    time-continuous variants), optionally over a [`decomp`] decomposition.
//! 6. [`vsu`]: vacant subchannel reuse.
//! 7. [`metrics`]: link-failure rate, switching rate, capacity and reports.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod antenna;
pub mod coloring;
pub mod decomp;
pub mod error;
pub mod igraph;
pub mod metrics;
pub mod rf;
pub mod rng;
pub mod scenario;
pub mod selection;
pub mod vsu;

pub use error::{Error, Result};

use serde::{Deserialize, Serialize};
use std::fmt;

/// Global satellite index across all shells of a constellation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SatId(pub u32);

impl fmt::Display for SatId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Subchannel index. `0` means "unassigned"; valid subchannels are `1..=C`.
pub type Color = u32;
