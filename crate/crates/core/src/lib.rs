//! Certified lower bounds on the growth rate of Dejean words over `k >= 5`
//! letters, with exact enumeration oracles and a transfer-matrix upper bound.

pub mod cascade;
pub mod certificate;
pub mod corrections;
pub mod counting;
pub mod error;
pub mod guard;
pub mod language_graph;
pub mod perm;
pub mod pipeline;
pub mod spectral;
pub mod verify;
pub mod words;

pub use error::{Error, Result};
