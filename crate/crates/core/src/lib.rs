//! Simulation and verification toolkit for the randomized push broadcast
//! protocol on Erdős–Rényi random graphs.
//!
//! - [`graph`]: `G(n, p)` sampling, implicit complete graphs, set queries.
//! - [`push`]: the synchronous push protocol with per-round instrumentation.
//! - [`phases`]: phase boundaries of a run and the predicted broadcast time.
//! - [`typicality`]: empirical checks of degree and cut concentration.
//! - [`oracle`]: exact broadcast-time law on small graphs.
//! - [`bounds`]: Chernoff, Azuma–Hoeffding and Talagrand tail bounds.
//! - [`harness`]: seeded multi-trial experiments and reports.

pub mod bounds;
pub mod error;
pub mod graph;
pub mod oracle;
pub mod phases;
pub mod push;
pub mod typicality;
pub mod harness;

pub use error::{Error, Result};
pub use graph::{Graph, Vertex, VertexSet};
