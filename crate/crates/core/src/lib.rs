//! Sublinear-time estimation for the Friedkin–Johnsen opinion dynamics.
//!
//! The crate works in the query-access model: an algorithm may draw a uniform
//! vertex, read a vertex's weighted and unweighted degree, sample a neighbor,
//! and look up a single opinion through an [`Oracle`]. Everything built on top
//! of those primitives lives here:
//!
//! * [`graph`]: immutable CSR storage, edge-list ingestion and the O(1) query
//!   primitives (alias-table neighbor sampling).
//! * [`opinions`]: opinion vectors, synthetic generators and query-counted
//!   oracles.
//! * [`exact`]: dense and iterative equilibrium solvers plus exact measures,
//!   used as ground truth.
//! * [`walk`]: the lazy-random-walk estimator for a single expressed opinion.
//! * [`ppr`]: the deterministic push-based estimator for regular graphs.
//! * [`innate`]: recovering innate opinions from expressed ones.
//! * [`measures`]: sampling estimators for polarization, disagreement and
//!   friends under either oracle.

pub mod error;
pub mod exact;
pub mod graph;
pub mod innate;
pub mod measures;
pub mod opinions;
pub mod ppr;
pub mod rng;
pub mod synth;
pub mod walk;

pub use error::{Error, Result};
pub use exact::MeasureReport;
pub use graph::{Graph, VertexId};
pub use opinions::{Expressed, Innate, OpinionSource, OpinionVector, Oracle};
pub use rng::RandomStream;
