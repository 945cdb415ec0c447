//! Numerical workbench for the elliptic-gamma Q-operator of the eight-vertex
//! model: special functions, vertex/SOS structures, the TQ and discrete
//! Liouville equations, and several independent routes to the spectrum.

pub mod bethe;
pub mod cli;
pub mod elliptic;
pub mod conformance;
pub mod error;
pub mod functional;
pub mod report;
pub mod vertex;
pub mod poly;
pub mod precision;
pub mod scalar;
pub mod series;
pub mod laurent;
pub mod linalg;
pub mod perturbative;
pub mod thermo;
pub mod tropical;

pub use error::{Error, Result};
pub use precision::{Context, PrecisionContext, TruncationPolicy};
