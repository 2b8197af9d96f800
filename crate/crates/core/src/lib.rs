//! Exact computations on the Farey graph (the curve complex of the once-punctured
//! torus and the four-holed sphere), generic hyperbolic-graph tooling, property-A
//! witnesses, Busemann functions and MIN sets, SL(2,Z) dynamics, and exhaustive
//! enumeration of surface decomposition types.

pub mod boundary;
pub mod busemann;
pub mod error;
pub mod farey;
pub mod hypgraph;
pub mod mcg;
pub mod propa;
pub mod surfaces;

pub use error::{Error, Result};
pub use farey::{FareyEdge, Slope};
pub use mcg::SL2Matrix;

/// Library version, embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
