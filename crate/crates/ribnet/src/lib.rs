//! Orthogonal nets of arbitrary codimension from rational spectral data.
//!
//! The pipeline: load and validate the algebraic-geometric data on a
//! reducible nodal rational curve, construct the even meromorphic
//! differential and read off its residues, solve for the Baker-Akhiezer
//! function and evaluate the net map at the Q-points, then apply
//! Ribaucour transformations by toggling the swap state of movable
//! R-points and certify every identity numerically.

pub mod baker;
pub mod curve;
pub mod dataset;
pub mod export;
pub mod linalg;
pub mod net;
pub mod omega;
pub mod poly;
pub mod report;
pub mod ribaucour;
pub mod tol;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use baker::{BaJet, BaSolution, BaSolver};
pub use curve::{Coord, PointOnCurve, SpectralCurveData};
pub use net::{Grid, GridAxis, NetBuild, OrthogonalNet};
pub use omega::{build_omega, OmegaData};
pub use tol::Tolerances;
