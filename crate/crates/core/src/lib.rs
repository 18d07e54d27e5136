//! Verification and solution construction for the relativistic eikonal
//! equations `u_μ u_μ = 0` and `u_μ u_μ = 1` (Minkowski contraction).
//!
//! * [`algebra`]: exact rational polynomials, the carrier for operator
//!   coefficients and for the arbitrary functions of the general solutions.
//! * [`symmetry`]: first prolongation, exact invariance checks, operator
//!   catalogs, flows and discrete symmetries.
//! * [`solutions`]: rank-parameterized general solutions evaluated by solving
//!   the envelope stationarity system.
//! * [`transforms`]: Legendre-type contact transformation and the hodograph
//!   transformation on gridded fields.
//! * [`fmm`]: first-order fast marching for the Euclidean eikonal equation,
//!   used as an independent numerical oracle.
//!
//! Batch work runs on rayon when the `parallel` feature is enabled (the
//! default); see [`exec`].

pub mod algebra;
pub mod exec;
pub mod fmm;
pub mod grid;
pub mod linalg;
pub mod solutions;
pub mod symmetry;
pub mod transforms;

pub use algebra::{Poly, Rational, VarNames};
pub use exec::Exec;
pub use grid::GridField;
