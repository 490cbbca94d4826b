//! Voronoi diagrams of pure quantum states under three distances
//! (divergence limit, coordinate Euclidean, geodesic), closed-form
//! boundary geometry on a hyperplane section of the d-level state
//! space, and Holevo capacity estimation for one-qubit channels via
//! smallest enclosing balls.
//!
//! Module map:
//! - [`qdm`]: density matrices, Hermitian eigendecomposition, matrix
//!   logarithm, quantum divergence.
//! - [`bloch`]: Bloch-vector and generalized coordinate
//!   parameterizations, sphere sampling.
//! - [`section`]: closed forms on the 3-parameter hyperplane section,
//!   Voronoi boundary residuals, the ellipsoid-to-sphere transform.
//! - [`voronoi`]: cell assignment under pluggable distances, diagram
//!   comparison, boundary extraction, smallest enclosing ball.
//! - [`channel`]: affine Bloch-ball channels and capacity estimation.
//! - [`run`]: CLI-facing orchestration (diagram, capacity, sample).
//! - [`verify`]: the verification suite behind `qvoronoi verify`.

pub mod bloch;
pub mod channel;
pub mod plot;
pub mod qdm;
pub mod run;
pub mod section;
pub mod verify;
pub mod voronoi;
