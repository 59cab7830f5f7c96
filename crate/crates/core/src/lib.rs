//! Numerical laboratory for the α-curve-shortening flow of convex curves
//! trapped between two parallel lines.
//!
//! The flow is integrated in the normal-angle gauge, where the speed
//! u = κ^α obeys u_t = α·u^{1+1/α}(u_θθ + u) on θ ∈ (0, π). The crate also
//! computes the translating solitons the flow converges to and checks the
//! quantitative estimates along the way (Harnack, entropy dissipation,
//! curvature and derivative decay, barriers).

pub mod domain;
pub mod error;
pub mod estimates;
pub mod flow;
pub mod geometry;
pub mod io;
pub mod run;
pub mod soliton;

pub use error::{Error, Result};
