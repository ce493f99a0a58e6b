//! Prolongation of overdetermined linear systems on Riemannian charts.
//!
//! The crate is organised bottom-up:
//!
//! * [`algebra`] builds the |1|-graded Lie algebra `o(n+1,1)`, its graded
//!   modules, the Kostant differentials `∂`/`∂*`, the partial inverse `δ*`,
//!   the maps `φ_i` and the Cartan product projection.
//! * [`geometry`] provides conformally flat metric charts with exact
//!   Christoffel symbols and curvature.
//! * [`prolongation`] turns a graded module and a chart into the modified
//!   connection, the splitting operator, closed first order systems,
//!   parallel transport, holonomy and solution spaces.
//! * [`oracle`] holds brute-force verifiers (polynomial collocation and
//!   finite-difference residuals) that share no code path with
//!   [`prolongation`].

pub mod algebra;
pub mod error;
pub mod geometry;
pub mod indices;
pub mod jet;
pub mod linalg;
pub mod oracle;
pub mod polynomial;
pub mod prolongation;
pub mod stencil;

pub use error::{Error, Result};
