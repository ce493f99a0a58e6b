//! Independent verifiers: collocation nullspaces on polynomial ansätze and
//! finite-difference residuals on grids.

pub mod collocation;
pub mod residual;

pub use collocation::{
    collocation_nullspace, collocation_with_margin, tracefree_symmetric_projector,
    CollocationOperator, CollocationOptions, Nullspace,
};
pub use residual::{fd_residual, FdResidual, ResidualOperator};
