//! The modified connection, the splitting operator, closed systems and
//! their parallel transport.
//!
//! Section values are frame components with respect to `e_i = e^{−φ}∂_i`;
//! on the flat chart these coincide with coordinate components.

pub mod reconstruct;
pub mod section;
pub mod splitting;
pub mod system;
pub mod transport;

pub use reconstruct::{
    reconstruct_and_check, reconstruct_with, splitting_consistency, GridTransport, Reconstruction,
};
pub use section::{
    frame_connection, modified_connection_apply, ExactSection, SectionField, StencilSection,
    TractorSection,
};
pub use splitting::{
    jet_dependence_check, jet_isomorphism_check, splitting_jets, splitting_operator,
    splitting_uniqueness_check, splitting_with_defect, GridSource, JetIsomorphism, JetSource,
    PolynomialSource, RationalSource, SplittingCheck, UniquenessCheck,
};
pub use system::{modified_connection_curvature_defect, ClosedSystem, Provenance, SystemKind};
pub use transport::{
    holonomy, rectangle_loops, solution_space, transport, transport_matrix, KernelPolicy, Path,
    SolutionSpace, Transport, TransportOptions,
};
