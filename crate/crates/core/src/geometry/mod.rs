//! Conformally flat metric charts, curvature and covariant derivatives.

pub mod chart;
pub mod curvature;
pub mod fields;
pub mod rescaling;

pub use chart::{FamilyTag, MetricChart, MetricFamily};
pub use curvature::{
    covariant_norm, tracefree, Christoffel, ConformalPoint, CurvatureSummary, Riemann,
    CURVATURE_CONVENTION,
};
pub use fields::{
    covariant_derivative, covariant_hessian, tracefree_hessian, LowerOrderTensor, MetricField,
    PolynomialTensor, Stenciled, TensorField,
};
pub use rescaling::{einstein_residual_of_rescaling, rescaled_point, ScalarSample};
