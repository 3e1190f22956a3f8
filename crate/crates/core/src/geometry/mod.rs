//! Pointwise geometry of a bracket spec: Levi-Civita connection, curvature,
//! the Gauss and Peterson-Codazzi-Mainardi conditions and the coefficient
//! tensors of the Jacobi integrand. All derivatives are symbolic.

mod checks;
pub mod examples;
mod point;
mod spec;

pub use checks::{
    aggregate, equivalence_audit, gpc_check, point_residuals, residuals, sample_points, tangents, Condition, EquivalenceAudit,
    GeometryReport, Mismatch, PointResiduals, GPC, JACOBI_COEFFICIENTS,
};
pub use point::{Coefficients, PointGeometry, SINGULAR_THRESHOLD};
pub use spec::{BracketSpec, GammaSource};
