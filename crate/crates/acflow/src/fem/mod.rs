//! P1/P2 Lagrange finite elements on triangles: quadrature, assembly of the
//! bilinear and linear forms used by the flow scheme, Dirichlet elimination by
//! symmetric row/column removal, and sparse linear algebra with reusable
//! factorizations.
//!
//! Vector fields use a blocked degree-of-freedom layout: all x-components first,
//! then all y-components, so scalar operators extend to vectors block-diagonally.

mod assemble;
mod dirichlet;
mod field;
mod quadrature;
mod solver;
mod sparse;
mod space;

pub use assemble::{
    advect_scalar_rhs, advect_vector_rhs, assemble_scalar, assemble_vector, div_div_rhs,
    div_source_rhs, eta_eps_rhs, flux_grad_rhs, grad_p_rhs, integrate_scalar, integrate_vector,
    integrate_weighted_vector, source_scalar_rhs, source_vector_rhs, Coefficient, ScalarForm,
    VectorForm,
};
pub use dirichlet::{apply_dirichlet, constrain_matrix, set_constrained_rhs, DirichletConstraint};
pub use field::{ScalarField, VectorField};
pub use quadrature::{degree5, QuadRule};
pub use solver::{bicgstab, Factorization, SolverKind, RESIDUAL_TOL};
pub use sparse::CsrMatrix;
pub use space::FeSpace;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FemError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("point ({0}, {1}) not found in mesh")]
    PointNotFound(f64, f64),
    #[error("factorization failed: {0}")]
    FactorizationFailed(String),
    #[error("solver did not reach the residual contract: achieved {achieved:e}, required {required:e}")]
    ResidualTooLarge { achieved: f64, required: f64 },
    #[error("iterative solver did not converge within {max_iter} iterations (residual {residual:e})")]
    NotConverged { max_iter: usize, residual: f64 },
}
