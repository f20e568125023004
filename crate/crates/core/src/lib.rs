//! Local discontinuous Galerkin discretization of the 2D diffusion equation
//! on triangular meshes.
//!
//! The pipeline mirrors the usual workflow: build a [`mesh::Mesh`], compute
//! [`reftensors::RefTensors`] for a polynomial order, assemble the block
//! system with [`system::Discretization`] and advance or solve it.

// `!(x > y)` is used on purpose so that NaN takes the error path
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod basis;
pub mod convergence;
pub mod exprlang;
pub mod fields;
pub mod linsolve;
pub mod mesh;
pub mod quadrature;
pub mod reftensors;
pub mod system;
pub mod vtkout;

pub use assembly::{DofMatrix, EdgeSelector, SparseOperator};
pub use basis::PolynomialOrder;
pub use exprlang::Expr;
pub use fields::ContinuousFunction;
pub use mesh::Mesh;
pub use reftensors::RefTensors;
pub use system::{BoundaryKind, Discretization, ProblemSpec, SystemState};
