//! Mixed-dimensional Stokes-Darcy flow on 2D triangular meshes.
//!
//! Bulk Stokes flow is coupled to an averaged Darcy pressure living on a 1D
//! boundary trace (the porous layer). A second model places an elastic wall
//! over the layer and resolves contact and release through the seepage
//! pressure carried by the layer.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64`.

// `!(a > b)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::excessive_precision)]

pub mod cli;
pub mod error;
pub mod fem;
pub mod fsi_contact;
pub mod mesh;
pub mod scalar;
pub mod stokes_darcy;
pub mod verify;

pub use error::{Error, MeshInvariant, Result};
pub use scalar::Scalar;

pub type Mesh = mesh::Mesh<f64>;
pub type TraceMesh = mesh::TraceMesh<f64>;
pub type Quadrature = fem::Quadrature<f64>;
pub type CsrMatrix = fem::CsrMatrix<f64>;
pub type SparseSystem = fem::SparseSystem<f64>;
pub type PhysParams = stokes_darcy::PhysParams<f64>;
pub type CoupledState = stokes_darcy::CoupledState<f64>;
pub type StokesDarcyProblem = stokes_darcy::StokesDarcyProblem<f64>;
pub type ChannelFsi = fsi_contact::ChannelFsi<f64>;
pub type ContactState = fsi_contact::ContactState<f64>;
pub type ConvergenceTable = verify::ConvergenceTable<f64>;

pub type Mesh32 = mesh::Mesh<f32>;
pub type PhysParams32 = stokes_darcy::PhysParams<f32>;
