//! Finite-element infrastructure: P1 function spaces, quadrature, sparse
//! assembly and the direct linear solver.

mod assembly;
mod dofmap;
mod quadrature;
mod solve;
mod sparse;

pub use assembly::{
    apply_no_slip, apply_zero_tangential, assemble_interface_coupling, assemble_neumann_loads,
    assemble_stokes_block, assemble_surface_darcy, p1_gradients, segment_normal_velocity, segment_value,
    viscous_element_matrix, StokesCoefficients,
};
pub use dofmap::{build_dof_map, DofMap, Field, FieldSelection};
pub use quadrature::Quadrature;
pub use solve::{rcm_ordering, solve_linear, BandedLu};
pub use sparse::{CsrMatrix, LinComb, SparseSystem, SystemBuilder};
