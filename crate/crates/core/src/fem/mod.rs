//! P1 finite element kernel: sparse operators, bulk and boundary-chain
//! assembly, constraint elimination and a preconditioned CG solver.

mod assembly;
mod cg;
mod constraints;
mod interpolate;
mod quadrature;
mod sparse;
mod surface;

pub use assembly::{
    assemble_bulk_direction_load, assemble_bulk_lumped_mass, assemble_bulk_mass, assemble_bulk_stiffness,
    assemble_tensor_stiffness, element_mass, element_stiffness, Tensor2, IDENTITY,
};
pub use cg::{conjugate_gradient, solve_spd, CgOptions, CgOutcome};
pub use constraints::{apply_constraints, ConstraintSet, DofMap, ReducedSystem};
pub use interpolate::{evaluate_p1, interpolate_p1, PointLocator};
pub use quadrature::{integrate, l2_error, try_l2_error};
pub use sparse::{SparseOperator, TripletBuilder};
pub use surface::{
    assemble_surface_direction_load, assemble_surface_lumped_mass, assemble_surface_mass,
    assemble_surface_projection_load, assemble_surface_stiffness,
};

/// Euclidean inner product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
