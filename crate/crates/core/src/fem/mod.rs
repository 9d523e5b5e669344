//! Taylor–Hood (P2/P1) and P2 angular spaces on triangles.

pub mod assembly;
pub mod basis;
pub mod dirichlet;
pub mod norms;
pub mod quadrature;
pub mod space;

pub use assembly::{
    assemble_convection_load, assemble_curl, assemble_div, assemble_load, assemble_mass,
    assemble_stiffness, element_mass, element_stiffness,
};
pub use basis::{reference_basis, Order};
pub use dirichlet::{apply_dirichlet, zero_columns};
pub use norms::{field_norms, FieldNorms};
pub use space::{interpolate, interpolate_scalar, interpolate_vector, FeSpace, Field};
