//! Sparse storage and the two linear-system shapes the time stepper needs:
//! SPD systems (angular equation) and generalised Stokes saddle points.

pub mod csr;
pub mod spd;
pub mod stokes;

pub use csr::SparseMatrix;
pub use spd::{prepare_spd, Method, SolverOptions, SpdSolver};
pub use stokes::{prepare_stokes, StokesReport, StokesSolver};
