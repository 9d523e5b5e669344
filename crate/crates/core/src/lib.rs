//! Finite element solver for the 2D incompressible micropolar Navier–Stokes
//! equations, advanced in time by a first-order, linear, decoupled scheme
//! whose convective terms are weighted by a scalar auxiliary variable.
//!
//! Each step solves two generalised Stokes problems and two elliptic
//! problems with constant coefficients, followed by one scalar equation.
//! The resulting discrete energy is non-increasing for any time step.

pub mod error;
pub mod experiments;
pub mod fem;
pub mod io;
pub mod mesh;
pub mod solve;
pub mod stepper;
pub mod transport;

pub use error::{Error, Result};
