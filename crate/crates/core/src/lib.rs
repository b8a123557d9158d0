//! Numerical core: spectral grids, the symbolic NLS hierarchy, scattering
//! transmission coefficients, renormalized energies and split-step flows.

// Guards written as `!(x <= bound)` also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod diffpoly;
pub mod energies;
pub mod evolve;
pub mod grid;
pub mod hierarchy;
pub mod mode;
pub mod scattering;

pub use error::{EnergyError, EvolveError, GridError, HierarchyError, ScatteringError};
pub use grid::{Grid, GridFunction, SpectralFunction};
pub use mode::Mode;
pub use num_complex::Complex64;
