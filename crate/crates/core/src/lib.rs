//! Delta-Stekloff eigenvalues for Maxwell's equations on radially layered
//! balls.
//!
//! On a ball of radius `R` with radially piecewise-constant permittivity every
//! boundary operator of the problem is diagonal in the vector spherical
//! harmonic basis, so spectra, solution operators and far-field entries reduce
//! to closed-form per-degree expressions built on the radial solves in
//! [`radial`].

pub mod cli;
pub mod radial;
pub mod scattering;
pub mod specfun;
pub mod stekloff;
pub mod surface;

pub use num_complex::Complex64;
