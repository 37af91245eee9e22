//! Finite-volume random lattice Schrödinger operators.
//!
//! * [`lattice`]: boxes, background operators, disorder densities and sampling.
//! * [`spectral`]: dense Hermitian spectra, resolvents, Green blocks and the
//!   exact matrix identities behind eigenvalue correlation bounds.
//! * [`estimators`]: reproducible Monte Carlo over disorder realizations.
//! * [`oracle`]: quadrature checks of the underlying integral identities.
//! * [`suite`]: randomized sweeps of the matrix identities.

pub mod estimators;
pub mod lattice;
pub mod oracle;
pub mod quadrature;
pub mod spectral;
pub mod suite;

/// Dense complex matrix used for every operator on a box.
pub type CMatrix = nalgebra::DMatrix<num_complex::Complex64>;

pub use lattice::{Background, DisorderDensity, HamiltonianSample, LatticeBox, MagneticField, Model, SeedRecord};
pub use spectral::{ComplexEnergy, GreenBlock, GreenFlavor, Interval, SpectralDecomposition};
