//! Spectral toolkit for the Aharonov-Bohm Schrodinger operator on a slab
//! waveguide with a circular Neumann window.
//!
//! The discrete spectrum of the operator lives in `[(π/2d)², (π/d)²)` and is
//! controlled by the window radius `a` relative to the slab width `d`. Two
//! independent routes are provided and cross-validated:
//!
//! * closed-form machinery built on Bessel-function zeros (critical radii,
//!   interior-cylinder spectra, two-sided eigenvalue brackets), and
//! * an axisymmetric P1 finite-element discretization of the per-mode
//!   weighted form, solved by shift-invert subspace iteration with an
//!   inertia-certified eigenvalue count.

pub mod analytic;
pub mod bessel;
pub mod cli;
pub mod eigen;
pub mod fem;
pub mod mesh;
pub mod spectrum;

pub use analytic::{Classification, FluxMode, Geometry, WallCondition};
pub use bessel::{BesselOrder, ZeroIndex};
pub use eigen::EigenPair;
pub use fem::SparseSym;
pub use mesh::Mesh;
pub use spectrum::{SpectrumResult, SweepCurve};
