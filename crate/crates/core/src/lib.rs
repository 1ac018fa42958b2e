//! Numerical laboratory for the well-posedness theory of
//! `∂ₜu + iα∂ₓ²u + β∂ₓ³u + iγ|u|²u = 0` in Bourgain spaces `X^{s,b}`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod counterexample;
pub mod dynamics;
pub mod error;
pub mod estimates;
pub mod harness;
pub mod quadrature;
pub mod scalar;
pub mod spectral;
pub mod xsb;

pub use error::{LabError, Result};
pub use scalar::Scalar;

/// Double-precision instantiations of the generic types.
pub type Grid = spectral::SpaceTimeGrid<f64>;
pub type Phase = spectral::PhaseParams<f64>;
pub type Spectrum = spectral::SpatialSpectrum<f64>;
pub type Field = spectral::SpaceTimeField<f64>;
pub type SpectralField = spectral::SpectralField<f64>;
pub type Transform = spectral::Dft<f64>;
pub type Index = xsb::XsbIndex<f64>;
pub type Trajectory = dynamics::Trajectory<f64>;
pub type Bump = counterexample::BumpSet<f64>;
pub type Resonance = estimates::ResonanceIntegrand<f64>;
