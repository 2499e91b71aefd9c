//! Numerical verification of sharp weighted Hardy inequalities built from Bessel pairs.
//!
//! Every kernel is generic over [`Real`] (`f32` or `f64`); the `*64` aliases
//! below fix the scalar to `f64`, which the command-line driver uses.

pub mod besselpair;
pub mod error;
pub mod geometry;
pub mod identities;
pub mod ode;
pub mod profile;
pub mod quadrature;
pub mod reduce;
pub mod sampling;
pub mod scalar;
pub mod scenario;
pub mod sharpness;
pub mod spectral;
pub mod weight;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Profile64 = profile::Profile<f64>;
pub type Scenario64 = scenario::Scenario<f64>;
pub type Exponents64 = scenario::Exponents<f64>;
pub type RadialWeightPair64 = weight::RadialWeightPair<f64>;
pub type QuadratureEstimate64 = quadrature::QuadratureEstimate<f64>;
pub type RadialQuotient64 = reduce::RadialQuotient<f64>;
pub type BesselCertificate64 = besselpair::BesselCertificate<f64>;
pub type AnnulusProblem64 = spectral::AnnulusProblem<f64>;
pub type ShootingResult64 = spectral::ShootingResult<f64>;
pub type IdentityBreakdown64 = identities::IdentityBreakdown<f64>;
pub type MonteCarloEstimate64 = sampling::MonteCarloEstimate<f64>;
pub type GaugeModel64 = geometry::GaugeModel<f64>;
