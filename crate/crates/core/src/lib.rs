//! Resolution limits for two incoherent thermal point sources seen through
//! a diffraction-limited imaging system.
//!
//! The crate computes the quantum Fisher information carried by the detected
//! field about the transverse separation of the sources, including detector
//! dark counts, and turns it into Cramer-Rao error floors and resolution
//! figures:
//!
//! * [`psf`] models the imaging profile (a soft-aperture Gaussian, a
//!   published variant of it, or a tabulated amplitude) and reduces it to
//!   the three overlap functionals everything else consumes.
//! * [`photostat`] handles the thermal photon statistics of the two
//!   detection modes and their measured Fisher information.
//! * [`qfi`] assembles the full quantum Fisher information, its closed
//!   forms, limits, and the Cramer-Rao error floor.
//! * [`analysis`] sweeps curves over separation grids, locates half-plateau
//!   separations, and fits their scaling with the signal-to-noise ratio.
//! * [`validation`] re-derives every closed form by an independent route as
//!   a runnable self-check battery.
//!
//! All numerics are generic over the floating-point [`Scalar`]; the `*64`
//! aliases at the crate root fix `f64` for ordinary use.
//!
//! ```
//! use subray::{Psf64, QuadratureConfig64};
//!
//! let psf = Psf64::gaussian(1.0).unwrap();
//! let cfg = QuadratureConfig64::for_rayleigh_length(1.0);
//! let f = psf.functionals(1.0, &cfg).unwrap();
//! let b = subray::qfi::qfi_exact(0.01, 1e-4, &f, 1.0).unwrap();
//! assert!(b.total > 0.0 && b.normalized < 0.25);
//! ```

#![forbid(unsafe_code)]

mod error;
mod quadrature;
mod scalar;

pub mod analysis;
pub mod photostat;
pub mod psf;
pub mod qfi;
pub mod validation;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// `f64` point-spread function.
pub type Psf64 = psf::PointSpreadFunction<f64>;
/// `f64` quadrature and differencing configuration.
pub type QuadratureConfig64 = psf::QuadratureConfig<f64>;
/// `f64` overlap functionals.
pub type OverlapFunctionals64 = psf::OverlapFunctionals<f64>;
/// `f64` estimation scenario.
pub type SourceScenario64 = photostat::SourceScenario<f64>;
/// `f64` mode means.
pub type ModeMeans64 = photostat::ModeMeans<f64>;
/// `f64` information breakdown.
pub type QfiBreakdown64 = qfi::QfiBreakdown<f64>;
/// `f64` sweep result.
pub type SweepTable64 = analysis::SweepTable<f64>;
/// `f64` half-plateau search result.
pub type HalfMaxResult64 = analysis::HalfMaxResult<f64>;
/// `f64` SNR scaling fit.
pub type ScalingFit64 = analysis::ScalingFit<f64>;
