//! Numerical laboratory for circumradius configurations on fractal measures.
//!
//! The crate builds discrete natural measures on self-similar sets, evaluates
//! the circumradius `R(x^1, ..., x^{d+1})` of point tuples, and measures how
//! often tuples drawn from a measure land in a thin radius window
//! `|R - t| < ε`. Around that core sit the supporting experiments:
//!
//! - [`measures`]: Cantor sets, products, translate unions, sampling,
//!   Frostman ratios and box-counting dimension.
//! - [`circumsphere`]: the radius function with a Cayley–Menger cross-check.
//! - [`incidence`]: window statistics, conditional variants and ε-scaling fits.
//! - [`sharpness`]: the strip-and-column construction where the ε-law degrades
//!   to `ε^{1/2 + α}`.
//! - [`spectral`]: Fourier transforms of measures and spheres, the factorized
//!   transform of the unit-radius configuration measure, Riesz energies.
//! - [`intersection`]: annulus slices, dilation sets, sphere fitting and the
//!   measure of the radii set.
//! - [`experiment`]: the config-driven runner behind the `fractal-radii` binary.
//!
//! ```
//! use fractal_radii::circumsphere::circumradius;
//!
//! let r = circumradius(&[&[0.0, 0.0], &[2.0, 0.0], &[1.0, 1.0]]).unwrap();
//! assert!((r - 1.0).abs() < 1e-12);
//! ```

pub mod circumsphere;
pub mod csvio;
pub mod error;
pub mod experiment;
pub mod fit;
pub mod incidence;
pub mod intersection;
pub mod kv;
pub mod measures;
pub mod numeric;
pub mod rng;
pub mod sharpness;
pub mod spectral;

pub use error::{Error, Result};
pub use fit::{fit_scaling_exponent, ScalingFit};
pub use measures::{CantorSpec, DiscreteMeasure, SetSpec};
