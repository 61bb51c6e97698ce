//! Pseudospectral simulation and verification laboratory for the nonlocal
//! nonlinear Schrödinger equation `iu_t + u_xx + α u²u* = 0`, its derivative
//! variants, and their gauge-transformed forms, where `u*(x) = conj(u(-x))`.
//!
//! The crate is layered bottom-up:
//!
//! * [`spectral`]: grids, transforms, dealiased products, `∂ₓ`, `∂ₓ⁻¹`
//! * [`spaces`]: `E^s_σ`, `H^σ` and Besov norms, dilations, scaling probes
//! * [`equations`]: right-hand sides and conserved functionals
//! * [`gauge`]: the nonlocal gauge transform and its series form
//! * [`evolve`]: Lawson RK4 stepper and the Duhamel/Picard engine
//! * [`experiments`]: named verification experiments producing reports

pub mod equations;
pub mod error;
pub mod evolve;
pub mod experiments;
pub mod gauge;
pub mod spaces;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use spectral::{Band, FrequencyGrid, SpectralField};
