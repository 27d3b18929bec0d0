//! Embedded eigenvalues for perturbed periodic Schrödinger operators.
//!
//! Given a 1-periodic background `V0` and a finite set of energies inside its
//! bands, this crate builds a decaying oscillatory perturbation `V` such that
//! `-u'' + (V0 + V) u = E u` has an `L^2(0, inf)` solution at each target
//! energy, and checks the result by independent integration.
//!
//! * [`numerics`]: ODE integration with dense output, root finding, quadrature, line fits.
//! * [`floquet`]: fundamental solutions, discriminant, bands, Floquet frames.
//! * [`targets`]: target sets, resonance classification, the resonance constant.
//! * [`synth`]: construction constants and the coupled Prüfer-angle system.
//! * [`verify`]: probe traces, decay verdicts and oscillatory-integral audits.

// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod floquet;
pub mod numerics;
pub mod synth;
pub mod targets;
pub mod verify;

pub use error::{Error, Result};
