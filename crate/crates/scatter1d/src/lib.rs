//! One-dimensional scattering of scalar waves by complex finite-range potentials.
//!
//! The central object is the 2×2 transfer matrix `M(k)` mapping the
//! left-asymptotic plane-wave coefficients `(A₋, B₋)` of a solution of
//! `-ψ'' + v(x) ψ = k² ψ` to the right-asymptotic ones `(A₊, B₊)`.
//! Units: ħ = 1, lengths dimensionless, wavenumbers in inverse length.
//!
//! Modules:
//! - [`potentials`]: potential descriptions, Fourier transforms, JSON schema.
//! - [`transfer_core`]: matrix/amplitude maps, composition, symmetries, classification.
//! - [`exact_solvers`]: closed forms (deltas, barriers, locally periodic stacks).
//! - [`numeric_engines`]: evolution-operator engine, scattering solutions, S-curve method.
//! - [`approx_engines`]: Born and Dyson truncations, Born inverse scattering.
//! - [`spectral_scan`]: wavenumber sweeps and real-zero refinement.
//! - [`inverse_design`]: unidirectionally invisible blocks and single-mode inverse design.

pub mod approx_engines;
pub mod error;
pub mod exact_solvers;
pub mod inverse_design;
pub mod linalg;
pub mod numeric_engines;
pub mod potentials;
pub mod quadrature;
pub mod schema;
pub mod spectral_scan;
pub mod transfer_core;

pub use error::{Result, ScatterError};
pub use linalg::Mat2;
pub use potentials::Potential;
pub use transfer_core::{ScatteringData, TransferMatrix};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Imaginary unit.
pub const I: C64 = C64::new(0.0, 1.0);

pub(crate) fn check_k(k: f64) -> Result<()> {
    if k.is_finite() && k > 0.0 {
        Ok(())
    } else {
        Err(ScatterError::InvalidWavenumber(k))
    }
}
