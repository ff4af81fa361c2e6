//! Franks–McIntosh decomposition on Stolz domains: an intermediate contour
//! between `∂E_r` and `∂E_s`, weighted orthonormal polynomial bases on its
//! subsegments, the universal family `Φ_{m,j,k,p}` and the coefficients
//! `α_{m,j,k,p}` of a bounded holomorphic function.

mod basis;
mod contour;
mod decay;
mod decomposition;

pub use basis::{build_basis, orthonormal_basis, BasisEntry, FMBasis};
pub use contour::{weight_mass, ClearanceReport, FMContour, FmParams, PieceIndex, Subsegment, DEFAULT_RHO};
pub use decay::{fit_decay, kernel_bounds, sample_points, DecayFit, DecaySettings, KernelBounds, Region, SectorFit};
pub use decomposition::{
    alpha_coefficients, alpha_coefficients_vector, band_index, half_power_sum, kernel, phi_function,
    phi_with_order, reconstruct, reconstruct_vector, reconstruction_error, FMCoefficients, FmIndex, HalfPowerSum,
    ReconstructionError, Truncation,
};
