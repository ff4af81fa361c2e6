//! Polynomials and holomorphic functions on Stolz domains, the Dunford
//! contour calculus and the coefficient families built from vertex products.

mod contour;
mod function;
pub mod partial_fractions;
mod polynomial;
mod quadratic;
mod series;

pub use contour::{
    apply_function, boundary_grid, calculus_constant, contour_calculus, default_test_family,
    hinf_norm, hinf_norm_checked, phi_rho_convergence, rbdd_family_norms, CalculusConstant,
    CalculusSettings, ContourCalculus, HinfNorm, RbddFamily,
};
pub use function::{interior_grid, DecayCertificate, FunctionKind, HoloFunction, CATALOG};
pub use polynomial::{eval_polynomial_on_operator, Polynomial};
pub use quadratic::{quadratic_constant, QuadraticConstant};
pub use series::{
    identity_reconstruction, series_coefficients, weighted_coefficients, CoefficientSeries,
};
