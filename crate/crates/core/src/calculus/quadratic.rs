use serde::{Deserialize, Serialize};

use crate::calculus::{apply_function, boundary_grid, CalculusSettings, ContourCalculus, HoloFunction};
use crate::error::{Error, Result};
use crate::geometry::{StolzDomain, UnimodularVertexSet};
use crate::linalg::CVec;
use crate::operator::FiniteOperator;
use crate::rademacher::{rad_norm, RadMethod, RadSettings, VectorFamily};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticConstant {
    pub value: f64,
    /// Boundary-grid supremum of `(Σ_l |φ_l|²)^{1/2}`; a lower estimate of
    /// the true supremum over `E_s`.
    pub grid_sup: f64,
    pub method: RadMethod,
    pub std_error: f64,
}

/// `max_x ‖Σ_l ε_l ⊗ φ_l(T) x‖_Rad / (‖x‖ sup_{∂E_s} (Σ_l |φ_l|²)^{1/2})`.
pub fn quadratic_constant(
    op: &FiniteOperator,
    vertices: &UnimodularVertexSet,
    family: &[HoloFunction],
    x_samples: &[CVec],
    settings: &CalculusSettings,
    rad: &RadSettings,
) -> Result<QuadraticConstant> {
    if family.is_empty() || x_samples.is_empty() {
        return Err(Error::Precondition(
            "quadratic constant needs functions and sample vectors".into(),
        ));
    }
    let domain = StolzDomain::new(vertices.clone(), settings.s)?;
    let grid = boundary_grid(&domain, settings.grid_density)?;
    let grid_sup = grid
        .iter()
        .map(|&z| family.iter().map(|f| f.eval(z).norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let mut contour: Option<ContourCalculus> = None;
    let mats = family
        .iter()
        .map(|phi| {
            apply_function(phi, op, &mut contour, || {
                let u = settings.contour_radius(op, vertices)?;
                ContourCalculus::new(op, vertices, u, settings.quadrature)
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = QuadraticConstant {
        value: 0.0,
        grid_sup,
        method: RadMethod::HilbertExact,
        std_error: 0.0,
    };
    if grid_sup == 0.0 {
        return Ok(best);
    }
    for x in x_samples {
        let nx = op.vector_norm(x);
        if nx == 0.0 {
            return Err(Error::Precondition("sample vectors must be nonzero".into()));
        }
        let images: Vec<CVec> = mats.iter().map(|m| m * x).collect();
        let r = rad_norm(&VectorFamily::new(images, op.ambient_p())?, rad);
        let ratio = r.value / (nx * grid_sup);
        if ratio > best.value || best.value == 0.0 {
            best.value = best.value.max(ratio);
            best.method = r.method;
            best.std_error = r.std_error / (nx * grid_sup);
        }
    }
    Ok(best)
}
