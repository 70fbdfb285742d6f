//! Array manifolds: element layouts, wavenumber vectors and steering vectors
//! with their analytic angle derivatives.
//!
//! Angles follow the physics convention: `theta` is the polar angle measured
//! from +z and `phi` is the azimuth measured from +x in the xy-plane.

use std::f64::consts::PI;

use nalgebra::{DVector, Matrix3xX, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Cartesian vector in meters (or rad/m for wavenumbers).
pub type Vec3 = Vector3<f64>;

/// Coordinate plane holding a planar array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Plane {
    Xy,
    Xz,
    Yz,
}

impl Plane {
    /// Unit vectors spanning the plane, as (column axis, row axis).
    fn axes(self) -> (Vec3, Vec3) {
        match self {
            Plane::Xy => (Vec3::x(), Vec3::y()),
            Plane::Xz => (Vec3::x(), Vec3::z()),
            Plane::Yz => (Vec3::y(), Vec3::z()),
        }
    }
}

/// Element positions (columns, meters) and carrier wavelength.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    elements: Matrix3xX<f64>,
    wavelength: f64,
}

impl ArrayGeometry {
    pub fn new(elements: Matrix3xX<f64>, wavelength: f64) -> Result<Self> {
        if elements.ncols() == 0 {
            return Err(invalid("elements", "array needs at least one element"));
        }
        if elements.iter().any(|v| !v.is_finite()) {
            return Err(invalid("elements", "non-finite element coordinate"));
        }
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(invalid(
                "wavelength",
                format!("must be positive, got {wavelength}"),
            ));
        }
        Ok(Self {
            elements,
            wavelength,
        })
    }

    pub fn elements(&self) -> &Matrix3xX<f64> {
        &self.elements
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn len(&self) -> usize {
        self.elements.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.ncols() == 0
    }

    pub fn centroid(&self) -> Vec3 {
        self.elements.column_mean()
    }

    /// Same layout shifted by `offset`.
    pub fn translated(&self, offset: &Vec3) -> Self {
        let mut elements = self.elements.clone();
        for mut col in elements.column_iter_mut() {
            col += offset;
        }
        Self {
            elements,
            wavelength: self.wavelength,
        }
    }
}

/// Steering vector and its partial derivatives at one angle pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringBundle {
    pub a: DVector<Complex64>,
    pub da_dtheta: DVector<Complex64>,
    pub da_dphi: DVector<Complex64>,
}

/// Uniform rectangular array of `rows x cols` elements with the given spacing,
/// lying in `plane` and centred on `center`.
///
/// Columns advance along the first axis of the plane, rows along the second
/// (for `Plane::Xz`: columns along x, rows along z).
pub fn make_ura(
    rows: usize,
    cols: usize,
    spacing: f64,
    plane: Plane,
    center: Vec3,
    wavelength: f64,
) -> Result<ArrayGeometry> {
    if rows == 0 || cols == 0 {
        return Err(invalid("rows/cols", "grid dimensions must be at least 1"));
    }
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(invalid(
            "spacing",
            format!("must be positive, got {spacing}"),
        ));
    }
    let (u, v) = plane.axes();
    let c0 = (cols as f64 - 1.0) / 2.0;
    let r0 = (rows as f64 - 1.0) / 2.0;
    let mut elements = Matrix3xX::zeros(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let pos = center + u * ((c as f64 - c0) * spacing) + v * ((r as f64 - r0) * spacing);
            elements.set_column(r * cols + c, &pos);
        }
    }
    ArrayGeometry::new(elements, wavelength)
}

/// Wavenumber vector `(2π/λ)[cosφ sinθ, sinφ sinθ, cosθ]`.
pub fn wavenumber(theta: f64, phi: f64, lambda: f64) -> Vec3 {
    unit_direction(theta, phi) * (2.0 * PI / lambda)
}

/// Unit vector pointing along (θ, φ).
pub fn unit_direction(theta: f64, phi: f64) -> Vec3 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Vec3::new(cp * st, sp * st, ct)
}

/// Spherical angles (θ, φ) of a nonzero vector. φ is in (−π, π].
///
/// Returns `None` on the polar axis, where the azimuth is undefined.
pub fn angles_of(v: &Vec3) -> Option<(f64, f64)> {
    let rho = v.x.hypot(v.y);
    let r = v.norm();
    if r == 0.0 || rho <= r * 1e-12 {
        return None;
    }
    Some((rho.atan2(v.z), v.y.atan2(v.x)))
}

/// Array response `a = exp(−j Δᵀk)/√N` with exact partials in θ and φ.
pub fn steering(geom: &ArrayGeometry, theta: f64, phi: f64) -> SteeringBundle {
    let scale = 2.0 * PI / geom.wavelength;
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let k = Vec3::new(cp * st, sp * st, ct) * scale;
    let dk_dtheta = Vec3::new(cp * ct, sp * ct, -st) * scale;
    let dk_dphi = Vec3::new(-sp * st, cp * st, 0.0) * scale;

    let n = geom.len();
    let norm = 1.0 / (n as f64).sqrt();
    let mut a = DVector::zeros(n);
    let mut da_dtheta = DVector::zeros(n);
    let mut da_dphi = DVector::zeros(n);
    for (i, pos) in geom.elements.column_iter().enumerate() {
        let phase = pos.dot(&k);
        let ai = Complex64::from_polar(norm, -phase);
        // d/dx exp(−jΔᵀk) = −j (Δᵀ ∂k/∂x) exp(−jΔᵀk)
        let minus_j_ai = Complex64::new(0.0, -1.0) * ai;
        a[i] = ai;
        da_dtheta[i] = minus_j_ai * pos.dot(&dk_dtheta);
        da_dphi[i] = minus_j_ai * pos.dot(&dk_dphi);
    }
    SteeringBundle {
        a,
        da_dtheta,
        da_dphi,
    }
}

/// Steering vector only.
pub fn response(geom: &ArrayGeometry, theta: f64, phi: f64) -> DVector<Complex64> {
    let k = wavenumber(theta, phi, geom.wavelength);
    let norm = 1.0 / (geom.len() as f64).sqrt();
    DVector::from_iterator(
        geom.len(),
        geom.elements
            .column_iter()
            .map(|pos| Complex64::from_polar(norm, -pos.dot(&k))),
    )
}
