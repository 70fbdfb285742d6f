//! UE pose, the channel geometry it induces, and the Jacobian from location
//! parameters (ζ0, χ0, p) to channel parameters (θ1, φ1, θ2, φ2, τ).
//!
//! The BS sits at the origin with zero orientation. Index "1" always refers
//! to the initiating device D1 and "2" to the responder D2, so the same pose
//! yields different angle orderings depending on [`Initiator`].

use std::fmt;

use nalgebra::{Matrix3, SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{angles_of, Vec3};

/// Device that initiates the two-way exchange (D1).
///
/// Localization happens at D1, so `Bs` is uplink localization and `Ue` is
/// downlink localization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Initiator {
    Bs,
    Ue,
}

impl Initiator {
    pub fn as_str(self) -> &'static str {
        match self {
            Initiator::Bs => "bs",
            Initiator::Ue => "ue",
        }
    }

    pub fn swapped(self) -> Self {
        match self {
            Initiator::Bs => Initiator::Ue,
            Initiator::Ue => Initiator::Bs,
        }
    }
}

impl fmt::Display for Initiator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// UE position (m) and two-angle orientation (rad).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vec3,
    pub zeta0: f64,
    pub chi0: f64,
}

impl Pose {
    pub fn new(position: Vec3, zeta0: f64, chi0: f64) -> Self {
        Self {
            position,
            zeta0,
            chi0,
        }
    }

    pub fn rotation(&self) -> Matrix3<f64> {
        rotation_matrix(self.zeta0, self.chi0)
    }
}

fn rot_z(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

fn rot_x(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

fn d_rot_z(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(-s, -c, 0.0, c, -s, 0.0, 0.0, 0.0, 0.0)
}

fn d_rot_x(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(0.0, 0.0, 0.0, 0.0, -s, -c, 0.0, c, -s)
}

/// `R = R_z(ζ0) R_x(χ0)`: rotation about z, then about the rotated x′ axis.
/// Maps UE-local coordinates to global coordinates.
pub fn rotation_matrix(zeta0: f64, chi0: f64) -> Matrix3<f64> {
    rot_z(zeta0) * rot_x(chi0)
}

/// Channel parameters of one link, ordered by device role.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelGeometry {
    pub theta1: f64,
    pub phi1: f64,
    pub theta2: f64,
    pub phi2: f64,
    /// Nominal time of flight ‖p‖/c (s).
    pub tau: f64,
    /// Path amplitude, shared by the forward and backward links.
    pub beta: f64,
    pub psi: f64,
    /// Clock bias of D2 relative to D1 (s). Eliminated from every bound.
    pub bias: f64,
}

impl ChannelGeometry {
    pub fn d1_angles(&self) -> (f64, f64) {
        (self.theta1, self.phi1)
    }

    pub fn d2_angles(&self) -> (f64, f64) {
        (self.theta2, self.phi2)
    }
}

/// Direction angles at the BS (global frame) and at the UE (local frame).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkAngles {
    pub bs: (f64, f64),
    pub ue: (f64, f64),
}

/// Angles of the line of sight seen from each end.
pub fn link_angles(pose: &Pose) -> Result<LinkAngles> {
    let p = pose.position;
    if p.norm() == 0.0 {
        return Err(Error::PositionAtOrigin);
    }
    let bs = angles_of(&p).ok_or(Error::DegenerateGeometry("BS"))?;
    let toward_bs_local = pose.rotation().transpose() * (-p);
    let ue = angles_of(&toward_bs_local).ok_or(Error::DegenerateGeometry("UE"))?;
    Ok(LinkAngles { bs, ue })
}

/// Channel geometry for a UE pose with free-space amplitude λ/(4π‖p‖).
///
/// `psi` and `bias` start at zero; set the fields directly to change them.
pub fn channel_geometry(
    pose: &Pose,
    initiator: Initiator,
    wavelength: f64,
    c: f64,
) -> Result<ChannelGeometry> {
    let angles = link_angles(pose)?;
    let d = pose.position.norm();
    let ((theta1, phi1), (theta2, phi2)) = match initiator {
        Initiator::Bs => (angles.bs, angles.ue),
        Initiator::Ue => (angles.ue, angles.bs),
    };
    Ok(ChannelGeometry {
        theta1,
        phi1,
        theta2,
        phi2,
        tau: d / c,
        beta: wavelength / (4.0 * std::f64::consts::PI * d),
        psi: 0.0,
        bias: 0.0,
    })
}

/// Jacobian Υ = [Υ_s | Υ_τ]. Rows are (ζ0, χ0, p_x, p_y, p_z); columns of
/// `ups_s` are (θ1, φ1, θ2, φ2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocationJacobian {
    pub ups_s: SMatrix<f64, 5, 4>,
    pub ups_tau: SVector<f64, 5>,
}

impl LocationJacobian {
    pub fn full(&self) -> SMatrix<f64, 5, 5> {
        let mut m = SMatrix::<f64, 5, 5>::zeros();
        m.fixed_view_mut::<5, 4>(0, 0).copy_from(&self.ups_s);
        m.set_column(4, &self.ups_tau);
        m
    }
}

/// Gradients of (θ, φ) of the vector `w` with respect to `w`.
fn angle_gradients(w: &Vec3) -> Option<(Vec3, Vec3)> {
    let rho2 = w.x * w.x + w.y * w.y;
    let rho = rho2.sqrt();
    let r2 = w.norm_squared();
    if r2 == 0.0 || rho <= r2.sqrt() * 1e-9 {
        return None;
    }
    let g_theta = Vec3::new(w.z * w.x / (rho * r2), w.z * w.y / (rho * r2), -rho / r2);
    let g_phi = Vec3::new(-w.y / rho2, w.x / rho2, 0.0);
    Some((g_theta, g_phi))
}

/// Analytic Jacobian of the channel geometry map, columns in D1/D2 order.
pub fn location_jacobian(pose: &Pose, initiator: Initiator, c: f64) -> Result<LocationJacobian> {
    let p = pose.position;
    let d = p.norm();
    if d == 0.0 {
        return Err(Error::PositionAtOrigin);
    }

    // BS end: angles of p, independent of the orientation.
    let (bs_t, bs_p) = angle_gradients(&p).ok_or(Error::DegenerateGeometry("BS"))?;

    // UE end: angles of w = −Rᵀp.
    let r = pose.rotation();
    let w = -(r.transpose() * p);
    let (ue_t, ue_p) = angle_gradients(&w).ok_or(Error::DegenerateGeometry("UE"))?;
    let dw_dzeta = -((d_rot_z(pose.zeta0) * rot_x(pose.chi0)).transpose() * p);
    let dw_dchi = -((rot_z(pose.zeta0) * d_rot_x(pose.chi0)).transpose() * p);
    // ∂angle/∂p = (∂w/∂p)ᵀ ∇angle = −R ∇angle
    let ue_col = |g: &Vec3| -> SVector<f64, 5> {
        let dp = -(r * g);
        SVector::<f64, 5>::from_column_slice(&[g.dot(&dw_dzeta), g.dot(&dw_dchi), dp.x, dp.y, dp.z])
    };
    let bs_col = |g: &Vec3| SVector::<f64, 5>::from_column_slice(&[0.0, 0.0, g.x, g.y, g.z]);

    let cols = match initiator {
        Initiator::Bs => [bs_col(&bs_t), bs_col(&bs_p), ue_col(&ue_t), ue_col(&ue_p)],
        Initiator::Ue => [ue_col(&ue_t), ue_col(&ue_p), bs_col(&bs_t), bs_col(&bs_p)],
    };
    let ups_s = SMatrix::<f64, 5, 4>::from_columns(&cols);
    let u = p / (c * d);
    let ups_tau = SVector::<f64, 5>::from_column_slice(&[0.0, 0.0, u.x, u.y, u.z]);
    Ok(LocationJacobian { ups_s, ups_tau })
}
