//! Fixed directional beam codebooks, the oblique projector onto a combiner's
//! column space, and the link SNR.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{angles_of, response, unit_direction, ArrayGeometry};
use crate::pose::Pose;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BeamRole {
    Transmit,
    Receive,
}

/// Analog beam matrix (N antennas × N_B beams).
///
/// Transmit beams are stored as conjugated steering vectors, so the array gain
/// toward direction `a` is `aᵀF`. Receive beams are plain steering vectors and
/// the combiner output is `Wᴴa`.
#[derive(Debug, Clone)]
pub struct Beamformer {
    matrix: DMatrix<Complex64>,
    role: BeamRole,
    /// Orthonormal basis U of span(W), receive role only.
    basis: Option<DMatrix<Complex64>>,
}

impl Beamformer {
    /// Wraps an arbitrary beam matrix. Receive matrices must have a
    /// nonsingular Gram matrix WᴴW.
    pub fn from_matrix(matrix: DMatrix<Complex64>, role: BeamRole) -> Result<Self> {
        if matrix.ncols() == 0 || matrix.nrows() == 0 {
            return Err(invalid("beams", "beam matrix is empty"));
        }
        let basis = match role {
            BeamRole::Transmit => None,
            BeamRole::Receive => Some(receive_basis(&matrix, "receive beams")?),
        };
        Ok(Self {
            matrix,
            role,
            basis,
        })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn role(&self) -> BeamRole {
        self.role
    }

    pub fn n_beams(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn n_antennas(&self) -> usize {
        self.matrix.nrows()
    }

    /// Tr(BᴴB).
    pub fn trace_power(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Per-beam response to an array vector: `Fᵀu` for transmit, `Wᴴu` for
    /// receive.
    pub fn beam_outputs(&self, u: &DVector<Complex64>) -> DVector<Complex64> {
        match self.role {
            BeamRole::Transmit => self.matrix.transpose() * u,
            BeamRole::Receive => self.matrix.ad_mul(u),
        }
    }

    /// Array gain magnitude toward `a`: ‖aᵀF‖ or ‖Wᴴa‖.
    pub fn gain(&self, a: &DVector<Complex64>) -> f64 {
        self.beam_outputs(a).norm()
    }

    /// Orthonormal basis U of the combiner's column space, so that
    /// W(WᴴW)⁻¹Wᴴ = UUᴴ. `None` for transmit beamformers.
    pub fn basis(&self) -> Option<&DMatrix<Complex64>> {
        self.basis.as_ref()
    }
}

/// Relative singular value of W below which the beam set counts as rank
/// deficient.
const RANK_TOL: f64 = 1e-10;

/// SVD of W, rejecting rank-deficient beam sets.
fn checked_svd(
    w: &DMatrix<Complex64>,
    label: &str,
) -> Result<nalgebra::SVD<Complex64, nalgebra::Dyn, nalgebra::Dyn>> {
    let singular = || Error::SingularGram(format!("{label} ({} beams)", w.ncols()));
    if w.nrows() < w.ncols() {
        return Err(singular());
    }
    let svd = w.clone().svd(true, false);
    let sigma = &svd.singular_values;
    let max = sigma.max();
    if !(max > 0.0) || sigma.iter().any(|&s| !(s > max * RANK_TOL)) {
        return Err(singular());
    }
    Ok(svd)
}

/// Left singular vectors of W. Receive-side forms uᴴW(WᴴW)⁻¹Wᴴv are
/// evaluated as (Uᴴu)ᴴ(Uᴴv), which avoids dividing by small singular values.
fn receive_basis(w: &DMatrix<Complex64>, label: &str) -> Result<DMatrix<Complex64>> {
    Ok(checked_svd(w, label)?.u.expect("requested U"))
}

/// One beam per direction, each column scaled by 1/√N_B so Tr(FᴴF) = 1.
pub fn directional_beams(
    geom: &ArrayGeometry,
    directions: &[(f64, f64)],
    role: BeamRole,
) -> Result<Beamformer> {
    if directions.is_empty() {
        return Err(invalid("directions", "at least one beam is required"));
    }
    let scale = Complex64::from(1.0 / (directions.len() as f64).sqrt());
    let mut m = DMatrix::zeros(geom.len(), directions.len());
    for (b, &(theta, phi)) in directions.iter().enumerate() {
        let a = response(geom, theta, phi);
        let col = match role {
            BeamRole::Transmit => a.map(|z| z.conj() * scale),
            BeamRole::Receive => a * scale,
        };
        m.set_column(b, &col);
    }
    let basis = match role {
        BeamRole::Transmit => None,
        BeamRole::Receive => Some(receive_basis(&m, &format!("{directions:?}"))?),
    };
    Ok(Beamformer {
        matrix: m,
        role,
        basis,
    })
}

/// Orthogonal projector `W(WᴴW)⁻¹Wᴴ` onto the column space of `w`, formed as
/// UUᴴ from the left singular vectors.
pub fn projection(w: &Beamformer) -> Result<DMatrix<Complex64>> {
    let u = match w.basis() {
        Some(u) => u.clone(),
        None => receive_basis(w.matrix(), "beam matrix")?,
    };
    Ok(&u * u.adjoint())
}

/// Which device a beam grid belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BeamDevice {
    /// The base station, at zero orientation.
    Anchor,
    /// A UE: directions are reversed to point back at the anchor and then
    /// expressed in the UE frame according to the [`UeBeamFrame`].
    Ue(Pose, UeBeamFrame),
}

/// How a UE codebook relates to the anchor codebook.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UeBeamFrame {
    /// Reversed directions are fixed in the UE body frame and turn with the
    /// device; orientation therefore steers the beams away.
    Body,
    /// Reversed directions are fixed in the global frame and mapped into the
    /// body frame with Rᵀ.
    Global,
}

/// Angular sector as (start, end) in radians.
pub type Sector = (f64, f64);

/// √n × √n directions equispaced over an azimuth × polar sector.
///
/// Directions are returned in the device's own frame, polar-major.
pub fn sector_beam_grid(
    n_beams: usize,
    device: BeamDevice,
    azimuth: Sector,
    polar: Sector,
) -> Result<Vec<(f64, f64)>> {
    if n_beams == 0 {
        return Err(invalid("n_beams", "at least one beam is required"));
    }
    let side = (n_beams as f64).sqrt().round() as usize;
    if side * side != n_beams {
        return Err(invalid(
            "n_beams",
            format!("{n_beams} is not a perfect square"),
        ));
    }
    for (name, (lo, hi)) in [("azimuth sector", azimuth), ("polar sector", polar)] {
        if !(lo.is_finite() && hi.is_finite()) || hi < lo {
            return Err(invalid("sector", format!("{name} [{lo}, {hi}] is empty")));
        }
    }
    if side > 1 && (azimuth.1 == azimuth.0 && polar.1 == polar.0) {
        return Err(invalid(
            "sector",
            "zero-area sector cannot hold a beam grid",
        ));
    }
    let steps = |(lo, hi): Sector| -> Vec<f64> {
        if side == 1 {
            vec![0.5 * (lo + hi)]
        } else {
            (0..side)
                .map(|i| lo + (hi - lo) * i as f64 / (side - 1) as f64)
                .collect()
        }
    };
    let az = steps(azimuth);
    let pol = steps(polar);
    let mut out = Vec::with_capacity(n_beams);
    for &theta in &pol {
        for &phi in &az {
            out.push(match device {
                BeamDevice::Anchor => (theta, phi),
                BeamDevice::Ue(pose, frame) => {
                    let reversed = -unit_direction(theta, phi);
                    let local = match frame {
                        UeBeamFrame::Body => reversed,
                        UeBeamFrame::Global => pose.rotation().transpose() * reversed,
                    };
                    angles_of(&local).unwrap_or(if local.z >= 0.0 {
                        (0.0, 0.0)
                    } else {
                        (std::f64::consts::PI, 0.0)
                    })
                }
            });
        }
    }
    Ok(out)
}

/// Transmission and noise parameters shared by both link directions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalConfig {
    /// Energy per pilot symbol (J).
    pub energy_per_symbol: f64,
    /// Symbol duration (s).
    pub symbol_time: f64,
    pub n_symbols: usize,
    /// Noise power spectral density (W/Hz).
    pub noise_psd: f64,
    /// Bandwidth (Hz).
    pub bandwidth: f64,
    /// Squared effective bandwidth (Hz²).
    pub weff2: f64,
    /// Carrier frequency (Hz).
    pub carrier: f64,
    /// Propagation speed (m/s).
    pub c: f64,
}

/// Pulse model used to derive the effective bandwidth from `bandwidth`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseModel {
    /// W_eff² = W²/3.
    SincThird,
    /// Flat unit-energy spectrum on [−W/2, W/2]: W_eff² = W²/12.
    FlatBaseband,
}

impl PulseModel {
    pub fn weff2(self, bandwidth: f64) -> f64 {
        match self {
            PulseModel::SincThird => bandwidth * bandwidth / 3.0,
            PulseModel::FlatBaseband => bandwidth * bandwidth / 12.0,
        }
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

impl SignalConfig {
    /// Link budget of the reference deployment: 38 GHz carrier, 125 MHz
    /// bandwidth, 64 pilots, 0 dBm transmit power, −170 dBm/Hz noise and
    /// T_s = 1/W.
    pub fn reference() -> Self {
        Self::from_link_budget(38e9, 125e6, 64, 0.0, -170.0, PulseModel::SincThird)
    }

    pub fn from_link_budget(
        carrier: f64,
        bandwidth: f64,
        n_symbols: usize,
        tx_power_dbm: f64,
        noise_psd_dbm_hz: f64,
        pulse: PulseModel,
    ) -> Self {
        let symbol_time = 1.0 / bandwidth;
        Self {
            energy_per_symbol: dbm_to_watts(tx_power_dbm) * symbol_time,
            symbol_time,
            n_symbols,
            noise_psd: dbm_to_watts(noise_psd_dbm_hz),
            bandwidth,
            weff2: pulse.weff2(bandwidth),
            carrier,
            c: crate::SPEED_OF_LIGHT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let checks: [(&'static str, f64); 7] = [
            ("energy_per_symbol", self.energy_per_symbol),
            ("symbol_time", self.symbol_time),
            ("noise_psd", self.noise_psd),
            ("bandwidth", self.bandwidth),
            ("weff2", self.weff2),
            ("carrier", self.carrier),
            ("c", self.c),
        ];
        for (name, v) in checks {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be positive, got {v}")));
            }
        }
        if self.n_symbols == 0 {
            return Err(invalid("n_symbols", "must be at least 1"));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        self.c / self.carrier
    }

    /// γ = N₁N₂N_sE_t/N₀.
    pub fn gamma(&self, n1: usize, n2: usize) -> f64 {
        (n1 * n2) as f64 * self.n_symbols as f64 * self.energy_per_symbol / self.noise_psd
    }
}

/// `10log₁₀(N₁N₂N_sE_t/N₀) + 20log₁₀(β·tx_gain·rx_gain)`.
pub fn snr_db(
    sig: &SignalConfig,
    n_tx: usize,
    n_rx: usize,
    beta: f64,
    tx_gain: f64,
    rx_gain: f64,
) -> f64 {
    10.0 * sig.gamma(n_tx, n_rx).log10() + 20.0 * (beta * tx_gain * rx_gain).log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_ura, Plane, Vec3};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn ura(n: usize) -> ArrayGeometry {
        make_ura(n, n, 0.5, Plane::Xz, Vec3::zeros(), 1.0).unwrap()
    }

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<Complex64> {
        DMatrix::from_fn(rows, cols, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    #[test]
    fn single_beam_is_conjugate_steering() {
        let g = ura(4);
        let f = directional_beams(&g, &[(2.0, 1.0)], BeamRole::Transmit).unwrap();
        let a = response(&g, 2.0, 1.0);
        assert_relative_eq!(f.trace_power(), 1.0, epsilon = 1e-12);
        for i in 0..g.len() {
            assert_eq!(f.matrix()[(i, 0)], a[i].conj());
        }
        assert_relative_eq!(f.gain(&a), 1.0, epsilon = 1e-12);
        let w = directional_beams(&g, &[(2.0, 1.0)], BeamRole::Receive).unwrap();
        assert_relative_eq!(w.gain(&a), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn reference_codebook_has_unit_trace() {
        let g = ura(12);
        let dirs = sector_beam_grid(
            25,
            BeamDevice::Anchor,
            (30f64.to_radians(), 150f64.to_radians()),
            (100f64.to_radians(), 170f64.to_radians()),
        )
        .unwrap();
        let f = directional_beams(&g, &dirs, BeamRole::Transmit).unwrap();
        assert_relative_eq!(f.trace_power(), 1.0, epsilon = 1e-12);
        for col in f.matrix().column_iter() {
            assert_relative_eq!(col.norm(), 0.2, epsilon = 1e-12);
        }
    }

    #[test]
    fn duplicate_receive_beams_are_singular() {
        let g = ura(4);
        let r = directional_beams(&g, &[(2.0, 1.0), (2.0, 1.0)], BeamRole::Receive);
        assert!(matches!(r, Err(Error::SingularGram(_))));
        // Transmit codebooks have no Gram requirement.
        assert!(directional_beams(&g, &[(2.0, 1.0), (2.0, 1.0)], BeamRole::Transmit).is_ok());
    }

    #[test]
    fn projection_orthonormal_and_single_column() {
        let q = DMatrix::<Complex64>::identity(5, 2);
        let w = Beamformer::from_matrix(q.clone(), BeamRole::Receive).unwrap();
        assert!((projection(&w).unwrap() - &q * q.adjoint()).norm() <= 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = random_matrix(&mut rng, 6, 1);
        let w = Beamformer::from_matrix(v.clone(), BeamRole::Receive).unwrap();
        let expected = &v * v.adjoint() / Complex64::from(v.norm_squared());
        assert!((projection(&w).unwrap() - expected).norm() <= 1e-12);
    }

    #[test]
    fn projection_is_idempotent_hermitian_and_fixes_span() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let w = random_matrix(&mut rng, 9, 4);
            let bf = Beamformer::from_matrix(w.clone(), BeamRole::Receive).unwrap();
            let p = projection(&bf).unwrap();
            assert!((&p * &p - &p).norm() < 1e-10);
            assert!((&p - p.adjoint()).norm() < 1e-12);
            let inside = &w * random_matrix(&mut rng, 4, 1);
            assert!((&p * &inside - &inside).norm() < 1e-10 * inside.norm());
            // Component orthogonal to span(W) is annihilated.
            let x = random_matrix(&mut rng, 9, 1);
            let outside = &x - &p * &x;
            assert!((&p * &outside).norm() < 1e-10 * x.norm());
        }
    }

    #[test]
    fn ill_conditioned_full_rank_beams_are_accepted() {
        // 25 beams on a 6×6 array at 0.34λ: cond(WᴴW) is around 1e14.
        let g = make_ura(6, 6, 0.34, Plane::Xz, Vec3::zeros(), 1.0).unwrap();
        let dirs = sector_beam_grid(
            25,
            BeamDevice::Anchor,
            (43f64.to_radians(), 137f64.to_radians()),
            (108f64.to_radians(), 175f64.to_radians()),
        )
        .unwrap();
        let w = directional_beams(&g, &dirs, BeamRole::Receive).unwrap();
        let p = projection(&w).unwrap();
        assert!((&p * &p - &p).norm() < 1e-6);
        let inside = w.matrix().column(7).into_owned();
        assert!((&p * &inside - &inside).norm() < 1e-8 * inside.norm());
        // Same subspace as a Householder QR of W.
        let q = w.matrix().clone().qr().q();
        assert!((&p - &q * q.adjoint()).norm() < 1e-7);
        // Fewer antennas than beams is rank deficient.
        let small = make_ura(4, 4, 0.34, Plane::Xz, Vec3::zeros(), 1.0).unwrap();
        assert!(matches!(
            directional_beams(&small, &dirs, BeamRole::Receive),
            Err(Error::SingularGram(_))
        ));
    }

    #[test]
    fn singular_projection_is_an_error() {
        let w = DMatrix::<Complex64>::zeros(4, 2);
        assert!(matches!(
            Beamformer::from_matrix(w, BeamRole::Receive),
            Err(Error::SingularGram(_))
        ));
    }

    #[test]
    fn beam_grid_shapes() {
        let one = sector_beam_grid(1, BeamDevice::Anchor, (0.2, 0.6), (1.0, 2.0)).unwrap();
        assert_eq!(one, vec![(1.5, 0.4)]);

        let (az, pol) = (
            (30f64.to_radians(), 150f64.to_radians()),
            (100f64.to_radians(), 170f64.to_radians()),
        );
        let grid = sector_beam_grid(25, BeamDevice::Anchor, az, pol).unwrap();
        assert_eq!(grid.len(), 25);
        for (i, &(theta, phi)) in grid.iter().enumerate() {
            assert_relative_eq!(
                theta.to_degrees(),
                100.0 + 17.5 * (i / 5) as f64,
                epsilon = 1e-9
            );
            assert_relative_eq!(
                phi.to_degrees(),
                30.0 + 30.0 * (i % 5) as f64,
                epsilon = 1e-9
            );
        }
        assert!(sector_beam_grid(24, BeamDevice::Anchor, az, pol).is_err());
        assert!(sector_beam_grid(4, BeamDevice::Anchor, (1.0, 0.5), pol).is_err());
    }

    #[test]
    fn ue_grid_is_reversed_anchor_grid() {
        let (az, pol) = ((0.5, 2.6), (1.8, 2.9));
        let anchor = sector_beam_grid(9, BeamDevice::Anchor, az, pol).unwrap();
        let flat = Pose::new(Vec3::new(0.0, 20.0, -10.0), 0.0, 0.0);
        let rotated = Pose::new(flat.position, PI / 6.0, PI / 6.0);
        for frame in [UeBeamFrame::Body, UeBeamFrame::Global] {
            let ue = sector_beam_grid(9, BeamDevice::Ue(flat, frame), az, pol).unwrap();
            for (&(tb, pb), &(tu, pu)) in anchor.iter().zip(&ue) {
                assert_relative_eq!(
                    unit_direction(tu, pu),
                    -unit_direction(tb, pb),
                    epsilon = 1e-12
                );
            }
        }
        let zero = sector_beam_grid(9, BeamDevice::Ue(flat, UeBeamFrame::Global), az, pol).unwrap();
        let global =
            sector_beam_grid(9, BeamDevice::Ue(rotated, UeBeamFrame::Global), az, pol).unwrap();
        let body =
            sector_beam_grid(9, BeamDevice::Ue(rotated, UeBeamFrame::Body), az, pol).unwrap();
        let rt = rotated.rotation().transpose();
        for i in 0..9 {
            let expected = rt * unit_direction(zero[i].0, zero[i].1);
            assert_relative_eq!(
                unit_direction(global[i].0, global[i].1),
                expected,
                epsilon = 1e-12
            );
            assert_relative_eq!(body[i].0, zero[i].0, epsilon = 1e-12);
            assert_relative_eq!(body[i].1, zero[i].1, epsilon = 1e-12);
        }
    }

    #[test]
    fn reference_snr_constant() {
        let sig = SignalConfig::reference();
        let constant = snr_db(&sig, 144, 144, 1.0, 1.0, 1.0);
        assert!((constant - 150.26).abs() < 0.005, "{constant}");
        let doubled =
            snr_db(&sig, 144, 144, 2e-5, 0.3, 0.4) - snr_db(&sig, 144, 144, 1e-5, 0.3, 0.4);
        assert_relative_eq!(doubled, 20.0 * 2f64.log10(), epsilon = 1e-12);
        assert_relative_eq!(doubled, 6.0206, epsilon = 1e-4);
    }

    proptest! {
        #[test]
        fn trace_stays_unit_as_beams_are_added(n in 1usize..12, seed in 0u64..1000) {
            let g = ura(3);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dirs: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen_range(0.0..PI), rng.gen_range(-PI..PI))).collect();
            let f = directional_beams(&g, &dirs, BeamRole::Transmit).unwrap();
            prop_assert!((f.trace_power() - 1.0).abs() < 1e-12);
        }
    }
}
