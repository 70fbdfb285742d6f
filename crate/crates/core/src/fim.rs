//! Fisher information of the channel parameters of one transmission, plus
//! the generic FIM tools used to turn it into localization information:
//! congruence transform, Schur-complement EFIM and EFIM additivity.
//!
//! Channel FIM index order is fixed: (θ1, φ1, θ2, φ2, β, ψ, τ). The leading
//! 5×5 block holds the spatial parameters and their coupling with the path
//! amplitude; ψ and τ are decoupled from everything else.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, DVector, SMatrix};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::beamforming::{BeamRole, Beamformer, SignalConfig};
use crate::error::{invalid, Error, Result};
use crate::geometry::{steering, ArrayGeometry};
use crate::pose::ChannelGeometry;

pub const THETA1: usize = 0;
pub const PHI1: usize = 1;
pub const THETA2: usize = 2;
pub const PHI2: usize = 3;
pub const BETA: usize = 4;
pub const PSI: usize = 5;
pub const TAU: usize = 6;

pub const CHANNEL_LABELS: [&str; 7] = ["theta1", "phi1", "theta2", "phi2", "beta", "psi", "tau"];
pub const ANGLE_LABELS: [&str; 4] = ["theta1", "phi1", "theta2", "phi2"];

/// Forward: D1 → D2 (observed at D2). Backward: D2 → D1 (observed at D1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkDirection {
    Forward,
    Backward,
}

impl fmt::Display for LinkDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LinkDirection::Forward => "forward",
            LinkDirection::Backward => "backward",
        })
    }
}

pub type Mat7 = SMatrix<f64, 7, 7>;
pub type Mat4 = SMatrix<f64, 4, 4>;

/// 7×7 channel-parameter FIM of one transmission.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelFim {
    pub matrix: Mat7,
    pub direction: LinkDirection,
    /// γ = N₁N₂N_sE_t/N₀.
    pub gamma: f64,
}

/// Equivalent FIM on a labelled subset of parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Efim {
    pub matrix: DMatrix<f64>,
    pub kept_parameters: Vec<String>,
}

impl Efim {
    pub fn new(matrix: DMatrix<f64>, kept_parameters: Vec<String>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() != kept_parameters.len() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix with {} labels",
                matrix.nrows(),
                matrix.ncols(),
                kept_parameters.len()
            )));
        }
        Ok(Self {
            matrix,
            kept_parameters,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Sesquilinear forms of one transmission: `G(u,v) = uᵀFFᴴv*` at the
/// transmitter and `R(u,v) = uᴴP_W v` at the receiver.
struct BeamForms {
    tx: [DVector<Complex64>; 3],
    /// Receive vectors in an orthonormal basis of span(W).
    rx: [DVector<Complex64>; 3],
}

// Slots in `BeamForms`: steering vector, ∂/∂θ, ∂/∂φ.
const A: usize = 0;
const K: usize = 1;
const P: usize = 2;

impl BeamForms {
    fn g(&self, u: usize, v: usize) -> Complex64 {
        self.tx[v].dotc(&self.tx[u])
    }

    fn r(&self, u: usize, v: usize) -> Complex64 {
        self.rx[u].dotc(&self.rx[v])
    }
}

/// Closed-form channel FIM for one transmission.
///
/// For `Backward` the transmitter is D2 and the receiver D1; for `Forward`
/// the roles are swapped. Angle rows always follow the D1/D2 order of `cg`.
pub fn channel_fim(
    direction: LinkDirection,
    tx_geom: &ArrayGeometry,
    rx_geom: &ArrayGeometry,
    tx_beams: &Beamformer,
    rx_beams: &Beamformer,
    cg: &ChannelGeometry,
    sig: &SignalConfig,
) -> Result<ChannelFim> {
    if tx_beams.role() != BeamRole::Transmit || rx_beams.role() != BeamRole::Receive {
        return Err(invalid(
            "beams",
            "expected a transmit and a receive beamformer",
        ));
    }
    if tx_beams.n_antennas() != tx_geom.len() || rx_beams.n_antennas() != rx_geom.len() {
        return Err(Error::DimensionMismatch(
            "beamformer rows must match the array size".into(),
        ));
    }
    if !(cg.beta > 0.0) {
        return Err(invalid(
            "beta",
            format!("must be positive, got {}", cg.beta),
        ));
    }
    let basis = rx_beams
        .basis()
        .ok_or_else(|| Error::SingularGram("receive beams".into()))?;

    let (tx_angles, rx_angles, tx_idx, rx_idx) = match direction {
        LinkDirection::Backward => (
            cg.d2_angles(),
            cg.d1_angles(),
            [THETA2, PHI2],
            [THETA1, PHI1],
        ),
        LinkDirection::Forward => (
            cg.d1_angles(),
            cg.d2_angles(),
            [THETA1, PHI1],
            [THETA2, PHI2],
        ),
    };
    let ts = steering(tx_geom, tx_angles.0, tx_angles.1);
    let rs = steering(rx_geom, rx_angles.0, rx_angles.1);
    let ts_norm2 = ts.a.norm_squared();
    let rs_norm2 = rs.a.norm_squared();
    let forms = BeamForms {
        tx: [ts.a, ts.da_dtheta, ts.da_dphi].map(|v| tx_beams.beam_outputs(&v)),
        rx: [rs.a, rs.da_dtheta, rs.da_dphi].map(|v| basis.ad_mul(&v)),
    };

    let gamma = sig.gamma(tx_geom.len(), rx_geom.len());
    let beta = cg.beta;
    let amp = gamma * beta * beta;
    let gaa = forms.g(A, A).re;
    let raa = forms.r(A, A).re;
    // Both forms are at most (beam power)·‖a‖²; anything 240 dB below that is
    // an exact null up to rounding.
    let tx_scale = tx_beams.trace_power() * ts_norm2;
    if !(gaa > 1e-24 * tx_scale && raa > 1e-24 * rs_norm2) {
        return Err(Error::NoIllumination);
    }

    let mut j = Mat7::zeros();
    let mut put = |i: usize, k: usize, v: f64| {
        j[(i, k)] = v;
        j[(k, i)] = v;
    };

    // Receiver angles: information enters through the projected derivative.
    for (si, &row) in [K, P].iter().zip(&rx_idx) {
        for (sk, &col) in [K, P].iter().zip(&rx_idx) {
            put(row, col, amp * gaa * forms.r(*si, *sk).re);
        }
        put(row, BETA, gamma * beta * gaa * forms.r(*si, A).re);
    }
    // Transmitter angles: information enters through the beam outputs.
    for (si, &row) in [K, P].iter().zip(&tx_idx) {
        for (sk, &col) in [K, P].iter().zip(&tx_idx) {
            put(row, col, amp * forms.g(*sk, *si).re * raa);
        }
        put(row, BETA, gamma * beta * forms.g(A, *si).re * raa);
    }
    // Receiver/transmitter cross terms.
    for (sr, &row) in [K, P].iter().zip(&rx_idx) {
        for (st, &col) in [K, P].iter().zip(&tx_idx) {
            put(row, col, amp * (forms.r(*sr, A) * forms.g(*st, A)).re);
        }
    }
    put(BETA, BETA, gamma * gaa * raa);
    put(PSI, PSI, amp * gaa * raa);
    put(TAU, TAU, 4.0 * PI * PI * sig.weff2 * amp * gaa * raa);

    Ok(ChannelFim {
        matrix: j,
        direction,
        gamma,
    })
}

/// `Υ J Υᵀ`.
pub fn transform_fim(j: &DMatrix<f64>, ups: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !j.is_square() || ups.ncols() != j.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "Jacobian {}x{} against FIM {}x{}",
            ups.nrows(),
            ups.ncols(),
            j.nrows(),
            j.ncols()
        )));
    }
    Ok(ups * j * ups.transpose())
}

/// Schur complement of `j` onto the indices in `keep`; every other index is
/// treated as a nuisance parameter.
pub fn efim(j: &DMatrix<f64>, keep: &[usize]) -> Result<Efim> {
    let labels: Vec<String> = keep.iter().map(|i| format!("x{i}")).collect();
    efim_labeled(j, keep, labels)
}

pub(crate) fn efim_labeled(j: &DMatrix<f64>, keep: &[usize], labels: Vec<String>) -> Result<Efim> {
    let n = j.nrows();
    if !j.is_square() {
        return Err(Error::DimensionMismatch("FIM must be square".into()));
    }
    if keep.is_empty() || keep.iter().any(|&i| i >= n) {
        return Err(invalid(
            "keep",
            format!("indices {keep:?} out of range for {n}x{n}"),
        ));
    }
    let mut seen = vec![false; n];
    for &i in keep {
        if std::mem::replace(&mut seen[i], true) {
            return Err(invalid("keep", format!("index {i} repeated")));
        }
    }
    let drop: Vec<usize> = (0..n).filter(|i| !seen[*i]).collect();
    if drop.is_empty() {
        return Err(invalid("keep", "no nuisance parameters to eliminate"));
    }
    let j11 = j.select_rows(keep).select_columns(keep);
    let j12 = j.select_rows(keep).select_columns(&drop);
    let j22 = j.select_rows(&drop).select_columns(&drop);
    let scale = j22.diagonal().amax();
    let chol = j22.cholesky().ok_or(Error::NuisanceUnidentifiable)?;
    let min_pivot = chol.l_dirty().diagonal().min();
    if !(scale > 0.0 && min_pivot * min_pivot > scale * 1e-14) {
        return Err(Error::NuisanceUnidentifiable);
    }
    let solved = chol.solve(&j12.transpose());
    let mut m = j11 - &j12 * solved;
    m = (&m + m.transpose()) * 0.5;
    Efim::new(m, labels)
}

/// EFIM of (θ1, φ1, θ2, φ2) after eliminating the path amplitude.
pub fn angle_efim(j: &ChannelFim) -> Result<Efim> {
    let m = &j.matrix;
    let jb = m[(BETA, BETA)];
    if !(jb > 0.0) {
        return Err(Error::NuisanceUnidentifiable);
    }
    let jt = m.fixed_view::<4, 4>(0, 0).into_owned();
    let jtb = m.fixed_view::<4, 1>(0, BETA).into_owned();
    let e: Mat4 = jt - jtb * jtb.transpose() / jb;
    Ok(Efim {
        matrix: DMatrix::from_column_slice(4, 4, e.as_slice()),
        kept_parameters: ANGLE_LABELS.iter().map(|s| s.to_string()).collect(),
    })
}

/// EFIM of the delay; the delay row is decoupled, so this is its diagonal.
pub fn delay_info(j: &ChannelFim) -> f64 {
    j.matrix[(TAU, TAU)]
}

/// Total EFIM from two independent observations sharing the same parameters
/// of interest but with independent nuisance parameters.
pub fn efim_additivity(a: &Efim, b: &Efim) -> Result<Efim> {
    if a.kept_parameters != b.kept_parameters {
        return Err(Error::LabelMismatch {
            left: a.kept_parameters.clone(),
            right: b.kept_parameters.clone(),
        });
    }
    Ok(Efim {
        matrix: &a.matrix + &b.matrix,
        kept_parameters: a.kept_parameters.clone(),
    })
}

impl ChannelFim {
    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_column_slice(7, 7, self.matrix.as_slice())
    }

    /// Generic Schur-complement EFIM on a subset of channel indices.
    pub fn efim(&self, keep: &[usize]) -> Result<Efim> {
        let labels = keep
            .iter()
            .map(|&i| CHANNEL_LABELS.get(i).copied().unwrap_or("?").to_string())
            .collect();
        efim_labeled(&self.to_dmatrix(), keep, labels)
    }
}
