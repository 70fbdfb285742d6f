//! Brute-force Fisher information of one transmission.
//!
//! The noiseless combiner output μ(t) is sampled on a time grid and
//! differentiated by central differences in every channel parameter; the FIM
//! is then `(1/N₀) Σ Re{∂μᴴ (WᴴW)⁻¹ ∂μ} Δt`. Pilots are modelled as one
//! sinc pulse per beam and symbol, which is the expectation of the FIM over
//! independent unit-energy pilot symbols: cross-beam terms average out and
//! every symbol contributes the same shifted integral.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SMatrix};
use num_complex::Complex64;
use twl_core::geometry::response;
use twl_core::{ArrayGeometry, Beamformer, ChannelGeometry, LinkDirection};

/// Pilot and noise parameters in normalized time units (symbol time 1, so
/// the sinc pulse occupies bandwidth 1 and W_eff² = 1/12).
#[derive(Debug, Clone, Copy)]
pub struct OracleSignal {
    pub energy: f64,
    pub noise_psd: f64,
    pub n_symbols: usize,
}

/// Half-width of the integration window and the sample step, in symbols.
const HALF_WINDOW: f64 = 60_000.0;
const STEP: f64 = 0.5;

fn sinc_pulse(t: f64) -> f64 {
    if t.abs() < 1e-12 {
        1.0
    } else {
        (PI * t).sin() / (PI * t)
    }
}

/// Parameters in channel-FIM order (θ1, φ1, θ2, φ2, β, ψ, τ).
fn params(cg: &ChannelGeometry) -> [f64; 7] {
    [
        cg.theta1, cg.phi1, cg.theta2, cg.phi2, cg.beta, cg.psi, cg.tau,
    ]
}

/// Per-beam complex amplitudes at the combiner outputs, and the delay.
fn waveform(
    x: &[f64; 7],
    direction: LinkDirection,
    tx_geom: &ArrayGeometry,
    rx_geom: &ArrayGeometry,
    f: &DMatrix<Complex64>,
    w: &DMatrix<Complex64>,
    energy: f64,
) -> (Vec<DVector<Complex64>>, f64) {
    let ((tt, tp), (rt, rp)) = match direction {
        LinkDirection::Backward => ((x[2], x[3]), (x[0], x[1])),
        LinkDirection::Forward => ((x[0], x[1]), (x[2], x[3])),
    };
    let a_tx = response(tx_geom, tt, tp);
    let a_rx = response(rx_geom, rt, rp);
    let scale = ((tx_geom.len() * rx_geom.len()) as f64 * energy).sqrt();
    let h = Complex64::from_polar(scale * x[4], x[5]);
    let r = w.adjoint() * a_rx;
    let g = f.transpose() * a_tx;
    let per_beam = g.iter().map(|gb| &r * (h * gb)).collect();
    (per_beam, x[6])
}

#[allow(clippy::too_many_arguments)]
pub fn numerical_fim(
    direction: LinkDirection,
    tx_geom: &ArrayGeometry,
    rx_geom: &ArrayGeometry,
    tx: &Beamformer,
    rx: &Beamformer,
    cg: &ChannelGeometry,
    sig: OracleSignal,
) -> SMatrix<f64, 7, 7> {
    let f = tx.matrix();
    let w = rx.matrix();
    let q = (w.adjoint() * w)
        .try_inverse()
        .expect("receive Gram matrix");
    let x0 = params(cg);
    let steps = [1e-5, 1e-5, 1e-5, 1e-5, 1e-6 * cg.beta, 1e-5, 1e-4];

    // (amplitudes, delay) at x ± h e_i.
    let perturbed: Vec<_> = (0..7)
        .map(|i| {
            let mut up = x0;
            let mut dn = x0;
            up[i] += steps[i];
            dn[i] -= steps[i];
            (
                waveform(&up, direction, tx_geom, rx_geom, f, w, sig.energy),
                waveform(&dn, direction, tx_geom, rx_geom, f, w, sig.energy),
            )
        })
        .collect();

    let n_rx = w.ncols();
    let n_tx = f.ncols();
    let n_steps = (2.0 * HALF_WINDOW / STEP) as usize;
    let mut j = SMatrix::<f64, 7, 7>::zeros();
    let mut d = DMatrix::<Complex64>::zeros(n_rx, 7);
    for b in 0..n_tx {
        let mut acc = SMatrix::<f64, 7, 7>::zeros();
        for s in 0..=n_steps {
            let t = x0[6] - HALF_WINDOW + s as f64 * STEP;
            for (i, ((up, tau_up), (dn, tau_dn))) in perturbed.iter().enumerate() {
                let col = (&up[b] * Complex64::from(sinc_pulse(t - tau_up))
                    - &dn[b] * Complex64::from(sinc_pulse(t - tau_dn)))
                    / Complex64::from(2.0 * steps[i]);
                d.set_column(i, &col);
            }
            let m = d.adjoint() * &q * &d;
            for r in 0..7 {
                for c in 0..7 {
                    acc[(r, c)] += m[(r, c)].re;
                }
            }
        }
        j += acc;
    }
    j * (STEP * sig.n_symbols as f64 / sig.noise_psd)
}
