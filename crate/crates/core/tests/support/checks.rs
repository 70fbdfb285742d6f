//! Randomized comparisons of closed forms against independent references.
//! Each returns the worst error found so callers can apply a tolerance.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twl_core::{
    channel_fim, channel_geometry, directional_beams, efim, efim_additivity, location_jacobian,
    make_ura, sample_positions, BeamRole, ChannelGeometry, Initiator, LinkDirection, Plane, Pose,
    PulseModel, Region, SignalConfig, SPEED_OF_LIGHT,
};

use super::numerical_fim::{numerical_fim, OracleSignal};

/// Worst relative error on diagonals and worst off-diagonal error relative
/// to the Frobenius norm of the reference.
#[derive(Debug, Clone, Copy, Default)]
pub struct OracleReport {
    pub cases: usize,
    pub max_diag_rel: f64,
    pub max_offdiag_rel: f64,
}

fn random_directions(rng: &mut ChaCha8Rng, n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|_| (rng.gen_range(0.3..2.8), rng.gen_range(-PI..PI)))
        .collect()
}

/// Closed-form channel FIM against the time-domain oracle on random 2×2
/// arrays with 1 to 3 beams per side.
pub fn oracle_report(cases: usize, seed: u64) -> OracleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let planes = [Plane::Xy, Plane::Xz, Plane::Yz];
    let oracle_sig = OracleSignal {
        energy: 1.0,
        noise_psd: 0.5,
        n_symbols: 4,
    };
    // Normalized units: λ = 1, symbol time 1, bandwidth 1.
    let sig = SignalConfig {
        energy_per_symbol: oracle_sig.energy,
        symbol_time: 1.0,
        n_symbols: oracle_sig.n_symbols,
        noise_psd: oracle_sig.noise_psd,
        bandwidth: 1.0,
        weff2: PulseModel::FlatBaseband.weff2(1.0),
        carrier: 1.0,
        c: 1.0,
    };
    let mut report = OracleReport {
        cases,
        ..Default::default()
    };
    for case in 0..cases {
        let spacing_tx = rng.gen_range(0.3..0.7);
        let spacing_rx = rng.gen_range(0.3..0.7);
        let tx_geom = make_ura(2, 2, spacing_tx, planes[case % 3], Vector3::zeros(), 1.0).unwrap();
        let rx_geom = make_ura(
            2,
            2,
            spacing_rx,
            planes[(case / 3) % 3],
            Vector3::zeros(),
            1.0,
        )
        .unwrap();
        let n_tx = rng.gen_range(1..=3);
        let n_rx = rng.gen_range(1..=3);
        let tx_dirs = random_directions(&mut rng, n_tx);
        let rx_dirs = random_directions(&mut rng, n_rx);
        let tx = directional_beams(&tx_geom, &tx_dirs, BeamRole::Transmit).unwrap();
        let rx = directional_beams(&rx_geom, &rx_dirs, BeamRole::Receive).unwrap();
        let cg = ChannelGeometry {
            theta1: rng.gen_range(0.4..2.7),
            phi1: rng.gen_range(-PI..PI),
            theta2: rng.gen_range(0.4..2.7),
            phi2: rng.gen_range(-PI..PI),
            tau: rng.gen_range(-3.0..3.0),
            beta: rng.gen_range(0.5..2.0),
            psi: rng.gen_range(-PI..PI),
            bias: 0.0,
        };
        let direction = if case % 2 == 0 {
            LinkDirection::Backward
        } else {
            LinkDirection::Forward
        };

        let closed = channel_fim(direction, &tx_geom, &rx_geom, &tx, &rx, &cg, &sig)
            .unwrap()
            .matrix;
        let numeric = numerical_fim(direction, &tx_geom, &rx_geom, &tx, &rx, &cg, oracle_sig);
        let norm = numeric.norm();
        for r in 0..7 {
            for c in 0..7 {
                let err = (closed[(r, c)] - numeric[(r, c)]).abs();
                if r == c {
                    report.max_diag_rel = report.max_diag_rel.max(err / numeric[(r, c)].abs());
                } else {
                    report.max_offdiag_rel = report.max_offdiag_rel.max(err / norm);
                }
            }
        }
    }
    report
}

fn wrap(a: f64) -> f64 {
    (a + PI).rem_euclid(2.0 * PI) - PI
}

fn outputs(cg: &ChannelGeometry) -> [f64; 5] {
    [cg.theta1, cg.phi1, cg.theta2, cg.phi2, cg.tau]
}

fn perturbed(pose: &Pose, k: usize, h: f64) -> Pose {
    let mut p = *pose;
    match k {
        0 => p.zeta0 += h,
        1 => p.chi0 += h,
        _ => p.position[k - 2] += h,
    }
    p
}

/// Worst entrywise gap between the analytic location Jacobian and central
/// differences, relative to the largest entry of the same output column.
/// Poses are drawn from the reference region with random orientations.
pub fn jacobian_report(poses: usize, seed: u64) -> f64 {
    let positions = sample_positions(&Region::default(), poses, seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let c = SPEED_OF_LIGHT;
    let mut worst: f64 = 0.0;
    for (i, p) in positions.iter().enumerate() {
        let pose = Pose::new(*p, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let initiator = if i % 2 == 0 {
            Initiator::Bs
        } else {
            Initiator::Ue
        };
        let analytic = location_jacobian(&pose, initiator, c).unwrap().full();
        let mut numeric = analytic * 0.0;
        for k in 0..5 {
            let h = if k < 2 { 1e-5 } else { 1e-4 };
            let geom = |pose: Pose| outputs(&channel_geometry(&pose, initiator, 1.0, c).unwrap());
            let up = geom(perturbed(&pose, k, h));
            let dn = geom(perturbed(&pose, k, -h));
            for m in 0..5 {
                let diff = if m == 1 || m == 3 {
                    wrap(up[m] - dn[m])
                } else {
                    up[m] - dn[m]
                };
                numeric[(k, m)] = diff / (2.0 * h);
            }
        }
        for m in 0..5 {
            let scale = analytic.column(m).amax();
            for k in 0..5 {
                worst = worst.max((analytic[(k, m)] - numeric[(k, m)]).abs() / scale);
            }
        }
    }
    worst
}

fn random_psd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n + 2, |_, _| rng.gen_range(-1.0..1.0));
    &a * a.transpose() + DMatrix::identity(n, n) * 0.1
}

/// Sum of two per-observation EFIMs against the Schur complement of the
/// stacked joint FIM, where each observation has its own nuisance block.
/// Returns the worst error relative to the Frobenius norm of the reference.
pub fn additivity_report(instances: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let k = rng.gen_range(1..=5);
        let n1 = rng.gen_range(1..=4);
        let n2 = rng.gen_range(1..=4);
        let j1 = random_psd(&mut rng, k + n1);
        let j2 = random_psd(&mut rng, k + n2);
        let dim = k + n1 + n2;
        // Parameters of interest first, then n1, then n2.
        let mut joint = DMatrix::zeros(dim, dim);
        let map1: Vec<usize> = (0..k + n1).collect();
        let map2: Vec<usize> = (0..k).chain(k + n1..dim).collect();
        for (j, map) in [(&j1, &map1), (&j2, &map2)] {
            for (a, &ia) in map.iter().enumerate() {
                for (b, &ib) in map.iter().enumerate() {
                    joint[(ia, ib)] += j[(a, b)];
                }
            }
        }
        let keep: Vec<usize> = (0..k).collect();
        let reference = efim(&joint, &keep).unwrap().matrix;
        let sum = efim_additivity(&efim(&j1, &keep).unwrap(), &efim(&j2, &keep).unwrap())
            .unwrap()
            .matrix;
        worst = worst.max((sum - &reference).norm() / reference.norm());
    }
    worst
}
