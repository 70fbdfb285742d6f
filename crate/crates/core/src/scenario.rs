//! Monte-Carlo evaluation of the bounds over a deployment region: the UE is
//! dropped uniformly in a planar quadrilateral below the BS and every
//! requested protocol is evaluated at each drop.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beamforming::{
    directional_beams, sector_beam_grid, snr_db, BeamDevice, BeamRole, Beamformer, PulseModel,
    Sector, SignalConfig, UeBeamFrame,
};
use crate::error::{invalid, Error, Result};
use crate::fim::{channel_fim, LinkDirection};
use crate::geometry::{make_ura, response, ArrayGeometry, Plane, Vec3};
use crate::pose::{channel_geometry, link_angles, location_jacobian, Initiator, Pose};
use crate::protocols::{assemble, BoundOutcome, Protocol, ProtocolSpec};

/// Quantiles reported by [`run_cdf`].
pub const REPORTED_QUANTILES: [f64; 3] = [0.1, 0.5, 0.9];

/// Planar convex quadrilateral at constant height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub vertices: [Vec3; 4],
}

impl Default for Region {
    /// 120° diamond 10 m below the BS, reaching 50 m out along y.
    fn default() -> Self {
        let s = 25.0 * 3f64.sqrt();
        Self {
            vertices: [
                Vector3::new(0.0, 0.0, -10.0),
                Vector3::new(s, 25.0, -10.0),
                Vector3::new(0.0, 50.0, -10.0),
                Vector3::new(-s, 25.0, -10.0),
            ],
        }
    }
}

impl Region {
    pub fn validate(&self) -> Result<()> {
        let v = &self.vertices;
        if v.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::DegenerateRegion("non-finite vertex".into()));
        }
        let scale = v.iter().map(|p| p.norm()).fold(1.0, f64::max);
        if v.iter().any(|p| (p.z - v[0].z).abs() > 1e-9 * scale) {
            return Err(Error::DegenerateRegion(
                "vertices must share one height".into(),
            ));
        }
        let cross: Vec<f64> = (0..4)
            .map(|i| {
                let a = v[(i + 1) % 4] - v[i];
                let b = v[(i + 2) % 4] - v[(i + 1) % 4];
                a.x * b.y - a.y * b.x
            })
            .collect();
        let tol = 1e-12 * scale * scale;
        if !(cross.iter().all(|&c| c > tol) || cross.iter().all(|&c| c < -tol)) {
            return Err(Error::DegenerateRegion(
                "vertices must form a convex quadrilateral with nonzero area".into(),
            ));
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        let [a, b, c, d] = self.vertices;
        tri_area(&a, &b, &c) + tri_area(&a, &c, &d)
    }

    pub fn centroid(&self) -> Vec3 {
        let [a, b, c, d] = self.vertices;
        let (w1, w2) = (tri_area(&a, &b, &c), tri_area(&a, &c, &d));
        ((a + b + c) * w1 + (a + c + d) * w2) / (3.0 * (w1 + w2))
    }

    /// Whether `p` lies in the region (boundary included, height ignored).
    pub fn contains(&self, p: &Vec3) -> bool {
        let v = &self.vertices;
        let signs: Vec<f64> = (0..4)
            .map(|i| {
                let a = v[(i + 1) % 4] - v[i];
                let b = p - v[i];
                a.x * b.y - a.y * b.x
            })
            .collect();
        let tol = 1e-9 * self.area();
        signs.iter().all(|&s| s >= -tol) || signs.iter().all(|&s| s <= tol)
    }
}

fn tri_area(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    0.5 * ((b - a).cross(&(c - a))).norm()
}

/// `n` points uniform over the region, reproducible for a given seed.
pub fn sample_positions(region: &Region, n: usize, seed: u64) -> Result<Vec<Vec3>> {
    region.validate()?;
    if n == 0 {
        return Err(invalid("n_samples", "must be at least 1"));
    }
    let [a, b, c, d] = region.vertices;
    let w1 = tri_area(&a, &b, &c);
    let split = w1 / (w1 + tri_area(&a, &c, &d));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            let (p, q) = if rng.gen::<f64>() < split {
                (b, c)
            } else {
                (c, d)
            };
            let (mut r1, mut r2): (f64, f64) = (rng.gen(), rng.gen());
            if r1 + r2 > 1.0 {
                r1 = 1.0 - r1;
                r2 = 1.0 - r2;
            }
            a + (p - a) * r1 + (q - a) * r2
        })
        .collect())
}

/// Square or rectangular array in its device's local frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig {
    pub rows: usize,
    pub cols: usize,
    /// Element spacing in wavelengths.
    pub spacing: f64,
    pub plane: Plane,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self::square(12)
    }
}

impl ArrayConfig {
    /// Square array at 0.34λ spacing. At λ/2 the 12×12 beams are too narrow
    /// for a 25-beam grid to cover the region without deep gaps.
    pub fn square(side: usize) -> Self {
        Self {
            rows: side,
            cols: side,
            spacing: 0.34,
            plane: Plane::Xz,
        }
    }

    /// Square array with `n` elements; `n` must be a perfect square.
    pub fn with_elements(n: usize) -> Result<Self> {
        let side = (n as f64).sqrt().round() as usize;
        if n == 0 || side * side != n {
            return Err(invalid(
                "n_antennas",
                format!("{n} is not a nonzero perfect square"),
            ));
        }
        Ok(Self::square(side))
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn build(&self, wavelength: f64) -> Result<ArrayGeometry> {
        make_ura(
            self.rows,
            self.cols,
            self.spacing * wavelength,
            self.plane,
            Vec3::zeros(),
            wavelength,
        )
    }
}

/// Fixed directional codebooks. The BS grid spans the sector; the UE uses
/// the reversed grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamConfig {
    pub n_beams_bs: usize,
    pub n_beams_ue: usize,
    /// Azimuth range of the BS grid (rad).
    pub azimuth: Sector,
    /// Polar range of the BS grid (rad).
    pub polar: Sector,
    pub ue_frame: UeBeamFrame,
}

impl Default for BeamConfig {
    fn default() -> Self {
        Self {
            n_beams_bs: 25,
            n_beams_ue: 25,
            azimuth: (41f64.to_radians(), 139f64.to_radians()),
            polar: (102f64.to_radians(), 175f64.to_radians()),
            ue_frame: UeBeamFrame::Body,
        }
    }
}

/// Everything needed to evaluate the bounds over a region.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub region: Region,
    pub bs_array: ArrayConfig,
    pub ue_array: ArrayConfig,
    pub signal: SignalConfig,
    pub pulse: PulseModel,
    pub beams: BeamConfig,
    /// UE orientation (ζ0, χ0) in radians.
    pub orientation: (f64, f64),
    pub protocols: Vec<ProtocolSpec>,
    pub n_samples: usize,
    pub seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            region: Region::default(),
            bs_array: ArrayConfig::default(),
            ue_array: ArrayConfig::default(),
            signal: SignalConfig::reference(),
            pulse: PulseModel::SincThird,
            beams: BeamConfig::default(),
            orientation: (0.0, 0.0),
            protocols: default_protocols(),
            n_samples: 10_000,
            seed: 1,
        }
    }
}

/// CLP from the BS, RLP and OWL from both ends.
pub fn default_protocols() -> Vec<ProtocolSpec> {
    vec![
        ProtocolSpec::new(Protocol::Clp, Initiator::Bs),
        ProtocolSpec::new(Protocol::Rlp, Initiator::Bs),
        ProtocolSpec::new(Protocol::Rlp, Initiator::Ue),
        ProtocolSpec::new(Protocol::Owl, Initiator::Bs),
        ProtocolSpec::new(Protocol::Owl, Initiator::Ue),
    ]
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.region.validate()?;
        self.signal.validate()?;
        if self.n_samples == 0 {
            return Err(invalid("n_samples", "must be at least 1"));
        }
        if self.protocols.is_empty() {
            return Err(invalid("protocols", "at least one protocol is required"));
        }
        if !(self.orientation.0.is_finite() && self.orientation.1.is_finite()) {
            return Err(invalid("orientation", "must be finite"));
        }
        for (name, a) in [("bs_array", &self.bs_array), ("ue_array", &self.ue_array)] {
            if a.is_empty() || !(a.spacing.is_finite() && a.spacing > 0.0) {
                return Err(invalid(
                    name,
                    "needs at least one element and positive spacing",
                ));
            }
        }
        Ok(())
    }

    /// Builds arrays and codebooks once; the result evaluates single poses.
    pub fn prepare(&self) -> Result<PreparedScenario> {
        self.validate()?;
        let lambda = self.signal.wavelength();
        let bs = self.bs_array.build(lambda)?;
        let ue = self.ue_array.build(lambda)?;
        let b = &self.beams;
        let bs_dirs = sector_beam_grid(b.n_beams_bs, BeamDevice::Anchor, b.azimuth, b.polar)?;
        let frame_pose = Pose::new(Vec3::zeros(), self.orientation.0, self.orientation.1);
        let ue_dirs = sector_beam_grid(
            b.n_beams_ue,
            BeamDevice::Ue(frame_pose, b.ue_frame),
            b.azimuth,
            b.polar,
        )?;
        Ok(PreparedScenario {
            bs_tx: directional_beams(&bs, &bs_dirs, BeamRole::Transmit)?,
            bs_rx: directional_beams(&bs, &bs_dirs, BeamRole::Receive)?,
            ue_tx: directional_beams(&ue, &ue_dirs, BeamRole::Transmit)?,
            ue_rx: directional_beams(&ue, &ue_dirs, BeamRole::Receive)?,
            bs,
            ue,
            signal: self.signal,
            orientation: self.orientation,
            protocols: self.protocols.clone(),
        })
    }
}

/// A device's array and its two codebooks.
struct Device<'a> {
    geom: &'a ArrayGeometry,
    tx: &'a Beamformer,
    rx: &'a Beamformer,
}

/// Scenario with arrays and beams materialized.
#[derive(Debug, Clone)]
pub struct PreparedScenario {
    pub bs: ArrayGeometry,
    pub ue: ArrayGeometry,
    pub bs_tx: Beamformer,
    pub bs_rx: Beamformer,
    pub ue_tx: Beamformer,
    pub ue_rx: Beamformer,
    pub signal: SignalConfig,
    pub orientation: (f64, f64),
    pub protocols: Vec<ProtocolSpec>,
}

/// Bound of one protocol at one position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolResult {
    pub spec: ProtocolSpec,
    /// Position error bound (m); +∞ when unidentifiable.
    pub peb: f64,
    /// Orientation error bound (rad); +∞ when unidentifiable.
    pub oeb: f64,
    /// Numerical rank of the EFIM when unidentifiable.
    pub unidentifiable_rank: Option<usize>,
    pub ill_conditioned: bool,
    /// Forward and backward delay information (s⁻²).
    pub delay_info: (f64, f64),
}

impl ProtocolResult {
    pub fn identifiable(&self) -> bool {
        self.unidentifiable_rank.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionRecord {
    pub position: Vec3,
    /// SNR of the BS → UE transmission (dB).
    pub snr_downlink_db: f64,
    /// SNR of the UE → BS transmission (dB).
    pub snr_uplink_db: f64,
    pub results: Vec<ProtocolResult>,
}

impl PositionRecord {
    /// The weaker of the two link SNRs.
    pub fn snr_db(&self) -> f64 {
        self.snr_downlink_db.min(self.snr_uplink_db)
    }
}

impl PreparedScenario {
    fn device(&self, which: Initiator) -> Device<'_> {
        match which {
            Initiator::Bs => Device {
                geom: &self.bs,
                tx: &self.bs_tx,
                rx: &self.bs_rx,
            },
            Initiator::Ue => Device {
                geom: &self.ue,
                tx: &self.ue_tx,
                rx: &self.ue_rx,
            },
        }
    }

    pub fn pose_at(&self, position: Vec3) -> Pose {
        Pose::new(position, self.orientation.0, self.orientation.1)
    }

    /// Link SNRs (downlink, uplink) in dB at `pose`.
    pub fn snr(&self, pose: &Pose) -> Result<(f64, f64)> {
        let angles = link_angles(pose)?;
        let sig = &self.signal;
        let beta = sig.wavelength() / (4.0 * std::f64::consts::PI * pose.position.norm());
        let a_bs = response(&self.bs, angles.bs.0, angles.bs.1);
        let a_ue = response(&self.ue, angles.ue.0, angles.ue.1);
        let (n_bs, n_ue) = (self.bs.len(), self.ue.len());
        let down = snr_db(
            sig,
            n_bs,
            n_ue,
            beta,
            self.bs_tx.gain(&a_bs),
            self.ue_rx.gain(&a_ue),
        );
        let up = snr_db(
            sig,
            n_ue,
            n_bs,
            beta,
            self.ue_tx.gain(&a_ue),
            self.bs_rx.gain(&a_bs),
        );
        Ok((down, up))
    }

    /// Bound for one protocol at `pose`. Geometric or illumination failures
    /// become unidentifiable outcomes.
    pub fn evaluate(&self, pose: &Pose, spec: ProtocolSpec) -> Result<(BoundOutcome, (f64, f64))> {
        let sig = &self.signal;
        let cg = channel_geometry(pose, spec.initiator, sig.wavelength(), sig.c)?;
        let d1 = self.device(spec.initiator);
        let d2 = self.device(spec.initiator.swapped());
        let bwd = channel_fim(
            LinkDirection::Backward,
            d2.geom,
            d1.geom,
            d2.tx,
            d1.rx,
            &cg,
            sig,
        );
        let bwd = match bwd {
            Ok(j) => j,
            Err(Error::NoIllumination) => {
                return Ok((BoundOutcome::Unidentifiable { rank: 0 }, (0.0, 0.0)))
            }
            Err(e) => return Err(e),
        };
        let fwd = if spec.kind.needs_forward() {
            match channel_fim(
                LinkDirection::Forward,
                d1.geom,
                d2.geom,
                d1.tx,
                d2.rx,
                &cg,
                sig,
            ) {
                Ok(j) => Some(j),
                Err(Error::NoIllumination) => {
                    return Ok((
                        BoundOutcome::Unidentifiable { rank: 0 },
                        (0.0, crate::fim::delay_info(&bwd)),
                    ))
                }
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        let delays = (
            fwd.as_ref().map_or(0.0, crate::fim::delay_info),
            crate::fim::delay_info(&bwd),
        );
        let jac = location_jacobian(pose, spec.initiator, sig.c)?;
        let outcome = match assemble(spec.kind, fwd.as_ref(), &bwd, &jac) {
            Ok(o) => o,
            Err(Error::NuisanceUnidentifiable) | Err(Error::DelayUnobservable(_)) => {
                BoundOutcome::Unidentifiable { rank: 0 }
            }
            Err(e) => return Err(e),
        };
        Ok((outcome, delays))
    }

    /// SNRs and every configured protocol at one position.
    pub fn evaluate_position(&self, position: Vec3) -> Result<PositionRecord> {
        let pose = self.pose_at(position);
        let (snr_downlink_db, snr_uplink_db) = self.snr(&pose)?;
        let results = self
            .protocols
            .iter()
            .map(|&spec| {
                let (outcome, delay_info) = self.evaluate(&pose, spec)?;
                Ok(match outcome {
                    BoundOutcome::Bound(b) => ProtocolResult {
                        spec,
                        peb: b.peb,
                        oeb: b.oeb,
                        unidentifiable_rank: None,
                        ill_conditioned: b.ill_conditioned(),
                        delay_info,
                    },
                    BoundOutcome::Unidentifiable { rank } => ProtocolResult {
                        spec,
                        peb: f64::INFINITY,
                        oeb: f64::INFINITY,
                        unidentifiable_rank: Some(rank),
                        ill_conditioned: false,
                        delay_info,
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PositionRecord {
            position,
            snr_downlink_db,
            snr_uplink_db,
            results,
        })
    }
}

/// Empirical quantile with linear interpolation between order statistics
/// (position `(n−1)q`). Non-finite or NaN entries count as +∞.
pub fn percentile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput("percentile"));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(invalid("quantile", format!("{q} is outside [0, 1]")));
    }
    let mut v: Vec<f64> = values
        .iter()
        .map(|&x| if x.is_nan() { f64::INFINITY } else { x })
        .collect();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        return Ok(v[lo]);
    }
    let (a, b) = (v[lo], v[hi]);
    if a.is_infinite() || b.is_infinite() {
        return Ok(if a == b || b.is_infinite() { b } else { a });
    }
    Ok(a + (h - lo as f64) * (b - a))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileRow {
    pub quantile: f64,
    pub peb: f64,
    /// Radians.
    pub oeb: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSummary {
    pub spec: ProtocolSpec,
    pub quantiles: Vec<QuantileRow>,
    pub n_unidentifiable: usize,
    pub n_ill_conditioned: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfResult {
    pub records: Vec<PositionRecord>,
    pub summaries: Vec<ProtocolSummary>,
    /// 10th percentile of the per-position SNR (weaker link), dB.
    pub snr_p10_db: f64,
}

impl CdfResult {
    fn column(&self, spec: ProtocolSpec) -> Option<usize> {
        self.summaries.iter().position(|s| s.spec == spec)
    }

    /// PEB of every record for `spec`, in record order.
    pub fn pebs(&self, spec: ProtocolSpec) -> Vec<f64> {
        self.column(spec)
            .map(|i| self.records.iter().map(|r| r.results[i].peb).collect())
            .unwrap_or_default()
    }

    /// OEB (rad) of every record for `spec`, in record order.
    pub fn oebs(&self, spec: ProtocolSpec) -> Vec<f64> {
        self.column(spec)
            .map(|i| self.records.iter().map(|r| r.results[i].oeb).collect())
            .unwrap_or_default()
    }

    pub fn peb_quantile(&self, spec: ProtocolSpec, q: f64) -> Result<f64> {
        percentile(&self.pebs(spec), q)
    }

    pub fn oeb_quantile(&self, spec: ProtocolSpec, q: f64) -> Result<f64> {
        percentile(&self.oebs(spec), q)
    }

    pub fn n_unidentifiable(&self) -> usize {
        self.summaries.iter().map(|s| s.n_unidentifiable).sum()
    }

    /// Whether every protocol failed at every position.
    pub fn all_unidentifiable(&self) -> bool {
        self.records
            .iter()
            .all(|r| r.results.iter().all(|p| !p.identifiable()))
    }
}

/// Evaluates every protocol at `n_samples` seeded positions. Positions are
/// processed in parallel and merged in index order.
pub fn run_cdf(scenario: &Scenario) -> Result<CdfResult> {
    let prepared = scenario.prepare()?;
    let positions = sample_positions(&scenario.region, scenario.n_samples, scenario.seed)?;
    run_prepared(&prepared, &positions)
}

/// [`run_cdf`] over explicit positions with already-built arrays and beams.
pub fn run_prepared(prepared: &PreparedScenario, positions: &[Vec3]) -> Result<CdfResult> {
    if positions.is_empty() {
        return Err(Error::EmptyInput("positions"));
    }
    let records = positions
        .par_iter()
        .map(|&p| prepared.evaluate_position(p))
        .collect::<Result<Vec<_>>>()?;
    let snrs: Vec<f64> = records.iter().map(PositionRecord::snr_db).collect();
    let mut result = CdfResult {
        summaries: Vec::with_capacity(prepared.protocols.len()),
        snr_p10_db: percentile(&snrs, 0.1)?,
        records,
    };
    for (i, &spec) in prepared.protocols.iter().enumerate() {
        let col = result.records.iter().map(|r| &r.results[i]);
        let n_unidentifiable = col.clone().filter(|r| !r.identifiable()).count();
        let n_ill_conditioned = col.filter(|r| r.ill_conditioned).count();
        result.summaries.push(ProtocolSummary {
            spec,
            quantiles: Vec::new(),
            n_unidentifiable,
            n_ill_conditioned,
        });
        let quantiles = REPORTED_QUANTILES
            .iter()
            .map(|&q| {
                Ok(QuantileRow {
                    quantile: q,
                    peb: result.peb_quantile(spec, q)?,
                    oeb: result.oeb_quantile(spec, q)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        result.summaries[i].quantiles = quantiles;
    }
    Ok(result)
}

/// One row of a sweep table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// Swept value: bandwidth (Hz) or antenna count.
    pub value: f64,
    pub spec: ProtocolSpec,
    /// 90th-percentile PEB (m).
    pub peb90: f64,
}

/// 90th-percentile PEB for each bandwidth, on the same positions.
///
/// Only the effective bandwidth changes; pilot energy, symbol count and
/// therefore the SNR are held fixed.
pub fn sweep_bandwidth(scenario: &Scenario, bandwidths: &[f64]) -> Result<Vec<SweepRow>> {
    if bandwidths.is_empty() {
        return Err(Error::EmptyInput("bandwidths"));
    }
    if bandwidths.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(invalid("bandwidths_hz", "must all be positive"));
    }
    if bandwidths.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("bandwidths_hz", "must be strictly ascending"));
    }
    let positions = sample_positions(&scenario.region, scenario.n_samples, scenario.seed)?;
    let base = scenario.prepare()?;
    let mut rows = Vec::new();
    for &w in bandwidths {
        let mut prepared = base.clone();
        prepared.signal.bandwidth = w;
        prepared.signal.weff2 = scenario.pulse.weff2(w);
        let cdf = run_prepared(&prepared, &positions)?;
        for &spec in &scenario.protocols {
            rows.push(SweepRow {
                value: w,
                spec,
                peb90: cdf.peb_quantile(spec, 0.9)?,
            });
        }
    }
    Ok(rows)
}

/// Which device's array a sweep resizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Bs,
    Ue,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Bs => "bs",
            Side::Ue => "ue",
        }
    }
}

/// 90th-percentile PEB for each square array size on one side, the other
/// side keeping its configured array.
pub fn sweep_antennas(scenario: &Scenario, counts: &[usize], side: Side) -> Result<Vec<SweepRow>> {
    if counts.is_empty() {
        return Err(Error::EmptyInput("antenna counts"));
    }
    let arrays = counts
        .iter()
        .map(|&n| ArrayConfig::with_elements(n))
        .collect::<Result<Vec<_>>>()?;
    let positions = sample_positions(&scenario.region, scenario.n_samples, scenario.seed)?;
    let mut rows = Vec::new();
    for (&n, array) in counts.iter().zip(arrays) {
        let mut s = scenario.clone();
        match side {
            Side::Bs => {
                s.bs_array = ArrayConfig {
                    plane: s.bs_array.plane,
                    spacing: s.bs_array.spacing,
                    ..array
                }
            }
            Side::Ue => {
                s.ue_array = ArrayConfig {
                    plane: s.ue_array.plane,
                    spacing: s.ue_array.spacing,
                    ..array
                }
            }
        }
        let cdf = run_prepared(&s.prepare()?, &positions)?;
        for &spec in &scenario.protocols {
            rows.push(SweepRow {
                value: n as f64,
                spec,
                peb90: cdf.peb_quantile(spec, 0.9)?,
            });
        }
    }
    Ok(rows)
}
