//! Run configuration: a flat TOML file whose keys carry their units.
//!
//! Every key is optional. Omitted keys take the reference deployment values,
//! so an empty file describes the full default scenario.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use twl_core::scenario::{ArrayConfig, BeamConfig, Side};
use twl_core::{
    Initiator, Protocol, ProtocolSpec, PulseModel, Region, Scenario, SignalConfig, UeBeamFrame,
    Vec3,
};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub n_symbols: usize,
    pub tx_power_dbm: f64,
    pub noise_psd_dbm_hz: f64,
    pub pulse: PulseModel,
    pub bs_antennas: usize,
    pub ue_antennas: usize,
    pub element_spacing_wavelengths: f64,
    pub n_beams_bs: usize,
    pub n_beams_ue: usize,
    pub beam_azimuth_deg: [f64; 2],
    pub beam_polar_deg: [f64; 2],
    pub ue_beam_frame: UeBeamFrame,
    /// UE orientation (ζ0, χ0).
    pub orientation_deg: [f64; 2],
    pub region_vertices_m: [[f64; 3]; 4],
    /// Protocol names such as `clp-bs` or `owl-ue`.
    pub protocols: Vec<String>,
    pub n_samples: usize,
    pub seed: u64,
    pub sweep_bandwidths_hz: Vec<f64>,
    pub sweep_side: Side,
    pub sweep_antenna_counts: Vec<usize>,
    /// UE position for the `point` subcommand.
    pub point_m: [f64; 3],
}

impl Default for RunConfig {
    fn default() -> Self {
        let s = Scenario::default();
        let deg = |(a, b): (f64, f64)| [a.to_degrees(), b.to_degrees()];
        Self {
            carrier_hz: s.signal.carrier,
            bandwidth_hz: s.signal.bandwidth,
            n_symbols: s.signal.n_symbols,
            tx_power_dbm: 0.0,
            noise_psd_dbm_hz: -170.0,
            pulse: s.pulse,
            bs_antennas: s.bs_array.len(),
            ue_antennas: s.ue_array.len(),
            element_spacing_wavelengths: s.bs_array.spacing,
            n_beams_bs: s.beams.n_beams_bs,
            n_beams_ue: s.beams.n_beams_ue,
            beam_azimuth_deg: deg(s.beams.azimuth),
            beam_polar_deg: deg(s.beams.polar),
            ue_beam_frame: s.beams.ue_frame,
            orientation_deg: deg(s.orientation),
            region_vertices_m: s.region.vertices.map(|v| [v.x, v.y, v.z]),
            protocols: s.protocols.iter().map(|p| p.to_string()).collect(),
            n_samples: s.n_samples,
            seed: s.seed,
            sweep_bandwidths_hz: vec![
                10e6, 20e6, 40e6, 60e6, 80e6, 100e6, 125e6, 250e6, 500e6, 1e9,
            ],
            sweep_side: Side::Ue,
            sweep_antenna_counts: vec![36, 64, 100, 144, 196],
            point_m: [0.0, 25.0, -10.0],
        }
    }
}

fn invalid(key: &str, reason: impl Into<String>) -> CliError {
    CliError::Invalid {
        key: key.to_string(),
        reason: reason.into(),
    }
}

fn is_square(n: usize) -> bool {
    let side = (n as f64).sqrt().round() as usize;
    n > 0 && side * side == n
}

pub fn parse_protocol(name: &str) -> Option<ProtocolSpec> {
    let (kind, initiator) = name.split_once('-')?;
    let kind = match kind {
        "owl" => Protocol::Owl,
        "rlp" => Protocol::Rlp,
        "clp" => Protocol::Clp,
        _ => return None,
    };
    let initiator = match initiator {
        "bs" => Initiator::Bs,
        "ue" => Initiator::Ue,
        _ => return None,
    };
    Some(ProtocolSpec::new(kind, initiator))
}

impl RunConfig {
    /// Reads and validates a config file.
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::ReadConfig {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let config: RunConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config is always representable in TOML")
    }

    /// Checks every key, naming the first offending one.
    pub fn validate(&self) -> Result<(), CliError> {
        for (key, v) in [
            ("carrier_hz", self.carrier_hz),
            ("bandwidth_hz", self.bandwidth_hz),
            (
                "element_spacing_wavelengths",
                self.element_spacing_wavelengths,
            ),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(key, format!("must be positive, got {v}")));
            }
        }
        for (key, v) in [
            ("tx_power_dbm", self.tx_power_dbm),
            ("noise_psd_dbm_hz", self.noise_psd_dbm_hz),
        ] {
            if !v.is_finite() {
                return Err(invalid(key, "must be finite"));
            }
        }
        for (key, v) in [("n_symbols", self.n_symbols), ("n_samples", self.n_samples)] {
            if v == 0 {
                return Err(invalid(key, "must be at least 1"));
            }
        }
        for (key, v) in [
            ("bs_antennas", self.bs_antennas),
            ("ue_antennas", self.ue_antennas),
            ("n_beams_bs", self.n_beams_bs),
            ("n_beams_ue", self.n_beams_ue),
        ] {
            if !is_square(v) {
                return Err(invalid(key, format!("{v} is not a nonzero perfect square")));
            }
        }
        for (key, [lo, hi], max) in [
            ("beam_azimuth_deg", self.beam_azimuth_deg, 360.0),
            ("beam_polar_deg", self.beam_polar_deg, 180.0),
        ] {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi || hi - lo > max {
                return Err(invalid(key, format!("[{lo}, {hi}] is not a valid range")));
            }
        }
        if !(0.0..=180.0).contains(&self.beam_polar_deg[0])
            || !(0.0..=180.0).contains(&self.beam_polar_deg[1])
        {
            return Err(invalid("beam_polar_deg", "polar angles lie in [0, 180]"));
        }
        if self.orientation_deg.iter().any(|v| !v.is_finite()) {
            return Err(invalid("orientation_deg", "must be finite"));
        }
        self.region()
            .validate()
            .map_err(|e| invalid("region_vertices_m", e.to_string()))?;
        self.protocol_specs()?;
        if self.seed > i64::MAX as u64 {
            return Err(invalid("seed", "must not exceed 2^63 - 1"));
        }
        if self.sweep_bandwidths_hz.is_empty() {
            return Err(invalid("sweep_bandwidths_hz", "must not be empty"));
        }
        if self
            .sweep_bandwidths_hz
            .iter()
            .any(|w| !(w.is_finite() && *w > 0.0))
        {
            return Err(invalid("sweep_bandwidths_hz", "must all be positive"));
        }
        if self.sweep_bandwidths_hz.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("sweep_bandwidths_hz", "must be strictly ascending"));
        }
        if self.sweep_antenna_counts.is_empty() {
            return Err(invalid("sweep_antenna_counts", "must not be empty"));
        }
        if let Some(n) = self.sweep_antenna_counts.iter().find(|&&n| !is_square(n)) {
            return Err(invalid(
                "sweep_antenna_counts",
                format!("{n} is not a nonzero perfect square"),
            ));
        }
        let p = self.point();
        if p.iter().any(|v| !v.is_finite()) || p.norm() == 0.0 {
            return Err(invalid(
                "point_m",
                "must be finite and away from the origin",
            ));
        }
        Ok(())
    }

    pub fn region(&self) -> Region {
        Region {
            vertices: self.region_vertices_m.map(|[x, y, z]| Vec3::new(x, y, z)),
        }
    }

    pub fn point(&self) -> Vec3 {
        let [x, y, z] = self.point_m;
        Vec3::new(x, y, z)
    }

    pub fn protocol_specs(&self) -> Result<Vec<ProtocolSpec>, CliError> {
        if self.protocols.is_empty() {
            return Err(invalid("protocols", "at least one protocol is required"));
        }
        let mut specs = Vec::with_capacity(self.protocols.len());
        for name in &self.protocols {
            let spec = parse_protocol(name).ok_or_else(|| {
                invalid(
                    "protocols",
                    format!("unknown protocol `{name}` (expected owl|rlp|clp followed by -bs|-ue)"),
                )
            })?;
            if specs.contains(&spec) {
                return Err(invalid("protocols", format!("`{name}` is listed twice")));
            }
            specs.push(spec);
        }
        Ok(specs)
    }

    pub fn scenario(&self) -> Result<Scenario, CliError> {
        let array = |n: usize| ArrayConfig {
            spacing: self.element_spacing_wavelengths,
            ..ArrayConfig::square((n as f64).sqrt().round() as usize)
        };
        let rad = |[a, b]: [f64; 2]| (a.to_radians(), b.to_radians());
        Ok(Scenario {
            region: self.region(),
            bs_array: array(self.bs_antennas),
            ue_array: array(self.ue_antennas),
            signal: SignalConfig::from_link_budget(
                self.carrier_hz,
                self.bandwidth_hz,
                self.n_symbols,
                self.tx_power_dbm,
                self.noise_psd_dbm_hz,
                self.pulse,
            ),
            pulse: self.pulse,
            beams: BeamConfig {
                n_beams_bs: self.n_beams_bs,
                n_beams_ue: self.n_beams_ue,
                azimuth: rad(self.beam_azimuth_deg),
                polar: rad(self.beam_polar_deg),
                ue_frame: self.ue_beam_frame,
            },
            orientation: rad(self.orientation_deg),
            protocols: self.protocol_specs()?,
            n_samples: self.n_samples,
            seed: self.seed,
        })
    }
}
