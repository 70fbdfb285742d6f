//! Subcommand dispatch: config in, table out.

use twl_core::run_cdf;
use twl_core::scenario::{sweep_antennas, sweep_bandwidth, REPORTED_QUANTILES};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{Cell, Metadata, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::Subcommand)]
pub enum Command {
    /// PEB/OEB quantiles over the region.
    Cdf,
    /// 90th-percentile PEB against bandwidth.
    SweepBw,
    /// 90th-percentile PEB against array size on one side.
    SweepAnt,
    /// Bounds at the single pose `point_m`.
    Point,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Cdf => "cdf",
            Command::SweepBw => "sweep-bw",
            Command::SweepAnt => "sweep-ant",
            Command::Point => "point",
        }
    }
}

pub fn run(command: Command, config: &RunConfig) -> Result<Table, CliError> {
    config.validate()?;
    let scenario = config.scenario()?;
    let (columns, rows) = match command {
        Command::Cdf => {
            let cdf = run_cdf(&scenario)?;
            if cdf.all_unidentifiable() {
                return Err(CliError::AllUnidentifiable);
            }
            let mut rows = Vec::new();
            for s in &cdf.summaries {
                for (q, row) in REPORTED_QUANTILES.iter().zip(&s.quantiles) {
                    rows.push(vec![
                        s.spec.kind.as_str().into(),
                        s.spec.initiator.as_str().into(),
                        (*q).into(),
                        row.peb.into(),
                        row.oeb.to_degrees().into(),
                        cdf.snr_p10_db.into(),
                        s.n_unidentifiable.into(),
                    ]);
                }
            }
            let columns = vec![
                "protocol",
                "initiator",
                "quantile",
                "peb_m",
                "oeb_deg",
                "snr_p10_db",
                "n_unidentifiable",
            ];
            (columns, rows)
        }
        Command::SweepBw => {
            let sweep = sweep_bandwidth(&scenario, &config.sweep_bandwidths_hz)?;
            if sweep.iter().all(|r| !r.peb90.is_finite()) {
                return Err(CliError::AllUnidentifiable);
            }
            let rows = sweep
                .iter()
                .map(|r| {
                    vec![
                        r.value.into(),
                        r.spec.kind.as_str().into(),
                        r.spec.initiator.as_str().into(),
                        r.peb90.into(),
                    ]
                })
                .collect();
            (vec!["w_hz", "protocol", "initiator", "peb90_m"], rows)
        }
        Command::SweepAnt => {
            let sweep = sweep_antennas(&scenario, &config.sweep_antenna_counts, config.sweep_side)?;
            if sweep.iter().all(|r| !r.peb90.is_finite()) {
                return Err(CliError::AllUnidentifiable);
            }
            // The schema has no initiator column, so the protocol cell
            // carries the full name.
            let rows = sweep
                .iter()
                .map(|r| {
                    vec![
                        config.sweep_side.as_str().into(),
                        (r.value as usize).into(),
                        Cell::Text(r.spec.to_string()),
                        r.peb90.into(),
                    ]
                })
                .collect();
            (vec!["side", "n_antennas", "protocol", "peb90_m"], rows)
        }
        Command::Point => {
            let prepared = scenario.prepare()?;
            let record = prepared.evaluate_position(config.point())?;
            if record.results.iter().all(|r| !r.identifiable()) {
                return Err(CliError::AllUnidentifiable);
            }
            let p = record.position;
            let [zeta, chi] = config.orientation_deg;
            let rows = record
                .results
                .iter()
                .map(|r| {
                    vec![
                        p.x.into(),
                        p.y.into(),
                        p.z.into(),
                        zeta.into(),
                        chi.into(),
                        r.spec.kind.as_str().into(),
                        r.spec.initiator.as_str().into(),
                        record.snr_db().into(),
                        r.peb.into(),
                        r.oeb.to_degrees().into(),
                    ]
                })
                .collect();
            let columns = vec![
                "px",
                "py",
                "pz",
                "zeta_deg",
                "chi_deg",
                "protocol",
                "initiator",
                "snr_db",
                "peb_m",
                "oeb_deg",
            ];
            (columns, rows)
        }
    };
    Ok(Table {
        metadata: Metadata::new(command.name(), config),
        columns,
        rows,
    })
}
