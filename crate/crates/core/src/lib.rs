//! Position and orientation error bounds for single-anchor mmWave two-way
//! localization.
//!
//! A base station (BS) with known pose at the origin exchanges pilot signals
//! with a user equipment (UE) of unknown position and orientation. Each
//! transmission yields a Fisher information matrix (FIM) over its channel
//! parameters; [`protocols`] maps those onto the UE pose for one-way,
//! round-trip and collaborative exchanges, and [`scenario`] evaluates the
//! bounds over a deployment region.

// `!(x > 0.0)` is used on purpose so NaN fails the check too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::large_enum_variant)]

pub mod beamforming;
pub mod error;
pub mod fim;
pub mod geometry;
pub mod pose;
pub mod protocols;
pub mod scenario;

pub use beamforming::{
    directional_beams, projection, sector_beam_grid, snr_db, BeamDevice, BeamRole, Beamformer,
    PulseModel, Sector, SignalConfig, UeBeamFrame,
};
pub use error::{Error, Result};
pub use fim::{
    angle_efim, channel_fim, delay_info, efim, efim_additivity, transform_fim, ChannelFim, Efim,
    LinkDirection,
};
pub use geometry::{make_ura, steering, ArrayGeometry, Plane, SteeringBundle, Vec3};
pub use pose::{
    channel_geometry, location_jacobian, ChannelGeometry, Initiator, LocationJacobian, Pose,
};
pub use protocols::{
    assemble, combined_delay_info, rlp_beats_owl, BoundOutcome, LocalizationBound, Protocol,
    ProtocolSpec,
};
pub use scenario::{percentile, run_cdf, sample_positions, CdfResult, Region, Scenario};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
