//! Fixtures shared by the benchmarks.

use twl_core::scenario::PreparedScenario;
use twl_core::{channel_geometry, ChannelGeometry, Initiator, Pose, Scenario, Vec3};

/// Reference scenario with `n_samples` positions.
pub fn reference(n_samples: usize) -> Scenario {
    Scenario {
        n_samples,
        ..Scenario::default()
    }
}

pub fn prepared() -> PreparedScenario {
    reference(1).prepare().expect("reference scenario is valid")
}

/// A pose near the middle of the reference region.
pub fn mid_pose() -> Pose {
    Pose::new(Vec3::new(5.0, 25.0, -10.0), 0.2, 0.1)
}

pub fn mid_geometry(p: &PreparedScenario) -> ChannelGeometry {
    channel_geometry(
        &mid_pose(),
        Initiator::Bs,
        p.signal.wavelength(),
        p.signal.c,
    )
    .expect("pose is off the polar axis")
}
