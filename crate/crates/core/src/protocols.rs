//! Localization bounds for one-way (OWL), round-trip (RLP) and collaborative
//! (CLP) localization between an initiator D1 and a responder D2.

use std::fmt;

use nalgebra::{DMatrix, SMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fim::{angle_efim, delay_info, ChannelFim, LinkDirection};
use crate::pose::{Initiator, LocationJacobian};

pub type Mat5 = SMatrix<f64, 5, 5>;

/// Condition number above which a bound is flagged as ill-conditioned.
pub const ILL_CONDITIONED: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Owl,
    Rlp,
    Clp,
}

impl Protocol {
    pub const ALL: [Protocol; 3] = [Protocol::Owl, Protocol::Rlp, Protocol::Clp];

    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::Owl => "owl",
            Protocol::Rlp => "rlp",
            Protocol::Clp => "clp",
        }
    }

    /// Whether the forward (D1 → D2) transmission contributes.
    pub fn needs_forward(self) -> bool {
        !matches!(self, Protocol::Owl)
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A protocol together with the device that starts the exchange. The pose
/// is always estimated at the initiator: from its own observation for OWL
/// and RLP, and also from the responder's fed-back observation for CLP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub kind: Protocol,
    pub initiator: Initiator,
}

impl ProtocolSpec {
    pub fn new(kind: Protocol, initiator: Initiator) -> Self {
        Self { kind, initiator }
    }
}

impl fmt::Display for ProtocolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.kind, self.initiator)
    }
}

/// Localization EFIM over (ζ0, χ0, p_x, p_y, p_z) and the derived bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationBound {
    pub efim: Mat5,
    pub cov: Mat5,
    /// Position error bound (m).
    pub peb: f64,
    /// Orientation error bound (rad).
    pub oeb: f64,
    /// Ratio of extreme eigenvalues of `efim`.
    pub condition: f64,
}

impl LocalizationBound {
    pub fn ill_conditioned(&self) -> bool {
        self.condition > ILL_CONDITIONED
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundOutcome {
    Bound(LocalizationBound),
    /// The EFIM is singular; `rank` is its numerical rank.
    Unidentifiable {
        rank: usize,
    },
}

impl BoundOutcome {
    pub fn bound(&self) -> Option<&LocalizationBound> {
        match self {
            BoundOutcome::Bound(b) => Some(b),
            BoundOutcome::Unidentifiable { .. } => None,
        }
    }

    /// PEB, or +∞ when unidentifiable.
    pub fn peb(&self) -> f64 {
        self.bound().map_or(f64::INFINITY, |b| b.peb)
    }

    /// OEB in radians, or +∞ when unidentifiable.
    pub fn oeb(&self) -> f64 {
        self.bound().map_or(f64::INFINITY, |b| b.oeb)
    }
}

/// Delay information available to the initiator.
///
/// Round-trip protocols estimate the distance from the sum of two delay
/// estimates, so both transmissions contribute; one-way localization assumes
/// synchronized clocks and sees only the backward delay.
pub fn combined_delay_info(kind: Protocol, j_tau_f: f64, j_tau_b: f64) -> Result<f64> {
    if !(j_tau_f >= 0.0 && j_tau_b >= 0.0) {
        return Err(crate::error::invalid(
            "delay_info",
            format!("must be nonnegative, got {j_tau_f} and {j_tau_b}"),
        ));
    }
    match kind {
        Protocol::Owl => Ok(j_tau_b),
        Protocol::Rlp | Protocol::Clp => {
            if j_tau_f == 0.0 || j_tau_b == 0.0 {
                return Err(Error::DelayUnobservable(if j_tau_f == 0.0 {
                    "forward"
                } else {
                    "backward"
                }));
            }
            Ok(4.0 / (1.0 / j_tau_f + 1.0 / j_tau_b))
        }
    }
}

/// Proposition: round-trip beats one-way localization iff `J_f > J_b/3`.
pub fn rlp_beats_owl(j_tau_f: f64, j_tau_b: f64) -> bool {
    3.0 * j_tau_f > j_tau_b
}

/// Builds the localization EFIM for `kind` and inverts it.
///
/// `bwd` is the responder-to-initiator transmission; `fwd` is required for
/// RLP and CLP.
pub fn assemble(
    kind: Protocol,
    fwd: Option<&ChannelFim>,
    bwd: &ChannelFim,
    ups: &LocationJacobian,
) -> Result<BoundOutcome> {
    if bwd.direction != LinkDirection::Backward {
        return Err(Error::MissingFim(
            "backward",
            "channel FIM has forward direction",
        ));
    }
    let fwd = match (kind.needs_forward(), fwd) {
        (true, None) => {
            return Err(Error::MissingFim(
                "forward",
                "required by round-trip protocols",
            ))
        }
        (true, Some(f)) if f.direction != LinkDirection::Forward => {
            return Err(Error::MissingFim(
                "forward",
                "channel FIM has backward direction",
            ))
        }
        (true, Some(f)) => Some(f),
        (false, _) => None,
    };

    let spatial = |j: &ChannelFim| -> Result<Mat5> {
        let e = angle_efim(j)?;
        let m = SMatrix::<f64, 4, 4>::from_column_slice(e.matrix.as_slice());
        Ok(ups.ups_s * m * ups.ups_s.transpose())
    };

    let j_tau = combined_delay_info(kind, fwd.map_or(0.0, delay_info), delay_info(bwd))?;
    let mut efim = spatial(bwd)? + ups.ups_tau * ups.ups_tau.transpose() * j_tau;
    if kind == Protocol::Clp {
        efim += spatial(fwd.expect("checked above"))?;
    }
    efim = (efim + efim.transpose()) * 0.5;
    Ok(invert(efim))
}

/// Inverts a localization EFIM, reporting rank deficiency instead of failing.
pub fn invert(efim: Mat5) -> BoundOutcome {
    let eig = efim.symmetric_eigenvalues();
    let max = eig.max();
    let min = eig.min();
    let tol = max.abs() * 1e-14;
    if !(max > 0.0) || min <= tol {
        let rank = eig.iter().filter(|&&l| l > tol).count();
        return BoundOutcome::Unidentifiable { rank };
    }
    let cov = match efim.cholesky() {
        Some(ch) => ch.inverse(),
        None => {
            let rank = eig.iter().filter(|&&l| l > tol).count();
            return BoundOutcome::Unidentifiable { rank };
        }
    };
    let cov = (cov + cov.transpose()) * 0.5;
    BoundOutcome::Bound(LocalizationBound {
        efim,
        cov,
        peb: (cov[(2, 2)] + cov[(3, 3)] + cov[(4, 4)]).sqrt(),
        oeb: (cov[(0, 0)] + cov[(1, 1)]).sqrt(),
        condition: max / min,
    })
}

/// Convenience wrapper over dynamic matrices, for callers assembling EFIMs by
/// hand.
pub fn bound_from_efim(efim: &DMatrix<f64>) -> Result<BoundOutcome> {
    if efim.shape() != (5, 5) {
        return Err(Error::DimensionMismatch(format!(
            "localization EFIM must be 5x5, got {}x{}",
            efim.nrows(),
            efim.ncols()
        )));
    }
    Ok(invert(Mat5::from_column_slice(efim.as_slice())))
}
