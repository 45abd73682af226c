//! Independent oracles for the closed forms: explicit Bogoliubov maps with
//! Wick moments, and a truncated Fock-basis simulation.

pub mod bogoliubov;
pub mod fock;
pub mod wick;

pub use bogoliubov::{compose_circuit, BogoliubovMap, ModeLabel};
pub use fock::{fock_distribution, fock_moments, sample_photon_counts, CountDistribution, CountSampler};
pub use wick::{wick_moments, WickMoments};

use crate::error::Result;
use crate::model::{NliConfig, PhotonStatistics, Port};

/// Wick-moment statistics of the detected observable selected by the
/// configuration's flavor.
pub fn wick_statistics(cfg: &NliConfig) -> Result<PhotonStatistics> {
    let moments = wick_moments(&compose_circuit(cfg)?)?;
    Ok(match cfg.flavor().port() {
        None | Some(Port::One) => moments.statistics(0),
        Some(Port::Two) => moments.statistics(1),
        Some(Port::Sum) => moments.total_statistics(),
    })
}
