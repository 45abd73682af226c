//! Phase sensitivity of gain-unbalanced SU(1,1) nonlinear interferometers
//! with internal and detection loss.
//!
//! The closed forms live in [`degenerate`] and [`nondegenerate`]; both
//! express the output as a [`fringe::Fringe`]. [`oracle`] recomputes the
//! same moments from explicit Bogoliubov maps and a truncated Fock-space
//! simulation, [`optimizer`] locates optimal phases numerically and
//! [`estimation`] runs Monte Carlo studies of the arccos phase estimator.

pub mod constants;
pub mod degenerate;
pub mod error;
pub mod estimation;
pub mod fringe;
pub mod model;
pub mod nondegenerate;
pub mod optimizer;
pub mod oracle;
pub mod reports;
pub mod validate;

pub use error::{NliError, Result};
pub use fringe::Fringe;
pub use model::{
    effective_phase, effective_phase_nondegenerate, gain_from_v, Detection, DetectionEfficiency, Flavor, GainSetting,
    InternalLoss, LossChannel, NliConfig, PhotonStatistics, Port, SensitivityReport,
};
