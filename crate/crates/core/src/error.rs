use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NliError {
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("phase uncertainty diverges at phi = {phi}: the fringe is stationary but noisy")]
    DivergentSensitivity { phi: f64 },

    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(&'static str),

    #[error("no interference: the phase uncertainty diverges for every phase")]
    NoInterference,

    #[error("operation requires a {expected} configuration")]
    WrongFlavor { expected: &'static str },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("Fock truncation error: trace deficit {deficit:e} exceeds tolerance at cutoff {cutoff}")]
    Truncation { deficit: f64, cutoff: usize },

    #[error("Bogoliubov map violates the commutation relations (deviation {deviation:e})")]
    Integrity { deviation: f64 },

    #[error("estimator needs a fringe with nonzero contrast")]
    NoContrast,

    #[error("unknown sweep axis `{0}` (expected one of R_d, V_A, V_B, eta, T_1, T_2)")]
    UnknownAxis(String),
}

pub type Result<T> = std::result::Result<T, NliError>;

pub(crate) fn check_range(name: &'static str, value: f64, lo: f64, hi: f64, expected: &'static str) -> Result<f64> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(value)
    } else {
        Err(NliError::Domain { name, value, expected })
    }
}
