//! Monte Carlo study of the arccos phase estimator and the quantum Fisher
//! information of the balanced interferometer.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::constants::active;
use crate::error::{check_range, NliError, Result};
use crate::fringe::STATIONARY_SIN;
use crate::model::NliConfig;
use crate::optimizer::{objective_fringe, Objective};
use crate::oracle::fock::{fock_distribution, CountSampler};

/// Working point `pi / 10` of the Monte Carlo studies: close to the dark
/// fringe but clear of the stationary point.
pub const REFERENCE_PHASE: f64 = std::f64::consts::PI / 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseEstimate {
    pub phi: f64,
    /// The arccos argument fell outside `[-1, 1]` and was clamped.
    pub clamped: bool,
}

/// `Phi = arccos((A - n_bar) / K)` for a fringe `N = A - K cos phi`.
pub fn arccos_estimator(amplitude: f64, contrast: f64, n_bar: f64) -> Result<PhaseEstimate> {
    if !(contrast > 0.0) {
        return Err(NliError::NoContrast);
    }
    let arg = (amplitude - n_bar) / contrast;
    Ok(PhaseEstimate {
        phi: arg.clamp(-1.0, 1.0).acos(),
        clamped: !(-1.0..=1.0).contains(&arg),
    })
}

/// Source of simulated photon counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sampler {
    /// Exact output distribution from the truncated Fock simulation.
    ExactFock { cutoff: usize },
    /// Normal law with the closed-form mean and variance.
    GaussianApprox,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimatorRun {
    pub true_phi: f64,
    pub p: usize,
    /// Mean of the estimates over the repetitions.
    pub estimate: f64,
    /// Sample variance of the estimates over the repetitions.
    pub se_sq: f64,
    pub repetitions: usize,
    pub rng_seed: u64,
    pub clamp_events: usize,
    /// Detected phase uncertainty divided by `p`.
    pub predicted_se_sq: f64,
}

impl EstimatorRun {
    /// `se_sq` relative to the closed-form prediction; 1 for an efficient estimator.
    pub fn normalized_variance(&self) -> f64 {
        self.se_sq / self.predicted_se_sq
    }
}

/// Repeats `repetitions` times: draw `p` detected photon counts at
/// `cfg.phi()`, average them and invert the fringe with
/// [`arccos_estimator`]. Repetition `i` uses stream `i` of a ChaCha8
/// generator seeded with `seed`, so results do not depend on scheduling.
pub fn monte_carlo_uncertainty(
    cfg: &NliConfig,
    p: usize,
    repetitions: usize,
    sampler: Sampler,
    seed: u64,
) -> Result<EstimatorRun> {
    if p == 0 {
        return Err(NliError::Domain {
            name: "p",
            value: 0.0,
            expected: "p >= 1",
        });
    }
    if repetitions < 2 {
        return Err(NliError::Domain {
            name: "repetitions",
            value: repetitions as f64,
            expected: "repetitions >= 2",
        });
    }
    let phi = cfg.phi();
    if phi.sin().abs() < STATIONARY_SIN {
        return Err(NliError::DivergentSensitivity { phi });
    }
    let fringe = objective_fringe(cfg, Objective::Detected)?;
    let predicted = fringe.uncertainty(phi)? / p as f64;
    let (amplitude, contrast) = (fringe.amplitude(), fringe.contrast());

    let draw: Box<dyn Fn(&mut ChaCha8Rng) -> f64 + Sync> = match sampler {
        Sampler::GaussianApprox => {
            let normal = Normal::new(fringe.signal(phi), fringe.variance(phi).max(0.0).sqrt())
                .map_err(|_| NliError::InvalidConfig("photon-number variance is not finite".into()))?;
            Box::new(move |rng: &mut ChaCha8Rng| normal.sample(rng))
        }
        Sampler::ExactFock { cutoff } => {
            let counts = CountSampler::new(&fock_distribution(cfg, cutoff)?);
            Box::new(move |rng: &mut ChaCha8Rng| counts.sample(rng) as f64)
        }
    };

    let estimates: Vec<Result<PhaseEstimate>> = (0..repetitions)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let total: f64 = (0..p).map(|_| draw(&mut rng)).sum();
            arccos_estimator(amplitude, contrast, total / p as f64)
        })
        .collect();
    let estimates: Vec<PhaseEstimate> = estimates.into_iter().collect::<Result<_>>()?;

    let n = repetitions as f64;
    let mean = estimates.iter().map(|e| e.phi).sum::<f64>() / n;
    let se_sq = estimates.iter().map(|e| (e.phi - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(EstimatorRun {
        true_phi: phi,
        p,
        estimate: mean,
        se_sq,
        repetitions,
        rng_seed: seed,
        clamp_events: estimates.iter().filter(|e| e.clamped).count(),
        predicted_se_sq: predicted,
    })
}

/// Quantum Fisher information `F = 2 U V` of the balanced lossless
/// interferometer with gain `V`.
pub fn quantum_fisher_information(v: f64) -> Result<f64> {
    let v = check_range("V", v, 0.0, f64::INFINITY, "V >= 0")?;
    Ok(active().qfi_factor * (1.0 + v) * v)
}
