//! Closed forms for the degenerate interferometer (single-mode squeezers).

use serde::Serialize;

use crate::constants::active;
use crate::error::{check_range, NliError, Result};
use crate::fringe::Fringe;
use crate::model::{NliConfig, PhotonStatistics};

fn require_degenerate(cfg: &NliConfig) -> Result<()> {
    if cfg.flavor().is_degenerate() {
        Ok(())
    } else {
        Err(NliError::WrongFlavor { expected: "degenerate" })
    }
}

/// Output fringe without detection loss:
/// `N = T V_A + V_B + 2 T V_A V_B - 2 T sqrt(U_A V_A U_B V_B) cos phi`,
/// `Var = 2 N (1 + N) - R T V_A`.
pub fn fringe(cfg: &NliConfig) -> Result<Fringe> {
    require_degenerate(cfg)?;
    let k = active();
    let (va, vb, ua, ub) = (cfg.v_a(), cfg.v_b(), cfg.u_a(), cfg.u_b());
    let t = cfg.transmittance();
    let r = cfg.reflectivity();
    let root = (ua * va * ub * vb).sqrt();
    let contrast = k.deg_contrast * t * root;
    let d = (va * ub).sqrt() - (ua * vb).sqrt();
    let floor = t * d * d + r * vb + (k.deg_gain_product - 2.0) * t * va * vb - (k.deg_contrast - 2.0) * t * root;
    let p = k.deg_variance_pair;
    Ok(Fringe::new(floor, contrast, [-k.deg_internal_loss * r * t * va, p, p]))
}

/// Fringe registered by a detector of efficiency `eta`.
pub fn detected_fringe(cfg: &NliConfig) -> Result<Fringe> {
    Ok(fringe(cfg)?.attenuate(cfg.eta()))
}

pub fn photon_number(cfg: &NliConfig) -> Result<f64> {
    Ok(fringe(cfg)?.signal(cfg.phi()))
}

pub fn photon_variance(cfg: &NliConfig) -> Result<f64> {
    Ok(fringe(cfg)?.variance(cfg.phi()))
}

pub fn statistics(cfg: &NliConfig) -> Result<PhotonStatistics> {
    Ok(fringe(cfg)?.statistics(cfg.phi()))
}

/// Detected photon number `eta N` and variance
/// `eta N (1 + eta + 2 eta N) - eta^2 R T V_A`.
pub fn detected_statistics(cfg: &NliConfig) -> Result<PhotonStatistics> {
    let k = active();
    let n = photon_number(cfg)?;
    let eta = cfg.eta();
    let var = eta * n * (1.0 + eta + k.deg_variance_pair * eta * n)
        - k.deg_internal_loss * eta * eta * cfg.reflectivity() * cfg.transmittance() * cfg.v_a();
    Ok(PhotonStatistics::new(eta * n, var))
}

/// `Var / |dN/dphi|^2` at `cfg.phi()`, with the dark-fringe limit
/// `1 / (2 U V)` for the balanced lossless interferometer.
pub fn phase_uncertainty(cfg: &NliConfig) -> Result<f64> {
    fringe(cfg)?.uncertainty(cfg.phi())
}

/// Phase uncertainty with detection loss,
/// `dphi^2 (1 + (1 - eta)/eta * N / Var)`.
pub fn phase_uncertainty_detected(cfg: &NliConfig) -> Result<f64> {
    let f = fringe(cfg)?;
    let bare = f.uncertainty(cfg.phi())?;
    let eta = cfg.eta();
    Ok(bare * (1.0 + (1.0 - eta) / eta * f.inverse_fano_limit(cfg.phi())))
}

/// Relative increase of the phase uncertainty caused by detection loss
/// for equal gains `V` and no internal loss:
/// `(1 - eta)/(2 eta) / (1 + 2 U V (1 - cos phi))`.
pub fn detection_loss_deviation(v: f64, eta: f64, phi: f64) -> Result<f64> {
    let k = active();
    let v = check_range("V", v, 0.0, f64::INFINITY, "V >= 0")?;
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(NliError::Domain {
            name: "eta",
            value: eta,
            expected: "0 < eta <= 1",
        });
    }
    let s = (0.5 * phi).sin();
    let one_minus_cos = 2.0 * s * s;
    Ok((1.0 - eta) / (k.fig2_fano_half * eta) / (1.0 + k.fig2_gain * (1.0 + v) * v * one_minus_cos))
}

/// Dark-fringe detection factor `(1 + eta) / (2 eta)` of the balanced
/// lossless interferometer.
pub fn dark_fringe_detection_factor(eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(NliError::Domain {
            name: "eta",
            value: eta,
            expected: "0 < eta <= 1",
        });
    }
    Ok((1.0 + eta) / (active().dark_fringe_half * eta))
}

fn ordered_gains(va: f64, vb: f64) -> Result<(f64, f64)> {
    check_range("V_A", va, 0.0, f64::INFINITY, "V >= 0")?;
    check_range("V_B", vb, 0.0, f64::INFINITY, "V >= 0")?;
    let (vmin, vmax) = if va <= vb { (va, vb) } else { (vb, va) };
    if vmin <= 0.0 {
        return Err(NliError::DegenerateConfiguration(
            "both crystals must amplify for the output to interfere",
        ));
    }
    Ok((vmin, vmax))
}

/// Positive optimal phase of the lossless interferometer,
/// `arctan sqrt((V_max U_max - V_min U_min) / ((U_max + V_max)^2 V_min U_min))`.
/// `-phi_min` is equally optimal.
pub fn optimal_phase_lossless(va: f64, vb: f64) -> Result<f64> {
    let (vmin, vmax) = ordered_gains(va, vb)?;
    let (umin, umax) = (1.0 + vmin, 1.0 + vmax);
    // V_max U_max - V_min U_min without cancellation
    let numerator = (vmax - vmin) * (1.0 + vmax + vmin);
    let s = umax + vmax;
    Ok((numerator / (s * s * vmin * umin)).sqrt().atan())
}

/// Photon number at the lossless optimum, `(V_max - V_min) / (U_min + V_min)`.
pub fn optimal_photon_number_lossless(va: f64, vb: f64) -> Result<f64> {
    let (vmin, vmax) = ordered_gains(va, vb)?;
    Ok((vmax - vmin) / (1.0 + 2.0 * vmin))
}

/// Minimal phase uncertainty of the lossless interferometer, `1 / (2 U_min V_min)`.
pub fn optimal_phase_uncertainty_lossless(va: f64, vb: f64) -> Result<f64> {
    let (vmin, _) = ordered_gains(va, vb)?;
    Ok(1.0 / (active().deg_optimum_factor * (1.0 + vmin) * vmin))
}

/// Auxiliary quantities of the lossy optimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossyOptimumTerms {
    /// `R V_t (1 + 8 U_B V_B)`.
    pub script_l: f64,
    pub v_t: f64,
    pub u_t: f64,
}

pub fn lossy_terms(cfg: &NliConfig) -> Result<LossyOptimumTerms> {
    require_degenerate(cfg)?;
    let v_t = cfg.v_t();
    let script_l = cfg.reflectivity() * v_t * (1.0 + active().loss_term_pair * cfg.u_b() * cfg.v_b());
    Ok(LossyOptimumTerms {
        script_l,
        v_t,
        u_t: 1.0 + v_t,
    })
}

/// Photon number at the phase of minimal uncertainty under internal loss.
///
/// This is the positive root of the stationarity condition of
/// `(2N^2 + 2N - R V_t) / (K^2 - (A - N)^2)`. The discriminant carries the
/// coefficient 4 on the `R V_t (2 U_B V_B - U_t V_t)` term; with 1 there
/// the result misses the numeric optimum by about 1e-5 relative.
pub fn optimal_photon_number_lossy(cfg: &NliConfig) -> Result<f64> {
    let k = active();
    let terms = lossy_terms(cfg)?;
    let (vb, ub) = (cfg.v_b(), cfg.u_b());
    let (vt, ut) = (terms.v_t, terms.u_t);
    let r = cfg.reflectivity();
    let l = terms.script_l;
    let diff = vb - vt;
    let disc = k.lossy_disc_diff * diff * diff * (ub + vt) * (ub + vt)
        + k.lossy_disc_loss * ub * vb * l
        + k.lossy_disc_cross * r * vt * (k.lossy_cross_pair * ub * vb - ut * vt)
        + l * l;
    let numerator = k.lossy_diff * diff * diff + l + disc.max(0.0).sqrt();
    Ok(numerator / (k.lossy_denominator * (ub + vb) * (ut + vt)))
}

/// Minimal phase uncertainty under internal loss,
/// `[N_min (U_B + V_B)(U_t + V_t) + U_B V_t + U_t V_B - R V_t] / [4 U_B V_B (U_t - R) V_t]`.
pub fn optimal_phase_uncertainty_lossy(cfg: &NliConfig) -> Result<f64> {
    let terms = lossy_terms(cfg)?;
    let (vb, ub) = (cfg.v_b(), cfg.u_b());
    let (vt, ut) = (terms.v_t, terms.u_t);
    if vt * vb <= 0.0 {
        return Err(NliError::DegenerateConfiguration(
            "both the transmitted source light and the analyzer gain must be nonzero",
        ));
    }
    let r = cfg.reflectivity();
    let n = optimal_photon_number_lossy(cfg)?;
    let numerator = n * (ub + vb) * (ut + vt) + ub * vt + ut * vb - r * vt;
    Ok(numerator / (active().lossy_uncertainty_denominator * ub * vb * (ut - r) * vt))
}

/// Inverse Fano factor `N / Var` at the lossy optimum. Without internal
/// loss it is `1 / (2 + 2N)`, which stays finite at `N = 0`.
pub fn inverse_fano_at_lossy_optimum(cfg: &NliConfig) -> Result<f64> {
    let k = active();
    let n = optimal_photon_number_lossy(cfg)?;
    let r = cfg.reflectivity();
    if r == 0.0 {
        return Ok(1.0 / (k.deg_variance_pair * (1.0 + n)));
    }
    let var = k.deg_variance_pair * n * (1.0 + n) - k.deg_internal_loss * r * cfg.v_t();
    Ok(n / var)
}
