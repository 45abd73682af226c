//! Closed forms for the nondegenerate interferometer (two-mode squeezers,
//! one loss channel per arm, one detector per output port).

use serde::Serialize;

use crate::constants::active;
use crate::error::{check_range, NliError, Result};
use crate::fringe::Fringe;
use crate::model::{NliConfig, PhotonStatistics, Port};

/// Signal of one port written as `N = amplitude - contrast cos phi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PortSignal {
    pub amplitude: f64,
    pub contrast: f64,
    pub port: Port,
}

fn require_nondegenerate(cfg: &NliConfig) -> Result<()> {
    if cfg.flavor().is_degenerate() {
        Err(NliError::WrongFlavor {
            expected: "nondegenerate",
        })
    } else {
        Ok(())
    }
}

struct Arms {
    floors: [f64; 2],
    contrast: f64,
    sum_floor: f64,
    sum_contrast: f64,
}

// Port j: A_j = T_j V_A + V_B + (T_1 + T_2) V_A V_B, K = 2 sqrt(T_1 T_2 U_A U_B V_A V_B).
// The floor A_j - K is evaluated as
// (sqrt(T_j V_A U_B) - sqrt(T_k U_A V_B))^2 + R_k V_B with k the other arm.
fn arms(cfg: &NliConfig) -> Arms {
    let k = active();
    let (va, vb, ua, ub) = (cfg.v_a(), cfg.v_b(), cfg.u_a(), cfg.u_b());
    let (t1, t2) = cfg.arm_transmittances();
    let root = (t1 * t2 * ua * ub * va * vb).sqrt();
    let extra = (k.nd_gain_product - 1.0) * (t1 + t2) * va * vb;
    let floor = |tj: f64, tk: f64| {
        let d = (tj * va * ub).sqrt() - (tk * ua * vb).sqrt();
        d * d + (1.0 - tk) * vb + extra
    };
    let (f1, f2) = (floor(t1, t2), floor(t2, t1));
    Arms {
        floors: [f1 - (k.nd_contrast - 2.0) * root, f2 - (k.nd_contrast - 2.0) * root],
        contrast: k.nd_contrast * root,
        sum_floor: f1 + f2 - (k.nd_sum_contrast - 4.0) * root,
        sum_contrast: k.nd_sum_contrast * root,
    }
}

pub fn port_signal(cfg: &NliConfig, port: Port) -> Result<PortSignal> {
    let f = fringe(cfg, port)?;
    Ok(PortSignal {
        amplitude: f.amplitude(),
        contrast: f.contrast(),
        port,
    })
}

/// Fringe of `port` without detection loss. Single ports have
/// `Var = N (1 + N)`; the sum has `Var = N_+ (2 + N_+) + [2 T_1 T_2 - (T_1 + T_2)] V_A`.
pub fn fringe(cfg: &NliConfig, port: Port) -> Result<Fringe> {
    require_nondegenerate(cfg)?;
    let k = active();
    let a = arms(cfg);
    let p = k.nd_port_variance;
    Ok(match port {
        Port::One => Fringe::new(a.floors[0], a.contrast, [0.0, p, p]),
        Port::Two => Fringe::new(a.floors[1], a.contrast, [0.0, p, p]),
        Port::Sum => {
            let (t1, t2) = cfg.arm_transmittances();
            let loss = (k.nd_sum_loss_pair * t1 * t2 - (t1 + t2)) * cfg.v_a();
            Fringe::new(a.sum_floor, a.sum_contrast, [loss, k.nd_sum_variance_shot, 1.0])
        }
    })
}

/// Fringe registered behind the detectors. Single ports have
/// `Var = eta N (1 + eta N)`; the sum of the detected counts has
/// `Var = S (1 + S) + eta_1 eta_2 (N_1 + N_2) + eta_1 eta_2 [2 T_1 T_2 - (T_1 + T_2)] V_A`
/// with `S = eta_1 N_1 + eta_2 N_2`.
pub fn detected_fringe(cfg: &NliConfig, port: Port) -> Result<Fringe> {
    require_nondegenerate(cfg)?;
    let k = active();
    let a = arms(cfg);
    let (eta1, eta2) = cfg.port_efficiencies();
    let p = k.nd_port_variance;
    Ok(match port {
        Port::One => Fringe::new(eta1 * a.floors[0], eta1 * a.contrast, [0.0, p, p]),
        Port::Two => Fringe::new(eta2 * a.floors[1], eta2 * a.contrast, [0.0, p, p]),
        Port::Sum => {
            let (t1, t2) = cfg.arm_transmittances();
            let m = k.nd_sum_cross_shot;
            let loss = (k.nd_sum_loss_pair * t1 * t2 - (t1 + t2)) * cfg.v_a();
            let (f1, f2) = (a.floors[0], a.floors[1]);
            let es = eta1 + eta2;
            let e12 = eta1 * eta2;
            // N_1 + N_2 expressed through S: the dark-fringe offsets enter as
            // (eta_2 - eta_1)(F_1 - F_2) / (eta_1 + eta_2).
            let c0 = e12 * (m * (eta2 - eta1) * (f1 - f2) / es + loss);
            let c1 = 1.0 + 2.0 * m * e12 / es;
            Fringe::new(eta1 * f1 + eta2 * f2, 0.5 * es * a.sum_contrast, [c0, c1, 1.0])
        }
    })
}

pub fn port_photon_number(cfg: &NliConfig, port: Port) -> Result<f64> {
    Ok(fringe(cfg, port)?.signal(cfg.phi()))
}

pub fn port_variance(cfg: &NliConfig, port: Port) -> Result<f64> {
    Ok(fringe(cfg, port)?.variance(cfg.phi()))
}

pub fn port_statistics(cfg: &NliConfig, port: Port) -> Result<PhotonStatistics> {
    Ok(fringe(cfg, port)?.statistics(cfg.phi()))
}

pub fn port_variance_detected(cfg: &NliConfig, port: Port) -> Result<f64> {
    Ok(detected_fringe(cfg, port)?.variance(cfg.phi()))
}

pub fn port_detected_statistics(cfg: &NliConfig, port: Port) -> Result<PhotonStatistics> {
    Ok(detected_fringe(cfg, port)?.statistics(cfg.phi()))
}

pub fn port_phase_uncertainty(cfg: &NliConfig, port: Port, detected: bool) -> Result<f64> {
    let f = if detected {
        detected_fringe(cfg, port)?
    } else {
        fringe(cfg, port)?
    };
    f.uncertainty(cfg.phi())
}

/// Detection-loss factor `1 + (1 - eta)/eta * N / Var` of a port at
/// `cfg.phi()`, using the dark-fringe limit of `N / Var`. For the sum port
/// it applies only when both detectors have the same efficiency.
pub fn detection_factor(cfg: &NliConfig, port: Port) -> Result<f64> {
    let (eta1, eta2) = cfg.port_efficiencies();
    let eta = match port {
        Port::One => eta1,
        Port::Two => eta2,
        Port::Sum if eta1 == eta2 => eta1,
        Port::Sum => {
            return Err(NliError::InvalidConfig(
                "sum-port detection factor needs equal detector efficiencies".into(),
            ))
        }
    };
    let f = fringe(cfg, port)?;
    Ok(1.0 + (1.0 - eta) / eta * f.inverse_fano_limit(cfg.phi()))
}

/// Dark-fringe detection factor of the balanced lossless interferometer:
/// `1 / eta_j` for a single port and `(1 + eta_+)/(2 eta_+)` for the sum.
pub fn dark_fringe_detection_factor(eta: f64, port: Port) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(NliError::Domain {
            name: "eta",
            value: eta,
            expected: "0 < eta <= 1",
        });
    }
    Ok(match port {
        Port::One | Port::Two => 1.0 / eta,
        Port::Sum => (1.0 + eta) / (active().dark_fringe_half * eta),
    })
}

/// Minimal phase uncertainty of the lossless nondegenerate interferometer,
/// `1 / (4 U_min V_min)`, the same for every port.
pub fn optimal_phase_uncertainty_lossless(va: f64, vb: f64) -> Result<f64> {
    check_range("V_A", va, 0.0, f64::INFINITY, "V >= 0")?;
    check_range("V_B", vb, 0.0, f64::INFINITY, "V >= 0")?;
    let vmin = va.min(vb);
    if vmin <= 0.0 {
        return Err(NliError::DegenerateConfiguration(
            "both crystals must amplify for the output to interfere",
        ));
    }
    Ok(1.0 / (active().nd_optimum_factor * (1.0 + vmin) * vmin))
}
