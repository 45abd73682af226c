//! Numeric location of the phase of minimal uncertainty.
//!
//! A coarse grid over the open search interval picks the best cell, golden
//! section shrinks the cell to `BRACKET_TOLERANCE`, and where the exact
//! derivative changes sign across the cell a bisection on that derivative
//! pins the stationary point to machine precision. Golden section alone
//! cannot resolve the minimizer better than about `sqrt(eps)` relative,
//! because the objective is flat to second order there.

use std::f64::consts::PI;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::degenerate;
use crate::error::{NliError, Result};
use crate::fringe::Fringe;
use crate::model::{NliConfig, SensitivityReport};
use crate::nondegenerate;

pub const GRID_POINTS: usize = 2048;
pub const BRACKET_TOLERANCE: f64 = 1e-12;
const MAX_ITERATIONS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Objective {
    /// Phase uncertainty without detection loss.
    Bare,
    /// Phase uncertainty of the detected signal.
    Detected,
}

impl FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bare" => Ok(Objective::Bare),
            "detected" => Ok(Objective::Detected),
            other => Err(format!("unknown objective `{other}` (expected bare or detected)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizationResult {
    pub phi_star: f64,
    /// Phase uncertainty at `phi_star`.
    pub objective: f64,
    /// Signal of the optimized fringe at `phi_star`.
    pub n_at_star: f64,
    pub iterations: usize,
    pub bracket_width: f64,
}

/// Fringe whose phase uncertainty is minimized for `cfg`.
pub fn objective_fringe(cfg: &NliConfig, objective: Objective) -> Result<Fringe> {
    match (cfg.flavor().port(), objective) {
        (None, Objective::Bare) => degenerate::fringe(cfg),
        (None, Objective::Detected) => degenerate::detected_fringe(cfg),
        (Some(port), Objective::Bare) => nondegenerate::fringe(cfg, port),
        (Some(port), Objective::Detected) => nondegenerate::detected_fringe(cfg, port),
    }
}

/// Global minimum of the phase uncertainty over `phi` in `(0, pi)`.
pub fn minimize_uncertainty(cfg: &NliConfig, objective: Objective) -> Result<OptimizationResult> {
    minimize_fringe(&objective_fringe(cfg, objective)?, 0.0, PI, GRID_POINTS)
}

fn objective_at(f: &Fringe, phi: f64) -> f64 {
    match f.uncertainty(phi) {
        Ok(v) if v.is_finite() => v,
        _ => f64::INFINITY,
    }
}

/// Minimizes the phase uncertainty of `f` over the open interval `(lo, hi)`
/// starting from `grid_points` equally spaced interior samples.
pub fn minimize_fringe(f: &Fringe, lo: f64, hi: f64, grid_points: usize) -> Result<OptimizationResult> {
    if !(f.contrast() > 0.0) || grid_points == 0 || !(hi > lo) {
        return Err(NliError::NoInterference);
    }
    let step = (hi - lo) / (grid_points + 1) as f64;
    let node = |i: usize| {
        if i == 0 {
            lo
        } else if i == grid_points + 1 {
            hi
        } else {
            lo + step * i as f64
        }
    };
    let values: Vec<f64> = (1..=grid_points).map(|i| objective_at(f, node(i))).collect();
    let (best, best_value) =
        values.iter().enumerate().fold(
            (0, f64::INFINITY),
            |acc, (i, &v)| if v < acc.1 { (i + 1, v) } else { acc },
        );
    if !best_value.is_finite() {
        return Err(NliError::NoInterference);
    }
    let (cell_lo, cell_hi) = (node(best - 1), node(best + 1));

    // golden section on the best cell
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (cell_lo, cell_hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (objective_at(f, c), objective_at(f, d));
    let mut iterations = 0;
    while b - a > BRACKET_TOLERANCE && iterations < MAX_ITERATIONS {
        iterations += 1;
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective_at(f, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective_at(f, d);
        }
    }

    // bisection on the exact derivative when the cell brackets a stationary point
    let interior = cell_lo > lo && cell_hi < hi;
    if interior && f.uncertainty_derivative(cell_lo) < 0.0 && f.uncertainty_derivative(cell_hi) > 0.0 {
        let (mut p, mut q) = (cell_lo, cell_hi);
        while iterations < 2 * MAX_ITERATIONS {
            let mid = 0.5 * (p + q);
            if mid <= p || mid >= q {
                break;
            }
            iterations += 1;
            if f.uncertainty_derivative(mid) < 0.0 {
                p = mid;
            } else {
                q = mid;
            }
        }
        if q - p < b - a {
            a = p;
            b = q;
        }
    }

    let mid = 0.5 * (a + b);
    let (phi_star, objective) = [a, mid, b]
        .into_iter()
        .filter(|&x| x > lo && x < hi)
        .map(|x| (x, objective_at(f, x)))
        .fold(
            (mid, f64::INFINITY),
            |acc, cand| if cand.1 < acc.1 { cand } else { acc },
        );
    if !objective.is_finite() {
        return Err(NliError::NoInterference);
    }
    Ok(OptimizationResult {
        phi_star,
        objective,
        n_at_star: f.signal(phi_star),
        iterations,
        bracket_width: b - a,
    })
}

/// Smallest gain that limits the sensitivity: `min(T V_A, V_B)` for the
/// degenerate interferometer, `min(T_1 V_A, T_2 V_A, V_B)` otherwise.
pub fn limiting_gain(cfg: &NliConfig) -> f64 {
    let (t1, t2) = cfg.arm_transmittances();
    (t1 * cfg.v_a()).min(t2 * cfg.v_a()).min(cfg.v_b())
}

/// Optimal phase and the uncertainties there, located numerically.
pub fn sensitivity_report(cfg: &NliConfig) -> Result<SensitivityReport> {
    let best = minimize_uncertainty(cfg, Objective::Bare)?;
    let detected = objective_fringe(cfg, Objective::Detected)?.uncertainty(best.phi_star)?;
    Ok(SensitivityReport {
        phi_min: best.phi_star,
        delta_phi_sq: best.objective,
        delta_phi_sq_detected: detected.max(best.objective),
        n_at_min: best.n_at_star,
        limiting_v: limiting_gain(cfg),
    })
}

/// Parameter varied by [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SweepAxis {
    /// Internal reflectivity `R_d` (every arm).
    InternalLoss,
    GainA,
    GainB,
    /// Detection efficiency (every detector).
    Efficiency,
    ArmOne,
    ArmTwo,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::InternalLoss => "R_d",
            SweepAxis::GainA => "V_A",
            SweepAxis::GainB => "V_B",
            SweepAxis::Efficiency => "eta",
            SweepAxis::ArmOne => "T_1",
            SweepAxis::ArmTwo => "T_2",
        }
    }

    /// `template` with this parameter set to `value`.
    pub fn apply(self, template: &NliConfig, value: f64) -> Result<NliConfig> {
        match self {
            SweepAxis::InternalLoss => template.with_internal_reflectivity(value),
            SweepAxis::GainA => template.with_gains(value, template.v_b()),
            SweepAxis::GainB => template.with_gains(template.v_a(), value),
            SweepAxis::Efficiency => template.with_detection(value),
            SweepAxis::ArmOne => template.with_arm_transmittances(value, template.arm_transmittances().1),
            SweepAxis::ArmTwo => template.with_arm_transmittances(template.arm_transmittances().0, value),
        }
    }
}

impl FromStr for SweepAxis {
    type Err = NliError;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| !matches!(c, '_' | '-'))
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "rd" => Ok(SweepAxis::InternalLoss),
            "va" => Ok(SweepAxis::GainA),
            "vb" => Ok(SweepAxis::GainB),
            "eta" => Ok(SweepAxis::Efficiency),
            "t1" => Ok(SweepAxis::ArmOne),
            "t2" => Ok(SweepAxis::ArmTwo),
            _ => Err(NliError::UnknownAxis(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    pub result: OptimizationResult,
}

/// One independent optimization per grid value, returned in grid order.
///
/// Grid points are evaluated in parallel, so a constants table installed
/// with [`crate::constants::with_constants`] does not reach them.
pub fn sweep(template: &NliConfig, axis: SweepAxis, grid: &[f64], objective: Objective) -> Result<Vec<SweepPoint>> {
    grid.par_iter()
        .map(|&value| {
            let cfg = axis.apply(template, value)?;
            Ok(SweepPoint {
                value,
                result: minimize_uncertainty(&cfg, objective)?,
            })
        })
        .collect()
}
