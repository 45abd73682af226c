//! Tables behind the figures and the flavor comparison, computed from the
//! closed forms. Rows come out in a fixed order so that repeated runs
//! produce identical files.

use std::f64::consts::PI;

use serde::Serialize;

use crate::degenerate;
use crate::error::{NliError, Result};
use crate::model::{NliConfig, Port};
use crate::nondegenerate;
use crate::optimizer::{minimize_uncertainty, Objective};

/// `n` equally spaced values from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if n == 0 || !lo.is_finite() || !hi.is_finite() || (n == 1 && lo != hi) {
        return Err(NliError::InvalidConfig(format!(
            "grid {lo}..{hi} with {n} points is empty or ill-defined"
        )));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let step = (hi - lo) / (n - 1) as f64;
    Ok((0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig2Spec {
    pub gains: Vec<f64>,
    pub etas: Vec<f64>,
    pub phases: Vec<f64>,
}

impl Default for Fig2Spec {
    /// `V` in {5, 25}, `phi` in {0, pi/10, pi}, `eta` from 0.01 to 1 in steps of 0.01.
    fn default() -> Self {
        Self {
            gains: vec![5.0, 25.0],
            etas: (1..=100).map(|i| i as f64 / 100.0).collect(),
            phases: vec![0.0, PI / 10.0, PI],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fig2Row {
    pub eta: f64,
    #[serde(rename = "V")]
    pub v: f64,
    pub phi: f64,
    pub deviation: f64,
}

/// Relative increase of the balanced phase uncertainty caused by detection
/// loss, ordered by `V`, then `phi`, then `eta`.
pub fn fig2_rows(spec: &Fig2Spec) -> Result<Vec<Fig2Row>> {
    let mut rows = Vec::with_capacity(spec.gains.len() * spec.phases.len() * spec.etas.len());
    for &v in &spec.gains {
        for &phi in &spec.phases {
            for &eta in &spec.etas {
                rows.push(Fig2Row {
                    eta,
                    v,
                    phi,
                    deviation: degenerate::detection_loss_deviation(v, eta, phi)?,
                });
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fig3Case {
    /// Both crystals at the strong gain.
    BalancedStrong,
    /// `V_A` strong, `V_B` weak.
    StrongerSource,
    /// `V_A` weak, `V_B` strong.
    StrongerAnalyzer,
}

impl Fig3Case {
    pub const ALL: [Fig3Case; 3] = [
        Fig3Case::BalancedStrong,
        Fig3Case::StrongerSource,
        Fig3Case::StrongerAnalyzer,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Fig3Case::BalancedStrong => "balanced-strong",
            Fig3Case::StrongerSource => "stronger-source",
            Fig3Case::StrongerAnalyzer => "stronger-analyzer",
        }
    }

    /// `(V_A, V_B)` for the given strong and weak gains.
    pub fn gains(self, v_strong: f64, v_weak: f64) -> (f64, f64) {
        match self {
            Fig3Case::BalancedStrong => (v_strong, v_strong),
            Fig3Case::StrongerSource => (v_strong, v_weak),
            Fig3Case::StrongerAnalyzer => (v_weak, v_strong),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig3Spec {
    pub v_strong: f64,
    pub v_weak: f64,
    pub internal_losses: Vec<f64>,
}

impl Default for Fig3Spec {
    /// Gains 25 and 5, `R_d` from 0 to 0.5 in steps of 0.01.
    fn default() -> Self {
        Self {
            v_strong: 25.0,
            v_weak: 5.0,
            internal_losses: (0..=50).map(|i| i as f64 / 100.0).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fig3Row {
    #[serde(rename = "R_d")]
    pub r_d: f64,
    pub case: Fig3Case,
    pub inverse_fano_at_min: f64,
    pub delta_phi_sq_min: f64,
}

/// Inverse Fano factor and phase uncertainty at the optimal phase as a
/// function of internal loss, ordered by `R_d`, then case.
pub fn fig3_rows(spec: &Fig3Spec) -> Result<Vec<Fig3Row>> {
    let mut rows = Vec::with_capacity(3 * spec.internal_losses.len());
    for &r_d in &spec.internal_losses {
        for case in Fig3Case::ALL {
            let (va, vb) = case.gains(spec.v_strong, spec.v_weak);
            let cfg = NliConfig::degenerate(va, vb)?.with_internal_transmittance(1.0 - r_d)?;
            rows.push(Fig3Row {
                r_d,
                case,
                inverse_fano_at_min: degenerate::inverse_fano_at_lossy_optimum(&cfg)?,
                delta_phi_sq_min: degenerate::optimal_phase_uncertainty_lossy(&cfg)?,
            });
        }
    }
    Ok(rows)
}

/// Parameters of the flavor comparison. The degenerate row uses `t1` and
/// `eta1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Table1Params {
    pub v_a: f64,
    pub v_b: f64,
    pub t1: f64,
    pub t2: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub phi: f64,
}

impl Default for Table1Params {
    fn default() -> Self {
        Self {
            v_a: 5.0,
            v_b: 25.0,
            t1: 0.9,
            t2: 0.8,
            eta1: 0.9,
            eta2: 0.7,
            phi: PI / 10.0,
        }
    }
}

impl Table1Params {
    /// Both arms with internal reflectivity `r`.
    pub fn with_internal_reflectivity(self, r: f64) -> Result<Self> {
        let t = crate::error::check_range("R", r, 0.0, 1.0, "0 <= R <= 1").map(|r| 1.0 - r)?;
        Ok(Self { t1: t, t2: t, ..self })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Table1Row {
    /// `d`, `1`, `2` or `+`.
    pub row: &'static str,
    pub amplitude: f64,
    pub contrast: f64,
    pub photon_number: f64,
    pub variance: f64,
    pub detected_variance: f64,
    /// Dark-fringe detection factor of the balanced lossless interferometer;
    /// absent for the sum when the detectors differ.
    pub dark_fringe_factor: Option<f64>,
    /// Variance at `phi` with every arm transmittance set to 1.
    pub lossless_variance: f64,
    /// Closed-form minimal uncertainty of the lossless interferometer.
    pub lossless_optimal_uncertainty: Option<f64>,
    /// Numeric minimal uncertainty at the given losses, without and with
    /// detection loss.
    pub optimal_uncertainty: Option<f64>,
    pub optimal_uncertainty_detected: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitCheck {
    pub name: String,
    pub value: f64,
    pub expected: f64,
    pub relative_error: f64,
    pub passed: bool,
}

const LIMIT_TOLERANCE: f64 = 1e-10;

impl LimitCheck {
    fn new(name: impl Into<String>, value: f64, expected: f64) -> Self {
        let relative_error = (value - expected).abs() / expected.abs().max(f64::MIN_POSITIVE);
        let relative_error = if value == expected { 0.0 } else { relative_error };
        Self {
            name: name.into(),
            value,
            expected,
            relative_error,
            passed: relative_error <= LIMIT_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Report {
    pub params: Table1Params,
    pub rows: Vec<Table1Row>,
    /// Lossless-limit identities of the comparison table.
    pub checks: Vec<LimitCheck>,
}

impl Table1Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn optimum(cfg: &NliConfig, objective: Objective) -> Option<f64> {
    minimize_uncertainty(cfg, objective).ok().map(|r| r.objective)
}

/// Every cell of the degenerate/nondegenerate comparison at `params`,
/// followed by the identities that hold without internal loss.
pub fn table1(params: &Table1Params) -> Result<Table1Report> {
    let p = *params;
    let deg = NliConfig::degenerate(p.v_a, p.v_b)?
        .with_internal_transmittance(p.t1)?
        .with_detection(p.eta1)?
        .with_phi(p.phi);
    let nd = |port: Port| -> Result<NliConfig> {
        let cfg = NliConfig::nondegenerate(port, p.v_a, p.v_b)?
            .with_arm_transmittances(p.t1, p.t2)?
            .with_phi(p.phi);
        match port {
            Port::One => cfg.with_detection(p.eta1),
            Port::Two => cfg.with_detection(p.eta2),
            Port::Sum => cfg.with_port_efficiencies(p.eta1, p.eta2),
        }
    };
    let lossless_deg = deg.with_internal_transmittance(1.0)?;
    let n_d = degenerate::photon_number(&lossless_deg)?;
    let deg_optimum = degenerate::optimal_phase_uncertainty_lossless(p.v_a, p.v_b).ok();
    let nd_optimum = nondegenerate::optimal_phase_uncertainty_lossless(p.v_a, p.v_b).ok();

    let deg_signal = degenerate::fringe(&deg)?;
    let mut rows = vec![Table1Row {
        row: "d",
        amplitude: deg_signal.amplitude(),
        contrast: deg_signal.contrast(),
        photon_number: deg_signal.signal(p.phi),
        variance: deg_signal.variance(p.phi),
        detected_variance: degenerate::detected_statistics(&deg)?.variance,
        dark_fringe_factor: Some(degenerate::dark_fringe_detection_factor(p.eta1)?),
        lossless_variance: degenerate::photon_variance(&lossless_deg)?,
        lossless_optimal_uncertainty: deg_optimum,
        optimal_uncertainty: optimum(&deg, Objective::Bare),
        optimal_uncertainty_detected: optimum(&deg, Objective::Detected),
    }];
    let mut checks = vec![LimitCheck::new(
        "d: lossless variance = 2 N_d (1 + N_d)",
        rows[0].lossless_variance,
        2.0 * n_d * (1.0 + n_d),
    )];

    for (port, label, multiple) in [(Port::One, "1", 1.0), (Port::Two, "2", 1.0), (Port::Sum, "+", 4.0)] {
        let cfg = nd(port)?;
        let lossless = cfg.with_arm_transmittances(1.0, 1.0)?;
        let signal = nondegenerate::port_signal(&cfg, port)?;
        let stats = nondegenerate::port_statistics(&cfg, port)?;
        let eta = match port {
            Port::One => Some(p.eta1),
            Port::Two => Some(p.eta2),
            Port::Sum => (p.eta1 == p.eta2).then_some(p.eta1),
        };
        let row = Table1Row {
            row: label,
            amplitude: signal.amplitude,
            contrast: signal.contrast,
            photon_number: stats.mean_n,
            variance: stats.variance,
            detected_variance: nondegenerate::port_variance_detected(&cfg, port)?,
            dark_fringe_factor: eta
                .map(|e| nondegenerate::dark_fringe_detection_factor(e, port))
                .transpose()?,
            lossless_variance: nondegenerate::port_variance(&lossless, port)?,
            lossless_optimal_uncertainty: nd_optimum,
            optimal_uncertainty: optimum(&cfg, Objective::Bare),
            optimal_uncertainty_detected: optimum(&cfg, Objective::Detected),
        };
        checks.push(LimitCheck::new(
            format!("{label}: lossless variance = {multiple} N_d (1 + N_d)"),
            row.lossless_variance,
            multiple * n_d * (1.0 + n_d),
        ));
        if let Some(closed) = nd_optimum {
            if let Some(numeric) = optimum(&lossless, Objective::Bare) {
                checks.push(LimitCheck::new(
                    format!("{label}: lossless optimum = 1/(4 U_min V_min)"),
                    numeric,
                    closed,
                ));
            }
        }
        rows.push(row);
    }

    if let (Some(deg_closed), Some(nd_closed)) = (deg_optimum, nd_optimum) {
        if let Some(numeric) = optimum(&lossless_deg, Objective::Bare) {
            checks.push(LimitCheck::new(
                "d: lossless optimum = 1/(2 U_min V_min)",
                numeric,
                deg_closed,
            ));
        }
        checks.push(LimitCheck::new(
            "degenerate / nondegenerate optimum",
            deg_closed / nd_closed,
            2.0,
        ));
    }
    if p.v_a > 0.0 {
        // detection factors at the balanced dark fringe, from the general expression
        let balanced = NliConfig::degenerate(p.v_a, p.v_a)?.with_detection(p.eta1)?;
        let general = degenerate::phase_uncertainty_detected(&balanced)? / degenerate::phase_uncertainty(&balanced)?;
        checks.push(LimitCheck::new(
            "d: dark-fringe detection factor",
            general,
            rows[0].dark_fringe_factor.unwrap_or(f64::NAN),
        ));
        for (port, row) in [(Port::One, 1), (Port::Two, 2), (Port::Sum, 3)] {
            let Some(expected) = rows[row].dark_fringe_factor else {
                continue;
            };
            let cfg = NliConfig::nondegenerate(port, p.v_a, p.v_a)?;
            let cfg = match port {
                Port::One => cfg.with_detection(p.eta1)?,
                Port::Two => cfg.with_detection(p.eta2)?,
                Port::Sum => cfg.with_port_efficiencies(p.eta1, p.eta2)?,
            };
            let general = nondegenerate::detection_factor(&cfg, port)?;
            checks.push(LimitCheck::new(
                format!("{}: dark-fringe detection factor", rows[row].row),
                general,
                expected,
            ));
        }
    }
    Ok(Table1Report {
        params: p,
        rows,
        checks,
    })
}
