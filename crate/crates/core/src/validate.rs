//! Self-check of the closed forms against the oracles and the analytic
//! invariants. Every closed-form coefficient in
//! [`crate::constants::ClosedFormConstants`] is exercised by at least one
//! check, so a wrong coefficient makes the report fail.
//!
//! All checks run on the calling thread, so a constants table installed
//! with [`crate::constants::with_constants`] applies to every closed form
//! they evaluate.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::degenerate;
use crate::error::Result;
use crate::estimation::{monte_carlo_uncertainty, quantum_fisher_information, Sampler};
use crate::model::{Detection, DetectionEfficiency, Flavor, GainSetting, InternalLoss, LossChannel, NliConfig, Port};
use crate::nondegenerate;
use crate::optimizer::{minimize_uncertainty, Objective};
use crate::oracle::fock::{fock_moments, DEFAULT_CUTOFF};
use crate::oracle::wick_statistics;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    /// Closed forms against Wick moments, the optimizer and the invariants.
    Fast,
    /// Adds the Fock simulation and Monte Carlo runs.
    Full,
}

impl FromStr for Tier {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "fast" => Ok(Tier::Fast),
            "full" => Ok(Tier::Full),
            other => Err(format!("unknown tier `{other}` (expected fast or full)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Set when a case raised an error instead of producing a value.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub tier: Tier,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// One line per check, then a summary line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            let _ = write!(
                out,
                "{status} {:<40} cases={:<5} max_error={:.3e} tolerance={:.1e}",
                c.name, c.cases, c.max_error, c.tolerance
            );
            if let Some(f) = &c.failure {
                let _ = write!(out, " error: {f}");
            }
            out.push('\n');
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        let _ = writeln!(
            out,
            "{} checks, {failed} failed (tier {:?}, seed {})",
            self.checks.len(),
            self.tier,
            self.seed
        );
        out
    }
}

/// Relative error with a floor of 1 on the scale, so that values near zero
/// are compared absolutely.
fn rel_err(value: f64, reference: f64) -> f64 {
    let e = (value - reference).abs() / value.abs().max(reference.abs()).max(1.0);
    if e.is_nan() {
        f64::INFINITY
    } else {
        e
    }
}

fn strict_rel(value: f64, reference: f64) -> f64 {
    if value == reference {
        return 0.0;
    }
    let e = (value - reference).abs() / reference.abs();
    if e.is_nan() {
        f64::INFINITY
    } else {
        e
    }
}

struct Check {
    name: &'static str,
    tolerance: f64,
    cases: usize,
    max_error: f64,
    failure: Option<String>,
}

impl Check {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            tolerance,
            cases: 0,
            max_error: 0.0,
            failure: None,
        }
    }

    fn record(&mut self, outcome: Result<f64>) {
        self.cases += 1;
        match outcome {
            Ok(e) => self.max_error = self.max_error.max(if e.is_nan() { f64::INFINITY } else { e }),
            Err(err) => {
                if self.failure.is_none() {
                    self.failure = Some(err.to_string());
                }
            }
        }
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            name: self.name,
            cases: self.cases,
            max_error: self.max_error,
            tolerance: self.tolerance,
            passed: self.failure.is_none() && self.cases > 0 && self.max_error <= self.tolerance,
            failure: self.failure,
        }
    }
}

fn degenerate_cfg(va: f64, vb: f64, t: f64, eta: f64, phi: f64) -> Result<NliConfig> {
    Ok(NliConfig::degenerate(va, vb)?
        .with_internal_transmittance(t)?
        .with_detection(eta)?
        .with_phi(phi))
}

fn nondegenerate_cfg(port: Port, va: f64, vb: f64, t: (f64, f64), eta: (f64, f64), phi: f64) -> Result<NliConfig> {
    let cfg = NliConfig::nondegenerate(port, va, vb)?
        .with_arm_transmittances(t.0, t.1)?
        .with_phi(phi);
    match port {
        Port::One => cfg.with_detection(eta.0),
        Port::Two => cfg.with_detection(eta.1),
        Port::Sum => cfg.with_port_efficiencies(eta.0, eta.1),
    }
}

const ORACLE_CASES: usize = 1000;
const OPTIMIZER_CASES: usize = 200;

fn degenerate_wick(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut check = Check::new("degenerate moments vs Wick", 1e-10);
    for _ in 0..ORACLE_CASES {
        let (va, vb) = (rng.random_range(0.0..30.0), rng.random_range(0.0..30.0));
        let t = rng.random_range(0.0..=1.0);
        let phi = rng.random_range(0.0..2.0 * PI);
        let eta = rng.random_range(0.01..=1.0);
        check.record((|| {
            let cfg = degenerate_cfg(va, vb, t, eta, phi)?;
            let bare = wick_statistics(&cfg.with_detection(1.0)?)?;
            let detected = wick_statistics(&cfg)?;
            let closed_bare = degenerate::statistics(&cfg)?;
            let closed = degenerate::detected_statistics(&cfg)?;
            Ok(rel_err(closed_bare.mean_n, bare.mean_n)
                .max(rel_err(closed_bare.variance, bare.variance))
                .max(rel_err(closed.mean_n, detected.mean_n))
                .max(rel_err(closed.variance, detected.variance)))
        })());
    }
    check.finish()
}

fn nondegenerate_wick(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut check = Check::new("nondegenerate moments vs Wick", 1e-10);
    for _ in 0..ORACLE_CASES {
        let (va, vb) = (rng.random_range(0.0..30.0), rng.random_range(0.0..30.0));
        let t = (rng.random_range(0.0..=1.0), rng.random_range(0.0..=1.0));
        let eta = (rng.random_range(0.01..=1.0), rng.random_range(0.01..=1.0));
        let phi = rng.random_range(0.0..2.0 * PI);
        for port in [Port::One, Port::Two, Port::Sum] {
            check.record((|| {
                let cfg = nondegenerate_cfg(port, va, vb, t, eta, phi)?;
                let bare_cfg = match port {
                    Port::Sum => cfg.with_port_efficiencies(1.0, 1.0)?,
                    _ => cfg.with_detection(1.0)?,
                };
                let bare = wick_statistics(&bare_cfg)?;
                let detected = wick_statistics(&cfg)?;
                let closed_bare = nondegenerate::port_statistics(&cfg, port)?;
                let closed = nondegenerate::port_detected_statistics(&cfg, port)?;
                Ok(rel_err(closed_bare.mean_n, bare.mean_n)
                    .max(rel_err(closed_bare.variance, bare.variance))
                    .max(rel_err(closed.mean_n, detected.mean_n))
                    .max(rel_err(closed.variance, detected.variance)))
            })());
        }
    }
    check.finish()
}

// Relative increase of the uncertainty from detection loss, from Wick
// moments: (1 - eta)/eta * N / Var.
fn detection_deviation_from_wick(v: f64, eta: f64, phi: f64) -> Result<f64> {
    let cfg = degenerate_cfg(v, v, 1.0, 1.0, phi)?;
    let stats = wick_statistics(&cfg)?;
    Ok((1.0 - eta) / eta * stats.mean_n / stats.variance)
}

fn detection_deviation() -> CheckResult {
    let mut check = Check::new("detection-loss deviation vs Wick", 1e-10);
    for v in [0.5, 5.0, 25.0] {
        for eta in [0.1, 0.5, 0.9] {
            for phi in [PI / 10.0, 1.0, 2.0, 3.0] {
                check.record((|| {
                    let closed = degenerate::detection_loss_deviation(v, eta, phi)?;
                    Ok(strict_rel(closed, detection_deviation_from_wick(v, eta, phi)?))
                })());
            }
            // dark fringe: the inverse Fano factor tends to 1/2
            check.record((|| {
                let closed = degenerate::detection_loss_deviation(v, eta, 0.0)?;
                Ok(strict_rel(closed, (1.0 - eta) / eta * 0.5))
            })());
        }
    }
    check.finish()
}

fn detection_identity(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut check = Check::new("detected uncertainty identity", 1e-12);
    for _ in 0..OPTIMIZER_CASES {
        let (va, vb) = (rng.random_range(0.05..30.0), rng.random_range(0.05..30.0));
        let t = rng.random_range(0.05..=1.0);
        let eta = rng.random_range(0.01..=1.0);
        let phi = rng.random_range(0.05..3.0);
        check.record((|| {
            let cfg = degenerate_cfg(va, vb, t, eta, phi)?;
            let stats = wick_statistics(&cfg.with_detection(1.0)?)?;
            let ratio = degenerate::phase_uncertainty_detected(&cfg)? / degenerate::phase_uncertainty(&cfg)?;
            // compared as ratios: ratio - 1 cancels catastrophically for eta near 1
            Ok(strict_rel(
                ratio,
                1.0 + (1.0 - eta) / eta * stats.mean_n / stats.variance,
            ))
        })());
    }
    check.finish()
}

fn lossless_optimum(rng: &mut ChaCha8Rng) -> [CheckResult; 2] {
    let mut phase = Check::new("lossless optimal phase vs optimizer", 1e-8);
    let mut value = Check::new("lossless optimum vs optimizer", 1e-10);
    for _ in 0..OPTIMIZER_CASES {
        let (va, vb) = (rng.random_range(0.05..30.0), rng.random_range(0.05..30.0));
        let numeric = NliConfig::degenerate(va, vb).and_then(|cfg| minimize_uncertainty(&cfg, Objective::Bare));
        phase.record(
            numeric
                .clone()
                .and_then(|r| Ok((r.phi_star - degenerate::optimal_phase_lossless(va, vb)?).abs())),
        );
        value.record(numeric.and_then(|r| {
            Ok(strict_rel(
                degenerate::optimal_phase_uncertainty_lossless(va, vb)?,
                r.objective,
            ))
        }));
    }
    [phase.finish(), value.finish()]
}

fn lossy_optimum(rng: &mut ChaCha8Rng) -> [CheckResult; 2] {
    let mut photons = Check::new("lossy optimal photon number vs optimizer", 1e-8);
    let mut value = Check::new("lossy optimum vs optimizer", 1e-10);
    for _ in 0..OPTIMIZER_CASES {
        let (va, vb) = (rng.random_range(0.05..30.0), rng.random_range(0.05..30.0));
        let t = rng.random_range(0.5..0.999);
        let numeric = NliConfig::degenerate(va, vb)
            .and_then(|cfg| cfg.with_internal_transmittance(t))
            .and_then(|cfg| Ok((cfg, minimize_uncertainty(&cfg, Objective::Bare)?)));
        photons.record(
            numeric
                .clone()
                .and_then(|(cfg, r)| Ok(strict_rel(degenerate::optimal_photon_number_lossy(&cfg)?, r.n_at_star))),
        );
        value.record(numeric.and_then(|(cfg, r)| {
            Ok(strict_rel(
                degenerate::optimal_phase_uncertainty_lossy(&cfg)?,
                r.objective,
            ))
        }));
    }
    [photons.finish(), value.finish()]
}

fn inverse_fano_at_optimum(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut check = Check::new("inverse Fano factor at lossy optimum", 1e-8);
    for _ in 0..OPTIMIZER_CASES {
        let (va, vb) = (rng.random_range(0.05..30.0), rng.random_range(0.05..30.0));
        let t = rng.random_range(0.5..0.999);
        check.record((|| {
            let cfg = NliConfig::degenerate(va, vb)?.with_internal_transmittance(t)?;
            let r = minimize_uncertainty(&cfg, Objective::Bare)?;
            let stats = wick_statistics(&cfg.with_phi(r.phi_star))?;
            Ok(strict_rel(
                degenerate::inverse_fano_at_lossy_optimum(&cfg)?,
                stats.mean_n / stats.variance,
            ))
        })());
    }
    check.finish()
}

fn nondegenerate_optimum(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut check = Check::new("nondegenerate lossless optimum", 1e-10);
    for _ in 0..OPTIMIZER_CASES / 4 {
        let (va, vb) = (rng.random_range(0.05..30.0), rng.random_range(0.05..30.0));
        for port in [Port::One, Port::Two, Port::Sum] {
            check.record((|| {
                let r = minimize_uncertainty(&NliConfig::nondegenerate(port, va, vb)?, Objective::Bare)?;
                Ok(strict_rel(
                    nondegenerate::optimal_phase_uncertainty_lossless(va, vb)?,
                    r.objective,
                ))
            })());
        }
    }
    check.finish()
}

fn cramer_rao() -> CheckResult {
    let mut check = Check::new("balanced optimum saturates Cramer-Rao", 1e-12);
    for v in [0.5, 1.0, 5.0, 25.0] {
        check.record((|| {
            let dphi = degenerate::phase_uncertainty(&NliConfig::degenerate(v, v)?)?;
            Ok((dphi * quantum_fisher_information(v)? - 1.0).abs())
        })());
    }
    check.finish()
}

fn symmetry(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut check = Check::new("lossless optima symmetric in the gains", 0.0);
    for _ in 0..OPTIMIZER_CASES {
        let (va, vb) = (rng.random_range(0.05..30.0), rng.random_range(0.05..30.0));
        check.record((|| {
            let pairs = [
                (
                    degenerate::optimal_phase_lossless(va, vb)?,
                    degenerate::optimal_phase_lossless(vb, va)?,
                ),
                (
                    degenerate::optimal_photon_number_lossless(va, vb)?,
                    degenerate::optimal_photon_number_lossless(vb, va)?,
                ),
                (
                    degenerate::optimal_phase_uncertainty_lossless(va, vb)?,
                    degenerate::optimal_phase_uncertainty_lossless(vb, va)?,
                ),
            ];
            Ok(pairs.iter().map(|&(a, b)| strict_rel(a, b)).fold(0.0, f64::max))
        })());
    }
    check.finish()
}

fn dark_fringe_factors() -> CheckResult {
    let mut check = Check::new("dark-fringe detection factors", 1e-12);
    for v in [1.0, 5.0, 25.0] {
        for eta in [0.1, 0.5, 0.9] {
            // the inverse Fano factor at the balanced dark fringe is 1/2
            // (degenerate, sum) or 1 (single port)
            check.record((|| {
                let cfg = degenerate_cfg(v, v, 1.0, eta, 0.0)?;
                let general = degenerate::phase_uncertainty_detected(&cfg)? / degenerate::phase_uncertainty(&cfg)?;
                Ok(strict_rel(degenerate::dark_fringe_detection_factor(eta)?, general)
                    .max(strict_rel(general, 1.0 + (1.0 - eta) / eta * 0.5)))
            })());
            for (port, fano) in [(Port::One, 1.0), (Port::Two, 1.0), (Port::Sum, 0.5)] {
                check.record((|| {
                    let cfg = nondegenerate_cfg(port, v, v, (1.0, 1.0), (eta, eta), 0.0)?;
                    let general = nondegenerate::detection_factor(&cfg, port)?;
                    Ok(
                        strict_rel(nondegenerate::dark_fringe_detection_factor(eta, port)?, general)
                            .max(strict_rel(general, 1.0 + (1.0 - eta) / eta * fano)),
                    )
                })());
            }
        }
    }
    check.finish()
}

fn weak_cfg(rng: &mut ChaCha8Rng, flavor: Flavor) -> Result<NliConfig> {
    // combined squeezing stays below 0.8, where cutoff 60 certifies 1e-6
    let ra = rng.random_range(0.0..0.5);
    let rb = rng.random_range(0.0..(0.8 - ra));
    let loss = |t: f64| LossChannel::from_transmittance(t);
    let eff = |e: f64| DetectionEfficiency::new(e);
    let (t1, t2) = (rng.random_range(0.0..=1.0), rng.random_range(0.0..=1.0));
    let (e1, e2) = (rng.random_range(0.05..=1.0), rng.random_range(0.05..=1.0));
    let internal = if flavor.is_degenerate() {
        InternalLoss::Single(loss(t1)?)
    } else {
        InternalLoss::PerArm(loss(t1)?, loss(t2)?)
    };
    let detection = if flavor == Flavor::NondegenerateSum {
        Detection::PerPort(eff(e1)?, eff(e2)?)
    } else {
        Detection::Single(eff(e1)?)
    };
    NliConfig::new(
        flavor,
        GainSetting::from_squeeze(ra)?,
        GainSetting::from_squeeze(rb)?,
        internal,
        detection,
        rng.random_range(0.0..2.0 * PI),
    )
}

fn fock(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut check = Check::new("Fock simulation vs closed forms", 1e-6);
    let flavors = [
        Flavor::Degenerate,
        Flavor::NondegeneratePort1,
        Flavor::NondegeneratePort2,
        Flavor::NondegenerateSum,
    ];
    for i in 0..20 {
        let flavor = flavors[i % flavors.len()];
        check.record((|| {
            let cfg = weak_cfg(rng, flavor)?;
            let fock = fock_moments(&cfg, DEFAULT_CUTOFF)?;
            let closed = match flavor.port() {
                None => degenerate::detected_statistics(&cfg)?,
                Some(port) => nondegenerate::port_detected_statistics(&cfg, port)?,
            };
            Ok((fock.mean_n - closed.mean_n)
                .abs()
                .max((fock.variance - closed.variance).abs()))
        })());
    }
    check.finish()
}

fn monte_carlo(seed: u64) -> CheckResult {
    // 4000 repetitions: the sample variance fluctuates by sqrt(2/3999) = 2.2%
    let mut check = Check::new("Monte Carlo estimator variance", 0.1);
    let cases = [
        (
            NliConfig::degenerate(5.0, 5.0).map(|c| c.with_phi(PI / 10.0)),
            Sampler::GaussianApprox,
        ),
        (
            NliConfig::degenerate(3.0, 8.0)
                .and_then(|c| c.with_internal_transmittance(0.7))
                .and_then(|c| c.with_detection(0.6))
                .map(|c| c.with_phi(1.2)),
            Sampler::GaussianApprox,
        ),
    ];
    for (i, (cfg, sampler)) in cases.into_iter().enumerate() {
        check.record(cfg.and_then(|cfg| {
            let run = monte_carlo_uncertainty(&cfg, 1000, 4000, sampler, seed.wrapping_add(i as u64))?;
            Ok((run.se_sq / run.predicted_se_sq - 1.0).abs())
        }));
    }
    check.finish()
}

/// Runs the suite for `tier`. Random configurations are drawn from a
/// ChaCha8 generator seeded with `seed`.
pub fn run_validation(tier: Tier, seed: u64) -> ValidationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = vec![degenerate_wick(&mut rng), nondegenerate_wick(&mut rng)];
    checks.push(detection_deviation());
    checks.push(detection_identity(&mut rng));
    checks.extend(lossless_optimum(&mut rng));
    checks.extend(lossy_optimum(&mut rng));
    checks.push(inverse_fano_at_optimum(&mut rng));
    checks.push(nondegenerate_optimum(&mut rng));
    checks.push(cramer_rao());
    checks.push(symmetry(&mut rng));
    checks.push(dark_fringe_factors());
    if tier == Tier::Full {
        checks.push(fock(&mut rng));
        checks.push(monte_carlo(seed));
    }
    ValidationReport { tier, seed, checks }
}
