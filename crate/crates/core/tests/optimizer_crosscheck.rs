use std::f64::consts::PI;

use nli_core::constants::{with_constants, ClosedFormConstants};
use nli_core::optimizer::{minimize_fringe, minimize_uncertainty, objective_fringe, sweep, Objective, SweepAxis};
use nli_core::{degenerate, nondegenerate, NliConfig, Port};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn random_lossless(rng: &mut ChaCha8Rng) -> NliConfig {
    NliConfig::degenerate(rng.random_range(0.05..30.0), rng.random_range(0.05..30.0)).unwrap()
}

fn random_lossy(rng: &mut ChaCha8Rng) -> NliConfig {
    random_lossless(rng)
        .with_internal_transmittance(rng.random_range(0.5..0.999))
        .unwrap()
}

#[test]
fn lossless_optimum_matches_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let (mut worst_phi, mut worst_obj) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let cfg = random_lossless(&mut rng);
        let r = minimize_uncertainty(&cfg, Objective::Bare).unwrap();
        let phi = degenerate::optimal_phase_lossless(cfg.v_a(), cfg.v_b()).unwrap();
        let obj = degenerate::optimal_phase_uncertainty_lossless(cfg.v_a(), cfg.v_b()).unwrap();
        worst_phi = worst_phi.max((r.phi_star - phi).abs());
        worst_obj = worst_obj.max(rel(r.objective, obj));
    }
    assert!(worst_phi < 1e-8, "phase error {worst_phi:e}");
    assert!(worst_obj < 1e-10, "objective error {worst_obj:e}");
}

#[test]
fn lossy_optimum_photon_number_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let cfg = random_lossy(&mut rng);
        let r = minimize_uncertainty(&cfg, Objective::Bare).unwrap();
        let n = degenerate::optimal_photon_number_lossy(&cfg).unwrap();
        worst = worst.max(rel(r.n_at_star, n));
        let obj = degenerate::optimal_phase_uncertainty_lossy(&cfg).unwrap();
        assert!(rel(r.objective, obj) < 1e-10, "{cfg:?}: {} vs {obj}", r.objective);
    }
    assert!(worst < 1e-8, "photon number error {worst:e}");
}

#[test]
fn reference_lossy_point() {
    let cfg = NliConfig::degenerate(5.0, 2.0)
        .unwrap()
        .with_internal_transmittance(0.8)
        .unwrap();
    let r = minimize_uncertainty(&cfg, Objective::Bare).unwrap();
    assert!(rel(r.n_at_star, degenerate::optimal_photon_number_lossy(&cfg).unwrap()) < 1e-8);
    assert!(r.bracket_width <= 1e-10);
}

#[test]
fn unit_discriminant_coefficient_misses_the_optimum() {
    let cfg = NliConfig::degenerate(5.0, 2.0)
        .unwrap()
        .with_internal_transmittance(0.8)
        .unwrap();
    let numeric = minimize_uncertainty(&cfg, Objective::Bare).unwrap().n_at_star;
    let unit = ClosedFormConstants::perturbed("lossy_disc_cross", 0.25).unwrap();
    let printed = with_constants(unit, || degenerate::optimal_photon_number_lossy(&cfg).unwrap());
    assert!(rel(printed, numeric) > 1e-7);
}

#[test]
fn closed_forms_are_never_undercut() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for i in 0..100 {
        let cfg = if i % 2 == 0 {
            random_lossless(&mut rng)
        } else {
            random_lossy(&mut rng)
        };
        let closed = degenerate::optimal_phase_uncertainty_lossy(&cfg).unwrap();
        let f = objective_fringe(&cfg, Objective::Bare).unwrap();
        for k in 1..4096 {
            let phi = PI * k as f64 / 4096.0;
            assert!(f.uncertainty(phi).unwrap() >= closed * (1.0 - 1e-9));
        }
        let numeric = minimize_uncertainty(&cfg, Objective::Bare).unwrap().objective;
        assert!(numeric >= closed * (1.0 - 1e-9));
    }
}

#[test]
fn denser_grid_finds_the_same_minimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for i in 0..40 {
        let cfg = match i % 3 {
            0 => random_lossless(&mut rng),
            1 => random_lossy(&mut rng)
                .with_detection(rng.random_range(0.1..1.0))
                .unwrap(),
            _ => NliConfig::nondegenerate(Port::Sum, rng.random_range(0.05..30.0), rng.random_range(0.05..30.0))
                .unwrap()
                .with_arm_transmittances(rng.random_range(0.3..1.0), rng.random_range(0.3..1.0))
                .unwrap()
                .with_port_efficiencies(rng.random_range(0.2..1.0), rng.random_range(0.2..1.0))
                .unwrap(),
        };
        let f = objective_fringe(&cfg, Objective::Detected).unwrap();
        let coarse = minimize_fringe(&f, 0.0, PI, 2048).unwrap();
        let dense = minimize_fringe(&f, 0.0, PI, 16384).unwrap();
        assert!(rel(coarse.objective, dense.objective) < 1e-10, "{cfg:?}");
    }
}

#[test]
fn objective_is_even_in_phase() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..50 {
        let cfg = random_lossy(&mut rng);
        let f = objective_fringe(&cfg, Objective::Bare).unwrap();
        let pos = minimize_fringe(&f, 0.0, PI, 2048).unwrap();
        let neg = minimize_fringe(&f, -PI, 0.0, 2048).unwrap();
        assert!(rel(neg.objective, pos.objective) < 1e-10);
        assert!((neg.phi_star + pos.phi_star).abs() < 1e-7);
    }
}

#[test]
fn detection_loss_never_helps() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..100 {
        let cfg = random_lossy(&mut rng)
            .with_detection(rng.random_range(0.05..0.999))
            .unwrap();
        let bare = minimize_uncertainty(&cfg, Objective::Bare).unwrap().objective;
        let detected = minimize_uncertainty(&cfg, Objective::Detected).unwrap().objective;
        assert!(detected >= bare);
    }
}

#[test]
fn nondegenerate_lossless_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..50 {
        let (va, vb) = (rng.random_range(0.05..30.0), rng.random_range(0.05..30.0));
        let closed = nondegenerate::optimal_phase_uncertainty_lossless(va, vb).unwrap();
        for port in [Port::One, Port::Two, Port::Sum] {
            let cfg = NliConfig::nondegenerate(port, va, vb).unwrap();
            let r = minimize_uncertainty(&cfg, Objective::Bare).unwrap();
            assert!(
                rel(r.objective, closed) < 1e-10,
                "{port:?} {va} {vb}: {} vs {closed}",
                r.objective
            );
        }
    }
}

#[test]
fn internal_loss_sweep_is_monotone() {
    let cfg = NliConfig::degenerate(5.0, 5.0).unwrap();
    let grid: Vec<f64> = (0..=50).map(|i| 0.01 * i as f64).collect();
    let points = sweep(&cfg, SweepAxis::InternalLoss, &grid, Objective::Bare).unwrap();
    assert_eq!(points.iter().map(|p| p.value).collect::<Vec<_>>(), grid);
    assert!(points.windows(2).all(|w| w[1].result.objective > w[0].result.objective));
}

#[test]
fn stronger_source_wins_under_internal_loss() {
    let source = NliConfig::degenerate(25.0, 5.0).unwrap();
    let analyzer = NliConfig::degenerate(5.0, 25.0).unwrap();
    let grid: Vec<f64> = (1..=50).map(|i| 0.01 * i as f64).collect();
    let a = sweep(&source, SweepAxis::InternalLoss, &grid, Objective::Bare).unwrap();
    let b = sweep(&analyzer, SweepAxis::InternalLoss, &grid, Objective::Bare).unwrap();
    for (s, w) in a.iter().zip(&b) {
        assert!(s.result.objective < w.result.objective, "R_d = {}", s.value);
    }
}
