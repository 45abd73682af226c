//! Linear Bogoliubov maps `b_i = sum_k A_ik a_k + alpha_ik a_k^dagger`
//! composed element by element from the optical circuit.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{NliError, Result};
use crate::model::{GainSetting, LossChannel, NliConfig};

/// Tolerance on the commutation invariants, relative to the squared
/// magnitude of the largest coefficient.
pub const COMMUTATION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeLabel {
    Signal,
    Idler,
    LossAncilla(u8),
    DetectorAncilla(u8),
}

/// Heisenberg-picture map from the vacuum input modes to the output modes.
#[derive(Debug, Clone, PartialEq)]
pub struct BogoliubovMap {
    pub a_coeffs: DMatrix<Complex64>,
    pub alpha_coeffs: DMatrix<Complex64>,
    /// Label of every input mode (columns).
    pub inputs: Vec<ModeLabel>,
    /// Label of every output mode (rows).
    pub outputs: Vec<ModeLabel>,
}

impl BogoliubovMap {
    pub fn identity(modes: Vec<ModeLabel>) -> Self {
        let n = modes.len();
        Self {
            a_coeffs: DMatrix::identity(n, n),
            alpha_coeffs: DMatrix::zeros(n, n),
            inputs: modes.clone(),
            outputs: modes,
        }
    }

    /// Applies `element` (a square map on the output modes) after `self`.
    pub fn then(&self, element: &BogoliubovMap) -> BogoliubovMap {
        let a = &element.a_coeffs * &self.a_coeffs + &element.alpha_coeffs * self.alpha_coeffs.conjugate();
        let alpha = &element.a_coeffs * &self.alpha_coeffs + &element.alpha_coeffs * self.a_coeffs.conjugate();
        BogoliubovMap {
            a_coeffs: a,
            alpha_coeffs: alpha,
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
        }
    }

    /// Keeps only the listed output rows.
    pub fn select_outputs(&self, rows: &[usize]) -> BogoliubovMap {
        BogoliubovMap {
            a_coeffs: self.a_coeffs.select_rows(rows),
            alpha_coeffs: self.alpha_coeffs.select_rows(rows),
            inputs: self.inputs.clone(),
            outputs: rows.iter().map(|&i| self.outputs[i]).collect(),
        }
    }

    /// Largest violation of `[b_i, b_j^dagger] = delta_ij` and `[b_i, b_j] = 0`,
    /// relative to the largest squared coefficient.
    pub fn commutation_deviation(&self) -> f64 {
        let a = &self.a_coeffs;
        let al = &self.alpha_coeffs;
        let c1 = a * a.adjoint() - al * al.adjoint();
        let c2 = a * al.transpose() - al * a.transpose();
        let n = c1.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let delta = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((c1[(i, j)] - delta).norm()).max(c2[(i, j)].norm());
            }
        }
        let scale = a.iter().chain(al.iter()).map(|z| z.norm_sqr()).fold(1.0, f64::max);
        worst / scale
    }

    pub fn check(&self) -> Result<()> {
        let deviation = self.commutation_deviation();
        if deviation <= COMMUTATION_TOLERANCE {
            Ok(())
        } else {
            Err(NliError::Integrity { deviation })
        }
    }

    fn blank(labels: &[ModeLabel]) -> BogoliubovMap {
        BogoliubovMap::identity(labels.to_vec())
    }

    /// Single-mode squeezer on mode `m`: `a_m -> u a_m + v a_m^dagger`.
    pub fn squeezer(labels: &[ModeLabel], m: usize, gain: &GainSetting) -> BogoliubovMap {
        let mut map = Self::blank(labels);
        map.a_coeffs[(m, m)] = gain.u_coeff();
        map.alpha_coeffs[(m, m)] = gain.v_coeff();
        map
    }

    /// Two-mode squeezer: `a_m -> u a_m + v a_n^dagger`, `a_n -> u a_n + v a_m^dagger`.
    pub fn two_mode_squeezer(labels: &[ModeLabel], m: usize, n: usize, gain: &GainSetting) -> BogoliubovMap {
        let mut map = Self::blank(labels);
        map.a_coeffs[(m, m)] = gain.u_coeff();
        map.a_coeffs[(n, n)] = gain.u_coeff();
        map.alpha_coeffs[(m, n)] = gain.v_coeff();
        map.alpha_coeffs[(n, m)] = gain.v_coeff();
        map
    }

    /// Beam splitter coupling mode `m` to the vacuum ancilla `l`:
    /// `a_m -> t a_m + r l`, `l -> t* l - r* a_m`.
    pub fn beam_splitter(labels: &[ModeLabel], m: usize, l: usize, t: Complex64, r: Complex64) -> BogoliubovMap {
        let mut map = Self::blank(labels);
        map.a_coeffs[(m, m)] = t;
        map.a_coeffs[(m, l)] = r;
        map.a_coeffs[(l, l)] = t.conj();
        map.a_coeffs[(l, m)] = -r.conj();
        map
    }

    fn loss(labels: &[ModeLabel], m: usize, l: usize, channel: &LossChannel) -> BogoliubovMap {
        Self::beam_splitter(labels, m, l, channel.t(), channel.r())
    }

    fn detector(labels: &[ModeLabel], m: usize, d: usize, eta: f64) -> BogoliubovMap {
        let t = Complex64::new(eta.sqrt(), 0.0);
        let r = Complex64::new((1.0 - eta).sqrt(), 0.0);
        Self::beam_splitter(labels, m, d, t, r)
    }
}

/// End-to-end map of the interferometer with all inputs in vacuum.
///
/// Degenerate circuits have inputs `[signal, loss ancilla, detector
/// ancilla]` and one output row; nondegenerate circuits have inputs
/// `[signal, idler, loss 1, loss 2, detector 1, detector 2]` and two
/// output rows (port 1, port 2). The interference phase of `cfg` is
/// realized on the loss channels.
pub fn compose_circuit(cfg: &NliConfig) -> Result<BogoliubovMap> {
    use ModeLabel::*;
    let (arm1, arm2) = cfg.realized_arms();
    let (eta1, eta2) = cfg.port_efficiencies();
    let map = if cfg.flavor().is_degenerate() {
        let labels = [Signal, LossAncilla(1), DetectorAncilla(1)];
        BogoliubovMap::identity(labels.to_vec())
            .then(&BogoliubovMap::squeezer(&labels, 0, cfg.gain_a()))
            .then(&BogoliubovMap::loss(&labels, 0, 1, &arm1))
            .then(&BogoliubovMap::squeezer(&labels, 0, cfg.gain_b()))
            .then(&BogoliubovMap::detector(&labels, 0, 2, eta1))
            .select_outputs(&[0])
    } else {
        let labels = [
            Signal,
            Idler,
            LossAncilla(1),
            LossAncilla(2),
            DetectorAncilla(1),
            DetectorAncilla(2),
        ];
        BogoliubovMap::identity(labels.to_vec())
            .then(&BogoliubovMap::two_mode_squeezer(&labels, 0, 1, cfg.gain_a()))
            .then(&BogoliubovMap::loss(&labels, 0, 2, &arm1))
            .then(&BogoliubovMap::loss(&labels, 1, 3, &arm2))
            .then(&BogoliubovMap::two_mode_squeezer(&labels, 0, 1, cfg.gain_b()))
            .then(&BogoliubovMap::detector(&labels, 0, 4, eta1))
            .then(&BogoliubovMap::detector(&labels, 1, 5, eta2))
            .select_outputs(&[0, 1])
    };
    map.check()?;
    Ok(map)
}
