//! Brute-force simulation of the interferometer in a truncated number basis.
//!
//! Every optical element is applied as the matrix exponential of its
//! quadratic generator. Squeezers are exponentiated on a padded basis and
//! restricted to `0..=cutoff` photons per mode; beam splitters conserve the
//! photon number and are exponentiated exactly on each number sector. Loss
//! and detector ancillas are traced out after the element that couples
//! them in. The probability that leaks past the cutoff is reported as the
//! trace deficit.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{NliError, Result};
use crate::model::{GainSetting, NliConfig, PhotonStatistics, Port};

pub const DEFAULT_CUTOFF: usize = 60;

/// Largest tolerated probability outside the truncated basis.
pub const DEFICIT_TOLERANCE: f64 = 1e-8;

/// Photon-count distribution of the detected observable.
#[derive(Debug, Clone, PartialEq)]
pub struct CountDistribution {
    probabilities: Vec<f64>,
    deficit: f64,
    cutoff: usize,
}

impl CountDistribution {
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// `1 - sum(P)`: probability lost to the truncation.
    pub fn deficit(&self) -> f64 {
        self.deficit
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn mean(&self) -> f64 {
        self.probabilities.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.probabilities
            .iter()
            .enumerate()
            .map(|(n, p)| {
                let d = n as f64 - mean;
                d * d * p
            })
            .sum()
    }

    pub fn statistics(&self) -> PhotonStatistics {
        PhotonStatistics::new(self.mean(), self.variance())
    }

    fn checked(self) -> Result<Self> {
        if self.deficit > DEFICIT_TOLERANCE {
            Err(NliError::Truncation {
                deficit: self.deficit,
                cutoff: self.cutoff,
            })
        } else {
            Ok(self)
        }
    }
}

/// Draws independent photon counts from a fixed distribution.
#[derive(Debug, Clone)]
pub struct CountSampler {
    index: WeightedIndex<f64>,
}

impl CountSampler {
    pub fn new(dist: &CountDistribution) -> Self {
        let index = WeightedIndex::new(dist.probabilities.iter().copied())
            .expect("a checked distribution has positive total weight");
        Self { index }
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        self.index.sample(rng) as u64
    }
}

/// Output distribution of the observable selected by `cfg.flavor()`,
/// including detection loss.
pub fn fock_distribution(cfg: &NliConfig, cutoff: usize) -> Result<CountDistribution> {
    if cutoff == 0 {
        return Err(NliError::Domain {
            name: "cutoff",
            value: 0.0,
            expected: "cutoff >= 1",
        });
    }
    let dist = match cfg.flavor().port() {
        None => degenerate_distribution(cfg, cutoff),
        Some(port) => nondegenerate_distribution(cfg, cutoff, port),
    };
    dist.checked()
}

/// Mean and variance of the detected photon number on the truncated basis.
pub fn fock_moments(cfg: &NliConfig, cutoff: usize) -> Result<PhotonStatistics> {
    Ok(fock_distribution(cfg, cutoff)?.statistics())
}

pub fn sample_photon_counts(cfg: &NliConfig, cutoff: usize, shots: usize, rng_seed: u64) -> Result<Vec<u64>> {
    let sampler = CountSampler::new(&fock_distribution(cfg, cutoff)?);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    Ok((0..shots).map(|_| sampler.sample(&mut rng)).collect())
}

fn padding(cutoff: usize) -> usize {
    cutoff
}

fn restricted_exp(generator: DMatrix<f64>, dim: usize) -> DMatrix<f64> {
    generator.exp().view((0, 0), (dim, dim)).into_owned()
}

// Squeezer phase: S(r e^{i theta}) = e^{i theta n / 2} S(r) e^{-i theta n / 2}
// with theta = phase_u + phase_v + pi, followed by the rotation e^{i phase_u n}
// acting first, so that W^dagger a W = u a + v a^dagger.
fn squeezer_phases(gain: &GainSetting) -> (f64, f64) {
    (gain.phase_u() + gain.phase_v() + std::f64::consts::PI, gain.phase_u())
}

/// Single-mode squeezer on `0..=cutoff` photons.
fn single_mode_crystal(gain: &GainSetting, cutoff: usize) -> DMatrix<Complex64> {
    let dim = cutoff + 1;
    let big = dim + padding(cutoff);
    let r = gain.squeeze_r();
    let mut g = DMatrix::<f64>::zeros(big, big);
    for n in 0..big.saturating_sub(2) {
        let amp = 0.5 * r * (((n + 1) * (n + 2)) as f64).sqrt();
        g[(n + 2, n)] = -amp;
        g[(n, n + 2)] = amp;
    }
    let s = restricted_exp(g, dim);
    let (theta, theta_u) = squeezer_phases(gain);
    DMatrix::from_fn(dim, dim, |n, m| {
        let phase = 0.5 * theta * (n as f64 - m as f64) + theta_u * m as f64;
        Complex64::from_polar(s[(n, m)], phase)
    })
}

/// Two-mode squeezer on the sector `n_1 - n_2 = +-d`, basis index
/// `j = min(n_1, n_2)`, both modes limited to `0..=cutoff` photons.
fn two_mode_crystal_sector(gain: &GainSetting, d: usize, cutoff: usize) -> DMatrix<Complex64> {
    let dim = cutoff + 1 - d;
    let big = dim + padding(cutoff);
    let r = gain.squeeze_r();
    let mut g = DMatrix::<f64>::zeros(big, big);
    for j in 0..big - 1 {
        let amp = r * (((j + d + 1) * (j + 1)) as f64).sqrt();
        g[(j + 1, j)] = -amp;
        g[(j, j + 1)] = amp;
    }
    let s = restricted_exp(g, dim);
    let (theta, theta_u) = squeezer_phases(gain);
    DMatrix::from_fn(dim, dim, |n, m| {
        let phase = theta * (n as f64 - m as f64) + theta_u * (2 * m + d) as f64;
        Complex64::from_polar(s[(n, m)], phase)
    })
}

/// Amplitudes `<n - j, j| U |n, 0>` of a beam splitter with field
/// transmittance `t` into an empty ancilla, for `n = 0..=cutoff`.
/// The Heisenberg map is `a -> t a + r l` with `r = sqrt(1 - |t|^2)`.
fn beam_splitter_amplitudes(t: Complex64, cutoff: usize) -> Vec<Vec<Complex64>> {
    let theta = t.norm().min(1.0).acos();
    let tau = t.arg();
    (0..=cutoff)
        .map(|n| {
            if theta == 0.0 {
                let mut col = vec![Complex64::new(0.0, 0.0); n + 1];
                col[0] = Complex64::from_polar(1.0, tau * n as f64);
                return col;
            }
            // generator theta (a^dagger l - l^dagger a) on |n - j, j>
            let mut g = DMatrix::<f64>::zeros(n + 1, n + 1);
            for j in 0..n {
                let amp = theta * (((n - j) * (j + 1)) as f64).sqrt();
                g[(j + 1, j)] = -amp;
                g[(j, j + 1)] = amp;
            }
            let o = g.exp();
            (0..=n)
                .map(|j| Complex64::from_polar(1.0, tau * (n - j) as f64) * o[(j, 0)])
                .collect()
        })
        .collect()
}

/// `matrix[m][n]`: probability that `m` of `n` photons pass a detector of
/// efficiency `eta`.
fn thinning_matrix(eta: f64, cutoff: usize) -> DMatrix<f64> {
    let amps = beam_splitter_amplitudes(Complex64::new(eta.sqrt(), 0.0), cutoff);
    let dim = cutoff + 1;
    DMatrix::from_fn(dim, dim, |m, n| if m <= n { amps[n][n - m].norm_sqr() } else { 0.0 })
}

fn distribution(probabilities: Vec<f64>, cutoff: usize, total: f64) -> CountDistribution {
    CountDistribution {
        probabilities,
        deficit: 1.0 - total,
        cutoff,
    }
}

fn degenerate_distribution(cfg: &NliConfig, cutoff: usize) -> CountDistribution {
    let dim = cutoff + 1;
    let wa = single_mode_crystal(cfg.gain_a(), cutoff);
    let wb = single_mode_crystal(cfg.gain_b(), cutoff);
    let (arm, _) = cfg.realized_arms();
    let bs = beam_splitter_amplitudes(arm.t(), cutoff);
    let mut before_detector = DVector::<f64>::zeros(dim);
    // k photons lost into the ancilla
    for k in 0..=cutoff {
        let len = dim - k;
        let x = DVector::from_fn(len, |n, _| wa[(n + k, 0)] * bs[n + k][k]);
        if x.norm_squared() == 0.0 {
            continue;
        }
        let y = wb.columns(0, len) * x;
        for n in 0..dim {
            before_detector[n] += y[n].norm_sqr();
        }
    }
    let detected = thinning_matrix(cfg.eta(), cutoff) * &before_detector;
    let total = detected.sum();
    distribution(detected.iter().copied().collect(), cutoff, total)
}

fn nondegenerate_distribution(cfg: &NliConfig, cutoff: usize, port: Port) -> CountDistribution {
    let dim = cutoff + 1;
    let pairs = two_mode_crystal_sector(cfg.gain_a(), 0, cutoff);
    let sectors: Vec<DMatrix<Complex64>> = (0..=cutoff)
        .map(|d| two_mode_crystal_sector(cfg.gain_b(), d, cutoff))
        .collect();
    let (arm1, arm2) = cfg.realized_arms();
    let bs1 = beam_splitter_amplitudes(arm1.t(), cutoff);
    let bs2 = beam_splitter_amplitudes(arm2.t(), cutoff);

    let mut joint = DMatrix::<f64>::zeros(dim, dim);
    for k1 in 0..=cutoff {
        for k2 in 0..=cutoff {
            let kmax = k1.max(k2);
            let len = dim - kmax;
            // pair number m = j + kmax leaves (m - k1, m - k2) photons in the arms
            let x = DVector::from_fn(len, |j, _| {
                let m = j + kmax;
                pairs[(m, 0)] * bs1[m][k1] * bs2[m][k2]
            });
            if x.norm_squared() == 0.0 {
                continue;
            }
            let d = k1.abs_diff(k2);
            let w = &sectors[d];
            let y = w.columns(0, len) * x;
            for j in 0..y.len() {
                let (n1, n2) = if k2 >= k1 { (j + d, j) } else { (j, j + d) };
                joint[(n1, n2)] += y[j].norm_sqr();
            }
        }
    }

    let (eta1, eta2) = cfg.port_efficiencies();
    match port {
        Port::One => {
            let marginal = DVector::from_fn(dim, |n1, _| joint.row(n1).sum());
            let detected = thinning_matrix(eta1, cutoff) * marginal;
            let total = detected.sum();
            distribution(detected.iter().copied().collect(), cutoff, total)
        }
        Port::Two => {
            let marginal = DVector::from_fn(dim, |n2, _| joint.column(n2).sum());
            let detected = thinning_matrix(eta2, cutoff) * marginal;
            let total = detected.sum();
            distribution(detected.iter().copied().collect(), cutoff, total)
        }
        Port::Sum => {
            let detected = thinning_matrix(eta1, cutoff) * &joint * thinning_matrix(eta2, cutoff).transpose();
            let mut sum = vec![0.0; 2 * cutoff + 1];
            for m1 in 0..dim {
                for m2 in 0..dim {
                    sum[m1 + m2] += detected[(m1, m2)];
                }
            }
            let total = detected.sum();
            distribution(sum, cutoff, total)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binomial(n: usize, k: usize) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }

    #[test]
    fn thinning_is_binomial() {
        let eta: f64 = 0.37;
        let m = thinning_matrix(eta, 20);
        for n in 0..=20 {
            for k in 0..=n {
                let expect = binomial(n, k) * eta.powi(k as i32) * (1.0 - eta).powi((n - k) as i32);
                assert!((m[(k, n)] - expect).abs() < 1e-13, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn beam_splitter_amplitudes_are_normalized() {
        let amps = beam_splitter_amplitudes(Complex64::from_polar(0.6, 0.9), 30);
        for col in &amps {
            let norm: f64 = col.iter().map(|z| z.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn squeezed_vacuum_tail_matches_closed_form() {
        // P(2k) = (2k)! / (2^k k!)^2 tanh^{2k} r / cosh r
        let g = GainSetting::from_squeeze(0.5).unwrap();
        let w = single_mode_crystal(&g, 40);
        let (t, c) = (0.5f64.tanh(), 0.5f64.cosh());
        let mut coeff = 1.0;
        for k in 0..10 {
            let p = w[(2 * k, 0)].norm_sqr();
            assert!((p - coeff * t.powi(2 * k as i32) / c).abs() < 1e-13, "k={k}");
            assert!(w[(2 * k + 1, 0)].norm() < 1e-14);
            coeff *= ((2 * k + 1) * (2 * k + 2)) as f64 / (4.0 * ((k + 1) * (k + 1)) as f64);
        }
    }

    #[test]
    fn vacuum_gives_no_photons() {
        let cfg = NliConfig::degenerate(0.0, 0.0).unwrap();
        let s = fock_moments(&cfg, 10).unwrap();
        assert_eq!((s.mean_n, s.variance), (0.0, 0.0));
        assert!(sample_photon_counts(&cfg, 10, 100, 1).unwrap().iter().all(|&n| n == 0));
    }

    #[test]
    fn zero_cutoff_is_rejected() {
        let cfg = NliConfig::degenerate(0.5, 0.5).unwrap();
        assert!(matches!(fock_moments(&cfg, 0), Err(NliError::Domain { .. })));
    }
}
