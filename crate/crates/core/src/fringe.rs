//! Interference fringe `N(phi) = floor + 2 K sin^2(phi/2)` with a
//! photon-number variance that is quadratic in the signal.
//!
//! Every photon-count observable of the interferometer has this shape:
//! `floor = A - K` is the signal at the dark fringe and `K` the contrast,
//! so `N = A - K cos phi`. Writing the signal through `sin^2(phi/2)` avoids
//! the cancellation in `A - K cos phi` near `phi = 0`, which matters for
//! the balanced interferometer where `A` and `K` are large and equal.

use serde::Serialize;

use crate::error::{NliError, Result};
use crate::model::PhotonStatistics;

/// Below this `|sin phi|` the fringe is treated as stationary.
pub const STATIONARY_SIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fringe {
    floor: f64,
    contrast: f64,
    /// `Var = c0 + c1 N + c2 N^2`.
    variance: [f64; 3],
}

impl Fringe {
    pub fn new(floor: f64, contrast: f64, variance: [f64; 3]) -> Self {
        Self {
            floor,
            contrast,
            variance,
        }
    }

    /// Signal at `phi = 0`.
    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn contrast(&self) -> f64 {
        self.contrast
    }

    /// Mean signal over a fringe period, `A = floor + K`.
    pub fn amplitude(&self) -> f64 {
        self.floor + self.contrast
    }

    pub fn variance_coefficients(&self) -> [f64; 3] {
        self.variance
    }

    pub fn signal(&self, phi: f64) -> f64 {
        let s = (0.5 * phi).sin();
        self.floor + 2.0 * self.contrast * s * s
    }

    pub fn slope(&self, phi: f64) -> f64 {
        self.contrast * phi.sin()
    }

    pub fn variance_at_signal(&self, n: f64) -> f64 {
        let [c0, c1, c2] = self.variance;
        c0 + n * (c1 + c2 * n)
    }

    pub fn variance(&self, phi: f64) -> f64 {
        self.variance_at_signal(self.signal(phi))
    }

    pub fn statistics(&self, phi: f64) -> PhotonStatistics {
        let n = self.signal(phi);
        PhotonStatistics::new(n, self.variance_at_signal(n))
    }

    /// Vacuum at the dark fringe: zero signal and zero variance at `phi = 0`.
    pub fn is_dark(&self) -> bool {
        self.floor == 0.0 && self.variance[0] == 0.0
    }

    /// `N / Var` with the dark-fringe limit `1 / c1` at `phi -> 0`.
    pub fn inverse_fano_limit(&self, phi: f64) -> f64 {
        let n = self.signal(phi);
        let var = self.variance_at_signal(n);
        if var > 0.0 {
            n / var
        } else if self.is_dark() && self.variance[1] > 0.0 {
            1.0 / self.variance[1]
        } else {
            0.0
        }
    }

    /// Phase uncertainty `Var / (dN/dphi)^2` from a single measurement.
    ///
    /// At the dark fringe of a vacuum-output fringe both numerator and
    /// denominator vanish; the limit `c1 / (2K)` is returned there.
    pub fn uncertainty(&self, phi: f64) -> Result<f64> {
        let s = phi.sin();
        if s.abs() < STATIONARY_SIN {
            if phi.cos() > 0.0 && self.is_dark() && self.contrast > 0.0 {
                return Ok(self.variance[1] / (2.0 * self.contrast));
            }
            return Err(NliError::DivergentSensitivity { phi });
        }
        let slope = self.contrast * s;
        if slope == 0.0 {
            return Err(NliError::DivergentSensitivity { phi });
        }
        Ok(self.variance(phi) / (slope * slope))
    }

    /// Derivative of [`Fringe::uncertainty`] with respect to `phi`.
    pub fn uncertainty_derivative(&self, phi: f64) -> f64 {
        let [_, c1, c2] = self.variance;
        let n = self.signal(phi);
        let (s, c) = phi.sin_cos();
        let dvar = c1 + 2.0 * c2 * n;
        let g = dvar * self.contrast * s * s - 2.0 * self.variance_at_signal(n) * c;
        g / (self.contrast * self.contrast * s * s * s)
    }

    /// Fringe seen behind a detector of efficiency `eta`: the signal scales
    /// by `eta` and the variance becomes `eta^2 Var + eta (1 - eta) N`.
    pub fn attenuate(&self, eta: f64) -> Fringe {
        let [c0, c1, c2] = self.variance;
        Fringe {
            floor: eta * self.floor,
            contrast: eta * self.contrast,
            variance: [eta * eta * c0, eta * c1 + (1.0 - eta), c2],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn balanced(v: f64) -> Fringe {
        let k = 2.0 * (1.0 + v) * v;
        Fringe::new(0.0, k, [0.0, 2.0, 2.0])
    }

    #[test]
    fn signal_matches_cosine_form() {
        let f = Fringe::new(0.3, 2.0, [0.1, 1.0, 1.0]);
        for &phi in &[0.0, 0.4, 1.7, 3.0] {
            let direct = f.amplitude() - f.contrast() * f64::cos(phi);
            assert_relative_eq!(f.signal(phi), direct, max_relative = 1e-14);
        }
    }

    #[test]
    fn dark_fringe_limit() {
        let f = balanced(5.0);
        assert_relative_eq!(f.uncertainty(0.0).unwrap(), 1.0 / 60.0, max_relative = 1e-15);
        let near = f.uncertainty(1e-5).unwrap();
        assert_relative_eq!(near, 1.0 / 60.0, max_relative = 1e-8);
        assert!(matches!(
            f.uncertainty(std::f64::consts::PI),
            Err(NliError::DivergentSensitivity { .. })
        ));
    }

    #[test]
    fn stationary_noisy_fringe_diverges() {
        let f = Fringe::new(0.5, 1.0, [0.5, 2.0, 2.0]);
        assert!(f.uncertainty(0.0).is_err());
        assert!(Fringe::new(1.0, 0.0, [0.0, 2.0, 2.0]).uncertainty(1.0).is_err());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let f = Fringe::new(0.7, 3.0, [0.2, 2.0, 2.0]);
        for &phi in &[0.3, 1.1, 2.5, -0.8] {
            let h = 1e-6;
            let fd = (f.uncertainty(phi + h).unwrap() - f.uncertainty(phi - h).unwrap()) / (2.0 * h);
            assert_relative_eq!(f.uncertainty_derivative(phi), fd, max_relative = 1e-6);
        }
    }

    #[test]
    fn attenuation_matches_thinning_relations() {
        let f = Fringe::new(0.7, 3.0, [0.2, 2.0, 2.0]);
        let eta = 0.4;
        let g = f.attenuate(eta);
        for &phi in &[0.2, 1.0, 2.9] {
            let n = f.signal(phi);
            assert_relative_eq!(g.signal(phi), eta * n, max_relative = 1e-14);
            let expect = eta * eta * f.variance(phi) + eta * (1.0 - eta) * n;
            assert_relative_eq!(g.variance(phi), expect, max_relative = 1e-13);
        }
    }
}
