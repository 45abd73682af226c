//! Photon-number moments of Gaussian output modes by pair contraction.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::Result;
use crate::model::PhotonStatistics;

use super::bogoliubov::BogoliubovMap;

/// Means and covariance matrix of the photon numbers of all output modes.
#[derive(Debug, Clone, PartialEq)]
pub struct WickMoments {
    pub means: Vec<f64>,
    pub covariance: DMatrix<f64>,
}

impl WickMoments {
    pub fn statistics(&self, mode: usize) -> PhotonStatistics {
        PhotonStatistics::new(self.means[mode], self.covariance[(mode, mode)])
    }

    /// Statistics of the total photon number over all output modes.
    pub fn total_statistics(&self) -> PhotonStatistics {
        PhotonStatistics::new(self.means.iter().sum(), self.covariance.sum())
    }
}

/// Vacuum expectation values of the output photon numbers.
///
/// With `n_ij = <b_i^dagger b_j>`, `m_ij = <b_i b_j>` and
/// `p_ij = <b_i b_j^dagger>`, Wick's theorem gives
/// `Cov(n_i, n_j) = |m_ij|^2 + n_ij p_ij`.
pub fn wick_moments(map: &BogoliubovMap) -> Result<WickMoments> {
    map.check()?;
    let a = &map.a_coeffs;
    let al = &map.alpha_coeffs;
    let normal: DMatrix<Complex64> = al.conjugate() * al.transpose();
    let anomalous: DMatrix<Complex64> = a * al.transpose();
    let antinormal: DMatrix<Complex64> = a * a.adjoint();
    let rows = a.nrows();
    let means = (0..rows).map(|i| normal[(i, i)].re).collect();
    let covariance = DMatrix::from_fn(rows, rows, |i, j| {
        anomalous[(i, j)].norm_sqr() + (normal[(i, j)] * antinormal[(i, j)]).re
    });
    Ok(WickMoments { means, covariance })
}
