use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{
    bin_to_index, build_correlation_matrix, dirichlet_kernel, KernelConfig, PathSpec,
    ScattererScene,
};
use crate::numerics::{cholesky, idft_columns};
use crate::{ComplexMatrix, Error, Result};

/// How path gains are correlated across the receive antennas.
#[derive(Debug, Clone)]
pub enum SpatialModel {
    /// Independent unit-variance gains on every antenna.
    Uncorrelated { antennas: usize },
    /// Correlation derived from the scene geometry; a path uses the scatterer
    /// it references, or the scatterer with the same index.
    Scene(ScattererScene),
    /// Explicit per-path correlation matrices.
    Matrices(Vec<ComplexMatrix>),
}

impl SpatialModel {
    pub fn antenna_count(&self) -> usize {
        match self {
            SpatialModel::Uncorrelated { antennas } => *antennas,
            SpatialModel::Scene(s) => s.antenna_count(),
            SpatialModel::Matrices(r) => r.first().map_or(0, |m| m.nrows()),
        }
    }

    /// Correlation matrix of each path.
    pub fn correlation_matrices(&self, paths: &[PathSpec]) -> Result<Vec<ComplexMatrix>> {
        let p = self.antenna_count();
        match self {
            SpatialModel::Uncorrelated { .. } => {
                Ok(vec![ComplexMatrix::identity(p, p); paths.len()])
            }
            SpatialModel::Scene(scene) => paths
                .iter()
                .enumerate()
                .map(|(k, path)| build_correlation_matrix(scene, path.scatterer.unwrap_or(k)))
                .collect(),
            SpatialModel::Matrices(r) => {
                if r.len() != paths.len() {
                    return Err(Error::input(format!(
                        "{} correlation matrices for {} paths",
                        r.len(),
                        paths.len()
                    )));
                }
                if r.iter().any(|m| m.nrows() != p || m.ncols() != p) {
                    return Err(Error::input("correlation matrices must all be P x P"));
                }
                Ok(r.clone())
            }
        }
    }
}

/// One draw of `CN(0, 1)`: independent `N(0, 1/2)` real and imaginary parts.
pub fn standard_complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * FRAC_1_SQRT_2
}

/// Precomputed fading statistics: expected amplitudes and Cholesky factors of
/// the per-path correlation matrices.
#[derive(Debug, Clone)]
pub struct PathFading {
    paths: Vec<PathSpec>,
    factors: Vec<Option<ComplexMatrix>>,
    antennas: usize,
}

impl PathFading {
    pub fn new(paths: &[PathSpec], spatial: &SpatialModel) -> Result<Self> {
        let antennas = spatial.antenna_count();
        if antennas == 0 {
            return Err(Error::input("at least one antenna is required"));
        }
        if paths.is_empty() {
            return Err(Error::input("at least one path is required"));
        }
        let factors = match spatial {
            SpatialModel::Uncorrelated { .. } => vec![None; paths.len()],
            _ => spatial
                .correlation_matrices(paths)?
                .iter()
                .map(|r| cholesky(r).map(Some))
                .collect::<Result<_>>()?,
        };
        Ok(PathFading {
            paths: paths.to_vec(),
            factors,
            antennas,
        })
    }

    pub fn paths(&self) -> &[PathSpec] {
        &self.paths
    }

    pub fn antenna_count(&self) -> usize {
        self.antennas
    }

    /// Unit-variance fading `Z` (K x P): row `k` is `L_k r` with `r` white.
    pub fn draw_fading<R: Rng + ?Sized>(&self, rng: &mut R) -> ComplexMatrix {
        let k = self.paths.len();
        let mut z = ComplexMatrix::zeros(k, self.antennas);
        for (i, factor) in self.factors.iter().enumerate() {
            let r = nalgebra::DVector::from_fn(self.antennas, |_, _| standard_complex_normal(rng));
            let row = match factor {
                Some(l) => l * r,
                None => r,
            };
            for p in 0..self.antennas {
                z[(i, p)] = row[p];
            }
        }
        z
    }

    /// Path gains `c_kp = a_k Z_kp`.
    pub fn draw_gains<R: Rng + ?Sized>(&self, rng: &mut R) -> ComplexMatrix {
        let mut z = self.draw_fading(rng);
        for (i, path) in self.paths.iter().enumerate() {
            z.row_mut(i).scale_mut(path.expected_amplitude);
        }
        z
    }

    /// Full realization: gains, then per-antenna ToA jitter uniform in
    /// `[-epsilon, epsilon]`.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        kernel: &KernelConfig,
        epsilon: f64,
        rng: &mut R,
    ) -> Result<ChannelRealization> {
        kernel.validate()?;
        validate_paths(&self.paths, kernel)?;
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::input("epsilon must be finite and non-negative"));
        }
        let gains = self.draw_gains(rng);
        let k = self.paths.len();
        let mut toas = DMatrix::zeros(k, self.antennas);
        for (i, path) in self.paths.iter().enumerate() {
            for p in 0..self.antennas {
                let jitter = if epsilon > 0.0 {
                    rng.random_range(-epsilon..=epsilon)
                } else {
                    0.0
                };
                toas[(i, p)] = path.toa + jitter;
            }
        }
        Ok(ChannelRealization {
            kernel: *kernel,
            toas,
            gains,
            epsilon,
        })
    }
}

fn validate_paths(paths: &[PathSpec], kernel: &KernelConfig) -> Result<()> {
    for p in paths {
        if !(p.toa.is_finite() && (0.0..kernel.tau).contains(&p.toa)) {
            return Err(Error::input(format!("path ToA {} outside [0, tau)", p.toa)));
        }
        if !(p.expected_amplitude.is_finite() && p.expected_amplitude >= 0.0) {
            return Err(Error::input("path amplitudes must be finite and non-negative"));
        }
    }
    for (i, a) in paths.iter().enumerate() {
        for b in &paths[i + 1..] {
            let d = (a.toa - b.toa).rem_euclid(kernel.tau);
            if d.min(kernel.tau - d) < 1e-12 * kernel.tau {
                return Err(Error::input("path ToAs must be distinct"));
            }
        }
    }
    Ok(())
}

/// Ground truth of one channel draw.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub kernel: KernelConfig,
    /// `t_kp` in seconds, K x P (not wrapped into `[0, tau)`).
    pub toas: DMatrix<f64>,
    /// `c_kp`, K x P.
    pub gains: ComplexMatrix,
    pub epsilon: f64,
}

impl ChannelRealization {
    pub fn path_count(&self) -> usize {
        self.gains.nrows()
    }

    pub fn antenna_count(&self) -> usize {
        self.gains.ncols()
    }

    /// `sum_k c_kp e^{-j 2 pi m t_kp / tau}` for `|m| <= M`, zero outside the
    /// band.
    pub fn frequency_response(&self, p: usize, m: i64) -> Complex64 {
        if m.unsigned_abs() as usize > self.kernel.m {
            return Complex64::new(0.0, 0.0);
        }
        (0..self.path_count())
            .map(|k| {
                let arg = -2.0 * PI * m as f64 * self.toas[(k, p)] / self.kernel.tau;
                self.gains[(k, p)] * Complex64::from_polar(1.0, arg)
            })
            .sum()
    }

    /// Noiseless time samples `y_p[n] = sum_k c_kp phi(nT - t_kp)`, N x P.
    pub fn noiseless_samples(&self) -> ComplexMatrix {
        let step = self.kernel.step();
        ComplexMatrix::from_fn(self.kernel.n, self.antenna_count(), |n, p| {
            (0..self.path_count())
                .map(|k| {
                    self.gains[(k, p)]
                        * dirichlet_kernel(n as f64 * step - self.toas[(k, p)], &self.kernel)
                })
                .sum()
        })
    }
}

/// Draws a channel for `paths` over the antennas of `spatial`.
pub fn sample_channel<R: Rng + ?Sized>(
    kernel: &KernelConfig,
    paths: &[PathSpec],
    spatial: &SpatialModel,
    epsilon: f64,
    rng: &mut R,
) -> Result<ChannelRealization> {
    kernel.validate()?;
    validate_paths(paths, kernel)?;
    PathFading::new(paths, spatial)?.sample(kernel, epsilon, rng)
}

fn add_noise<R: Rng + ?Sized>(y: &mut ComplexMatrix, sigma2: f64, rng: &mut R) -> Result<()> {
    if !(sigma2.is_finite() && sigma2 >= 0.0) {
        return Err(Error::input("noise variance must be finite and non-negative"));
    }
    if sigma2 > 0.0 {
        let sd = sigma2.sqrt();
        for v in y.iter_mut() {
            *v += standard_complex_normal(rng) * sd;
        }
    }
    Ok(())
}

/// Noisy time samples (N x P) with circularly-symmetric white noise of
/// variance `sigma2` per sample.
pub fn sample_received<R: Rng + ?Sized>(
    real: &ChannelRealization,
    sigma2: f64,
    rng: &mut R,
) -> Result<ComplexMatrix> {
    let mut y = real.noiseless_samples();
    add_noise(&mut y, sigma2, rng)?;
    Ok(y)
}

/// One OFDM symbol through the channel: `symbols` are indexed by standard DFT
/// bin (`0..N`); bins outside the band `|m| <= M` are suppressed. The result
/// (N x P) equals [`sample_received`] when every symbol is one.
pub fn transmit<R: Rng + ?Sized>(
    real: &ChannelRealization,
    symbols: &[Complex64],
    sigma2: f64,
    rng: &mut R,
) -> Result<ComplexMatrix> {
    let n = real.kernel.n;
    if symbols.len() != n {
        return Err(Error::input(format!(
            "expected {n} symbols, got {}",
            symbols.len()
        )));
    }
    let scale = 1.0 / real.kernel.width() as f64;
    let spectrum = ComplexMatrix::from_fn(n, real.antenna_count(), |k, p| {
        symbols[k] * real.frequency_response(p, bin_to_index(k, n)) * scale
    });
    let mut y = idft_columns(&spectrum);
    add_noise(&mut y, sigma2, rng)?;
    Ok(y)
}
