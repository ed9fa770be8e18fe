//! Cramer-Rao lower bounds on time-of-arrival and gain estimation.
//!
//! Time bounds are on the normalised error `E[(dt / tau)^2]`. Complex
//! measurements carry circular noise of variance `sigma2` per sample; under
//! that convention the effective and peak SNRs are `2 sum |c|^2 / sigma2`
//! and `|c|^2 / sigma2` (see [`SnrConvention`]).

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{dirichlet_derivative, dirichlet_kernel, KernelConfig, PathFading, PathSpec, SpatialModel};
use crate::numerics::{hermitian_eigen, pseudo_inverse, svd, to_complex};
use crate::parallel::{map_trials, trial_rng, Execution};
use crate::{ComplexMatrix, Error, Result};

/// Relative eigenvalue gap below which the closed-form inverse moment is
/// replaced by quadrature.
const CLUSTER_GAP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Deterministic,
    RayleighSeparable,
    RayleighFull,
}

/// Variance lower bounds for one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrbReport {
    pub regime: Regime,
    /// `E[(dt_k / tau)^2]` per path.
    pub toa: Vec<f64>,
    /// `E[|dc / c|^2]` per antenna (closed forms only).
    pub amplitude: Vec<f64>,
    /// Zero for closed forms.
    pub monte_carlo_trials: usize,
    /// Standard error of each entry of `toa` (Monte-Carlo only).
    pub toa_stderr: Vec<f64>,
    /// Draws with a singular information matrix, left out of the average.
    pub skipped: usize,
    pub warnings: Vec<String>,
}

/// Real measurements: `ESNR = sum c^2 / sigma2`, `PSNR = c^2 / sigma2`.
/// Complex measurements with circular noise of variance `sigma2`:
/// `ESNR = 2 sum |c|^2 / sigma2`, `PSNR = |c|^2 / sigma2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SnrConvention {
    Real,
    #[default]
    Complex,
}

pub fn esnr(gains: &[Complex64], sigma2: f64, convention: SnrConvention) -> f64 {
    let energy: f64 = gains.iter().map(|c| c.norm_sqr()).sum();
    match convention {
        SnrConvention::Real => energy / sigma2,
        SnrConvention::Complex => 2.0 * energy / sigma2,
    }
}

pub fn psnr(gain: Complex64, sigma2: f64) -> f64 {
    gain.norm_sqr() / sigma2
}

/// Deterministic single-path bounds `(toa, amplitude)` for a real signal
/// with `N` samples of a kernel of half-width `M`.
pub fn crb_single_dirac(m: usize, n: usize, psnr: f64) -> Result<(f64, f64)> {
    if m < 1 || n < 2 * m + 1 || !(psnr.is_finite() && psnr > 0.0) {
        return Err(Error::input("crb_single_dirac: need M >= 1, N >= 2M+1, PSNR > 0"));
    }
    let (mf, nf) = (m as f64, n as f64);
    let width = 2.0 * mf + 1.0;
    let toa = 3.0 * width / (4.0 * PI * PI * nf * mf * (mf + 1.0)) / psnr;
    let amp = width / nf / psnr;
    Ok((toa, amp))
}

/// Differential SNR `a^2 sum_n |tau phi'(nT - t)|^2 / (N sigma2)`; the
/// derivative is taken against normalised time `t / tau`.
pub fn dsnr(a1: f64, t1: f64, sigma2: f64, kernel: &KernelConfig) -> Result<f64> {
    kernel.validate()?;
    if !(sigma2.is_finite() && sigma2 > 0.0) {
        return Err(Error::input("dsnr: sigma2 must be positive"));
    }
    let step = kernel.step();
    let energy: f64 = (0..kernel.n)
        .map(|n| (kernel.tau * dirichlet_derivative(n as f64 * step - t1, kernel)).powi(2))
        .sum();
    Ok(a1 * a1 * energy / (kernel.n as f64 * sigma2))
}

/// `E[1 / sum_p lambda_p |r_p|^2]` for i.i.d. `r_p ~ CN(0, 1)`, the mean
/// inverse energy of a correlated Rayleigh vector with covariance eigenvalues
/// `lambda`.
pub fn expected_inverse_quadratic(eigenvalues: &[f64]) -> Result<f64> {
    if eigenvalues.iter().any(|l| !l.is_finite() || *l < 0.0) {
        return Err(Error::input("eigenvalues must be finite and non-negative"));
    }
    let max = eigenvalues.iter().cloned().fold(0.0, f64::max);
    let mut lambda: Vec<f64> = eigenvalues
        .iter()
        .copied()
        .filter(|&l| l > 1e-14 * max)
        .collect();
    if lambda.len() < 2 {
        return Err(Error::Divergent(format!(
            "inverse energy has no mean with {} non-zero eigenvalue(s)",
            lambda.len()
        )));
    }
    lambda.sort_by(f64::total_cmp);
    let p = lambda.len();
    let (lo, hi) = (lambda[0], lambda[p - 1]);
    if hi - lo <= CLUSTER_GAP * hi {
        let mean = lambda.iter().sum::<f64>() / p as f64;
        return Ok(1.0 / (mean * (p as f64 - 1.0)));
    }
    let min_gap = lambda.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    if min_gap < CLUSTER_GAP * hi {
        return Ok(inverse_quadratic_integral(&lambda));
    }
    Ok(inverse_quadratic_closed_form(&lambda))
}

/// Partial-fraction closed form; valid for pairwise distinct eigenvalues.
pub fn inverse_quadratic_closed_form(lambda: &[f64]) -> f64 {
    let p = lambda.len();
    lambda
        .iter()
        .enumerate()
        .map(|(i, &li)| {
            let mut term = (-li).powi(p as i32 - 1) * li.ln() / li;
            for (j, &lj) in lambda.iter().enumerate() {
                if j != i {
                    term /= lj - li;
                }
            }
            term
        })
        .sum()
}

/// `int_0^inf prod_p (1 + lambda_p s)^{-1} ds` by the trapezoid rule on
/// `s = e^x`, where the integrand decays exponentially at both ends.
pub fn inverse_quadratic_integral(lambda: &[f64]) -> f64 {
    let max = lambda.iter().cloned().fold(0.0, f64::max);
    let min = lambda.iter().cloned().fold(f64::INFINITY, f64::min);
    let lo = -40.0 - max.ln();
    let hi = 40.0 - min.ln();
    let h = 0.01;
    let steps = ((hi - lo) / h).ceil() as usize;
    let h = (hi - lo) / steps as f64;
    let f = |x: f64| {
        let s = x.exp();
        (x - lambda.iter().map(|l| (l * s).ln_1p()).sum::<f64>()).exp()
    };
    let inner: f64 = (1..steps).map(|i| f(lo + i as f64 * h)).sum();
    h * (inner + 0.5 * (f(lo) + f(hi)))
}

/// Single-path Rayleigh bound `E[(Z* Z)^-1] / (2 N dSNR)` for antenna
/// correlation `r1`.
pub fn crb_rayleigh_single_path(r1: &ComplexMatrix, dsnr_value: f64, n: usize) -> Result<f64> {
    if !(dsnr_value.is_finite() && dsnr_value > 0.0) || n == 0 {
        return Err(Error::input("crb_rayleigh_single_path: need dSNR > 0 and N > 0"));
    }
    if !r1.is_square() || r1.nrows() < 2 {
        return Err(Error::Divergent("Rayleigh bound needs at least two antennas".into()));
    }
    let (eigs, _) = hermitian_eigen(r1)?;
    let max = eigs.iter().cloned().fold(0.0, f64::max);
    if eigs[0] < -1e-10 * max.max(1.0) {
        return Err(Error::NotPsd { min_eigenvalue: eigs[0] });
    }
    let clipped: Vec<f64> = eigs.iter().map(|&e| e.max(0.0)).collect();
    Ok(expected_inverse_quadratic(&clipped)? / (2.0 * n as f64 * dsnr_value))
}

/// Scattered-pilot bounds: `3 BT / (4 D^2 pi^2 M (M+1)) E[1/ESNR]` on the
/// time of arrival and `BT E[1/PSNR_l]` on each gain.
pub fn crb_scattered(
    m: usize,
    d: usize,
    bt: f64,
    esnr_inv_mean: f64,
    psnr_inv_means: &[f64],
    regime: Regime,
) -> Result<CrbReport> {
    let positive = |v: f64| v.is_finite() && v > 0.0;
    if m < 1 || d < 1 || !positive(bt) || !positive(esnr_inv_mean) || !psnr_inv_means.iter().all(|&v| positive(v)) {
        return Err(Error::input("crb_scattered: inputs must be positive"));
    }
    let (mf, df) = (m as f64, d as f64);
    let toa = 3.0 * bt / (4.0 * df * df * PI * PI * mf * (mf + 1.0)) * esnr_inv_mean;
    Ok(CrbReport {
        regime,
        toa: vec![toa],
        amplitude: psnr_inv_means.iter().map(|v| bt * v).collect(),
        monte_carlo_trials: 0,
        toa_stderr: Vec::new(),
        skipped: 0,
        warnings: Vec::new(),
    })
}

/// Kernel samples `Phi[n, k] = phi(nT - t_k)` and normalised-time
/// derivatives `tau phi'(nT - t_k)`.
fn kernel_matrices(toas: &[f64], kernel: &KernelConfig) -> (DMatrix<f64>, DMatrix<f64>) {
    let step = kernel.step();
    let phi = DMatrix::from_fn(kernel.n, toas.len(), |n, k| dirichlet_kernel(n as f64 * step - toas[k], kernel));
    let dphi = DMatrix::from_fn(kernel.n, toas.len(), |n, k| {
        kernel.tau * dirichlet_derivative(n as f64 * step - toas[k], kernel)
    });
    (phi, dphi)
}

/// `Phi'^* P Phi'` with `P` the projector onto the orthogonal complement of
/// the columns of `Phi`: the part of the information that survives the
/// unknown gains.
pub fn projected_derivative_gram(toas: &[f64], kernel: &KernelConfig) -> Result<DMatrix<f64>> {
    kernel.validate()?;
    if toas.is_empty() {
        return Err(Error::input("no times of arrival"));
    }
    let (phi, dphi) = kernel_matrices(toas, kernel);
    let phi_c = to_complex(&phi);
    let pinv = pseudo_inverse(&phi_c, 1e-12)?;
    let projector_part = &phi_c * pinv;
    let sv = svd(&phi_c)?.singular_values;
    if sv[sv.len() - 1] <= 1e-12 * sv[0] {
        return Err(Error::DegenerateGeometry(
            "coincident paths: kernel matrix is rank deficient".into(),
        ));
    }
    let dphi_c = to_complex(&dphi);
    let residual = &dphi_c - &projector_part * &dphi_c;
    let gram = dphi_c.adjoint() * residual;
    Ok(gram.map(|v| v.re))
}

/// Fisher information of the normalised times of arrival given the fading
/// draw `z` (`K x P`), expected amplitudes `a` and noise variance `sigma2`:
/// `J = 2 / sigma2 (Phi'^* P Phi') .* C`, `C = diag(a) (sum_p z_p z_p^*) diag(a)`.
pub fn fisher_matrix(
    toas: &[f64],
    z: &ComplexMatrix,
    a: &[f64],
    sigma2: f64,
    kernel: &KernelConfig,
) -> Result<ComplexMatrix> {
    if z.nrows() != toas.len() || a.len() != toas.len() {
        return Err(Error::input("fisher_matrix: toas, Z rows and amplitudes must match"));
    }
    if !(sigma2.is_finite() && sigma2 > 0.0) {
        return Err(Error::input("fisher_matrix: sigma2 must be positive"));
    }
    let gram = projected_derivative_gram(toas, kernel)?;
    Ok(fisher_from_gram(&gram, z, a, sigma2))
}

fn fisher_from_gram(gram: &DMatrix<f64>, z: &ComplexMatrix, a: &[f64], sigma2: f64) -> ComplexMatrix {
    let k = a.len();
    let zz = z * z.adjoint();
    ComplexMatrix::from_fn(k, k, |i, j| {
        zz[(i, j)] * (a[i] * a[j] * gram[(i, j)] * 2.0 / sigma2)
    })
}

/// Monte-Carlo average of `diag(Re J^-1)` over fading draws (`trials` of
/// them, trial `i` seeded from `split_seed(seed, i)`).
pub fn crb_monte_carlo(
    spatial: &SpatialModel,
    paths: &[PathSpec],
    sigma2: f64,
    kernel: &KernelConfig,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<CrbReport> {
    if trials == 0 {
        return Err(Error::input("crb_monte_carlo: at least one trial is required"));
    }
    if !(sigma2.is_finite() && sigma2 > 0.0) {
        return Err(Error::input("crb_monte_carlo: sigma2 must be positive"));
    }
    let toas: Vec<f64> = paths.iter().map(|p| p.toa).collect();
    let a: Vec<f64> = paths.iter().map(|p| p.expected_amplitude).collect();
    let gram = projected_derivative_gram(&toas, kernel)?;
    let fading = PathFading::new(paths, spatial)?;
    let k = paths.len();
    let draws: Vec<Option<Vec<f64>>> = map_trials(exec, trials, |i| {
        let mut rng = trial_rng(seed, i as u64);
        let z = fading.draw_fading(&mut rng);
        let j = fisher_from_gram(&gram, &z, &a, sigma2).map(|v| v.re);
        let inv = j.try_inverse()?;
        let diag: Vec<f64> = (0..k).map(|i| inv[(i, i)]).collect();
        diag.iter().all(|v| v.is_finite() && *v > 0.0).then_some(diag)
    });
    let kept: Vec<&Vec<f64>> = draws.iter().flatten().collect();
    let skipped = trials - kept.len();
    if kept.is_empty() {
        return Err(Error::Numerical("every Fisher draw was singular".into()));
    }
    let count = kept.len() as f64;
    let mut mean = vec![0.0; k];
    for d in &kept {
        for (m, v) in mean.iter_mut().zip(d.iter()) {
            *m += v / count;
        }
    }
    let stderr = (0..k)
        .map(|i| {
            if kept.len() < 2 {
                return f64::NAN;
            }
            let var = kept.iter().map(|d| (d[i] - mean[i]).powi(2)).sum::<f64>() / (count - 1.0);
            (var / count).sqrt()
        })
        .collect();
    let mut warnings = Vec::new();
    if skipped * 100 > trials {
        warnings.push(format!("{skipped} of {trials} Fisher draws were singular"));
    }
    Ok(CrbReport {
        regime: Regime::RayleighFull,
        toa: mean,
        amplitude: Vec::new(),
        monte_carlo_trials: trials,
        toa_stderr: stderr,
        skipped,
        warnings,
    })
}

/// Equivalent critically sampled model seen through `2M + 1` pilots spaced
/// `gap` carriers apart: a kernel of half-width `M` with `2M + 1` samples
/// over the same period, and the per-sample noise variance that reproduces
/// the pilot noise of a frame with per-sample noise `sigma2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PilotDomain {
    pub kernel: KernelConfig,
    pub gap: usize,
    pub sigma2: f64,
}

impl PilotDomain {
    pub fn new(frame: &KernelConfig, pilot_half_width: usize, gap: usize, sigma2: f64) -> Result<Self> {
        frame.validate()?;
        let width = 2 * pilot_half_width + 1;
        let kernel = KernelConfig::new(frame.tau, pilot_half_width, width)?;
        // Pilot noise variance (2M_f+1)^2 sigma2 / N_f, spread over 2M+1 samples.
        let pilot_noise = (frame.width() as f64).powi(2) * sigma2 / frame.n as f64;
        Ok(PilotDomain {
            kernel,
            gap,
            sigma2: pilot_noise / width as f64,
        })
    }

    /// Paths with dilated times of arrival `D t mod tau`.
    pub fn dilate(&self, paths: &[PathSpec]) -> Vec<PathSpec> {
        paths
            .iter()
            .map(|p| PathSpec {
                toa: (p.toa * self.gap as f64).rem_euclid(self.kernel.tau),
                ..*p
            })
            .collect()
    }

    /// Divides a bound on the dilated time of arrival back to the frame.
    pub fn undilate(&self, bound: f64) -> f64 {
        bound / (self.gap * self.gap) as f64
    }
}

#[cfg(test)]
mod tests;
