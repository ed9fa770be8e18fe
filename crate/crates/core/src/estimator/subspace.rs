use std::f64::consts::PI;

use num_complex::Complex64;

use super::DataMatrix;
use crate::numerics::{eigenvalues, polynomial_roots, svd, tls_solve, truncated_svd};
use crate::{ComplexMatrix, Error, Result};

/// Roots closer than this in angle are reported as degenerate.
const DEGENERATE_ANGLE: f64 = 1e-9;

/// Recovered common support.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportEstimate {
    /// Ascending times of arrival in seconds.
    pub toas: Vec<f64>,
    /// Annihilating filter, when the estimator produces one.
    pub filter: Option<Vec<Complex64>>,
    /// Singular values of the data matrix the support was read from.
    pub singular_values: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Time of arrival in `[0, period)` of the unit-circle point `z = W^t`.
pub(crate) fn root_to_toa(z: Complex64, period: f64) -> f64 {
    let t = (-period * z.arg() / (2.0 * PI)).rem_euclid(period);
    if t >= period {
        0.0
    } else {
        t
    }
}

fn support_from_roots(
    roots: &[Complex64],
    period: f64,
    singular_values: Vec<f64>,
    filter: Option<Vec<Complex64>>,
) -> SupportEstimate {
    let mut toas: Vec<f64> = roots.iter().map(|&z| root_to_toa(z, period)).collect();
    toas.sort_by(f64::total_cmp);
    let mut warnings = Vec::new();
    for w in toas.windows(2) {
        if 2.0 * PI * (w[1] - w[0]) / period < DEGENERATE_ANGLE {
            warnings.push(format!("degenerate support: repeated root near t = {:e}", w[0]));
        }
    }
    if toas.len() > 1 {
        let wrap = toas[0] + period - toas[toas.len() - 1];
        if 2.0 * PI * wrap / period < DEGENERATE_ANGLE {
            warnings.push("degenerate support: roots straddle t = 0".into());
        }
    }
    SupportEstimate {
        toas,
        filter,
        singular_values,
        warnings,
    }
}

fn check_order(h: &DataMatrix, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::input("model order K must be at least 1"));
    }
    if k >= h.coefficient_count() {
        return Err(Error::input(format!(
            "model order {k} needs more than {} coefficients",
            h.coefficient_count()
        )));
    }
    Ok(())
}

/// Prony estimate of `k` times of arrival (in `[0, period)`) from a data
/// matrix of width `k + 1`: the least right singular vector of the stacked
/// matrix is the annihilating filter and its roots give the support.
pub fn block_prony_tls(h: &DataMatrix, k: usize, period: f64) -> Result<SupportEstimate> {
    check_order(h, k)?;
    if h.width() != k + 1 {
        return Err(Error::input(format!(
            "Prony needs width K + 1 = {}, got {}",
            k + 1,
            h.width()
        )));
    }
    let dec = svd(&h.stacked())?;
    let f: Vec<Complex64> = dec.v.column(k).iter().copied().collect();
    let mut roots = polynomial_roots(&f)?;
    if roots.len() < k {
        return Err(Error::Numerical(format!(
            "annihilating filter has {} roots, expected {k}",
            roots.len()
        )));
    }
    if roots.len() > k {
        roots.sort_by(|a, b| (a.norm() - 1.0).abs().total_cmp(&(b.norm() - 1.0).abs()));
        roots.truncate(k);
    }
    Ok(support_from_roots(
        &roots,
        period,
        dec.singular_values.as_slice().to_vec(),
        Some(f),
    ))
}

/// ESPRIT estimate of `k` times of arrival from the rotation between the
/// top and bottom rows of the `k` dominant right singular vectors.
pub fn block_esprit_tls(h: &DataMatrix, k: usize, period: f64) -> Result<SupportEstimate> {
    check_order(h, k)?;
    let l = h.width();
    if k + 1 > l {
        return Err(Error::input(format!(
            "ESPRIT needs K <= L - 1, got K = {k}, L = {l}"
        )));
    }
    let stacked = h.stacked();
    if k > stacked.nrows() {
        return Err(Error::input("ESPRIT: fewer data rows than paths"));
    }
    let dec = svd(&stacked)?;
    let signal = dec.v.columns(0, k);
    let xi0: ComplexMatrix = signal.rows(0, l - 1).into_owned();
    let xi1: ComplexMatrix = signal.rows(1, l - 1).into_owned();
    let psi = tls_solve(&xi0, &xi1)?;
    let roots = eigenvalues(&psi)?;
    Ok(support_from_roots(
        &roots,
        period,
        dec.singular_values.as_slice().to_vec(),
        None,
    ))
}

/// Outcome of [`block_cadzow_traced`].
#[derive(Debug, Clone)]
pub struct CadzowTrace {
    pub matrix: DataMatrix,
    /// `sigma_{K+1} / sigma_K` of the input and after every iteration.
    pub ratios: Vec<f64>,
    pub iterations: usize,
}

fn rank_ratio(stacked: &ComplexMatrix, k: usize) -> Result<f64> {
    let s = svd(stacked)?.singular_values;
    if s.len() <= k {
        return Ok(0.0);
    }
    Ok(if s[k - 1] > 0.0 { s[k] / s[k - 1] } else { 0.0 })
}

/// Alternating projection onto rank-`k` matrices and block-Toeplitz
/// matrices, at most `max_iters` rounds, stopping early once
/// `sigma_{K+1} / sigma_K < tol`. The result is always block-Toeplitz.
pub fn block_cadzow(h: &DataMatrix, k: usize, max_iters: usize, tol: f64) -> Result<DataMatrix> {
    Ok(block_cadzow_traced(h, k, max_iters, tol)?.matrix)
}

pub fn block_cadzow_traced(
    h: &DataMatrix,
    k: usize,
    max_iters: usize,
    tol: f64,
) -> Result<CadzowTrace> {
    check_order(h, k)?;
    let min_dim = h.width().min(h.block_height() * h.antennas());
    if k >= min_dim {
        return Err(Error::input(format!(
            "Cadzow: K = {k} must be below the smallest matrix dimension {min_dim}"
        )));
    }
    let mut current = h.clone();
    let mut stacked = current.stacked();
    let mut ratios = vec![rank_ratio(&stacked, k)?];
    let mut iterations = 0;
    while iterations < max_iters && ratios[ratios.len() - 1] >= tol {
        let low_rank = truncated_svd(&stacked, k)?.reconstruct();
        current = current.from_stacked_average(&low_rank);
        stacked = current.stacked();
        ratios.push(rank_ratio(&stacked, k)?);
        iterations += 1;
    }
    Ok(CadzowTrace {
        matrix: current,
        ratios,
        iterations,
    })
}
