//! Common-support recovery from pilot coefficients: block-Toeplitz data
//! matrices, Prony and ESPRIT support estimators solved in the total
//! least-squares sense, Cadzow denoising, per-antenna amplitude fits and the
//! two reference methods (per-antenna FRI and lowpass interpolation).

mod baseline;
mod data_matrix;
mod subspace;

pub use baseline::{fri_independent, lowpass_interpolate, IndependentEstimate};
pub use data_matrix::{build_data_matrix, DataMatrix};
pub use subspace::{
    block_cadzow, block_cadzow_traced, block_esprit_tls, block_prony_tls, CadzowTrace,
    SupportEstimate,
};

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::numerics::svd;
use crate::pilots::PilotCoefficients;
use crate::{ComplexMatrix, Error, Result};

/// Condition number above which a Vandermonde fit is refused.
pub const MAX_VANDERMONDE_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SupportMethod {
    Prony,
    Esprit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorConfig {
    /// Number of paths.
    pub k: usize,
    pub method: SupportMethod,
    pub cadzow_iters: usize,
    pub cadzow_tol: f64,
    /// Data-matrix width for ESPRIT and Cadzow; `None` picks `(R - 1) / 2`
    /// for `R` pilot rows.
    pub width: Option<usize>,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            k: 1,
            method: SupportMethod::Esprit,
            cadzow_iters: 3,
            cadzow_tol: 1e-8,
            width: None,
        }
    }
}

impl EstimatorConfig {
    pub fn new(k: usize, method: SupportMethod, cadzow_iters: usize) -> Self {
        EstimatorConfig {
            k,
            method,
            cadzow_iters,
            ..Default::default()
        }
    }

    fn width_for(&self, rows: usize) -> usize {
        self.width.unwrap_or((rows.saturating_sub(1) / 2).max(1))
    }
}

/// Output of [`scs_fri`].
#[derive(Debug, Clone)]
pub struct ScsFriEstimate {
    /// Times of arrival in `[0, tau / D)`.
    pub support: SupportEstimate,
    /// `K x P`, rows in the order of `support.toas`.
    pub amplitudes: ComplexMatrix,
    /// Coefficients after optional denoising.
    pub denoised: PilotCoefficients,
    /// Cadzow rank ratios, empty when denoising is off.
    pub cadzow_ratios: Vec<f64>,
}

impl ScsFriEstimate {
    /// Estimated channel `sum_k c_kp e^{-j 2 pi m t_k / tau}` at DFT index `m`.
    pub fn response(&self, p: usize, m: i64, tau: f64) -> Complex64 {
        channel_response(&self.support.toas, &self.amplitudes.column(p).iter().copied().collect::<Vec<_>>(), m, tau)
    }
}

pub(crate) fn channel_response(toas: &[f64], gains: &[Complex64], m: i64, tau: f64) -> Complex64 {
    toas.iter()
        .zip(gains)
        .map(|(&t, &c)| c * Complex64::from_polar(1.0, -2.0 * PI * m as f64 * t / tau))
        .sum()
}

/// Least-squares gains `K x P` for known times of arrival: fits
/// `X[r, p] = sum_k c_kp e^{-j 2 pi index(r) t_k / tau}` per antenna.
pub fn estimate_amplitudes(
    toas: &[f64],
    coeffs: &PilotCoefficients,
    tau: f64,
) -> Result<ComplexMatrix> {
    if toas.is_empty() {
        return Err(Error::input("estimate_amplitudes: no times of arrival"));
    }
    let v = ComplexMatrix::from_fn(coeffs.rows(), toas.len(), |r, k| {
        Complex64::from_polar(1.0, -2.0 * PI * coeffs.index(r) as f64 * toas[k] / tau)
    });
    let dec = svd(&v)?;
    let s = &dec.singular_values;
    let smallest = s[s.len() - 1];
    if toas.len() > coeffs.rows() || smallest <= 0.0 || s[0] / smallest > MAX_VANDERMONDE_CONDITION {
        let cond = if smallest > 0.0 && toas.len() <= coeffs.rows() {
            s[0] / smallest
        } else {
            f64::INFINITY
        };
        return Err(Error::IllConditioned(cond));
    }
    // V^+ = W S^-1 U^*, thin factors.
    let k = toas.len();
    let u = dec.u.columns(0, k);
    let mut projected = u.adjoint() * &coeffs.values;
    for (i, mut row) in projected.row_iter_mut().enumerate() {
        row /= Complex64::new(s[i], 0.0);
    }
    Ok(dec.v.columns(0, k) * projected)
}

/// The full pipeline: optional Cadzow denoising of the width-`L` data matrix,
/// read-back of the denoised coefficients, support estimation by Prony (width
/// `K + 1`) or ESPRIT (width `L`), division of the dilated support by the
/// pilot gap and per-antenna amplitude fits on the denoised coefficients.
pub fn scs_fri(coeffs: &PilotCoefficients, cfg: &EstimatorConfig, tau: f64) -> Result<ScsFriEstimate> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::input("tau must be positive"));
    }
    crate::numerics::ensure_finite(&coeffs.values, "scs_fri")?;
    let k = cfg.k;
    let rows = coeffs.rows();
    let width = cfg.width_for(rows);
    let mut denoised = coeffs.clone();
    let mut cadzow_ratios = Vec::new();
    let mut h = build_data_matrix(&coeffs.values, width)?;
    if cfg.cadzow_iters > 0 {
        let trace = block_cadzow_traced(&h, k, cfg.cadzow_iters, cfg.cadzow_tol)?;
        denoised.values = trace.matrix.coefficients();
        cadzow_ratios = trace.ratios;
        h = trace.matrix;
    }
    let mut support = match cfg.method {
        SupportMethod::Esprit => block_esprit_tls(&h, k, tau)?,
        SupportMethod::Prony => {
            let hp = build_data_matrix(&denoised.values, k + 1)?;
            block_prony_tls(&hp, k, tau)?
        }
    };
    let gap = coeffs.gap as f64;
    for t in &mut support.toas {
        *t /= gap;
    }
    let amplitudes = estimate_amplitudes(&support.toas, &denoised, tau)?;
    Ok(ScsFriEstimate {
        support,
        amplitudes,
        denoised,
        cadzow_ratios,
    })
}
