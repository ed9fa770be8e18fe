use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{scs_fri, EstimatorConfig};
use crate::channel::KernelConfig;
use crate::pilots::PilotCoefficients;
use crate::{ComplexMatrix, Error, Result};

/// Per-antenna estimates of [`fri_independent`].
#[derive(Debug, Clone)]
pub struct IndependentEstimate {
    /// `K x P` times of arrival in `[0, tau / D)`, ascending per antenna.
    pub toas: DMatrix<f64>,
    /// `K x P` gains matching `toas`.
    pub amplitudes: ComplexMatrix,
}

impl IndependentEstimate {
    pub fn response(&self, p: usize, m: i64, tau: f64) -> Complex64 {
        let toas: Vec<f64> = self.toas.column(p).iter().copied().collect();
        let gains: Vec<Complex64> = self.amplitudes.column(p).iter().copied().collect();
        super::channel_response(&toas, &gains, m, tau)
    }
}

/// Runs the single-antenna pipeline on each antenna separately, ignoring the
/// common support.
pub fn fri_independent(
    coeffs: &PilotCoefficients,
    cfg: &EstimatorConfig,
    tau: f64,
) -> Result<IndependentEstimate> {
    let p = coeffs.antennas();
    let mut toas = DMatrix::zeros(cfg.k, p);
    let mut amplitudes = ComplexMatrix::zeros(cfg.k, p);
    for a in 0..p {
        let est = scs_fri(&coeffs.antenna(a), cfg, tau)?;
        for k in 0..cfg.k {
            toas[(k, a)] = est.support.toas[k];
            amplitudes[(k, a)] = est.amplitudes[(k, 0)];
        }
    }
    Ok(IndependentEstimate { toas, amplitudes })
}

/// `sum_{n < R} e^{-j 2 pi u n / R}`.
fn geometric_phase_sum(u: f64, rows: usize) -> Complex64 {
    let r = rows as f64;
    let denom = (PI * u / r).sin();
    if denom.abs() < 1e-9 {
        return (0..rows)
            .map(|n| Complex64::from_polar(1.0, -2.0 * PI * u * n as f64 / r))
            .sum();
    }
    Complex64::from_polar((PI * u).sin() / denom, -PI * u * (r - 1.0) / r)
}

/// Ideal lowpass interpolation of pilot coefficients to every in-band
/// carrier: the `R` pilot values are read as the spectrum of an `R`-tap
/// response spread over `[0, tau / D)`, whose transform is evaluated at all
/// indices `|m| <= M` of the kernel. Returns `(2M + 1) x P` coefficients with
/// `first = -M`, `gap = 1`.
pub fn lowpass_interpolate(
    coeffs: &PilotCoefficients,
    kernel: &KernelConfig,
) -> Result<PilotCoefficients> {
    kernel.validate()?;
    crate::numerics::ensure_finite(&coeffs.values, "lowpass_interpolate")?;
    let rows = coeffs.rows();
    let d = coeffs.gap as f64;
    let r = rows as f64;
    // Taps g_n = (1/R) sum_s x[s] e^{j 2 pi s n / R}, then
    // H(m) = sum_n g_n e^{-j 2 pi (m - first) n / (R D)}. The composite weight
    // of x[s] in H(m) is a Dirichlet kernel in (m - first) / D - s.
    let width = kernel.width();
    let weights = ComplexMatrix::from_fn(width, rows, |i, s| {
        let m = i as i64 - kernel.m as i64;
        let u = (m - coeffs.first) as f64 / d - s as f64;
        geometric_phase_sum(u, rows) / r
    });
    let values = weights * &coeffs.values;
    if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Numerical("lowpass interpolation overflowed".into()));
    }
    PilotCoefficients::new(-(kernel.m as i64), 1, values)
}
