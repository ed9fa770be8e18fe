use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Bandlimited tau-periodic pulse with `B tau = 2M + 1`, sampled `N` times per
/// period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    /// Period in seconds.
    pub tau: f64,
    /// Baseband half-width: DFT coefficients `|m| <= M` are non-zero.
    pub m: usize,
    /// Samples per period.
    pub n: usize,
}

impl KernelConfig {
    pub fn new(tau: f64, m: usize, n: usize) -> Result<Self> {
        let cfg = KernelConfig { tau, m, n };
        cfg.validate()?;
        Ok(cfg)
    }

    /// 511-sample frame of 25.55 us at 20 MHz.
    pub fn table_iii() -> Self {
        KernelConfig {
            tau: 25.55e-6,
            m: 255,
            n: 511,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::input("kernel: tau must be positive"));
        }
        if self.m < 1 {
            return Err(Error::input("kernel: M must be at least 1"));
        }
        if self.n < 2 * self.m + 1 {
            return Err(Error::input("kernel: N must be at least 2M+1"));
        }
        Ok(())
    }

    /// `2M + 1 = B tau`.
    pub fn width(&self) -> usize {
        2 * self.m + 1
    }

    /// Bandwidth `B` in Hz.
    pub fn bandwidth(&self) -> f64 {
        self.width() as f64 / self.tau
    }

    /// Sampling step `T = tau / N`.
    pub fn step(&self) -> f64 {
        self.tau / self.n as f64
    }
}

/// Reduces `t / tau` into `(-1/2, 1/2]`.
fn phase(t: f64, tau: f64) -> f64 {
    let u = (t / tau).rem_euclid(1.0);
    if u > 0.5 {
        u - 1.0
    } else {
        u
    }
}

/// `sin(pi B t) / (B tau sin(pi t / tau))`, equal to 1 at multiples of tau.
pub fn dirichlet_kernel(t: f64, cfg: &KernelConfig) -> f64 {
    let u = phase(t, cfg.tau);
    let b = cfg.width() as f64;
    if u.abs() < 1e-12 {
        return 1.0 - (PI * u).powi(2) * (b * b - 1.0) / 6.0;
    }
    (PI * b * u).sin() / (b * (PI * u).sin())
}

/// Time derivative (per second) of [`dirichlet_kernel`]; zero at multiples of
/// tau.
pub fn dirichlet_derivative(t: f64, cfg: &KernelConfig) -> f64 {
    let u = phase(t, cfg.tau);
    let b = cfg.width() as f64;
    let per_period = if u == 0.0 {
        0.0
    } else if u.abs() < 0.05 {
        // Closed form cancels badly near the peak; the Fourier form does not.
        -(4.0 * PI / b)
            * (1..=cfg.m)
                .map(|k| k as f64 * (2.0 * PI * k as f64 * u).sin())
                .sum::<f64>()
    } else {
        let (s1, c1) = (PI * u).sin_cos();
        let (sb, cb) = (PI * b * u).sin_cos();
        PI * (b * cb * s1 - sb * c1) / (b * s1 * s1)
    };
    per_period / cfg.tau
}
