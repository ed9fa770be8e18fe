use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::PathSpec;
use crate::numerics::{bessel_i_ratios, bessel_i_scaled, bessel_j_sequence, hermitian_eigen};
use crate::{ComplexMatrix, Error, Result};

/// Hard cap on the number of harmonics summed by [`spatial_correlation`].
pub const CORRELATION_TERM_CAP: usize = 60;
const TERM_TOLERANCE: f64 = 1e-12;

/// A cluster of reflectors seen from the array at azimuth `azimuth`, spread
/// according to a Von-Mises density of concentration `kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scatterer {
    pub azimuth: f64,
    pub kappa: f64,
    pub path: PathSpec,
}

/// Far-field planar geometry driving the antenna cross-correlation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScattererScene {
    /// Carrier angular frequency in rad/s.
    pub carrier_omega: f64,
    #[serde(default = "default_wave_speed")]
    pub wave_speed: f64,
    /// Antenna positions in meters.
    pub antennas: Vec<[f64; 2]>,
    pub scatterers: Vec<Scatterer>,
}

fn default_wave_speed() -> f64 {
    299_792_458.0
}

impl ScattererScene {
    /// `count` antennas equispaced on a circle, the first on the x axis.
    pub fn circular_array(count: usize, radius: f64) -> Vec<[f64; 2]> {
        (0..count)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / count as f64;
                [radius * a.cos(), radius * a.sin()]
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_omega.is_finite() && self.carrier_omega > 0.0) {
            return Err(Error::input("scene: carrier_omega must be positive"));
        }
        if !(self.wave_speed.is_finite() && self.wave_speed > 0.0) {
            return Err(Error::input("scene: wave_speed must be positive"));
        }
        if self.antennas.is_empty() {
            return Err(Error::input("scene: at least one antenna is required"));
        }
        if self.antennas.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::input("scene: antenna positions must be finite"));
        }
        for s in &self.scatterers {
            if !(s.kappa.is_finite() && s.kappa >= 0.0 && s.azimuth.is_finite()) {
                return Err(Error::input("scene: scatterer kappa must be finite and >= 0"));
            }
        }
        Ok(())
    }

    pub fn antenna_count(&self) -> usize {
        self.antennas.len()
    }

    /// Distance `d_mn` and azimuth of the counter-clockwise normal of the
    /// segment from antenna `m` to antenna `n`.
    pub fn pair_geometry(&self, m: usize, n: usize) -> (f64, f64) {
        let a = self.antennas[m];
        let b = self.antennas[n];
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        let d = dx.hypot(dy);
        (d, dx.atan2(-dy))
    }

    /// Paths of all scatterers, in scene order, each pointing to its scatterer.
    pub fn paths(&self) -> Vec<PathSpec> {
        self.scatterers
            .iter()
            .enumerate()
            .map(|(k, s)| PathSpec {
                scatterer: Some(k),
                ..s.path
            })
            .collect()
    }

    fn scatterer(&self, k: usize) -> Result<&Scatterer> {
        self.scatterers
            .get(k)
            .ok_or_else(|| Error::input(format!("scene: no scatterer with index {k}")))
    }
}

/// Von-Mises concentration matching a Gaussian reflector cloud of spread
/// `width` at distance `distance`: the root of `(1 - e^{-3k/4}) k = (d/w)^2`.
pub fn kappa_from_geometry(distance: f64, width: f64) -> f64 {
    let target = (distance / width).powi(2);
    if !(target.is_finite() && target > 0.0) {
        return 0.0;
    }
    let lhs = |k: f64| -(-0.75 * k).exp_m1() * k;
    // lhs(k) <= k and lhs(k) >= target at k = target + 4/3 + sqrt(4 target / 3).
    let mut lo = target.sqrt().min(target);
    let mut hi = target + 4.0 / 3.0 + (4.0 * target / 3.0).sqrt();
    while lhs(lo) > target {
        lo *= 0.5;
    }
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if lhs(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Azimuth density of a circular Gaussian cloud whose centre lies `sqrt(kappa')`
/// standard deviations away from the observer, along azimuth zero.
pub fn azimuthal_density(theta: f64, kappa_prime: f64) -> f64 {
    let a = kappa_prime.max(0.0).sqrt();
    let (s, c) = theta.sin_cos();
    let ac = a * c;
    normal_pdf(a * s) * (ac * normal_cdf(ac) + normal_pdf(ac))
}

/// `e^{kappa cos theta} / (2 pi I_0(kappa))`.
pub fn von_mises_pdf(theta: f64, kappa: f64) -> f64 {
    let kappa = kappa.max(0.0);
    (kappa * (theta.cos() - 1.0)).exp() / (2.0 * PI * bessel_i_scaled(0, kappa))
}

/// Cross-correlation between antennas `m` and `n` for path `k` of the scene,
/// from the Bessel series truncated after at most `terms` harmonics (and never
/// more than [`CORRELATION_TERM_CAP`]); summation stops early once the
/// remaining harmonics fall below `1e-12`.
pub fn spatial_correlation(
    scene: &ScattererScene,
    k: usize,
    m: usize,
    n: usize,
    terms: usize,
) -> Result<Complex64> {
    check_antennas(scene, m, n)?;
    let s = scene.scatterer(k)?;
    let (d, theta_mn) = scene.pair_geometry(m, n);
    let x = scene.carrier_omega * d / scene.wave_speed;
    if d == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let terms = terms.clamp(1, CORRELATION_TERM_CAP);
    let j = bessel_j_sequence(terms, x);
    let rho = bessel_i_ratios(terms, s.kappa);
    let angle = -theta_mn + s.azimuth - FRAC_PI_2;
    let mut sum = Complex64::new(j[0], 0.0);
    let mut jl = Complex64::new(1.0, 0.0);
    for l in 1..=terms {
        jl *= Complex64::i();
        let mag = 2.0 * rho[l] * j[l];
        sum += jl * mag * (l as f64 * angle).cos();
        // Past the argument |J_l| decays monotonically; a small ratio bounds
        // every later harmonic too.
        let tail_small = (l as f64 > x && mag.abs() < TERM_TOLERANCE)
            || 2.0 * rho[l] < TERM_TOLERANCE;
        if tail_small {
            break;
        }
    }
    Ok(sum)
}

/// Defining integral of the cross-correlation, evaluated by trapezoid
/// quadrature (spectrally accurate for this periodic integrand) with the node
/// count doubled until successive estimates differ by less than `tol`.
pub fn spatial_correlation_quadrature(
    scene: &ScattererScene,
    k: usize,
    m: usize,
    n: usize,
    tol: f64,
) -> Result<Complex64> {
    check_antennas(scene, m, n)?;
    let s = scene.scatterer(k)?;
    let (d, theta_mn) = scene.pair_geometry(m, n);
    let x = scene.carrier_omega * d / scene.wave_speed;
    let shift = theta_mn - s.azimuth;
    let integrand = |v: f64| {
        von_mises_pdf(v + shift, s.kappa) * Complex64::from_polar(1.0, x * v.sin())
    };
    let rule = |pts: usize| {
        let h = 2.0 * PI / pts as f64;
        (0..pts)
            .map(|i| integrand(-PI + i as f64 * h))
            .sum::<Complex64>()
            * h
    };
    let mut pts = 64;
    let mut prev = rule(pts);
    while pts < 1 << 20 {
        pts *= 2;
        let next = rule(pts);
        if (next - prev).norm() < tol {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Numerical(
        "spatial_correlation_quadrature: no convergence".into(),
    ))
}

fn check_antennas(scene: &ScattererScene, m: usize, n: usize) -> Result<()> {
    let p = scene.antenna_count();
    if m >= p || n >= p {
        return Err(Error::input(format!(
            "scene: antenna index out of range ({m}, {n}) for {p} antennas"
        )));
    }
    Ok(())
}

/// `P x P` correlation of path `k` across the array, unit diagonal, with tiny
/// negative eigenvalues (above `-1e-10`) clipped to zero.
pub fn build_correlation_matrix(scene: &ScattererScene, k: usize) -> Result<ComplexMatrix> {
    scene.validate()?;
    let p = scene.antenna_count();
    let mut r = ComplexMatrix::identity(p, p);
    for m in 0..p {
        for n in m + 1..p {
            let v = spatial_correlation(scene, k, m, n, CORRELATION_TERM_CAP)?;
            r[(m, n)] = v;
            r[(n, m)] = v.conj();
        }
    }
    let (eigs, vecs) = hermitian_eigen(&r)?;
    let min = eigs[0];
    if min < -1e-10 {
        return Err(Error::Model(format!(
            "correlation matrix of path {k} has eigenvalue {min:e}"
        )));
    }
    if min < 0.0 {
        let clipped: Vec<f64> = eigs.iter().map(|&e| e.max(0.0)).collect();
        let mut projected = ComplexMatrix::zeros(p, p);
        for (i, &e) in clipped.iter().enumerate() {
            let v = vecs.column(i);
            projected += (&v * v.adjoint()).scale(e);
        }
        // Keep the unit diagonal exactly.
        for i in 0..p {
            let scale = projected[(i, i)].re.sqrt();
            for j in 0..p {
                projected[(i, j)] /= scale;
                projected[(j, i)] /= scale;
            }
        }
        for i in 0..p {
            projected[(i, i)] = Complex64::new(1.0, 0.0);
        }
        r = projected;
    }
    Ok(r)
}
