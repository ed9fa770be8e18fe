//! Bessel functions of integer order by Miller's backward recurrence.
//!
//! `J` sequences are normalised with `J0 + 2 sum J_2k = 1`, exponentially
//! scaled `I` sequences with `I0 + 2 sum I_k = e^x`. Both recurrences are run
//! downward from an order where the functions are negligible, which is stable
//! for every argument the correlation model needs. Non-finite arguments yield
//! NaN, like the `f64` intrinsics.

const RESCALE_ABOVE: f64 = 1e200;

fn start_order(max_order: usize, ax: f64, spread: f64) -> usize {
    let base = max_order.max(ax.ceil() as usize) as f64;
    let m = base + 20.0 + (spread * (base + 1.0)).sqrt().ceil();
    let m = m as usize;
    m + (m & 1)
}

/// `J_0(x) ..= J_max_order(x)`.
pub fn bessel_j_sequence(max_order: usize, x: f64) -> Vec<f64> {
    if !x.is_finite() {
        return vec![f64::NAN; max_order + 1];
    }
    let mut out = vec![0.0; max_order + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let m = start_order(max_order, 1.5 * ax, 60.0);
    let mut values = vec![0.0; m + 2];
    values[m] = 1.0;
    for k in (1..=m).rev() {
        values[k - 1] = 2.0 * k as f64 / ax * values[k] - values[k + 1];
        if values[k - 1].abs() > RESCALE_ABOVE {
            values[k - 1..].iter_mut().for_each(|v| *v /= RESCALE_ABOVE);
        }
    }
    let norm = values[0] + 2.0 * values.iter().skip(2).step_by(2).sum::<f64>();
    for (n, o) in out.iter_mut().enumerate() {
        let v = values[n] / norm;
        *o = if x < 0.0 && n % 2 == 1 { -v } else { v };
    }
    out
}

/// `e^{-|x|} I_0(x) ..= e^{-|x|} I_max_order(x)`.
pub fn bessel_i_scaled_sequence(max_order: usize, x: f64) -> Vec<f64> {
    if !x.is_finite() {
        return vec![f64::NAN; max_order + 1];
    }
    let mut out = vec![0.0; max_order + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let m = max_order + 30 + 2 * (80.0 * ax).sqrt().ceil() as usize;
    let m = m + (m & 1);
    let mut values = vec![0.0; m + 2];
    values[m] = 1.0;
    for k in (1..=m).rev() {
        values[k - 1] = 2.0 * k as f64 / ax * values[k] + values[k + 1];
        if values[k - 1] > RESCALE_ABOVE {
            values[k - 1..].iter_mut().for_each(|v| *v /= RESCALE_ABOVE);
        }
    }
    let norm = values[0] + 2.0 * values[1..].iter().sum::<f64>();
    for (n, o) in out.iter_mut().enumerate() {
        let v = values[n] / norm;
        *o = if x < 0.0 && n % 2 == 1 { -v } else { v };
    }
    out
}

/// Bessel function of the first kind `J_order(x)`.
pub fn bessel_j(order: u32, x: f64) -> f64 {
    bessel_j_sequence(order as usize, x)[order as usize]
}

/// `e^{-|x|} I_order(x)`.
pub fn bessel_i_scaled(order: u32, x: f64) -> f64 {
    bessel_i_scaled_sequence(order as usize, x)[order as usize]
}

/// Modified Bessel function of the first kind `I_order(x)`.
pub fn bessel_i(order: u32, x: f64) -> f64 {
    bessel_i_scaled(order, x) * x.abs().exp()
}

/// `I_l(x) / I_0(x)` for `l = 0 ..= max_order`; finite for any `x`.
pub fn bessel_i_ratios(max_order: usize, x: f64) -> Vec<f64> {
    let scaled = bessel_i_scaled_sequence(max_order, x);
    let i0 = scaled[0];
    scaled.iter().map(|v| v / i0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// J_n(x) = (1/2pi) \int_0^{2pi} cos(n t - x sin t) dt, trapezoid rule
    /// (spectrally accurate for periodic integrands).
    fn j_integral(n: u32, x: f64) -> f64 {
        let pts = 4096;
        let h = 2.0 * PI / pts as f64;
        (0..pts)
            .map(|i| {
                let t = i as f64 * h;
                (n as f64 * t - x * t.sin()).cos()
            })
            .sum::<f64>()
            / pts as f64
    }

    /// e^{-|x|} I_n(x) = (1/2pi) \int_0^{2pi} e^{x cos t - |x|} cos(n t) dt.
    fn i_scaled_integral(n: u32, x: f64) -> f64 {
        let pts = 8192;
        let h = 2.0 * PI / pts as f64;
        (0..pts)
            .map(|i| {
                let t = i as f64 * h;
                (x * t.cos() - x.abs()).exp() * (n as f64 * t).cos()
            })
            .sum::<f64>()
            / pts as f64
    }

    #[test]
    fn values_at_zero() {
        assert_eq!(bessel_j(0, 0.0), 1.0);
        for l in 1..10 {
            assert_eq!(bessel_j(l, 0.0), 0.0);
            assert_eq!(bessel_i(l, 0.0), 0.0);
        }
        assert_eq!(bessel_i(0, 0.0), 1.0);
    }

    #[test]
    fn known_values() {
        assert!((bessel_j(0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((bessel_j(1, 2.5) - 0.497_094_102_464_274_4).abs() < 1e-15);
        assert!((bessel_i(0, 2.0) - 2.279_585_302_336_067).abs() < 1e-14);
        assert!((bessel_i(3, 1.5) - 0.080_774_113_016_092_32).abs() < 1e-15);
    }

    #[test]
    fn j_matches_integral_oracle() {
        for &x in &[-7.3, 0.01, 0.5, 1.0, 3.7, 10.0, 17.2, 25.0, 33.3, 49.9, 50.0] {
            let seq = bessel_j_sequence(60, x);
            for n in 0..=60u32 {
                let oracle = j_integral(n, x);
                assert!(
                    (seq[n as usize] - oracle).abs() < 1e-12,
                    "J_{n}({x}): {} vs {oracle}",
                    seq[n as usize]
                );
            }
        }
    }

    #[test]
    fn i_matches_integral_oracle() {
        for &x in &[-4.0, 0.05, 0.7, 2.0, 9.5, 20.0, 37.0, 50.0] {
            let seq = bessel_i_scaled_sequence(60, x);
            for n in 0..=60u32 {
                let oracle = i_scaled_integral(n, x);
                // Scaled values are <= 1; compare absolutely on the scaled form
                // (relative accuracy of I itself).
                assert!(
                    (seq[n as usize] - oracle).abs() < 1e-12,
                    "I_{n}({x}): {} vs {oracle}",
                    seq[n as usize]
                );
            }
            // Unscaled values up to |x| = 50 keep 1e-12 relative accuracy.
            let i5 = bessel_i(5, x);
            let expect = i_scaled_integral(5, x) * x.abs().exp();
            assert!((i5 - expect).abs() <= 1e-12 * expect.abs().max(1.0));
        }
    }

    #[test]
    fn j_recurrence_holds() {
        for &x in &[0.3, 1.0, 4.4, 12.0, 31.0, 47.5] {
            let seq = bessel_j_sequence(61, x);
            for l in 1..=60 {
                let lhs = seq[l - 1] + seq[l + 1];
                let rhs = 2.0 * l as f64 / x * seq[l];
                assert!((lhs - rhs).abs() < 1e-9, "l={l} x={x}");
            }
        }
    }

    #[test]
    fn ratios_stay_finite_for_large_argument() {
        let r = bessel_i_ratios(60, 1e4);
        assert!((r[0] - 1.0).abs() < 1e-15);
        // I_l/I_0 ~ exp(-l^2 / 2x) for x >> l^2.
        assert!((r[10] - (-100.0f64 / 2e4).exp()).abs() < 1e-4);
        assert!(r.iter().all(|v| v.is_finite() && *v > 0.0));
    }

    #[test]
    fn non_finite_gives_nan() {
        assert!(bessel_j(2, f64::NAN).is_nan());
        assert!(bessel_i(0, f64::INFINITY).is_nan());
    }
}
