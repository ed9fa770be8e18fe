use num_complex::Complex64;

use super::{eigenvalues, ComplexMatrix};
use crate::{Error, Result};

/// Horner evaluation, coefficients in descending degree.
pub fn poly_eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn poly_derivative_eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let n = coeffs.len() - 1;
    coeffs[..n]
        .iter()
        .enumerate()
        .fold(Complex64::new(0.0, 0.0), |acc, (i, &c)| {
            acc * z + c * (n - i) as f64
        })
}

/// Monic polynomial (descending coefficients) with the given roots.
pub fn poly_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
        for (i, &c) in coeffs.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c * r;
        }
        coeffs = next;
    }
    coeffs
}

/// All roots of a polynomial given in descending degree, computed as the
/// eigenvalues of its balanced companion matrix and polished by Newton steps.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    if coeffs
        .iter()
        .any(|c| !c.re.is_finite() || !c.im.is_finite())
    {
        return Err(Error::input("polynomial_roots: non-finite coefficient"));
    }
    let lead = coeffs
        .iter()
        .position(|c| c.norm() > 0.0)
        .ok_or_else(|| Error::input("polynomial_roots: zero polynomial"))?;
    let coeffs = &coeffs[lead..];
    if coeffs.len() < 2 {
        return Err(Error::input("polynomial_roots: degree must be at least 1"));
    }

    // Roots at the origin.
    let trailing = coeffs.iter().rev().take_while(|c| c.norm() == 0.0).count();
    let reduced = &coeffs[..coeffs.len() - trailing];
    let mut roots = vec![Complex64::new(0.0, 0.0); trailing];

    let degree = reduced.len() - 1;
    if degree == 0 {
        return Ok(roots);
    }
    if degree == 1 {
        roots.push(-reduced[1] / reduced[0]);
        return Ok(roots);
    }

    let mut companion = ComplexMatrix::zeros(degree, degree);
    for j in 0..degree {
        companion[(0, j)] = -reduced[j + 1] / reduced[0];
    }
    for i in 1..degree {
        companion[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    balance(&mut companion);

    for z in eigenvalues(&companion)? {
        roots.push(polish(reduced, z));
    }
    Ok(roots)
}

/// Newton refinement, kept only while it reduces |p(z)|.
fn polish(coeffs: &[Complex64], mut z: Complex64) -> Complex64 {
    let mut value = poly_eval(coeffs, z).norm();
    for _ in 0..3 {
        let d = poly_derivative_eval(coeffs, z);
        if d.norm() == 0.0 {
            break;
        }
        let candidate = z - poly_eval(coeffs, z) / d;
        let candidate_value = poly_eval(coeffs, candidate).norm();
        if candidate_value.is_finite() && candidate_value < value {
            z = candidate;
            value = candidate_value;
        } else {
            break;
        }
    }
    z
}

/// Parlett-Reinsch balancing with radix 2 (row/column scaling by powers of two,
/// so eigenvalues are unchanged exactly).
fn balance(a: &mut ComplexMatrix) {
    const RADIX: f64 = 2.0;
    let n = a.nrows();
    let l1 = |z: Complex64| z.re.abs() + z.im.abs();
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += l1(a[(j, i)]);
                    r += l1(a[(i, j)]);
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let inv = 1.0 / f;
                for j in 0..n {
                    a[(i, j)] *= inv;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Greedy multiset distance between two root lists of equal length.
    fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
        let mut remaining: Vec<Complex64> = b.to_vec();
        let mut worst: f64 = 0.0;
        for &x in a {
            let (idx, d) = remaining
                .iter()
                .enumerate()
                .map(|(i, &y)| (i, (x - y).norm()))
                .min_by(|p, q| p.1.total_cmp(&q.1))
                .unwrap();
            worst = worst.max(d);
            remaining.swap_remove(idx);
        }
        worst
    }

    #[test]
    fn linear_and_quadratic() {
        let r = polynomial_roots(&[c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0] - c(1.0, 0.0)).norm() < 1e-15);

        let r = polynomial_roots(&[c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(multiset_distance(&r, &[c(0.0, 1.0), c(0.0, -1.0)]) < 1e-12);
    }

    #[test]
    fn unit_circle_pair_round_trip() {
        let z1 = Complex64::from_polar(1.0, -2.0 * PI * 0.1);
        let z2 = Complex64::from_polar(1.0, -2.0 * PI * 0.3);
        let coeffs = poly_from_roots(&[z1, z2]);
        // Monic form [1, -f1, -f2].
        assert!((coeffs[0] - c(1.0, 0.0)).norm() < 1e-15);
        let r = polynomial_roots(&coeffs).unwrap();
        assert!(multiset_distance(&r, &[z1, z2]) < 1e-10);
    }

    #[test]
    fn zero_polynomial_rejected() {
        assert!(polynomial_roots(&[c(0.0, 0.0), c(0.0, 0.0)]).is_err());
        assert!(polynomial_roots(&[c(3.0, 0.0)]).is_err());
    }

    #[test]
    fn leading_zeros_and_origin_roots() {
        let r = polynomial_roots(&[c(0.0, 0.0), c(2.0, 0.0), c(-4.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(multiset_distance(&r, &[c(0.0, 0.0), c(2.0, 0.0)]) < 1e-14);
    }

    #[test]
    fn residuals_are_small_for_badly_scaled_coefficients() {
        let coeffs = vec![c(1e-3, 0.0), c(5.0, 1.0), c(-2e3, 0.5), c(1e4, -3.0), c(7.0, 0.0)];
        let scale = coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let roots = polynomial_roots(&coeffs).unwrap();
        assert_eq!(roots.len(), 4);
        for z in roots {
            // Residual relative to the natural magnitude of the terms at |z|.
            let mag: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c.norm() * z.norm().powi((4 - i) as i32))
                .sum();
            assert!(poly_eval(&coeffs, z).norm() <= 1e-8 * scale.max(mag));
        }
    }

    proptest! {
        #[test]
        fn separated_unit_roots_round_trip(
            k in 1usize..8,
            offset in 0.0f64..1.0,
            jitter in proptest::collection::vec(0.0f64..0.5, 8),
        ) {
            // Angles on a grid of step 1/k with sub-cell jitter: separation >= 0.5/k turns.
            let roots: Vec<Complex64> = (0..k)
                .map(|i| {
                    let turn = offset + (i as f64 + jitter[i]) / k as f64;
                    Complex64::from_polar(1.0, 2.0 * PI * turn)
                })
                .collect();
            let found = polynomial_roots(&poly_from_roots(&roots)).unwrap();
            prop_assert_eq!(found.len(), k);
            prop_assert!(multiset_distance(&found, &roots) < 1e-8);
        }
    }
}
