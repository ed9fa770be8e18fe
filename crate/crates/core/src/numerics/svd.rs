use nalgebra::{linalg::SVD, DMatrix, Schur, SymmetricEigen};
use num_complex::Complex64;

use super::{ensure_finite, ComplexMatrix};
use crate::{Error, Result};

const MAX_SWEEPS: usize = 100_000;

/// Thin SVD `A = U diag(S) V*` with singular values in non-increasing order.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    /// `U diag(S) V*`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut us = self.u.clone();
        for (j, s) in self.singular_values.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * self.v.adjoint()
    }
}

/// Thin SVD with descending singular values.
///
/// For wide inputs the matrix is zero-padded to square first so that `V` always
/// spans the full column space (`V` is `cols x cols` whenever `rows <= cols`).
pub fn svd(a: &ComplexMatrix) -> Result<Svd> {
    ensure_finite(a, "svd")?;
    let (rows, cols) = a.shape();
    let work = if rows < cols {
        let mut padded = ComplexMatrix::zeros(cols, cols);
        padded.view_mut((0, 0), (rows, cols)).copy_from(a);
        padded
    } else {
        a.clone()
    };
    let dec = SVD::try_new(work, true, true, f64::EPSILON, MAX_SWEEPS)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let u = dec.u.expect("U requested");
    let v_t = dec.v_t.expect("V requested");
    let s = dec.singular_values;

    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));

    let u_rows = if rows < cols { rows } else { u.nrows() };
    let mut u_sorted = ComplexMatrix::zeros(u_rows, order.len());
    let mut v_sorted = ComplexMatrix::zeros(v_t.ncols(), order.len());
    let mut values = Vec::with_capacity(order.len());
    for (dst, &src) in order.iter().enumerate() {
        u_sorted
            .column_mut(dst)
            .copy_from(&u.column(src).rows(0, u_rows));
        v_sorted
            .column_mut(dst)
            .copy_from(&v_t.row(src).adjoint());
        values.push(s[src]);
    }
    Ok(Svd {
        u: u_sorted,
        singular_values: values,
        v: v_sorted,
    })
}

/// Best rank-`k` factorisation of `a` (Eckart-Young).
pub fn truncated_svd(a: &ComplexMatrix, k: usize) -> Result<Svd> {
    let (rows, cols) = a.shape();
    if k == 0 || k > rows.min(cols) {
        return Err(Error::input(format!(
            "truncated_svd: rank {k} outside 1..={}",
            rows.min(cols)
        )));
    }
    let full = svd(a)?;
    Ok(Svd {
        u: full.u.columns(0, k).into_owned(),
        singular_values: full.singular_values[..k].to_vec(),
        v: full.v.columns(0, k).into_owned(),
    })
}

/// Total-least-squares solution of `A X ≈ B` from the SVD of `[A B]`:
/// `X = -V12 V22^-1`.
pub fn tls_solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    ensure_finite(a, "tls_solve (A)")?;
    ensure_finite(b, "tls_solve (B)")?;
    let (rows, n) = a.shape();
    let d = b.ncols();
    if b.nrows() != rows {
        return Err(Error::input("tls_solve: A and B have different row counts"));
    }
    if rows < n {
        return Err(Error::input("tls_solve: A has fewer rows than columns"));
    }
    let mut stacked = ComplexMatrix::zeros(rows.max(n + d), n + d);
    stacked.view_mut((0, 0), (rows, n)).copy_from(a);
    stacked.view_mut((0, n), (rows, d)).copy_from(b);
    let dec = svd(&stacked)?;
    let v12 = dec.v.view((0, n), (n, d)).into_owned();
    let v22 = dec.v.view((n, n), (d, d)).into_owned();

    let v22_sv = svd(&v22)?.singular_values;
    let smallest = v22_sv.last().copied().unwrap_or(0.0);
    if smallest < 1e-12 {
        return Err(Error::DegenerateGeometry(format!(
            "TLS partition V22 is singular (smallest singular value {smallest:e})"
        )));
    }
    let inv = v22
        .try_inverse()
        .ok_or_else(|| Error::DegenerateGeometry("TLS partition V22 is singular".into()))?;
    Ok(-(v12 * inv))
}

/// Eigenvalues of a general complex square matrix (complex Schur form).
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    ensure_finite(m, "eigenvalues")?;
    if !m.is_square() {
        return Err(Error::input("eigenvalues: matrix is not square"));
    }
    if m.nrows() == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, MAX_SWEEPS)
        .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?;
    match schur.eigenvalues() {
        Some(ev) => Ok(ev.iter().copied().collect()),
        None => {
            let (_, t) = schur.unpack();
            Ok(t.diagonal().iter().copied().collect())
        }
    }
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    ensure_finite(m, "hermitian_eigen")?;
    if !m.is_square() {
        return Err(Error::input("hermitian_eigen: matrix is not square"));
    }
    let herm = (m + m.adjoint()).scale(0.5);
    let dec = SymmetricEigen::try_new(herm, f64::EPSILON, MAX_SWEEPS)
        .ok_or_else(|| Error::Numerical("Hermitian eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..dec.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| dec.eigenvalues[i].total_cmp(&dec.eigenvalues[j]));
    let values = order.iter().map(|&i| dec.eigenvalues[i]).collect();
    let mut vectors = ComplexMatrix::zeros(m.nrows(), m.ncols());
    for (dst, &src) in order.iter().enumerate() {
        vectors
            .column_mut(dst)
            .copy_from(&dec.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// Moore-Penrose pseudo-inverse; singular values below `rtol * s_max` are
/// treated as zero.
pub fn pseudo_inverse(a: &ComplexMatrix, rtol: f64) -> Result<ComplexMatrix> {
    let dec = svd(a)?;
    let (rows, cols) = a.shape();
    let s_max = dec.singular_values.first().copied().unwrap_or(0.0);
    let mut out = ComplexMatrix::zeros(cols, rows);
    for (j, &s) in dec.singular_values.iter().enumerate() {
        if s <= rtol * s_max || s == 0.0 {
            continue;
        }
        let vj = dec.v.column(j);
        let uj = dec.u.column(j);
        out += (vj * uj.adjoint()).scale(1.0 / s);
    }
    Ok(out)
}

#[allow(dead_code)]
pub(crate) fn real_part(m: &ComplexMatrix) -> DMatrix<f64> {
    m.map(|z| z.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ComplexMatrix::from_fn(rows, cols, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn max_abs(m: &ComplexMatrix) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn identity_singular_values() {
        let id = ComplexMatrix::identity(3, 3);
        let dec = truncated_svd(&id, 3).unwrap();
        for s in dec.singular_values {
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rank_one_outer_product() {
        let u = nalgebra::DVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        let v = nalgebra::DVector::from_vec(vec![c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let a = &u * v.adjoint();
        let dec = truncated_svd(&a, 1).unwrap();
        assert!((dec.singular_values[0] - 1.0).abs() < 1e-14);
        assert!(max_abs(&(dec.reconstruct() - &a)) < 1e-14);
    }

    #[test]
    fn truncation_matches_full_svd_residual() {
        let a = random_matrix(6, 4, 3);
        let dec = truncated_svd(&a, 2).unwrap();
        let residual = (&a - dec.reconstruct()).norm();
        let full = svd(&a).unwrap();
        // Eckart-Young: residual^2 = sum of the discarded squared singular values.
        let expected = full.singular_values[2..]
            .iter()
            .map(|s| s * s)
            .sum::<f64>()
            .sqrt();
        assert!((residual - expected).abs() < 1e-12);
    }

    #[test]
    fn factors_are_orthonormal_and_sorted() {
        for (r, cdim, seed) in [(7, 3, 1), (3, 7, 2), (5, 5, 3)] {
            let a = random_matrix(r, cdim, seed);
            let dec = svd(&a).unwrap();
            let k = dec.singular_values.len();
            let utu = dec.u.adjoint() * &dec.u;
            let vtv = dec.v.adjoint() * &dec.v;
            assert!(max_abs(&(utu - ComplexMatrix::identity(k, k))) < 1e-12 || r < cdim);
            assert!(max_abs(&(vtv - ComplexMatrix::identity(k, k))) < 1e-12);
            assert!(dec.singular_values.windows(2).all(|w| w[0] >= w[1]));
            assert!(max_abs(&(dec.reconstruct() - &a)) < 1e-12);
        }
    }

    #[test]
    fn wide_matrix_has_full_right_basis() {
        let a = random_matrix(2, 5, 9);
        let dec = svd(&a).unwrap();
        assert_eq!(dec.v.shape(), (5, 5));
        assert!(max_abs(&(dec.reconstruct() - &a)) < 1e-12);
        // The trailing right singular vectors span the null space.
        for j in 2..5 {
            assert!((&a * dec.v.column(j)).norm() < 1e-12);
        }
    }

    #[test]
    fn non_finite_rejected() {
        let mut a = ComplexMatrix::identity(2, 2);
        a[(0, 1)] = c(f64::NAN, 0.0);
        assert!(matches!(svd(&a), Err(Error::Input(_))));
    }

    #[test]
    fn tls_identity_and_scalar() {
        let a = random_matrix(4, 4, 5);
        let psi = tls_solve(&a, &a).unwrap();
        assert!(max_abs(&(psi - ComplexMatrix::identity(4, 4))) < 1e-10);

        let a = ComplexMatrix::from_column_slice(2, 1, &[c(1.0, 0.0), c(0.0, 0.0)]);
        let b = ComplexMatrix::from_column_slice(2, 1, &[c(2.0, 0.0), c(0.0, 0.0)]);
        let psi = tls_solve(&a, &b).unwrap();
        assert!((psi[(0, 0)] - c(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn tls_matches_eigen_oracle_and_least_squares() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_matrix(10, 2, 12);
        let truth = ComplexMatrix::from_row_slice(2, 1, &[c(0.7, -0.2), c(-1.1, 0.4)]);
        let noise = ComplexMatrix::from_fn(10, 1, |_, _| {
            c(rng.random_range(-1e-3..1e-3), rng.random_range(-1e-3..1e-3))
        });
        let b = &a * &truth + noise;
        let psi = tls_solve(&a, &b).unwrap();

        // Oracle: eigenvector of [A B]*[A B] for the smallest eigenvalue.
        let mut stacked = ComplexMatrix::zeros(10, 3);
        stacked.view_mut((0, 0), (10, 2)).copy_from(&a);
        stacked.view_mut((0, 2), (10, 1)).copy_from(&b);
        let gram = stacked.adjoint() * &stacked;
        let (_, vecs) = hermitian_eigen(&gram).unwrap();
        let v = vecs.column(0);
        let oracle = ComplexMatrix::from_fn(2, 1, |i, _| -v[i] / v[2]);
        assert!(max_abs(&(&psi - &oracle)) < 1e-10);

        // Ordinary least squares agrees to the noise level.
        let ls = pseudo_inverse(&a, 1e-12).unwrap() * &b;
        assert!(max_abs(&(&psi - &ls)) < 1e-2);
        assert!(max_abs(&(&psi - &truth)) < 1e-2);
    }

    #[test]
    fn tls_degenerate_partition() {
        // B is orthogonal to everything A can explain and A is rank one: the
        // smallest singular direction lies entirely in the A block.
        let a = ComplexMatrix::from_row_slice(3, 2, &[
            c(1.0, 0.0), c(0.0, 0.0),
            c(0.0, 0.0), c(0.0, 0.0),
            c(0.0, 0.0), c(0.0, 0.0),
        ]);
        let b = ComplexMatrix::from_row_slice(3, 1, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(tls_solve(&a, &b), Err(Error::DegenerateGeometry(_))));
    }

    #[test]
    fn general_eigenvalues() {
        let m = ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)]);
        let mut ev = eigenvalues(&m).unwrap();
        ev.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((ev[0] - c(0.0, -1.0)).norm() < 1e-12);
        assert!((ev[1] - c(0.0, 1.0)).norm() < 1e-12);
    }
}
