use nalgebra::Cholesky;
use num_complex::Complex64;

use super::{ensure_finite, hermitian_eigen, ComplexMatrix};
use crate::{Error, Result};

/// Lower-triangular `L` with `L L* = R` for Hermitian positive semi-definite `R`.
///
/// Singular inputs get a diagonal jitter of `1e-12 trace(R) / P`, escalated by
/// decades until the factorisation succeeds. Inputs with an eigenvalue below
/// `-1e-10 trace(R)` are rejected.
pub fn cholesky(r: &ComplexMatrix) -> Result<ComplexMatrix> {
    ensure_finite(r, "cholesky")?;
    if !r.is_square() {
        return Err(Error::input("cholesky: matrix is not square"));
    }
    let p = r.nrows();
    let asym = (r - r.adjoint()).norm();
    if asym > 1e-10 * r.norm().max(1e-300) {
        return Err(Error::input("cholesky: matrix is not Hermitian"));
    }
    let herm = (r + r.adjoint()).scale(0.5);
    if let Some(l) = factor(herm.clone()) {
        return Ok(l);
    }

    let trace: f64 = (0..p).map(|i| herm[(i, i)].re).sum();
    let (eigs, _) = hermitian_eigen(&herm)?;
    let min_eig = eigs[0];
    if trace <= 0.0 || min_eig < -1e-10 * trace {
        return Err(Error::NotPsd {
            min_eigenvalue: min_eig,
        });
    }
    let mut jitter = 1e-12 * trace / p as f64;
    for _ in 0..8 {
        let mut shifted = herm.clone();
        for i in 0..p {
            shifted[(i, i)] += Complex64::new(jitter, 0.0);
        }
        if let Some(l) = factor(shifted) {
            return Ok(l);
        }
        jitter *= 10.0;
    }
    Err(Error::Numerical(
        "cholesky: factorisation failed after regularisation".into(),
    ))
}

/// Complex square roots never fail, so a successful decomposition is only
/// accepted when every pivot is real and positive.
fn factor(m: ComplexMatrix) -> Option<ComplexMatrix> {
    let l = Cholesky::new(m)?.l();
    let ok = l.diagonal().iter().all(|d| {
        d.re.is_finite() && d.re > 0.0 && d.im.abs() <= 1e-12 * d.re
    }) && l.iter().all(|v| v.re.is_finite() && v.im.is_finite());
    ok.then_some(l)
}
