//! Dense complex linear algebra and special functions shared by the rest of
//! the crate. Decompositions are delegated to `nalgebra`; this module pins the
//! conventions (ordering, thin vs. full factors, error reporting).

mod bessel;
mod cholesky;
mod fft;
mod roots;
mod svd;

pub use bessel::{
    bessel_i, bessel_i_ratios, bessel_i_scaled, bessel_i_scaled_sequence, bessel_j,
    bessel_j_sequence,
};
pub use cholesky::cholesky;
pub use fft::{dft_columns, idft_columns};
pub use roots::{poly_eval, poly_from_roots, polynomial_roots};
pub use svd::{
    eigenvalues, hermitian_eigen, pseudo_inverse, svd, tls_solve, truncated_svd, Svd,
};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

/// Dense complex matrix in double precision.
pub type ComplexMatrix = DMatrix<Complex64>;

pub(crate) fn ensure_finite(a: &ComplexMatrix, what: &str) -> Result<()> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::input(format!("{what}: empty matrix")));
    }
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::input(format!("{what}: non-finite entry")))
    }
}

/// Embeds a real matrix into the complex field.
pub fn to_complex(a: &DMatrix<f64>) -> ComplexMatrix {
    a.map(|x| Complex64::new(x, 0.0))
}
