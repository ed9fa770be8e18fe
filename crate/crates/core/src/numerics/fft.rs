use std::cell::RefCell;

use rustfft::FftPlanner;

use super::ComplexMatrix;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn transform_columns(x: &ComplexMatrix, inverse: bool) -> ComplexMatrix {
    let n = x.nrows();
    let mut out = x.clone();
    if n == 0 {
        return out;
    }
    let fft = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    });
    // Columns of a column-major matrix are contiguous.
    for mut col in out.column_iter_mut() {
        let slice = col.as_mut_slice();
        fft.process(slice);
    }
    out
}

/// Column-wise `X[m] = (1/N) sum_n x[n] e^{-j 2 pi m n / N}`, bins in
/// standard order `0..N`.
pub fn dft_columns(x: &ComplexMatrix) -> ComplexMatrix {
    let scale = 1.0 / x.nrows().max(1) as f64;
    transform_columns(x, false).map(|v| v * scale)
}

/// Inverse of [`dft_columns`]: `x[n] = sum_m X[m] e^{j 2 pi m n / N}`.
pub fn idft_columns(x: &ComplexMatrix) -> ComplexMatrix {
    transform_columns(x, true)
}
