use num_complex::Complex64;

use crate::{ComplexMatrix, Error, Result};

/// Stack of `P` Toeplitz blocks built from `R` equally spaced channel
/// coefficients per antenna; block `p` has `R + 1 - L` rows and `L` columns
/// and entry `(r, c)` holds coefficient number `L - 1 + r - c`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    blocks: Vec<ComplexMatrix>,
    width: usize,
    len: usize,
}

/// Builds the block-Toeplitz data matrix of width `width` from the columns of
/// `coeffs` (one column per antenna).
pub fn build_data_matrix(coeffs: &ComplexMatrix, width: usize) -> Result<DataMatrix> {
    let len = coeffs.nrows();
    if coeffs.ncols() == 0 || len == 0 {
        return Err(Error::input("data matrix: empty coefficient block"));
    }
    if width == 0 || width > len {
        return Err(Error::input(format!(
            "data matrix: width {width} outside 1..={len}"
        )));
    }
    let height = len + 1 - width;
    let blocks = coeffs
        .column_iter()
        .map(|col| ComplexMatrix::from_fn(height, width, |r, c| col[width - 1 + r - c]))
        .collect();
    Ok(DataMatrix {
        blocks,
        width,
        len,
    })
}

impl DataMatrix {
    pub fn blocks(&self) -> &[ComplexMatrix] {
        &self.blocks
    }

    /// `L`, the number of columns.
    pub fn width(&self) -> usize {
        self.width
    }

    /// Rows per block.
    pub fn block_height(&self) -> usize {
        self.len + 1 - self.width
    }

    pub fn antennas(&self) -> usize {
        self.blocks.len()
    }

    /// Number of coefficients per antenna the matrix was built from.
    pub fn coefficient_count(&self) -> usize {
        self.len
    }

    /// Blocks stacked vertically, `P (R + 1 - L)` x `L`.
    pub fn stacked(&self) -> ComplexMatrix {
        let h = self.block_height();
        let mut out = ComplexMatrix::zeros(h * self.blocks.len(), self.width);
        for (p, b) in self.blocks.iter().enumerate() {
            out.rows_mut(p * h, h).copy_from(b);
        }
        out
    }

    /// Coefficients read back from the first row and first column of each
    /// block, `R x P`.
    pub fn coefficients(&self) -> ComplexMatrix {
        let l = self.width;
        ComplexMatrix::from_fn(self.len, self.blocks.len(), |s, p| {
            let b = &self.blocks[p];
            if s < l {
                b[(0, l - 1 - s)]
            } else {
                b[(s + 1 - l, 0)]
            }
        })
    }

    /// Replaces every block by the Toeplitz matrix whose diagonals are the
    /// averages of the corresponding diagonals of the rows of `stacked`.
    pub(crate) fn from_stacked_average(&self, stacked: &ComplexMatrix) -> DataMatrix {
        let h = self.block_height();
        let l = self.width;
        let mut coeffs = ComplexMatrix::zeros(self.len, self.blocks.len());
        for p in 0..self.blocks.len() {
            let block = stacked.rows(p * h, h);
            for s in 0..self.len {
                // Entries with L - 1 + r - c = s.
                let c_lo = (l - 1).saturating_sub(s);
                let c_hi = (l - 1).min(h + l - 2 - s);
                let mut sum = Complex64::new(0.0, 0.0);
                for c in c_lo..=c_hi {
                    sum += block[(s + c + 1 - l, c)];
                }
                coeffs[(s, p)] = sum / (c_hi - c_lo + 1) as f64;
            }
        }
        build_data_matrix(&coeffs, l).expect("dimensions already validated")
    }

    /// Largest deviation from Toeplitz structure over all blocks.
    pub fn toeplitz_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for b in &self.blocks {
            for r in 1..b.nrows() {
                for c in 1..b.ncols() {
                    worst = worst.max((b[(r, c)] - b[(r - 1, c - 1)]).norm());
                }
            }
        }
        worst
    }
}
