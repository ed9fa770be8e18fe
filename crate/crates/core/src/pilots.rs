//! Pilot layouts and extraction of channel DFT coefficients at the pilots.
//!
//! Layouts place unit pilots either on contiguous DFT carriers, on every
//! `D`-th carrier, or on a block of Walsh-Hadamard codes whose span coincides
//! with a set of DFT carriers spaced `D = 2^(n - ell)` apart and offset by
//! `D/2`. In every case extraction yields a [`PilotCoefficients`] block whose
//! rows follow the dilated model `X[r, p] = sum_k c_kp W^{(first + r D) t_kp}`
//! with `W^t = e^{-j 2 pi t / tau}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{index_to_bin, KernelConfig};
use crate::numerics::dft_columns;
use crate::{ComplexMatrix, Error, Result};

/// Largest supported Walsh-Hadamard order.
pub const MAX_WHT_ORDER: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PilotKind {
    ContiguousDft,
    ScatteredDft,
    Wht,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PilotLayout {
    pub kind: PilotKind,
    /// Pilot-domain half-width: pilots sit at `j D` for `|j| <= M`.
    pub m: usize,
    /// Pilot gap; 1 for contiguous layouts, `2^(n - ell)` for WHT layouts.
    #[serde(default = "one")]
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wht_n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wht_ell: Option<u32>,
    /// Channel delay spread in seconds; zero disables the aliasing check.
    #[serde(default)]
    pub delay_spread: f64,
    /// Keep only this many DFT pilots, those with the smallest `|j|` (ties go
    /// to negative `j`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pilot_count: Option<usize>,
}

fn one() -> usize {
    1
}

impl PilotLayout {
    pub fn contiguous(m: usize) -> Self {
        PilotLayout {
            kind: PilotKind::ContiguousDft,
            m,
            d: 1,
            wht_n: None,
            wht_ell: None,
            delay_spread: 0.0,
            pilot_count: None,
        }
    }

    pub fn scattered(m: usize, d: usize, delay_spread: f64) -> Self {
        PilotLayout {
            kind: PilotKind::ScatteredDft,
            m,
            d,
            delay_spread,
            ..Self::contiguous(m)
        }
    }

    /// Codes `2^ell .. 2^(ell+1)` of a `2^n`-point Walsh-Hadamard transform.
    pub fn wht(n: u32, ell: u32) -> Self {
        let d = if ell < n { 1usize << (n - ell) } else { 1 };
        PilotLayout {
            kind: PilotKind::Wht,
            m: if ell < 31 { (1usize << ell) / 2 } else { 0 },
            d,
            wht_n: Some(n),
            wht_ell: Some(ell),
            ..Self::contiguous(0)
        }
    }

    /// 63 pilots eight carriers apart over a 1.6 us delay spread.
    pub fn table_iii() -> Self {
        Self::scattered(31, 8, 1.6e-6)
    }

    /// The same layout restricted to its `count` pilots nearest the carrier.
    pub fn with_pilot_count(mut self, count: usize) -> Self {
        self.pilot_count = Some(count);
        self
    }

    fn wht_params(&self) -> Result<(u32, u32)> {
        match (self.wht_n, self.wht_ell) {
            (Some(n), Some(ell)) if (1..=MAX_WHT_ORDER).contains(&n) && ell >= 1 && ell < n => {
                Ok((n, ell))
            }
            (Some(n), Some(ell)) => Err(Error::Layout(format!(
                "WHT layout needs 1 <= ell < n <= {MAX_WHT_ORDER}, got n={n}, ell={ell}"
            ))),
            _ => Err(Error::Layout("WHT layout needs wht_n and wht_ell".into())),
        }
    }

    /// Effective pilot gap.
    pub fn gap(&self) -> usize {
        match self.kind {
            PilotKind::ContiguousDft => 1,
            PilotKind::ScatteredDft => self.d,
            PilotKind::Wht => match self.wht_params() {
                Ok((n, ell)) => 1 << (n - ell),
                Err(_) => self.d,
            },
        }
    }

    fn check_aliasing(&self, tau: f64) -> Result<()> {
        let gap = self.gap();
        if self.delay_spread > 0.0 && gap as f64 * self.delay_spread >= tau {
            return Err(Error::Layout(format!(
                "pilot gap {gap} aliases a delay spread of {} s over tau = {tau} s",
                self.delay_spread
            )));
        }
        Ok(())
    }

    /// Symmetric DFT indices of the pilots, ascending and equally spaced.
    pub fn pilot_indices(&self, kernel: &KernelConfig) -> Result<Vec<i64>> {
        let indices = match self.kind {
            PilotKind::ContiguousDft | PilotKind::ScatteredDft => {
                scattered_indices(self, kernel.tau)?
            }
            PilotKind::Wht => {
                let (n, ell) = self.wht_params()?;
                if kernel.n != 1 << n {
                    return Err(Error::Layout(format!(
                        "WHT layout of order {n} needs N = {}, got {}",
                        1u64 << n,
                        kernel.n
                    )));
                }
                self.check_aliasing(kernel.tau)?;
                let half = (1i64 << (n - ell)) / 2;
                let count = 1i64 << ell;
                (0..count).map(|i| (2 * i - count + 1) * half).collect()
            }
        };
        if let Some(&worst) = indices.iter().max_by_key(|m| m.unsigned_abs()) {
            if worst.unsigned_abs() as usize > kernel.m {
                return Err(Error::Layout(format!(
                    "pilot index {worst} lies outside the band |m| <= {}",
                    kernel.m
                )));
            }
        }
        Ok(indices)
    }

    /// Standard DFT bins (`0..N`) carrying pilots.
    pub fn pilot_bins(&self, kernel: &KernelConfig) -> Result<Vec<usize>> {
        Ok(self
            .pilot_indices(kernel)?
            .into_iter()
            .map(|m| index_to_bin(m, kernel.n))
            .collect())
    }
}

/// DFT indices `{j D : |j| <= M}` of a contiguous (`D = 1`) or scattered
/// layout, optionally trimmed to the `pilot_count` indices nearest zero.
pub fn scattered_indices(layout: &PilotLayout, tau: f64) -> Result<Vec<i64>> {
    if layout.kind == PilotKind::Wht {
        return Err(Error::Layout("scattered_indices: WHT layout".into()));
    }
    let d = layout.gap() as i64;
    if d < 1 {
        return Err(Error::Layout("pilot gap must be at least 1".into()));
    }
    layout.check_aliasing(tau)?;
    let m = layout.m as i64;
    let (lo, hi) = match layout.pilot_count {
        None => (-m, m),
        Some(count) if count >= 1 && count <= 2 * layout.m + 1 => {
            let below = count as i64 / 2;
            (-below, count as i64 - 1 - below)
        }
        Some(count) => {
            return Err(Error::Layout(format!(
                "pilot_count {count} outside 1..={}",
                2 * layout.m + 1
            )))
        }
    };
    Ok((lo..=hi).map(|j| j * d).collect())
}

/// Orthonormal `2^n x 2^n` Walsh-Hadamard matrix in Sylvester order.
pub fn sylvester_wht(n: u32) -> Result<ComplexMatrix> {
    if !(1..=MAX_WHT_ORDER).contains(&n) {
        return Err(Error::input(format!("WHT order must be in 1..={MAX_WHT_ORDER}")));
    }
    let size = 1usize << n;
    let scale = (size as f64).sqrt().recip();
    // Entry (i, j) of the Sylvester matrix is (-1)^{popcount(i & j)}.
    Ok(ComplexMatrix::from_fn(size, size, |i, j| {
        let sign = if (i & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        Complex64::new(sign * scale, 0.0)
    }))
}

/// One-based WHT code indices `2^ell + i` and DFT column indices
/// `(i - 1/2) 2^(n-ell) + 1`, `i = 1..=2^ell`, spanning the same subspace.
pub fn wht_dft_pilot_map(n: u32, ell: u32) -> Result<(Vec<usize>, Vec<usize>)> {
    PilotLayout::wht(n, ell).wht_params()?;
    let count = 1usize << ell;
    let half = (1usize << (n - ell)) / 2;
    let wht = (1..=count).map(|i| count + i).collect();
    let dft = (1..=count).map(|i| (2 * i - 1) * half + 1).collect();
    Ok((wht, dft))
}

/// Unit-norm DFT columns `e^{j 2 pi f t / size} / sqrt(size)` for zero-based
/// frequencies `f`.
pub fn dft_basis(size: usize, freqs: &[usize]) -> ComplexMatrix {
    let scale = (size as f64).sqrt().recip();
    ComplexMatrix::from_fn(size, freqs.len(), |t, c| {
        let arg = 2.0 * PI * ((freqs[c] * t) % size) as f64 / size as f64;
        Complex64::from_polar(scale, arg)
    })
}

/// Channel coefficients at equally spaced pilots.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotCoefficients {
    /// Symmetric DFT index of row 0.
    pub first: i64,
    /// Index step between consecutive rows.
    pub gap: usize,
    /// Rows x antennas.
    pub values: ComplexMatrix,
}

impl PilotCoefficients {
    pub fn new(first: i64, gap: usize, values: ComplexMatrix) -> Result<Self> {
        if gap == 0 {
            return Err(Error::input("pilot gap must be positive"));
        }
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::input("empty pilot coefficient block"));
        }
        Ok(PilotCoefficients { first, gap, values })
    }

    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn antennas(&self) -> usize {
        self.values.ncols()
    }

    /// DFT index of row `r`.
    pub fn index(&self, r: usize) -> i64 {
        self.first + (r * self.gap) as i64
    }

    pub fn indices(&self) -> Vec<i64> {
        (0..self.rows()).map(|r| self.index(r)).collect()
    }

    /// Keeps antenna `p` only.
    pub fn antenna(&self, p: usize) -> PilotCoefficients {
        PilotCoefficients {
            first: self.first,
            gap: self.gap,
            values: self.values.columns(p, 1).into_owned(),
        }
    }
}

/// DFT of each antenna's samples read at the pilots and divided by the kernel
/// spectrum `1/(2M+1)`; pilot symbols are ones. WHT layouts project onto the
/// pilot codes first.
pub fn extract_channel_dft(
    y: &ComplexMatrix,
    layout: &PilotLayout,
    kernel: &KernelConfig,
) -> Result<PilotCoefficients> {
    kernel.validate()?;
    if y.nrows() != kernel.n {
        return Err(Error::input(format!(
            "expected {} samples per antenna, got {}",
            kernel.n,
            y.nrows()
        )));
    }
    crate::numerics::ensure_finite(y, "extract_channel_dft")?;
    let indices = layout.pilot_indices(kernel)?;
    let spectrum = match layout.kind {
        PilotKind::Wht => {
            let (n, ell) = layout.wht_params()?;
            let s = sylvester_wht(n)?;
            let codes = s.columns(1 << ell, 1 << ell);
            let projected = codes * (codes.adjoint() * y);
            dft_columns(&projected)
        }
        _ => dft_columns(y),
    };
    let scale = kernel.width() as f64;
    let values = ComplexMatrix::from_fn(indices.len(), y.ncols(), |r, p| {
        spectrum[(index_to_bin(indices[r], kernel.n), p)] * scale
    });
    PilotCoefficients::new(indices[0], layout.gap(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_channel, sample_received, transmit, PathSpec, SpatialModel};
    use crate::numerics::svd;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn projection_residual(basis: &ComplexMatrix, cols: &ComplexMatrix) -> f64 {
        // Both column sets are orthonormal, so B B* is the orthogonal projector.
        let proj = basis * (basis.adjoint() * cols);
        (cols - proj).column_iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn wht_columns(n: u32, one_based: &[usize]) -> ComplexMatrix {
        let s = sylvester_wht(n).unwrap();
        ComplexMatrix::from_columns(&one_based.iter().map(|&i| s.column(i - 1)).collect::<Vec<_>>())
    }

    fn dft_columns_one_based(n: u32, one_based: &[usize]) -> ComplexMatrix {
        let freqs: Vec<usize> = one_based.iter().map(|i| i - 1).collect();
        dft_basis(1 << n, &freqs)
    }

    #[test]
    fn scattered_examples() {
        let l = PilotLayout::scattered(1, 8, 0.0);
        assert_eq!(scattered_indices(&l, 1.0).unwrap(), vec![-8, 0, 8]);
        let t = PilotLayout::table_iii();
        let idx = scattered_indices(&t, 25.55e-6).unwrap();
        assert_eq!(idx.len(), 63);
        assert_eq!((idx[0], idx[62]), (-248, 248));
        assert!(idx.windows(2).all(|w| w[1] - w[0] == 8));
        let c = PilotLayout::scattered(4, 1, 0.0);
        assert_eq!(scattered_indices(&c, 1.0).unwrap(), (-4..=4).collect::<Vec<_>>());
        assert_eq!(
            scattered_indices(&PilotLayout::contiguous(4), 1.0).unwrap(),
            (-4..=4).collect::<Vec<_>>()
        );
    }

    #[test]
    fn aliasing_and_band_errors() {
        let l = PilotLayout::scattered(3, 16, 1.6e-6);
        assert!(matches!(scattered_indices(&l, 25.55e-6), Err(Error::Layout(_))));
        let wide = PilotLayout::scattered(40, 8, 0.0);
        assert!(matches!(
            wide.pilot_indices(&KernelConfig::table_iii()),
            Err(Error::Layout(_))
        ));
        assert!(PilotLayout::table_iii().with_pilot_count(64).pilot_indices(&KernelConfig::table_iii()).is_err());
    }

    #[test]
    fn half_pilots_keep_nearest_carriers() {
        let idx = PilotLayout::table_iii()
            .with_pilot_count(32)
            .pilot_indices(&KernelConfig::table_iii())
            .unwrap();
        assert_eq!(idx.len(), 32);
        assert_eq!((idx[0], idx[31]), (-128, 120));
    }

    #[test]
    fn wht_structure() {
        let s1 = sylvester_wht(1).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expect = [[h, h], [h, -h]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((s1[(i, j)].re - expect[i][j]).abs() < 1e-15);
            }
        }
        for n in 1..=8 {
            let s = sylvester_wht(n).unwrap();
            let size = 1usize << n;
            assert!((&s * s.transpose() - ComplexMatrix::identity(size, size)).norm() < 1e-12);
            let mag = (size as f64).sqrt().recip();
            assert!(s.iter().all(|v| (v.re.abs() - mag).abs() < 1e-15 && v.im == 0.0));
            // Kronecker recursion S_{n} = S_1 (x) S_{n-1}.
            if n > 1 {
                let prev = sylvester_wht(n - 1).unwrap();
                assert!((s1.kronecker(&prev) - &s).norm() < 1e-12);
            }
        }
        assert!(sylvester_wht(0).is_err());
        assert!(sylvester_wht(13).is_err());
    }

    #[test]
    fn wht_map_small_case_by_rank() {
        let (wht, dft) = wht_dft_pilot_map(2, 1).unwrap();
        assert_eq!(wht, vec![3, 4]);
        assert_eq!(dft, vec![2, 4]);
        let a = wht_columns(2, &wht);
        let b = dft_columns_one_based(2, &dft);
        let both = ComplexMatrix::from_columns(
            &a.column_iter().chain(b.column_iter()).collect::<Vec<_>>(),
        );
        let sv = svd(&both).unwrap().singular_values;
        let rank = sv.iter().filter(|&&s| s > 1e-10 * sv[0]).count();
        assert_eq!(rank, 2);
    }

    #[test]
    fn wht_map_spans_match() {
        for n in 2..=8 {
            for ell in 1..n {
                let (wht, dft) = wht_dft_pilot_map(n, ell).unwrap();
                assert_eq!(wht.len(), 1 << ell);
                let a = wht_columns(n, &wht);
                let b = dft_columns_one_based(n, &dft);
                assert!(projection_residual(&a, &b) < 1e-12, "n={n} ell={ell}");
                assert!(projection_residual(&b, &a) < 1e-12, "n={n} ell={ell}");
            }
        }
        // Top half of the codes spans the odd frequencies.
        let (_, dft) = wht_dft_pilot_map(5, 4).unwrap();
        assert!(dft.iter().all(|f| (f - 1) % 2 == 1));
        assert!(wht_dft_pilot_map(3, 3).is_err());
        assert!(wht_dft_pilot_map(3, 0).is_err());
    }

    fn model(real: &crate::channel::ChannelRealization, coeffs: &PilotCoefficients) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..coeffs.rows() {
            for p in 0..coeffs.antennas() {
                let expect = real.frequency_response(p, coeffs.index(r));
                worst = worst.max((coeffs.values[(r, p)] - expect).norm());
            }
        }
        worst
    }

    #[test]
    fn single_path_contiguous_and_scattered() {
        let kernel = KernelConfig::new(1.0, 31, 64).unwrap();
        let t1 = 0.137;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut real = sample_channel(
            &kernel,
            &[PathSpec::new(t1, 1.0)],
            &SpatialModel::Uncorrelated { antennas: 1 },
            0.0,
            &mut rng,
        )
        .unwrap();
        real.gains[(0, 0)] = Complex64::new(1.0, 0.0);
        let y = sample_received(&real, 0.0, &mut rng).unwrap();
        let c = extract_channel_dft(&y, &PilotLayout::contiguous(31), &kernel).unwrap();
        for r in 0..c.rows() {
            let m = c.index(r) as f64;
            assert!((c.values[(r, 0)] - Complex64::from_polar(1.0, -2.0 * PI * m * t1)).norm() < 1e-10);
        }
        let s = extract_channel_dft(&y, &PilotLayout::scattered(3, 8, 0.0), &kernel).unwrap();
        assert_eq!(s.indices(), vec![-24, -16, -8, 0, 8, 16, 24]);
        for r in 0..s.rows() {
            let j = r as f64 - 3.0;
            let expect = Complex64::from_polar(1.0, -2.0 * PI * j * 8.0 * t1);
            assert!((s.values[(r, 0)] - expect).norm() < 1e-10);
        }
    }

    #[test]
    fn round_trip_all_layouts() {
        let kernel = KernelConfig::new(1.0, 31, 64).unwrap();
        let paths = [PathSpec::new(0.02, 1.0), PathSpec::new(0.071, 0.5)];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let real = sample_channel(&kernel, &paths, &SpatialModel::Uncorrelated { antennas: 3 }, 0.0, &mut rng).unwrap();
        let y = sample_received(&real, 0.0, &mut rng).unwrap();
        for layout in [
            PilotLayout::contiguous(31),
            PilotLayout::scattered(3, 8, 0.1),
            PilotLayout::wht(6, 3),
            PilotLayout::wht(6, 2),
        ] {
            let c = extract_channel_dft(&y, &layout, &kernel).unwrap();
            assert!(model(&real, &c) < 1e-10, "{layout:?}");
        }
    }

    #[test]
    fn wht_pilots_through_ofdm_match_dft_model() {
        // Only the pilot codes carry energy; extraction through the WHT
        // projection equals the DFT model on the half-offset lattice with D = 8.
        let kernel = KernelConfig::new(1.0, 31, 64).unwrap();
        let layout = PilotLayout::wht(6, 3);
        let bins = layout.pilot_bins(&kernel).unwrap();
        let mut symbols = vec![Complex64::new(0.0, 0.0); 64];
        for &b in &bins {
            symbols[b] = Complex64::new(1.0, 0.0);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let paths = [PathSpec::new(0.05, 1.0), PathSpec::new(0.09, 0.7)];
        let real = sample_channel(&kernel, &paths, &SpatialModel::Uncorrelated { antennas: 2 }, 0.0, &mut rng).unwrap();
        let y = transmit(&real, &symbols, 0.0, &mut rng).unwrap();
        let c = extract_channel_dft(&y, &layout, &kernel).unwrap();
        assert_eq!(c.gap, 8);
        assert_eq!(c.indices(), vec![-28, -20, -12, -4, 4, 12, 20, 28]);
        assert!(model(&real, &c) < 1e-10);
        let y_all = sample_received(&real, 0.0, &mut rng).unwrap();
        let via_dft = extract_channel_dft(&y_all, &layout, &kernel).unwrap();
        assert!((via_dft.values - c.values).norm() < 1e-10);
    }

    #[test]
    fn wht_needs_power_of_two_frame() {
        let kernel = KernelConfig::new(1.0, 31, 63).unwrap();
        let y = ComplexMatrix::zeros(63, 1);
        assert!(matches!(
            extract_channel_dft(&y, &PilotLayout::wht(6, 3), &kernel),
            Err(Error::Layout(_))
        ));
    }
}
