//! Synthetic sparse common-support channels: the periodic Dirichlet kernel,
//! the scatterer-based spatial correlation model and random realizations of
//! path gains, jittered delays and received samples.

mod kernel;
mod scene;
mod synth;

pub use kernel::{dirichlet_derivative, dirichlet_kernel, KernelConfig};
pub use scene::{
    azimuthal_density, build_correlation_matrix, kappa_from_geometry, spatial_correlation,
    spatial_correlation_quadrature, von_mises_pdf, Scatterer, ScattererScene,
    CORRELATION_TERM_CAP,
};
pub use synth::{
    sample_channel, sample_received, standard_complex_normal, transmit, ChannelRealization,
    PathFading, SpatialModel,
};

use serde::{Deserialize, Serialize};

/// One propagation path: nominal time of arrival and expected gain modulus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    /// Seconds, in `[0, tau)`.
    pub toa: f64,
    pub expected_amplitude: f64,
    /// Index into [`ScattererScene::scatterers`] driving this path's
    /// correlation across antennas.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scatterer: Option<usize>,
}

impl PathSpec {
    pub fn new(toa: f64, expected_amplitude: f64) -> Self {
        PathSpec {
            toa,
            expected_amplitude,
            scatterer: None,
        }
    }
}

/// Symmetric DFT index of bin `k` for an `n`-point transform
/// (`{-n/2 .. n/2 - 1}` for even `n`, `{-(n-1)/2 ..= (n-1)/2}` for odd `n`).
pub fn bin_to_index(k: usize, n: usize) -> i64 {
    if 2 * k >= n {
        k as i64 - n as i64
    } else {
        k as i64
    }
}

/// Standard DFT bin (`0..n`) of symmetric index `m`.
pub fn index_to_bin(m: i64, n: usize) -> usize {
    m.rem_euclid(n as i64) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bin_index_round_trip() {
        for n in [7usize, 8, 511, 64] {
            for k in 0..n {
                let m = bin_to_index(k, n);
                assert!(m >= -(n as i64) / 2 && m <= (n as i64 - 1) / 2);
                assert_eq!(index_to_bin(m, n), k);
            }
        }
        assert_eq!(bin_to_index(256, 511), -255);
        assert_eq!(bin_to_index(32, 64), -32);
    }
}
