use super::*;
use crate::channel::{build_correlation_matrix, standard_complex_normal, Scatterer, ScattererScene};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn kernel(m: usize, n: usize) -> KernelConfig {
    KernelConfig::new(1.0, m, n).unwrap()
}

/// Mean of the complex signal `sum_k c_kp phi(nT - tau u_k)` for one antenna.
fn mean_signal(u: &[f64], c: &[Complex64], kernel: &KernelConfig) -> Vec<Complex64> {
    (0..kernel.n)
        .map(|n| {
            let t = n as f64 * kernel.step();
            u.iter().zip(c).map(|(&uk, &ck)| ck * dirichlet_kernel(t - kernel.tau * uk, kernel)).sum()
        })
        .collect()
}

/// Fisher information of the times of arrival with the gains treated as
/// nuisance parameters, built from finite-difference derivatives of the mean
/// over the full real parameter vector `(u, Re c, Im c)` followed by a Schur
/// complement.
fn finite_difference_fisher(u: &[f64], c: &ComplexMatrix, sigma2: f64, kernel: &KernelConfig) -> DMatrix<f64> {
    let (k, p) = c.shape();
    let params = k + 2 * k * p;
    let h = 1e-6;
    // Derivative of the stacked (antenna-major) mean with respect to each parameter.
    let mut jac: Vec<Vec<Complex64>> = Vec::with_capacity(params);
    for i in 0..k {
        let mut col = Vec::new();
        for ant in 0..p {
            let gains: Vec<Complex64> = c.column(ant).iter().copied().collect();
            let mut up = u.to_vec();
            let mut dn = u.to_vec();
            up[i] += h;
            dn[i] -= h;
            let a = mean_signal(&up, &gains, kernel);
            let b = mean_signal(&dn, &gains, kernel);
            col.extend(a.iter().zip(&b).map(|(x, y)| (x - y) / (2.0 * h)));
        }
        jac.push(col);
    }
    for unit in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
        for i in 0..k {
            for ant in 0..p {
                let mut col = vec![Complex64::new(0.0, 0.0); kernel.n * p];
                let mut gains = vec![Complex64::new(0.0, 0.0); k];
                gains[i] = unit;
                let s = mean_signal(u, &gains, kernel);
                col[ant * kernel.n..(ant + 1) * kernel.n].copy_from_slice(&s);
                jac.push(col);
            }
        }
    }
    let full = DMatrix::from_fn(params, params, |a, b| {
        2.0 / sigma2 * jac[a].iter().zip(&jac[b]).map(|(x, y)| (x.conj() * y).re).sum::<f64>()
    });
    let fuu = full.view((0, 0), (k, k)).into_owned();
    let fuc = full.view((0, k), (k, params - k)).into_owned();
    let fcc = full.view((k, k), (params - k, params - k)).into_owned();
    fuu - &fuc * fcc.try_inverse().unwrap() * fuc.transpose()
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn single_dirac_bound_matches_finite_difference_fisher() {
    // Real model with noise N(0, sigma2): Fisher = c^2/sigma2 sum (d phi/du)^2.
    let kern = kernel(5, 15);
    let (c, sigma2, u) = (1.3, 0.2, 0.137);
    let h = 1e-6;
    let samples = |uu: f64, cc: f64| -> Vec<f64> {
        (0..kern.n).map(|n| cc * dirichlet_kernel(n as f64 * kern.step() - uu, &kern)).collect()
    };
    let du: Vec<f64> = samples(u + h, c).iter().zip(samples(u - h, c)).map(|(a, b)| (a - b) / (2.0 * h)).collect();
    let dc = samples(u, 1.0);
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / sigma2;
    let f = nalgebra::Matrix2::new(dot(&du, &du), dot(&du, &dc), dot(&dc, &du), dot(&dc, &dc));
    let inv = f.try_inverse().unwrap();
    let (toa, amp) = crb_single_dirac(5, 15, c * c / sigma2).unwrap();
    assert!(rel_err(toa, inv[(0, 0)]) < 1e-6, "{toa} vs {}", inv[(0, 0)]);
    assert!(rel_err(amp, inv[(1, 1)] / (c * c)) < 1e-6);
}

#[test]
fn single_dirac_rejects_bad_inputs() {
    assert!(crb_single_dirac(0, 5, 1.0).is_err());
    assert!(crb_single_dirac(3, 6, 1.0).is_err());
    assert!(crb_single_dirac(3, 7, 0.0).is_err());
}

#[test]
fn dsnr_has_closed_form_independent_of_position() {
    let kern = KernelConfig::new(2.0e-6, 7, 21).unwrap();
    let (a, sigma2) = (0.8, 0.05);
    let m = 7.0;
    let expected = a * a * 4.0 * PI * PI * m * (m + 1.0) / (3.0 * (2.0 * m + 1.0) * sigma2);
    for t in [0.0, 0.31e-6, 1.7e-6] {
        let v = dsnr(a, t, sigma2, &kern).unwrap();
        assert!(rel_err(v, expected) < 1e-10, "{v} vs {expected}");
    }
}

#[test]
fn equal_eigenvalues_give_gamma_moment() {
    for p in 2..8 {
        let lambda = vec![0.7; p];
        let v = expected_inverse_quadratic(&lambda).unwrap();
        assert!(rel_err(v, 1.0 / (0.7 * (p as f64 - 1.0))) < 1e-12);
        assert!(rel_err(inverse_quadratic_integral(&lambda), v) < 1e-9);
    }
}

#[test]
fn closed_form_matches_integral_for_distinct_eigenvalues() {
    for lambda in [vec![0.5, 1.5], vec![0.2, 1.0, 3.8], vec![0.1, 0.4, 1.2, 2.3]] {
        let a = inverse_quadratic_closed_form(&lambda);
        let b = inverse_quadratic_integral(&lambda);
        assert!(rel_err(a, b) < 1e-9, "{lambda:?}: {a} vs {b}");
    }
}

#[test]
fn near_degenerate_spectra_are_continuous() {
    let base = expected_inverse_quadratic(&[1.0, 1.0, 2.0]).unwrap();
    for eps in [1e-3, 1e-7, 1e-9, 1e-12] {
        let v = expected_inverse_quadratic(&[1.0, 1.0 + eps, 2.0]).unwrap();
        assert!(v.is_finite());
        assert!(rel_err(v, base) < 10.0 * eps + 1e-9, "eps {eps}: {v} vs {base}");
    }
}

#[test]
fn inverse_moment_matches_monte_carlo() {
    let lambda = [0.5, 1.0, 2.0, 3.0];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 200_000;
    let samples: Vec<f64> = (0..n)
        .map(|_| 1.0 / lambda.iter().map(|l| l * standard_complex_normal(&mut rng).norm_sqr()).sum::<f64>())
        .collect();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    let se = (var / n as f64).sqrt();
    let exact = expected_inverse_quadratic(&lambda).unwrap();
    assert!((mean - exact).abs() < 4.0 * se, "{mean} vs {exact} (se {se})");
}

#[test]
fn single_antenna_diverges() {
    assert!(matches!(expected_inverse_quadratic(&[1.0]), Err(Error::Divergent(_))));
    assert!(matches!(expected_inverse_quadratic(&[1.0, 0.0, 0.0]), Err(Error::Divergent(_))));
    let r = ComplexMatrix::identity(1, 1);
    assert!(matches!(crb_rayleigh_single_path(&r, 1.0, 10), Err(Error::Divergent(_))));
}

#[test]
fn rayleigh_bound_decreases_with_antennas() {
    let mut last = f64::INFINITY;
    for p in 2..10 {
        let v = crb_rayleigh_single_path(&ComplexMatrix::identity(p, p), 50.0, 63).unwrap();
        assert!(v < last);
        last = v;
    }
}

#[test]
fn correlated_antennas_cost_accuracy() {
    let scene = ScattererScene {
        carrier_omega: 2.0 * PI * 2.6e9,
        wave_speed: 299_792_458.0,
        antennas: ScattererScene::circular_array(5, 0.05),
        scatterers: vec![Scatterer {
            azimuth: 0.4,
            kappa: 30.0,
            path: PathSpec::new(0.0, 1.0),
        }],
    };
    let r = build_correlation_matrix(&scene, 0).unwrap();
    let correlated = crb_rayleigh_single_path(&r, 20.0, 63).unwrap();
    let white = crb_rayleigh_single_path(&ComplexMatrix::identity(5, 5), 20.0, 63).unwrap();
    assert!(correlated.is_finite());
    assert!(correlated > white, "{correlated} <= {white}");
}

#[test]
fn fisher_matrix_matches_finite_differences() {
    let kern = kernel(6, 17);
    let toas = [0.21, 0.58];
    let a = [1.0, 0.7];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let z = ComplexMatrix::from_fn(2, 2, |_, _| standard_complex_normal(&mut rng));
    let sigma2 = 0.3;
    let j = fisher_matrix(&toas, &z, &a, sigma2, &kern).unwrap().map(|v| v.re);
    let c = ComplexMatrix::from_fn(2, 2, |k, p| z[(k, p)] * a[k]);
    let fd = finite_difference_fisher(&toas, &c, sigma2, &kern);
    let scale = fd.abs().max();
    for (x, y) in j.iter().zip(fd.iter()) {
        assert!((x - y).abs() < 1e-4 * scale, "{j} vs {fd}");
    }
}

#[test]
fn single_path_fisher_is_scaled_energy() {
    let kern = kernel(4, 13);
    let z = ComplexMatrix::from_row_slice(1, 3, &[Complex64::new(0.3, 1.1), Complex64::new(-0.7, 0.2), Complex64::new(0.9, -0.4)]);
    let (a, sigma2) = (1.7, 0.4);
    let j = fisher_matrix(&[0.29], &z, &[a], sigma2, &kern).unwrap();
    let m = 4.0;
    let energy = 4.0 * PI * PI * 13.0 * m * (m + 1.0) / (3.0 * (2.0 * m + 1.0));
    let zz: f64 = z.iter().map(|v| v.norm_sqr()).sum();
    let expected = 2.0 / sigma2 * energy * a * a * zz;
    assert!(rel_err(j[(0, 0)].re, expected) < 1e-10);
}

#[test]
fn far_paths_decouple() {
    let kern = kernel(31, 63);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let z = ComplexMatrix::from_fn(2, 4, |_, _| standard_complex_normal(&mut rng));
    let j = fisher_matrix(&[0.1, 0.6], &z, &[1.0, 1.0], 0.1, &kern).unwrap();
    let coupling = j[(0, 1)].norm() / (j[(0, 0)].re * j[(1, 1)].re).sqrt();
    assert!(coupling < 0.05, "{coupling}");
}

#[test]
fn coincident_paths_are_degenerate() {
    let kern = kernel(5, 11);
    let z = ComplexMatrix::from_element(2, 2, Complex64::new(1.0, 0.0));
    assert!(matches!(
        fisher_matrix(&[0.3, 0.3], &z, &[1.0, 1.0], 1.0, &kern),
        Err(Error::DegenerateGeometry(_))
    ));
}

#[test]
fn monte_carlo_matches_rayleigh_closed_form() {
    let kern = kernel(31, 63);
    let paths = [PathSpec::new(0.23, 1.0)];
    let sigma2 = 0.5;
    let report = crb_monte_carlo(
        &SpatialModel::Uncorrelated { antennas: 4 },
        &paths,
        sigma2,
        &kern,
        10_000,
        2024,
        Execution::Parallel,
    )
    .unwrap();
    let d = dsnr(1.0, 0.23, sigma2, &kern).unwrap();
    let exact = crb_rayleigh_single_path(&ComplexMatrix::identity(4, 4), d, 63).unwrap();
    assert_eq!(report.skipped, 0);
    assert!(
        (report.toa[0] - exact).abs() < 2.0 * report.toa_stderr[0],
        "{} vs {exact} (se {})",
        report.toa[0],
        report.toa_stderr[0]
    );
}

#[test]
fn monte_carlo_is_reproducible_across_execution_modes() {
    let kern = kernel(10, 21);
    let paths = [PathSpec::new(0.2, 1.0), PathSpec::new(0.5, 0.6)];
    let spatial = SpatialModel::Uncorrelated { antennas: 3 };
    let a = crb_monte_carlo(&spatial, &paths, 0.1, &kern, 200, 9, Execution::Sequential).unwrap();
    let b = crb_monte_carlo(&spatial, &paths, 0.1, &kern, 200, 9, Execution::Parallel).unwrap();
    assert_eq!(a, b);
}

#[test]
fn table_iii_scattered_bound_agrees_with_pilot_domain_monte_carlo() {
    let frame = KernelConfig::table_iii();
    let antennas = 4;
    let a = 1.0;
    let probe = PilotDomain::new(&frame, 31, 8, 1.0).unwrap();
    // Mean ESNR of 20 dB: 2 a^2 P / sigma_z^2 = 100.
    let sigma2_z = 2.0 * a * a * antennas as f64 / 100.0;
    let domain = PilotDomain::new(&frame, 31, 8, sigma2_z / probe.sigma2).unwrap();
    assert!(rel_err(domain.sigma2, sigma2_z) < 1e-12);
    let esnr_inv = domain.sigma2 / (2.0 * a * a) * expected_inverse_quadratic(&vec![1.0; antennas]).unwrap();
    let psnr_inv = domain.sigma2 / (a * a) * expected_inverse_quadratic(&[1.0, 1.0]).unwrap();
    let closed = crb_scattered(31, 8, 1.0, esnr_inv, &[psnr_inv], Regime::RayleighSeparable).unwrap();
    let paths = domain.dilate(&[PathSpec::new(1.1e-6, a)]);
    let mc = crb_monte_carlo(
        &SpatialModel::Uncorrelated { antennas },
        &paths,
        domain.sigma2,
        &domain.kernel,
        10_000,
        77,
        Execution::Parallel,
    )
    .unwrap();
    let mc_toa = domain.undilate(mc.toa[0]);
    assert!(rel_err(mc_toa, closed.toa[0]) < 0.05, "{mc_toa} vs {}", closed.toa[0]);
}

#[test]
fn dilation_wraps_into_the_period() {
    let frame = KernelConfig::table_iii();
    let domain = PilotDomain::new(&frame, 31, 8, 1.0).unwrap();
    let p = domain.dilate(&[PathSpec::new(0.9 * frame.tau / 8.0 + frame.tau / 8.0, 1.0)]);
    assert!(p[0].toa >= 0.0 && p[0].toa < frame.tau);
    assert!(rel_err(p[0].toa, 0.9 * frame.tau).abs() < 1e-12);
}

#[test]
fn snr_conventions_differ_by_two() {
    let g = [Complex64::new(1.0, 1.0), Complex64::new(0.0, 2.0)];
    assert_eq!(esnr(&g, 2.0, SnrConvention::Complex), 2.0 * esnr(&g, 2.0, SnrConvention::Real));
    assert_eq!(psnr(g[1], 2.0), 2.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fisher_bound_invariant_under_joint_rescaling(
        gamma in 0.1f64..10.0,
        t1 in 0.05f64..0.45,
        sep in 0.1f64..0.4,
        seed in 0u64..1000,
    ) {
        let kern = kernel(8, 17);
        let toas = [t1, t1 + sep];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = ComplexMatrix::from_fn(2, 3, |_, _| standard_complex_normal(&mut rng));
        let base = fisher_matrix(&toas, &z, &[1.0, 0.5], 0.2, &kern).unwrap();
        let scaled = fisher_matrix(&toas, &z, &[gamma, 0.5 * gamma], 0.2 * gamma * gamma, &kern).unwrap();
        for (x, y) in base.iter().zip(scaled.iter()) {
            prop_assert!((x - y).norm() <= 1e-9 * base.camax());
        }
    }

    #[test]
    fn inverse_moment_is_positive_and_bounded_by_jensen(
        lambda in proptest::collection::vec(0.05f64..5.0, 2..7),
    ) {
        let v = expected_inverse_quadratic(&lambda).unwrap();
        let trace: f64 = lambda.iter().sum();
        prop_assert!(v.is_finite() && v > 0.0);
        // E[1/Q] >= 1/E[Q].
        prop_assert!(v >= 1.0 / trace * (1.0 - 1e-9));
    }

    #[test]
    fn scattered_bound_scales_with_inverse_gap_squared(d in 1usize..32) {
        let one = crb_scattered(31, 1, 1.0, 0.01, &[0.02], Regime::Deterministic).unwrap();
        let many = crb_scattered(31, d, 1.0, 0.01, &[0.02], Regime::Deterministic).unwrap();
        prop_assert!(rel_err(many.toa[0] * (d * d) as f64, one.toa[0]) < 1e-12);
        prop_assert_eq!(&many.amplitude, &one.amplitude);
    }
}
