//! Monte-Carlo drivers for experiments A, B and C and the bound table.
//!
//! Trials share one channel, symbol and unit-noise draw across the SNR grid,
//! so curves are smooth in SNR. Trial `i` of a sweep with sub-seed `s` uses
//! `trial_rng(split_seed(seed, s), i)`.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;

use super::config::{ChannelMethod, ExperimentConfig};
use super::matching::match_toas;
use super::table::{fmt_f64, Table};
use crate::bounds::{
    crb_monte_carlo, crb_rayleigh_single_path, crb_scattered, dsnr, expected_inverse_quadratic, PilotDomain,
    Regime,
};
use crate::channel::{standard_complex_normal, transmit, KernelConfig, PathFading, PathSpec, SpatialModel};
use crate::estimator::{fri_independent, lowpass_interpolate, scs_fri, EstimatorConfig, SupportMethod};
use crate::numerics::{dft_columns, hermitian_eigen};
use crate::parallel::{map_trials, split_seed, trial_rng};
use crate::pilots::{extract_channel_dft, PilotLayout};
use crate::{ComplexMatrix, Error, Result};

/// Noise variance per sample giving the global input SNR `snr_db`: the mean
/// noiseless sample energy per antenna, `sum a_k^2 / (2M + 1)`, over `sigma2`.
pub fn noise_variance(paths: &[PathSpec], kernel: &KernelConfig, snr_db: f64) -> f64 {
    let power: f64 = paths.iter().map(|p| p.expected_amplitude.powi(2)).sum();
    power / (kernel.width() as f64 * 10f64.powf(snr_db / 10.0))
}

fn white_noise<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| standard_complex_normal(rng))
}

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Inputs shared by the ToA sweeps of experiments A and B.
struct ToaSweep<'a> {
    cfg: &'a ExperimentConfig,
    paths: Vec<PathSpec>,
    fading: PathFading,
    epsilon: f64,
    estimators: Vec<EstimatorConfig>,
    sigma2: Vec<f64>,
    /// Period of the estimated ToAs, `tau / D`.
    period: f64,
    /// Conditional bound per unit frame noise variance is
    /// `unit_bound / sum_p |c_kp|^2`.
    unit_bound: f64,
}

struct ToaTrial {
    /// `[snr][estimator][path]` squared errors normalised by `tau^2`.
    sq_errors: Vec<Vec<Vec<f64>>>,
    failed: Vec<Vec<bool>>,
    /// Per path, conditional bound per unit frame noise variance.
    conditional: Vec<f64>,
}

impl<'a> ToaSweep<'a> {
    fn new(
        cfg: &'a ExperimentConfig,
        paths: Vec<PathSpec>,
        spatial: &SpatialModel,
        epsilon: f64,
        estimators: Vec<EstimatorConfig>,
    ) -> Result<Self> {
        let sigma2 = cfg.snr_db.iter().map(|&s| noise_variance(&paths, &cfg.kernel, s)).collect();
        let gap = cfg.pilots.gap();
        let domain = PilotDomain::new(&cfg.kernel, cfg.pilots.m, gap, 1.0)?;
        let n = domain.kernel.n as f64;
        let energy = n * dsnr(1.0, 0.0, 1.0, &domain.kernel)?;
        Ok(ToaSweep {
            cfg,
            fading: PathFading::new(&paths, spatial)?,
            paths,
            epsilon,
            estimators,
            sigma2,
            period: cfg.kernel.tau / gap as f64,
            unit_bound: domain.undilate(domain.sigma2 / (2.0 * energy)),
        })
    }

    fn trial(&self, base: u64, index: usize) -> Result<ToaTrial> {
        let kernel = &self.cfg.kernel;
        let tau = kernel.tau;
        let mut rng = trial_rng(base, index as u64);
        let real = self.fading.sample(kernel, self.epsilon, &mut rng)?;
        let clean = real.noiseless_samples();
        let noise = white_noise(kernel.n, real.antenna_count(), &mut rng);
        let truth: Vec<f64> = self.paths.iter().map(|p| p.toa.rem_euclid(self.period)).collect();
        let k = self.paths.len();
        let mut sq_errors = Vec::with_capacity(self.sigma2.len());
        let mut failed = Vec::with_capacity(self.sigma2.len());
        for &s2 in &self.sigma2 {
            let y = &clean + &noise * Complex64::new(s2.sqrt(), 0.0);
            let coeffs = extract_channel_dft(&y, &self.cfg.pilots, kernel)?;
            let mut row = Vec::with_capacity(self.estimators.len());
            let mut fail_row = Vec::with_capacity(self.estimators.len());
            for est_cfg in &self.estimators {
                match scs_fri(&coeffs, est_cfg, tau) {
                    Ok(est) if est.support.toas.len() == k => {
                        let m = match_toas(&truth, &est.support.toas, self.period);
                        row.push(m.errors.iter().map(|e| (e / tau).powi(2)).collect());
                        fail_row.push(false);
                    }
                    _ => {
                        // No estimate: score the worst circular error.
                        row.push(vec![(0.5 * self.period / tau).powi(2); k]);
                        fail_row.push(true);
                    }
                }
            }
            sq_errors.push(row);
            failed.push(fail_row);
        }
        let conditional = (0..k)
            .map(|i| {
                let e: f64 = real.gains.row(i).iter().map(|c| c.norm_sqr()).sum();
                self.unit_bound / e
            })
            .collect();
        Ok(ToaTrial { sq_errors, failed, conditional })
    }

    /// Runs all trials; returns `mse[snr][estimator][path]`, failure counts
    /// and the mean conditional bound per path at unit noise variance.
    fn run(&self, sub_seed: u64) -> Result<(Vec<Vec<Vec<f64>>>, Vec<Vec<usize>>, Vec<f64>)> {
        let base = split_seed(self.cfg.seed, sub_seed);
        let trials = self.cfg.trials;
        let results = map_trials(self.cfg.execution, trials, |i| self.trial(base, i));
        let results: Vec<ToaTrial> = results.into_iter().collect::<Result<_>>()?;
        let (s, e, k) = (self.sigma2.len(), self.estimators.len(), self.paths.len());
        let mut mse = vec![vec![vec![0.0; k]; e]; s];
        let mut failures = vec![vec![0usize; e]; s];
        let mut conditional = vec![0.0; k];
        for t in &results {
            for si in 0..s {
                for ei in 0..e {
                    for ki in 0..k {
                        mse[si][ei][ki] += t.sq_errors[si][ei][ki] / trials as f64;
                    }
                    failures[si][ei] += t.failed[si][ei] as usize;
                }
            }
            for ki in 0..k {
                conditional[ki] += t.conditional[ki] / trials as f64;
            }
        }
        Ok((mse, failures, conditional))
    }

    /// Separable Rayleigh bound per path at unit frame noise variance, from
    /// each path's antenna correlation.
    fn separable_bounds(&self, spatial: &SpatialModel) -> Result<Vec<f64>> {
        let domain = PilotDomain::new(&self.cfg.kernel, self.cfg.pilots.m, self.cfg.pilots.gap(), 1.0)?;
        let rs = correlation_matrices(spatial, &self.paths)?;
        let dilated = domain.dilate(&self.paths);
        dilated
            .iter()
            .zip(&rs)
            .map(|(p, r)| {
                let d = dsnr(p.expected_amplitude, p.toa, domain.sigma2, &domain.kernel)?;
                match crb_rayleigh_single_path(r, d, domain.kernel.n) {
                    Ok(b) => Ok(domain.undilate(b)),
                    Err(Error::Divergent(_)) => Ok(f64::INFINITY),
                    Err(e) => Err(e),
                }
            })
            .collect()
    }
}

fn correlation_matrices(spatial: &SpatialModel, paths: &[PathSpec]) -> Result<Vec<ComplexMatrix>> {
    match spatial {
        SpatialModel::Uncorrelated { antennas } => Ok(vec![ComplexMatrix::identity(*antennas, *antennas); paths.len()]),
        _ => spatial.correlation_matrices(paths),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToaPoint {
    pub antennas: usize,
    pub snr_db: f64,
    pub path: usize,
    /// Root mean square of `dt / tau`.
    pub rmse: f64,
    /// Variance bound on `dt / tau`: the Rayleigh bound, or the mean
    /// conditional bound where the Rayleigh bound diverges.
    pub crb: f64,
    /// Mean over trials of the bound conditioned on the fading draw.
    pub crb_conditional: f64,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodPoint {
    pub method: SupportMethod,
    pub cadzow_iters: usize,
    pub snr_db: f64,
    pub path: usize,
    pub rmse: f64,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentA {
    pub points: Vec<ToaPoint>,
    pub methods: Vec<MethodPoint>,
}

/// Cadzow iteration counts of the estimator comparison.
pub const COMPARISON_CADZOW_ITERS: [usize; 3] = [0, 1, 3];

impl ExperimentA {
    pub fn point(&self, antennas: usize, snr_db: f64, path: usize) -> Option<&ToaPoint> {
        self.points
            .iter()
            .find(|p| p.antennas == antennas && p.snr_db == snr_db && p.path == path)
    }

    /// Highest SNR at which the RMSE exceeds ten times the root bound, or
    /// `None` if it never does.
    pub fn breakdown_snr(&self, antennas: usize, path: usize) -> Option<f64> {
        self.points
            .iter()
            .filter(|p| p.antennas == antennas && p.path == path)
            .filter(|p| p.rmse > 10.0 * p.crb.sqrt())
            .map(|p| p.snr_db)
            .fold(None, |acc: Option<f64>, s| Some(acc.map_or(s, |a| a.max(s))))
    }

    pub fn method_rmse(&self, method: SupportMethod, cadzow_iters: usize, snr_db: f64, path: usize) -> Option<f64> {
        self.methods
            .iter()
            .find(|m| m.method == method && m.cadzow_iters == cadzow_iters && m.snr_db == snr_db && m.path == path)
            .map(|m| m.rmse)
    }

    pub fn tables(&self, seed: u64, hash: &str) -> Vec<Table> {
        let mut main = Table::new(
            "experiment_a",
            &["antennas", "snr_db", "path", "rmse", "root_crb", "root_crb_conditional", "failures"],
            seed,
            hash,
        );
        for p in &self.points {
            main.push(vec![
                p.antennas.to_string(),
                fmt_f64(p.snr_db),
                p.path.to_string(),
                fmt_f64(p.rmse),
                fmt_f64(p.crb.sqrt()),
                fmt_f64(p.crb_conditional.sqrt()),
                p.failures.to_string(),
            ]);
        }
        let mut methods = Table::new(
            "experiment_a_methods",
            &["method", "cadzow_iters", "snr_db", "path", "rmse", "failures"],
            seed,
            hash,
        );
        for m in &self.methods {
            methods.push(vec![
                method_name(m.method).into(),
                m.cadzow_iters.to_string(),
                fmt_f64(m.snr_db),
                m.path.to_string(),
                fmt_f64(m.rmse),
                m.failures.to_string(),
            ]);
        }
        vec![main, methods]
    }
}

fn method_name(m: SupportMethod) -> &'static str {
    match m {
        SupportMethod::Prony => "prony",
        SupportMethod::Esprit => "esprit",
    }
}

/// Experiment A: RMSE of both paths against the single-path Rayleigh bound
/// for each antenna count, plus the Prony/ESPRIT/Cadzow comparison.
pub fn run_experiment_a(cfg: &ExperimentConfig) -> Result<ExperimentA> {
    cfg.validate()?;
    let paths = cfg.channel.paths.clone();
    let mut points = Vec::new();
    let mut methods = Vec::new();
    for &p in &cfg.experiment.antenna_counts {
        let spatial = SpatialModel::Uncorrelated { antennas: p };
        let mut estimators = vec![cfg.estimator];
        let compare = p == cfg.experiment.comparison_antennas;
        if compare {
            for method in [SupportMethod::Esprit, SupportMethod::Prony] {
                for iters in COMPARISON_CADZOW_ITERS {
                    estimators.push(EstimatorConfig { method, cadzow_iters: iters, ..cfg.estimator });
                }
            }
        }
        let sweep = ToaSweep::new(cfg, paths.clone(), &spatial, 0.0, estimators.clone())?;
        let (mse, failures, conditional) = sweep.run(0xa000 + p as u64)?;
        let rayleigh = if p >= 2 { Some(sweep.separable_bounds(&spatial)?) } else { None };
        for (si, &snr) in cfg.snr_db.iter().enumerate() {
            let s2 = sweep.sigma2[si];
            for k in 0..paths.len() {
                let cond = conditional[k] * s2;
                points.push(ToaPoint {
                    antennas: p,
                    snr_db: snr,
                    path: k,
                    rmse: mse[si][0][k].sqrt(),
                    crb: rayleigh.as_ref().map_or(cond, |r| r[k] * s2),
                    crb_conditional: cond,
                    failures: failures[si][0],
                });
                if compare {
                    for (ei, e) in estimators.iter().enumerate().skip(1) {
                        methods.push(MethodPoint {
                            method: e.method,
                            cadzow_iters: e.cadzow_iters,
                            snr_db: snr,
                            path: k,
                            rmse: mse[si][ei][k].sqrt(),
                            failures: failures[si][ei],
                        });
                    }
                }
            }
        }
    }
    Ok(ExperimentA { points, methods })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationPoint {
    /// Second-path offset in sampling steps.
    pub separation: f64,
    pub epsilon: f64,
    pub snr_db: f64,
    pub path: usize,
    pub rmse: f64,
    pub crb_separable: f64,
    pub crb_full: f64,
    pub crb_full_stderr: f64,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentB {
    pub points: Vec<SeparationPoint>,
}

impl ExperimentB {
    /// `10 log10(full / separable)` for path `path` at `separation`.
    pub fn bound_gap_db(&self, separation: f64, path: usize) -> Option<f64> {
        self.points
            .iter()
            .find(|p| p.separation == separation && p.path == path)
            .map(|p| db(p.crb_full / p.crb_separable))
    }

    pub fn table(&self, seed: u64, hash: &str) -> Table {
        let mut t = Table::new(
            "experiment_b",
            &[
                "separation_steps",
                "epsilon",
                "snr_db",
                "path",
                "rmse",
                "root_crb_separable",
                "root_crb_full",
                "crb_full_stderr",
                "failures",
            ],
            seed,
            hash,
        );
        for p in &self.points {
            t.push(vec![
                fmt_f64(p.separation),
                fmt_f64(p.epsilon),
                fmt_f64(p.snr_db),
                p.path.to_string(),
                fmt_f64(p.rmse),
                fmt_f64(p.crb_separable.sqrt()),
                fmt_f64(p.crb_full.sqrt()),
                fmt_f64(p.crb_full_stderr),
                p.failures.to_string(),
            ]);
        }
        t
    }
}

/// Experiment B: two equal paths at each separation and ToA mismatch,
/// against the separable and the full Monte-Carlo bounds.
pub fn run_experiment_b(cfg: &ExperimentConfig) -> Result<ExperimentB> {
    cfg.validate()?;
    let first = *cfg
        .channel
        .paths
        .first()
        .ok_or_else(|| Error::Config("experiment B needs channel.paths[0]".into()))?;
    let antennas = cfg.channel.antennas;
    let spatial = SpatialModel::Uncorrelated { antennas };
    let estimator = EstimatorConfig { k: 2, ..cfg.estimator };
    let step = cfg.kernel.step();
    let mut points = Vec::new();
    for (si, &sep) in cfg.experiment.separations.iter().enumerate() {
        let second = PathSpec::new(first.toa + sep * step, first.expected_amplitude);
        let paths = vec![PathSpec::new(first.toa, first.expected_amplitude), second];
        let domain = PilotDomain::new(&cfg.kernel, cfg.pilots.m, cfg.pilots.gap(), 1.0)?;
        let full = crb_monte_carlo(
            &spatial,
            &domain.dilate(&paths),
            domain.sigma2,
            &domain.kernel,
            cfg.experiment.fisher_draws.max(1),
            split_seed(cfg.seed, 0xbf00 + si as u64),
            cfg.execution,
        )?;
        for (ei, &eps) in cfg.experiment.epsilons.iter().enumerate() {
            let sweep = ToaSweep::new(cfg, paths.clone(), &spatial, eps, vec![estimator])?;
            let separable = sweep.separable_bounds(&spatial)?;
            let (mse, failures, _) = sweep.run(0xb000 + (si * 64 + ei) as u64)?;
            for (gi, &snr) in cfg.snr_db.iter().enumerate() {
                let s2 = sweep.sigma2[gi];
                for k in 0..2 {
                    points.push(SeparationPoint {
                        separation: sep,
                        epsilon: eps,
                        snr_db: snr,
                        path: k,
                        rmse: mse[gi][0][k].sqrt(),
                        crb_separable: separable[k] * s2,
                        crb_full: domain.undilate(full.toa[k]) * s2,
                        crb_full_stderr: domain.undilate(full.toa_stderr[k]) * s2,
                        failures: failures[gi][0],
                    });
                }
            }
        }
    }
    Ok(ExperimentB { points })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SerPoint {
    pub method: ChannelMethod,
    pub snr_db: f64,
    pub ser: f64,
    pub errors: u64,
    pub symbols: u64,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentC {
    pub points: Vec<SerPoint>,
}

impl ExperimentC {
    pub fn ser(&self, method: ChannelMethod, snr_db: f64) -> Option<f64> {
        self.points
            .iter()
            .find(|p| p.method == method && p.snr_db == snr_db)
            .map(|p| p.ser)
    }

    pub fn table(&self, seed: u64, hash: &str) -> Table {
        let mut t = Table::new(
            "experiment_c",
            &["method", "snr_db", "ser", "errors", "symbols", "failures"],
            seed,
            hash,
        );
        for p in &self.points {
            t.push(vec![
                p.method.name().into(),
                fmt_f64(p.snr_db),
                fmt_f64(p.ser),
                p.errors.to_string(),
                p.symbols.to_string(),
                p.failures.to_string(),
            ]);
        }
        t
    }
}

/// Gray-mapped unit-energy 4-QAM symbol of two bits.
pub fn qam4(bits: u8) -> Complex64 {
    let re = if bits & 1 == 0 { 1.0 } else { -1.0 };
    let im = if bits & 2 == 0 { 1.0 } else { -1.0 };
    Complex64::new(re, im) * FRAC_1_SQRT_2
}

/// Hard 4-QAM decision, inverse of [`qam4`].
pub fn qam4_decide(x: Complex64) -> u8 {
    (x.re < 0.0) as u8 | (((x.im < 0.0) as u8) << 1)
}

/// Channel estimate at every in-band index `-M..=M` (rows) and antenna.
fn estimate_channel(
    method: ChannelMethod,
    y: &ComplexMatrix,
    cfg: &ExperimentConfig,
    half: &PilotLayout,
) -> Result<ComplexMatrix> {
    let kernel = &cfg.kernel;
    let tau = kernel.tau;
    let m = kernel.m as i64;
    let width = kernel.width();
    let p = y.ncols();
    let full = || extract_channel_dft(y, &cfg.pilots, kernel);
    match method {
        ChannelMethod::ScsFri => {
            let est = scs_fri(&full()?, &cfg.estimator, tau)?;
            Ok(ComplexMatrix::from_fn(width, p, |r, a| est.response(a, r as i64 - m, tau)))
        }
        ChannelMethod::ScsFriHalfPilots => {
            let est = scs_fri(&extract_channel_dft(y, half, kernel)?, &cfg.estimator, tau)?;
            Ok(ComplexMatrix::from_fn(width, p, |r, a| est.response(a, r as i64 - m, tau)))
        }
        ChannelMethod::FriIndependent => {
            let est = fri_independent(&full()?, &cfg.estimator, tau)?;
            Ok(ComplexMatrix::from_fn(width, p, |r, a| est.response(a, r as i64 - m, tau)))
        }
        ChannelMethod::Lowpass => Ok(lowpass_interpolate(&full()?, kernel)?.values),
    }
}

/// Experiment C: uncoded 4-QAM symbol error rate after per-carrier
/// zero-forcing with each channel estimator.
pub fn run_experiment_c(cfg: &ExperimentConfig) -> Result<ExperimentC> {
    cfg.validate()?;
    let kernel = &cfg.kernel;
    let paths = cfg.channel.paths();
    let fading = PathFading::new(&paths, &cfg.channel.spatial())?;
    let half = cfg.pilots.clone().with_pilot_count(cfg.experiment.half_pilot_count);
    let pilots = cfg.pilots.pilot_indices(kernel)?;
    let m = kernel.m as i64;
    let data: Vec<i64> = (-m..=m).filter(|i| !pilots.contains(i)).collect();
    let sigma2: Vec<f64> = cfg.snr_db.iter().map(|&s| noise_variance(&paths, kernel, s)).collect();
    let methods = &cfg.experiment.methods;
    let base = split_seed(cfg.seed, 0xc000);
    let n = kernel.n;

    let trial = |i: usize| -> Result<Vec<Vec<(u64, bool)>>> {
        let mut rng = trial_rng(base, i as u64);
        let real = fading.sample(kernel, cfg.epsilon, &mut rng)?;
        let mut bits = vec![0u8; n];
        let mut symbols = vec![Complex64::new(1.0, 0.0); n];
        for &d in &data {
            let bin = crate::channel::index_to_bin(d, n);
            bits[bin] = rng.random_range(0..4u8);
            symbols[bin] = qam4(bits[bin]);
        }
        let clean = transmit(&real, &symbols, 0.0, &mut rng)?;
        let noise = white_noise(n, real.antenna_count(), &mut rng);
        let mut out = Vec::with_capacity(sigma2.len());
        for &s2 in &sigma2 {
            let y = &clean + &noise * Complex64::new(s2.sqrt(), 0.0);
            let spectrum = dft_columns(&y) * Complex64::new(kernel.width() as f64, 0.0);
            let mut per_method = Vec::with_capacity(methods.len());
            for &method in methods {
                let Ok(h) = estimate_channel(method, &y, cfg, &half) else {
                    per_method.push((data.len() as u64, true));
                    continue;
                };
                let errors = data
                    .iter()
                    .filter(|&&d| {
                        let bin = crate::channel::index_to_bin(d, n);
                        let row = (d + m) as usize;
                        let (mut num, mut den) = (Complex64::new(0.0, 0.0), 0.0);
                        for a in 0..h.ncols() {
                            num += h[(row, a)].conj() * spectrum[(bin, a)];
                            den += h[(row, a)].norm_sqr();
                        }
                        den == 0.0 || qam4_decide(num / den) != bits[bin]
                    })
                    .count();
                per_method.push((errors as u64, false));
            }
            out.push(per_method);
        }
        Ok(out)
    };

    let results: Vec<Vec<Vec<(u64, bool)>>> = map_trials(cfg.execution, cfg.trials, trial)
        .into_iter()
        .collect::<Result<_>>()?;
    let symbols = (data.len() * cfg.trials) as u64;
    let mut points = Vec::new();
    for (si, &snr) in cfg.snr_db.iter().enumerate() {
        for (mi, &method) in methods.iter().enumerate() {
            let errors: u64 = results.iter().map(|r| r[si][mi].0).sum();
            let failures = results.iter().filter(|r| r[si][mi].1).count();
            points.push(SerPoint {
                method,
                snr_db: snr,
                ser: errors as f64 / symbols as f64,
                errors,
                symbols,
                failures,
            });
        }
    }
    Ok(ExperimentC { points })
}

/// Closed-form bound table over the SNR grid for every configured path:
/// the scattered-pilot time bound averaged over Rayleigh fading, the same
/// bound at the expected channel energy, and the gain bound at the expected
/// per-antenna power.
pub fn crb_table(cfg: &ExperimentConfig) -> Result<Table> {
    cfg.validate()?;
    let paths = cfg.channel.paths();
    let spatial = cfg.channel.spatial();
    let antennas = cfg.channel.antenna_count();
    let inverse_means: Vec<f64> = correlation_matrices(&spatial, &paths)?
        .iter()
        .map(|r| {
            let (eigs, _) = hermitian_eigen(r)?;
            let clipped: Vec<f64> = eigs.iter().map(|e| e.max(0.0)).collect();
            match expected_inverse_quadratic(&clipped) {
                Ok(v) => Ok(v),
                Err(Error::Divergent(_)) => Ok(f64::INFINITY),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let mut t = Table::new(
        "crb",
        &["snr_db", "path", "bound_toa", "bound_toa_deterministic", "bound_amp", "trials", "stderr"],
        cfg.seed,
        &cfg.hash(),
    );
    let gap = cfg.pilots.gap();
    for &snr in &cfg.snr_db {
        let domain = PilotDomain::new(&cfg.kernel, cfg.pilots.m, gap, noise_variance(&paths, &cfg.kernel, snr))?;
        let bt = domain.kernel.width() as f64 / domain.kernel.n as f64;
        for (k, p) in paths.iter().enumerate() {
            let a2 = p.expected_amplitude.powi(2);
            let psnr_inv = domain.sigma2 / a2;
            let deterministic = crb_scattered(
                cfg.pilots.m,
                gap,
                bt,
                domain.sigma2 / (2.0 * a2 * antennas as f64),
                &[psnr_inv],
                Regime::Deterministic,
            )?;
            let rayleigh = if inverse_means[k].is_finite() {
                crb_scattered(cfg.pilots.m, gap, bt, domain.sigma2 / (2.0 * a2) * inverse_means[k], &[psnr_inv], Regime::RayleighSeparable)?.toa[0]
            } else {
                f64::INFINITY
            };
            t.push(vec![
                fmt_f64(snr),
                k.to_string(),
                fmt_f64(rayleigh),
                fmt_f64(deterministic.toa[0]),
                fmt_f64(deterministic.amplitude[0]),
                "0".into(),
                String::new(),
            ]);
        }
    }
    Ok(t)
}
