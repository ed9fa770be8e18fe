//! `scsfri` command line.
//!
//! Exit status: 0 on success, 2 for usage and configuration errors, 3 for
//! numerical failures.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use super::config::ExperimentConfig;
use super::experiments::{crb_table, noise_variance, run_experiment_a, run_experiment_b, run_experiment_c};
use super::table::{fmt_f64, read_csv, OutputFormat, Table};
use crate::channel::{sample_received, PathFading};
use crate::estimator::scs_fri;
use crate::parallel::{configure_threads_from_env, split_seed, trial_rng};
use crate::pilots::{extract_channel_dft, wht_dft_pilot_map, PilotCoefficients};
use crate::{ComplexMatrix, Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "scsfri", version, about = "Sparse common-support FRI channel estimation")]
struct Cli {
    /// TOML configuration; defaults to the built-in reference setup (or the
    /// experiment's own defaults).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    #[arg(long, global = true, value_name = "N")]
    trials: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Experiment {
    A,
    B,
    C,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw one channel and write its paths, noisy samples and pilot coefficients.
    Simulate {
        /// Global input SNR in dB; defaults to the first grid point.
        #[arg(long)]
        snr: Option<f64>,
    },
    /// Run SCS-FRI on a pilot coefficient file (columns index, antenna, re, im).
    Estimate {
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
    },
    /// Tabulate the closed-form bounds over the SNR grid.
    Crb,
    /// Run one of the Monte-Carlo experiments.
    Experiment {
        #[arg(value_enum)]
        which: Experiment,
    },
    /// Print the WHT code / DFT column pairs spanning the same pilot subspace.
    WhtMap { n: u32, ell: u32 },
}

/// Runs the command line; returns the process exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return EXIT_CONFIG;
            }
            let _ = write!(stdout, "{}", e.render());
            return EXIT_OK;
        }
    };
    configure_threads_from_env();
    match execute(&cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_config() {
                EXIT_CONFIG
            } else {
                EXIT_NUMERICAL
            }
        }
    }
}

fn resolve_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            let name = match cli.command {
                Command::Experiment { which: Experiment::B } => "b",
                Command::Experiment { which: Experiment::C } => "c",
                _ => "a",
            };
            ExperimentConfig::builtin(name).expect("built-in configuration")
        }
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.trials = trials;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_tables(tables: &[Table], cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    for t in tables {
        let path = t.write(&cli.out, cli.format)?;
        writeln!(stdout, "wrote {}", path.display())?;
    }
    Ok(())
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    if let Command::WhtMap { n, ell } = cli.command {
        let (wht, dft) = wht_dft_pilot_map(n, ell)?;
        let list = |v: &[usize]| v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
        writeln!(stdout, "WHT {{{}}} <-> DFT {{{}}}", list(&wht), list(&dft))?;
        return Ok(());
    }
    let cfg = resolve_config(cli)?;
    let hash = cfg.hash();
    let tables = match &cli.command {
        Command::Simulate { snr } => simulate(&cfg, snr.unwrap_or(cfg.snr_db[0]), &hash)?,
        Command::Estimate { input } => vec![estimate(&cfg, input, &hash)?],
        Command::Crb => vec![crb_table(&cfg)?],
        Command::Experiment { which: Experiment::A } => run_experiment_a(&cfg)?.tables(cfg.seed, &hash),
        Command::Experiment { which: Experiment::B } => vec![run_experiment_b(&cfg)?.table(cfg.seed, &hash)],
        Command::Experiment { which: Experiment::C } => vec![run_experiment_c(&cfg)?.table(cfg.seed, &hash)],
        Command::WhtMap { .. } => unreachable!(),
    };
    write_tables(&tables, cli, stdout)
}

fn complex_table(name: &str, first: &str, rows: &ComplexMatrix, label: impl Fn(usize) -> String, seed: u64, hash: &str) -> Table {
    let mut t = Table::new(name, &[first, "antenna", "re", "im"], seed, hash);
    for p in 0..rows.ncols() {
        for r in 0..rows.nrows() {
            let v = rows[(r, p)];
            t.push(vec![label(r), p.to_string(), fmt_f64(v.re), fmt_f64(v.im)]);
        }
    }
    t
}

fn simulate(cfg: &ExperimentConfig, snr_db: f64, hash: &str) -> Result<Vec<Table>> {
    let paths = cfg.channel.paths();
    let fading = PathFading::new(&paths, &cfg.channel.spatial())?;
    let mut rng = trial_rng(split_seed(cfg.seed, 0x5100), 0);
    let real = fading.sample(&cfg.kernel, cfg.epsilon, &mut rng)?;
    let y = sample_received(&real, noise_variance(&paths, &cfg.kernel, snr_db), &mut rng)?;
    let coeffs = extract_channel_dft(&y, &cfg.pilots, &cfg.kernel)?;

    let mut truth = Table::new("paths", &["path", "antenna", "toa", "gain_re", "gain_im"], cfg.seed, hash);
    for p in 0..real.antenna_count() {
        for k in 0..real.path_count() {
            let c = real.gains[(k, p)];
            truth.push(vec![k.to_string(), p.to_string(), fmt_f64(real.toas[(k, p)]), fmt_f64(c.re), fmt_f64(c.im)]);
        }
    }
    let samples = complex_table("samples", "sample", &y, |r| r.to_string(), cfg.seed, hash);
    let pilot = complex_table("coefficients", "index", &coeffs.values, |r| coeffs.index(r).to_string(), cfg.seed, hash);
    Ok(vec![truth, samples, pilot])
}

/// Reads a coefficient table (columns `index`, `antenna`, `re`, `im`) whose
/// indices form an arithmetic progression.
pub fn read_coefficients(path: &Path) -> Result<PilotCoefficients> {
    let (header, rows) = read_csv(path)?;
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("{}: missing column {name}", path.display())))
    };
    let (ci, ca, cr, cm) = (col("index")?, col("antenna")?, col("re")?, col("im")?);
    let parse_err = |e: &dyn std::fmt::Display| Error::Config(format!("{}: {e}", path.display()));
    let mut entries = Vec::with_capacity(rows.len());
    for r in &rows {
        let index: i64 = r[ci].parse().map_err(|e| parse_err(&e))?;
        let antenna: usize = r[ca].parse().map_err(|e| parse_err(&e))?;
        let re: f64 = r[cr].parse().map_err(|e| parse_err(&e))?;
        let im: f64 = r[cm].parse().map_err(|e| parse_err(&e))?;
        entries.push((index, antenna, Complex64::new(re, im)));
    }
    let mut indices: Vec<i64> = entries.iter().map(|e| e.0).collect();
    indices.sort_unstable();
    indices.dedup();
    let antennas = entries.iter().map(|e| e.1 + 1).max().unwrap_or(0);
    if indices.is_empty() || entries.len() != indices.len() * antennas {
        return Err(Error::Config(format!("{}: expected one value per index and antenna", path.display())));
    }
    let gap = if indices.len() > 1 { indices[1] - indices[0] } else { 1 };
    if gap <= 0 || indices.windows(2).any(|w| w[1] - w[0] != gap) {
        return Err(Error::Config(format!("{}: indices are not equally spaced", path.display())));
    }
    let mut values = ComplexMatrix::zeros(indices.len(), antennas);
    for (index, antenna, v) in entries {
        values[(((index - indices[0]) / gap) as usize, antenna)] = v;
    }
    PilotCoefficients::new(indices[0], gap as usize, values)
}

fn estimate(cfg: &ExperimentConfig, input: &Path, hash: &str) -> Result<Table> {
    let coeffs = read_coefficients(input)?;
    let est = scs_fri(&coeffs, &cfg.estimator, cfg.kernel.tau)?;
    let mut t = Table::new("estimate", &["path", "antenna", "toa", "gain_re", "gain_im"], cfg.seed, hash);
    for p in 0..est.amplitudes.ncols() {
        for (k, &toa) in est.support.toas.iter().enumerate() {
            let c = est.amplitudes[(k, p)];
            t.push(vec![k.to_string(), p.to_string(), fmt_f64(toa), fmt_f64(c.re), fmt_f64(c.im)]);
        }
    }
    Ok(t)
}
