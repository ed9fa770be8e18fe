//! Trial-level parallelism and the seed-splitting contract.
//!
//! Every Monte-Carlo trial derives its own generator from `(base_seed, index)`
//! so results do not depend on scheduling. Outputs are collected in trial order
//! and aggregated sequentially, which keeps CSV output byte-identical between
//! the sequential and the rayon paths.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "SCSFRI_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

/// Maps `f` over `0..trials`, preserving order.
///
/// Without the `parallel` feature [`Execution::Parallel`] falls back to the
/// sequential loop.
pub fn map_trials<T, F>(exec: Execution, trials: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        Execution::Sequential => (0..trials).map(f).collect(),
        Execution::Parallel => par_map(trials, f),
    }
}

#[cfg(feature = "parallel")]
fn par_map<T, F>(trials: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..trials).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map<T, F>(trials: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..trials).map(f).collect()
}

/// Installs a global rayon pool sized by `SCSFRI_THREADS`, if set.
///
/// Returns the requested thread count. Calling it twice is harmless; the second
/// pool request is ignored by rayon.
pub fn configure_threads_from_env() -> Option<usize> {
    let n = std::env::var(THREADS_ENV).ok()?.trim().parse::<usize>().ok()?;
    if n == 0 {
        return None;
    }
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Some(n)
}

/// SplitMix64 finaliser.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of sub-stream `index` of `base`: `hash(base_seed, i)`.
pub fn split_seed(base: u64, index: u64) -> u64 {
    mix64(base ^ mix64(index.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

/// Generator for sub-stream `index` of `base`.
pub fn trial_rng(base: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(split_seed(base, index))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree() {
        let f = |i: usize| split_seed(42, i as u64);
        let a = map_trials(Execution::Sequential, 257, f);
        let b = map_trials(Execution::Parallel, 257, f);
        assert_eq!(a, b);
    }

    #[test]
    fn split_seeds_differ() {
        let mut seeds: Vec<u64> = (0..1000).map(|i| split_seed(7, i)).collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), 1000);
        assert_ne!(split_seed(7, 0), split_seed(8, 0));
    }
}
