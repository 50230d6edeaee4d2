//! Repeated-sampling studies.
//!
//! Every replication draws from its own ChaCha stream keyed by
//! `(seed, cell, replication)`, so results do not depend on how rayon
//! schedules the work.

pub mod coverage;
pub mod sampling;
pub mod studies;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;

pub use coverage::{coverage_deterministic, coverage_mc, CoverageEntry, CoverageMethod, CoverageReport, CoverageSpec};
pub use sampling::{
    sample_conditional, ConditionalSample, ExpFamSampler, NormalDraw, NormalSampler, SelectiveSampler, UnknownVarSampler,
    DEFAULT_FLOOR,
};

/// Generator for replication `rep` of grid cell `cell`.
pub fn rng_for(seed: u64, cell: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((cell << 32) | (rep & 0xffff_ffff));
    rng
}

/// Runs `reps` independent replications in parallel, in order.
pub fn replicate<T, F>(reps: usize, seed: u64, cell: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> Result<T> + Sync,
{
    (0..reps)
        .into_par_iter()
        .map(|r| f(&mut rng_for(seed, cell, r as u64), r))
        .collect()
}

/// Binomial standard error of a proportion.
pub fn proportion_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Kolmogorov–Smirnov distance between the empirical law of `values` and
/// the uniform distribution on (0, 1).
pub fn ks_uniform(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let x = x.clamp(0.0, 1.0);
            ((i as f64 + 1.0) / n - x).max(x - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov–Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic Kolmogorov critical value `c(level)` with
/// `P(sup |B| > c) = level` for a Brownian bridge.
pub fn kolmogorov_critical(level: f64) -> f64 {
    (-0.5 * (level / 2.0).ln()).sqrt()
}

/// Empirical distribution function of `values` evaluated on `grid`.
pub fn ecdf_on_grid(values: &[f64], grid: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    grid.iter()
        .map(|&g| v.partition_point(|&x| x <= g) as f64 / n)
        .collect()
}
