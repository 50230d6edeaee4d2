//! Coverage of one-sided posterior credible bounds.

use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::normal::{PosteriorMode, SplitNormalModel};
use crate::numeric::roots::{bracket_monotone, brent};
use crate::prior::PriorKind;
use crate::simulate::sampling::{sample_conditional, NormalSampler, DEFAULT_FLOOR};
use crate::simulate::{proportion_se, replicate};

/// Root tolerance on the observation solving `Π(θ₀ | y) = α`.
pub const DETERMINISTIC_YTOL: f64 = 1e-10;

/// Exact coverage of `(-∞, Π⁻¹(α | Y)]` at `θ₀` in the normal model.
///
/// `Π(θ₀ | y)` decreases in `y`, so the bound covers `θ₀` exactly when
/// `Y ≥ y_α` with `Π(θ₀ | y_α) = α`; the coverage is then `H(θ₀; y_α)`.
pub fn deterministic_coverage_cell(
    model: &SplitNormalModel<f64>,
    prior: PriorKind,
    theta0: f64,
    alpha: f64,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain("coverage", format!("alpha = {alpha} outside (0, 1)")));
    }
    let f = |y: f64| Ok(model.posterior_cdf_at(theta0, y, prior, PosteriorMode::Selective)? - alpha);
    let step = model.n().sqrt().recip();
    let (lo, start) = if model.is_truncated() {
        (model.t(), theta0.max(model.t()) + step)
    } else {
        (f64::NEG_INFINITY, theta0)
    };
    let (a, b) = bracket_monotone(f, start, step, lo, f64::INFINITY, 400)?;
    let (fa, fb) = (f(a)?, f(b)?);
    if fa < 0.0 || fb > 0.0 {
        return Err(Error::numeric(
            "coverage_deterministic",
            format!(
                "posterior cdf at theta0 = {theta0} not decreasing in y: \
                 {fa} at y = {a}, {fb} at y = {b}"
            ),
        ));
    }
    let y_alpha = brent(f, a, b, DETERMINISTIC_YTOL, 200)?;
    model.confidence_cdf(theta0, y_alpha)
}

/// Accuracy attached to deterministic coverage entries.
pub const DETERMINISTIC_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverageMethod {
    Deterministic,
    MonteCarlo,
}

/// A coverage study of one-sided bounds in the split normal model.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageSpec {
    pub model: SplitNormalModel<f64>,
    pub prior: PriorKind,
    pub thetas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    pub method: CoverageMethod,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageEntry {
    pub theta: f64,
    pub alpha: f64,
    pub coverage: f64,
    /// Monte Carlo standard error, or the numerical tolerance.
    pub se: f64,
}

impl CoverageEntry {
    /// `coverage - α`.
    pub fn matching_error(&self) -> f64 {
        self.coverage - self.alpha
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub spec: CoverageSpec,
    /// Sorted by `(θ, α)`.
    pub entries: Vec<CoverageEntry>,
    pub runtime_secs: f64,
}

impl CoverageSpec {
    fn validate(&self, alpha_one_ok: bool) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Config("replication count must be at least 1".into()));
        }
        if self.thetas.is_empty() || self.alphas.is_empty() {
            return Err(Error::Config("empty theta or alpha grid".into()));
        }
        for &a in &self.alphas {
            let ok = a > 0.0 && (a < 1.0 || (alpha_one_ok && a == 1.0));
            if !ok {
                return Err(Error::Config(format!("alpha = {a} outside (0, 1)")));
            }
        }
        Ok(())
    }
}

fn sort_entries(entries: &mut [CoverageEntry]) {
    entries.sort_by(|a, b| a.theta.total_cmp(&b.theta).then(a.alpha.total_cmp(&b.alpha)));
}

/// Coverage on the `(θ, α)` grid by root finding and the confidence
/// distribution; no simulation.
pub fn coverage_deterministic(spec: &CoverageSpec) -> Result<CoverageReport> {
    spec.validate(false)?;
    let start = Instant::now();
    let cells: Vec<(f64, f64)> = spec
        .thetas
        .iter()
        .flat_map(|&th| spec.alphas.iter().map(move |&a| (th, a)))
        .collect();
    let mut entries = cells
        .par_iter()
        .map(|&(theta, alpha)| {
            Ok(CoverageEntry {
                theta,
                alpha,
                coverage: deterministic_coverage_cell(&spec.model, spec.prior, theta, alpha)?,
                se: DETERMINISTIC_TOL,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    sort_entries(&mut entries);
    Ok(CoverageReport {
        spec: spec.clone(),
        entries,
        runtime_secs: start.elapsed().as_secs_f64(),
    })
}

/// Coverage by simulation from the selective model: the fraction of
/// replications with `Π(θ₀ | Y) ≤ α`.
pub fn coverage_mc(spec: &CoverageSpec) -> Result<CoverageReport> {
    spec.validate(true)?;
    let start = Instant::now();
    let mut entries = Vec::with_capacity(spec.thetas.len() * spec.alphas.len());
    for (ti, &theta) in spec.thetas.iter().enumerate() {
        let sampler = NormalSampler {
            model: &spec.model,
            theta,
        };
        let pits = replicate(spec.reps, spec.seed, ti as u64, |rng, _| {
            let d = sample_conditional(&sampler, 1, DEFAULT_FLOOR, rng)?.draws[0];
            spec.model
                .posterior_cdf_at(theta, d.combined, spec.prior, PosteriorMode::Selective)
        })?;
        for &alpha in &spec.alphas {
            let cov = pits.iter().filter(|&&p| p <= alpha).count() as f64 / spec.reps as f64;
            entries.push(CoverageEntry {
                theta,
                alpha,
                coverage: cov,
                se: proportion_se(cov, spec.reps),
            });
        }
    }
    sort_entries(&mut entries);
    Ok(CoverageReport {
        spec: spec.clone(),
        entries,
        runtime_secs: start.elapsed().as_secs_f64(),
    })
}
