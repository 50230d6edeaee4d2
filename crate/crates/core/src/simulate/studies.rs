//! Drivers for the published simulation experiments.


use rand::RngCore;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::expfam::{ExpFamModel1D, ExpFamily, SelectionRule};
use crate::multiparam::mh::{credible_interval, curvature_scales, mh_sample, MHConfig};
use crate::multiparam::unknown_var::inverse_sd;
use crate::multiparam::{UnknownVarModel, UnknownVarPrior, WinnerLikelihood, WinnerModel};
use crate::normal::{PosteriorMode, SplitNormalModel};
use crate::prior::PriorKind;
use crate::simulate::coverage::CoverageEntry;
use crate::simulate::sampling::{sample_conditional, ExpFamSampler, NormalSampler, UnknownVarSampler, DEFAULT_FLOOR};
use crate::simulate::{ks_uniform, proportion_se, replicate};
use crate::special::norm_cdf;

/// Random versus fixed parameter comparison: `Y | θ ~ N(θ, 1/n)`, prior
/// `N(mean, sd²)`, selection `Y > t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Fig1Study {
    pub n: f64,
    pub t: f64,
    pub prior_mean: f64,
    pub prior_sd: f64,
    pub level: f64,
    pub thetas: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
}

impl Fig1Study {
    pub fn new(thetas: Vec<f64>, reps: usize, seed: u64) -> Self {
        Fig1Study {
            n: 5.0,
            t: 0.0,
            prior_mean: 0.0,
            prior_sd: 1.0,
            level: 0.9,
            thetas,
            reps,
            seed,
        }
    }

    fn unadjusted_cdf(&self, theta: f64, y: f64) -> Result<f64> {
        let prec = self.prior_sd.powi(-2) + self.n;
        let mean = (self.prior_mean * self.prior_sd.powi(-2) + self.n * y) / prec;
        norm_cdf((theta - mean) * prec.sqrt())
    }
}

/// Coverage of equal-tailed credible intervals at one `θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig1Row {
    pub theta: f64,
    /// Unadjusted posterior, sampling without selection.
    pub nonselective: f64,
    pub nonselective_se: f64,
    /// Unadjusted posterior, sampling with selection.
    pub unadjusted: f64,
    pub unadjusted_se: f64,
    /// Selective posterior, sampling with selection.
    pub selective: f64,
    pub selective_se: f64,
}

pub fn fig1(study: &Fig1Study) -> Result<Vec<Fig1Row>> {
    if study.reps == 0 {
        return Err(Error::Config("fig1 needs at least one replication".into()));
    }
    let model = SplitNormalModel::new(study.n, 1.0, study.t)?;
    let prior = PriorKind::Normal {
        mean: study.prior_mean,
        sd: study.prior_sd,
    };
    let tail = (1.0 - study.level) / 2.0;
    let inside = |p: f64| p >= tail && p <= 1.0 - tail;
    let sd = study.n.sqrt().recip();
    let mut rows = Vec::with_capacity(study.thetas.len());
    for (ti, &theta) in study.thetas.iter().enumerate() {
        let sampler = NormalSampler { model: &model, theta };
        let hits = replicate(study.reps, study.seed, ti as u64, |rng, _| {
            let free = Normal::new(theta, sd).expect("positive sd").sample(rng);
            let y = sample_conditional(&sampler, 1, DEFAULT_FLOOR, rng)?.draws[0].combined;
            Ok([
                inside(study.unadjusted_cdf(theta, free)?),
                inside(study.unadjusted_cdf(theta, y)?),
                inside(model.posterior_cdf_at(theta, y, prior, PosteriorMode::Selective)?),
            ])
        })?;
        let frac = |k: usize| hits.iter().filter(|h| h[k]).count() as f64 / study.reps as f64;
        let (a, b, c) = (frac(0), frac(1), frac(2));
        rows.push(Fig1Row {
            theta,
            nonselective: a,
            nonselective_se: proportion_se(a, study.reps),
            unadjusted: b,
            unadjusted_se: proportion_se(b, study.reps),
            selective: c,
            selective_se: proportion_se(c, study.reps),
        });
    }
    Ok(rows)
}

/// Coverage of one-sided bounds in a split exponential-family model with
/// rule `θ̂₁ > threshold`, at the `θ₀` with selection probability `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpFamStudy {
    pub n: u64,
    pub first_fraction: f64,
    pub threshold: f64,
    pub q: f64,
    pub priors: Vec<PriorKind>,
    pub alphas: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
}

impl ExpFamStudy {
    pub fn n1(&self) -> u64 {
        (self.first_fraction * self.n as f64).round() as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpFamCoverage {
    pub family: &'static str,
    pub n: u64,
    pub n1: u64,
    pub q: f64,
    pub theta0: f64,
    pub acceptance_rate: f64,
    pub entries: Vec<(PriorKind, CoverageEntry)>,
}

impl ExpFamCoverage {
    /// `sup_α |coverage - α|` for one prior.
    pub fn sup_deviation(&self, prior: PriorKind) -> f64 {
        self.entries
            .iter()
            .filter(|(p, _)| *p == prior)
            .map(|(_, e)| e.matching_error().abs())
            .fold(0.0, f64::max)
    }

    /// `sup_α (|coverage - α| - k·SE)` for one prior.
    pub fn sup_excess(&self, prior: PriorKind, k: f64) -> f64 {
        self.entries
            .iter()
            .filter(|(p, _)| *p == prior)
            .map(|(_, e)| e.matching_error().abs() - k * e.se)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn expfam_coverage<F: ExpFamily + Clone>(family: F, study: &ExpFamStudy, cell: u64) -> Result<ExpFamCoverage> {
    if study.reps == 0 || study.priors.is_empty() {
        return Err(Error::Config("expfam coverage needs replications and priors".into()));
    }
    let n1 = study.n1();
    if n1 == 0 || n1 > study.n {
        return Err(Error::Config(format!("first batch {n1} of {}", study.n)));
    }
    let model = ExpFamModel1D::new(family, n1, study.n - n1, SelectionRule::above(study.threshold))?;
    let theta0 = model.theta_for_selection_probability(study.q)?;
    let sampler = ExpFamSampler {
        model: &model,
        theta: theta0,
    };
    let out = replicate(study.reps, study.seed, cell, |rng, _| {
        let s = sample_conditional(&sampler, 1, DEFAULT_FLOOR, rng)?;
        let pits = study
            .priors
            .iter()
            .map(|&k| model.posterior_cdf_at(theta0, &s.draws[0], k))
            .collect::<Result<Vec<_>>>()?;
        Ok((pits, s.attempts))
    })?;
    let attempts: usize = out.iter().map(|o| o.1).sum();
    let mut entries = Vec::new();
    for (pi, &prior) in study.priors.iter().enumerate() {
        for &alpha in &study.alphas {
            let cov = out.iter().filter(|o| o.0[pi] <= alpha).count() as f64 / study.reps as f64;
            entries.push((
                prior,
                CoverageEntry {
                    theta: theta0,
                    alpha,
                    coverage: cov,
                    se: proportion_se(cov, study.reps),
                },
            ));
        }
    }
    Ok(ExpFamCoverage {
        family: model.family().name(),
        n: study.n,
        n1,
        q: study.q,
        theta0,
        acceptance_rate: study.reps as f64 / attempts as f64,
        entries,
    })
}

/// Calibration of marginal posteriors for a selected mean with unknown
/// variance, `c(σ²) = σ⁻¹` throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct PitStudy {
    pub n1: u64,
    pub n2: u64,
    pub t: f64,
    pub mu0: f64,
    pub sigma2_0: f64,
    pub priors: Vec<UnknownVarPrior>,
    pub reps: usize,
    pub steps: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PitResult {
    pub prior: UnknownVarPrior,
    /// `Π(μ₀ | data)` per replication.
    pub pits: Vec<f64>,
    pub ks: f64,
}

pub fn pit_ecdf(study: &PitStudy) -> Result<Vec<PitResult>> {
    if study.reps < 1 || study.priors.is_empty() {
        return Err(Error::Config("pit study needs replications and priors".into()));
    }
    let sampler = UnknownVarSampler {
        n1: study.n1,
        n2: study.n2,
        t: study.t,
        mu: study.mu0,
        sigma2: study.sigma2_0,
    };
    let per_rep = replicate(study.reps, study.seed, 0, |rng, r| {
        let stats = sample_conditional(&sampler, 1, DEFAULT_FLOOR, rng)?.draws[0];
        let model = UnknownVarModel::new(study.n1, study.n2, study.t, stats)?;
        let init = [model.pooled_mean(), model.pooled_var().ln()];
        study
            .priors
            .iter()
            .enumerate()
            .map(|(pi, &kind)| {
                let lt = |x: &[f64]| model.log_posterior(kind, &inverse_sd, x[0], x[1]);
                let scales = curvature_scales(lt, &init, 0.1)?;
                let cfg = MHConfig::new(study.steps, scales, study.seed ^ MH_SEED_SALT)
                    .with_stream(((pi as u64 + 1) << 32) | r as u64);
                Ok(mh_sample(lt, &init, &cfg)?.cdf_at(0, study.mu0))
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    Ok(study
        .priors
        .iter()
        .enumerate()
        .map(|(pi, &prior)| {
            let pits: Vec<f64> = per_rep.iter().map(|v| v[pi]).collect();
            let ks = ks_uniform(&pits);
            PitResult { prior, pits, ks }
        })
        .collect())
}

const MH_SEED_SALT: u64 = 0x6d68_5f63_6861_696e;

/// Inference for the winner of `m` arms at `θ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct WinnerStudy {
    pub ms: Vec<usize>,
    pub n1: f64,
    pub n2: f64,
    pub kinds: Vec<WinnerLikelihood>,
    pub level: f64,
    pub reps: usize,
    pub steps: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WinnerRow {
    pub m: usize,
    pub kind: WinnerLikelihood,
    pub coverage: f64,
    pub coverage_se: f64,
    pub mean_length: f64,
    pub length_se: f64,
}

/// Arm means with the winner moved to the front, and its follow-up mean.
pub fn draw_winner_data(m: usize, n1: f64, n2: f64, rng: &mut dyn RngCore) -> (Vec<f64>, f64) {
    let first = Normal::new(0.0, n1.sqrt().recip()).expect("positive sd");
    let mut means: Vec<f64> = (0..m).map(|_| first.sample(rng)).collect();
    let w = (0..m).fold(0, |b, i| if means[i] > means[b] { i } else { b });
    means.swap(0, w);
    let follow = Normal::new(0.0, n2.sqrt().recip()).expect("positive sd").sample(rng);
    (means, follow)
}

pub fn winner_study(study: &WinnerStudy) -> Result<Vec<WinnerRow>> {
    if study.reps == 0 || study.kinds.is_empty() {
        return Err(Error::Config("winner study needs replications and likelihoods".into()));
    }
    let mut rows = Vec::new();
    for (mi, &m) in study.ms.iter().enumerate() {
        if m < 2 {
            return Err(Error::Config(format!("m = {m}; need at least two arms")));
        }
        let per_rep = replicate(study.reps, study.seed, mi as u64, |rng, r| {
            let (means, follow) = draw_winner_data(m, study.n1, study.n2, rng);
            study
                .kinds
                .iter()
                .enumerate()
                .map(|(ki, &kind)| {
                    let model = WinnerModel::new(study.n1, study.n2, means.clone(), follow, kind)?;
                    let mut init = means.clone();
                    init[0] = model.pooled_winner_mean();
                    let lt = |x: &[f64]| model.log_posterior(x);
                    let scales = curvature_scales(lt, &init, 0.3)?;
                    let cfg = MHConfig::new(study.steps, scales, study.seed ^ MH_SEED_SALT)
                        .with_stream(((mi as u64) << 40) | ((ki as u64 + 1) << 32) | r as u64);
                    let (lo, hi) = credible_interval(&mh_sample(lt, &init, &cfg)?, 0, study.level);
                    Ok((lo <= 0.0 && 0.0 <= hi, hi - lo))
                })
                .collect::<Result<Vec<_>>>()
        })?;
        for (ki, &kind) in study.kinds.iter().enumerate() {
            let n = study.reps as f64;
            let cov = per_rep.iter().filter(|v| v[ki].0).count() as f64 / n;
            let lens: Vec<f64> = per_rep.iter().map(|v| v[ki].1).collect();
            let mean = lens.iter().sum::<f64>() / n;
            let var = lens.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
            rows.push(WinnerRow {
                m,
                kind,
                coverage: cov,
                coverage_se: proportion_se(cov, study.reps),
                mean_length: mean,
                length_se: (var / n).sqrt(),
            });
        }
    }
    Ok(rows)
}
