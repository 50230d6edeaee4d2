//! Rejection samplers for selective models.

use rand::RngCore;
use rand_distr::{Distribution, Gamma, Normal};

use crate::error::{Error, Result};
use crate::expfam::{ExpFamModel1D, ExpFamily, SplitSample};
use crate::multiparam::{UnknownVarModel, UnknownVarStats};
use crate::normal::SplitNormalModel;

/// Smallest selection probability the samplers accept.
pub const DEFAULT_FLOOR: f64 = 1e-3;
const CAP_FACTOR: f64 = 10.0;

/// A model that can simulate unconditionally and decide selection.
pub trait SelectiveSampler {
    type Draw;
    fn draw(&self, rng: &mut dyn RngCore) -> Result<Self::Draw>;
    fn selected(&self, draw: &Self::Draw) -> Result<bool>;
}

/// Accepted draws and the number of unconditional draws spent.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalSample<D> {
    pub draws: Vec<D>,
    pub attempts: usize,
}

impl<D> ConditionalSample<D> {
    pub fn acceptance_rate(&self) -> f64 {
        self.draws.len() as f64 / self.attempts as f64
    }
}

/// Rejection sampling with at most `count / floor × 10` attempts.
pub fn sample_conditional<S: SelectiveSampler>(
    sampler: &S,
    count: usize,
    floor: f64,
    rng: &mut dyn RngCore,
) -> Result<ConditionalSample<S::Draw>> {
    if !(floor > 0.0 && floor <= 1.0) {
        return Err(Error::Config(format!("acceptance floor {floor} outside (0, 1]")));
    }
    let cap = ((count as f64 / floor) * CAP_FACTOR).ceil() as usize;
    let mut draws = Vec::with_capacity(count);
    let mut attempts = 0;
    while draws.len() < count {
        if attempts >= cap {
            let rate = draws.len() as f64 / attempts as f64;
            return Err(Error::LowAcceptance {
                accepted: draws.len(),
                attempts,
                rate,
                floor,
            });
        }
        attempts += 1;
        let d = sampler.draw(rng)?;
        if sampler.selected(&d)? {
            draws.push(d);
        }
    }
    Ok(ConditionalSample { draws, attempts })
}

/// One draw of the split normal model: first-batch mean and the combined
/// observation `γY₁ + (1 - γ)Y₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalDraw {
    pub first: f64,
    pub combined: f64,
}

pub struct NormalSampler<'a> {
    pub model: &'a SplitNormalModel<f64>,
    pub theta: f64,
}

impl SelectiveSampler for NormalSampler<'_> {
    type Draw = NormalDraw;

    fn draw(&self, rng: &mut dyn RngCore) -> Result<NormalDraw> {
        let m = self.model;
        let first = Normal::new(self.theta, m.n1().sqrt().recip())
            .map_err(|e| Error::domain("NormalSampler", e.to_string()))?
            .sample(rng);
        let combined = if m.is_truncated() {
            first
        } else {
            let second = Normal::new(self.theta, m.n2().sqrt().recip())
                .map_err(|e| Error::domain("NormalSampler", e.to_string()))?
                .sample(rng);
            m.gamma() * first + (1.0 - m.gamma()) * second
        };
        Ok(NormalDraw { first, combined })
    }

    fn selected(&self, d: &NormalDraw) -> Result<bool> {
        Ok(d.first > self.model.t())
    }
}

pub struct ExpFamSampler<'a, F> {
    pub model: &'a ExpFamModel1D<F>,
    pub theta: f64,
}

impl<F: ExpFamily> SelectiveSampler for ExpFamSampler<'_, F> {
    type Draw = SplitSample;

    fn draw(&self, mut rng: &mut dyn RngCore) -> Result<SplitSample> {
        let fam = self.model.family();
        let stat1 = fam.sample_stat_sum(self.theta, self.model.n1(), &mut rng);
        let stat2 = if self.model.n2() > 0 {
            fam.sample_stat_sum(self.theta, self.model.n2(), &mut rng)
        } else {
            0.0
        };
        Ok(SplitSample { stat1, stat2 })
    }

    fn selected(&self, d: &SplitSample) -> Result<bool> {
        self.model.is_selected(d.stat1)
    }
}

/// Normal data with unknown variance, selected by the first-batch t-test.
pub struct UnknownVarSampler {
    pub n1: u64,
    pub n2: u64,
    pub t: f64,
    pub mu: f64,
    pub sigma2: f64,
}

impl UnknownVarSampler {
    fn batch(&self, n: u64, rng: &mut dyn RngCore) -> Result<(f64, f64)> {
        if n == 0 {
            return Ok((0.0, 0.0));
        }
        let nf = n as f64;
        let mean = Normal::new(self.mu, (self.sigma2 / nf).sqrt())
            .map_err(|e| Error::domain("UnknownVarSampler", e.to_string()))?
            .sample(rng);
        let var = if n >= 2 {
            let chi2 = Gamma::new((nf - 1.0) / 2.0, 2.0)
                .map_err(|e| Error::domain("UnknownVarSampler", e.to_string()))?
                .sample(rng);
            self.sigma2 * chi2 / nf
        } else {
            0.0
        };
        Ok((mean, var))
    }
}

impl SelectiveSampler for UnknownVarSampler {
    type Draw = UnknownVarStats;

    fn draw(&self, rng: &mut dyn RngCore) -> Result<UnknownVarStats> {
        let (mean1, var1) = self.batch(self.n1, rng)?;
        let (mean2, var2) = self.batch(self.n2, rng)?;
        Ok(UnknownVarStats {
            mean1,
            var1,
            mean2,
            var2,
        })
    }

    fn selected(&self, d: &UnknownVarStats) -> Result<bool> {
        Ok(UnknownVarModel::selected(self.n1, self.t, d))
    }
}
