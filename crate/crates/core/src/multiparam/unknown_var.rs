//! Normal mean with unknown variance, selected by a one-sample t-test on
//! the first batch.

use crate::error::{Error, Result};
use crate::normal::SplitNormalModel;
use crate::numeric::quad::{find_mode, log_integrate_region, QuadOptions};
use crate::numeric::Fallible;
use crate::special::{ln_gamma, log_norm_cdf, norm_log_pdf, truncated_normal_variance};

/// Batch means and variance MLEs (divisor `nᵢ`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnknownVarStats {
    pub mean1: f64,
    pub var1: f64,
    pub mean2: f64,
    pub var2: f64,
}

impl UnknownVarStats {
    pub fn from_batches(first: &[f64], second: &[f64]) -> Self {
        let mv = |v: &[f64]| {
            if v.is_empty() {
                return (0.0, 0.0);
            }
            let m = v.iter().sum::<f64>() / v.len() as f64;
            (m, v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64)
        };
        let (mean1, var1) = mv(first);
        let (mean2, var2) = mv(second);
        UnknownVarStats {
            mean1,
            var1,
            mean2,
            var2,
        }
    }
}

/// Which variance enters the matching prior for `γ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarianceReading {
    FirstBatch,
    Pooled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnknownVarPrior {
    /// `c(σ²)` alone.
    Unadjusted,
    /// `c(σ²){1 + (n₁/n) h2(n₁^{1/2}μ/σ - t v₁^{1/2}/σ)}^{1/2}`.
    JeffreysBased,
    /// `c(σ²){1 - h1(σ⁻¹n^{1/2}μ - σ⁻¹t v^{1/2}) / h1(σ⁻¹n^{1/2}(μ - ȳ))}`.
    PmpGamma1(VarianceReading),
}

/// `c(σ²) = σ⁻¹`.
pub fn inverse_sd(sigma2: f64) -> f64 {
    sigma2.sqrt().recip()
}

/// `log P(n₁^{1/2} Ȳ₁ / V₁^{1/2} > t)` with `Ȳ₁ ~ N(μ, σ²/n₁)` and
/// `n₁V₁/σ² ~ χ²_{n₁-1}`.
///
/// Integrates over `w = (n₁V₁)^{1/2}/σ`, which has a chi law with `n₁ - 1`
/// degrees of freedom: `E_w Φ(n₁^{1/2}μ/σ - t w / n₁^{1/2})`.
pub fn log_tstat_selection_probability(mu: f64, sigma2: f64, n1: u64, t: f64) -> Result<f64> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) || !mu.is_finite() {
        return Err(Error::domain("tstat_selection_probability", format!("mu = {mu}, sigma2 = {sigma2}")));
    }
    if n1 < 2 {
        return Err(Error::domain("tstat_selection_probability", "n1 must be at least 2"));
    }
    if t == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    let k = (n1 - 1) as f64;
    let sqn = (n1 as f64).sqrt();
    let a = sqn * mu / sigma2.sqrt();
    let b = t / sqn;
    let log_norm = (1.0 - k / 2.0) * std::f64::consts::LN_2 - ln_gamma(k / 2.0);
    let fl = Fallible::new(|w: f64| -> Result<f64> {
        if w <= 0.0 {
            return Ok(if k == 1.0 { log_norm + log_norm_cdf(a)? } else { f64::NEG_INFINITY });
        }
        Ok(log_norm + (k - 1.0) * w.ln() - 0.5 * w * w + log_norm_cdf(a - b * w)?)
    });
    let lf = |w: f64| fl.call(w);
    let start = (k - 1.0).max(0.25).sqrt();
    let opts = QuadOptions::with_tol(1e-10, 1e-10);
    let peak = fl.finish(find_mode(lf, 0.0, f64::INFINITY, start, 0.7, 1e-6))?;
    let v = fl.finish(log_integrate_region(lf, 0.0, f64::INFINITY, peak, 0.7, &opts))?;
    Ok(v.min(0.0))
}

pub fn tstat_selection_probability(mu: f64, sigma2: f64, n1: u64, t: f64) -> Result<f64> {
    Ok(log_tstat_selection_probability(mu, sigma2, n1, t)?.exp())
}

/// The selected t-test model with stored data.
#[derive(Debug, Clone, PartialEq)]
pub struct UnknownVarModel {
    n1: u64,
    n2: u64,
    t: f64,
    stats: UnknownVarStats,
}

impl UnknownVarModel {
    pub fn new(n1: u64, n2: u64, t: f64, stats: UnknownVarStats) -> Result<Self> {
        if n1 < 2 {
            return Err(Error::domain("UnknownVarModel", "n1 must be at least 2"));
        }
        if !(stats.var1 > 0.0) {
            return Err(Error::InvalidObservation(format!("v1 = {} not positive", stats.var1)));
        }
        if n2 >= 2 && !(stats.var2 > 0.0) {
            return Err(Error::InvalidObservation(format!("v2 = {} not positive", stats.var2)));
        }
        if !Self::selected(n1, t, &stats) {
            return Err(Error::InvalidObservation(format!(
                "first batch (mean {}, v1 {}) fails the t-test at {t}",
                stats.mean1, stats.var1
            )));
        }
        Ok(UnknownVarModel { n1, n2, t, stats })
    }

    /// `v₁^{-1/2} ȳ₁ > n₁^{-1/2} t`.
    pub fn selected(n1: u64, t: f64, stats: &UnknownVarStats) -> bool {
        stats.var1 > 0.0 && (n1 as f64).sqrt() * stats.mean1 / stats.var1.sqrt() > t
    }

    pub fn n1(&self) -> u64 {
        self.n1
    }

    pub fn n2(&self) -> u64 {
        self.n2
    }

    pub fn n(&self) -> u64 {
        self.n1 + self.n2
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn stats(&self) -> &UnknownVarStats {
        &self.stats
    }

    pub fn pooled_mean(&self) -> f64 {
        let (n1, n2) = (self.n1 as f64, self.n2 as f64);
        (n1 * self.stats.mean1 + n2 * self.stats.mean2) / (n1 + n2)
    }

    /// Variance MLE from all `n` observations.
    pub fn pooled_var(&self) -> f64 {
        let (n1, n2) = (self.n1 as f64, self.n2 as f64);
        let m = self.pooled_mean();
        let s = &self.stats;
        let ss2 = if self.n2 > 0 { n2 * (s.var2 + (s.mean2 - m).powi(2)) } else { 0.0 };
        (n1 * (s.var1 + (s.mean1 - m).powi(2)) + ss2) / (n1 + n2)
    }

    fn check_sigma2(sigma2: f64) -> Result<()> {
        if sigma2 > 0.0 && sigma2.is_finite() {
            Ok(())
        } else {
            Err(Error::domain("unknown-variance model", format!("sigma2 = {sigma2}")))
        }
    }

    /// Full-data normal log-likelihood, up to a constant.
    pub fn loglik_unadjusted(&self, mu: f64, sigma2: f64) -> Result<f64> {
        Self::check_sigma2(sigma2)?;
        let n = self.n() as f64;
        let ss = n * (self.pooled_var() + (self.pooled_mean() - mu).powi(2));
        Ok(-0.5 * n * sigma2.ln() - 0.5 * ss / sigma2)
    }

    pub fn log_selection_probability(&self, mu: f64, sigma2: f64) -> Result<f64> {
        log_tstat_selection_probability(mu, sigma2, self.n1, self.t)
    }

    pub fn selective_loglik(&self, mu: f64, sigma2: f64) -> Result<f64> {
        Ok(self.loglik_unadjusted(mu, sigma2)? - self.log_selection_probability(mu, sigma2)?)
    }

    /// Prior density with respect to `(μ, σ²)`.
    pub fn prior_density(&self, kind: UnknownVarPrior, c: &dyn Fn(f64) -> f64, mu: f64, sigma2: f64) -> Result<f64> {
        Self::check_sigma2(sigma2)?;
        let sigma = sigma2.sqrt();
        let base = c(sigma2);
        match kind {
            UnknownVarPrior::Unadjusted => Ok(base),
            UnknownVarPrior::JeffreysBased => {
                let n1 = self.n1 as f64;
                let gamma = n1 / self.n() as f64;
                let x = n1.sqrt() * mu / sigma - self.t * self.stats.var1.sqrt() / sigma;
                let v = truncated_normal_variance(x)?;
                Ok(base * ((1.0 - gamma) + gamma * v).sqrt())
            }
            UnknownVarPrior::PmpGamma1(reading) => {
                let v = match reading {
                    VarianceReading::FirstBatch => self.stats.var1,
                    VarianceReading::Pooled => self.pooled_var(),
                };
                let sqn = (self.n() as f64).sqrt();
                let a = (sqn * mu - self.t * v.sqrt()) / sigma;
                let b = sqn * (mu - self.pooled_mean()) / sigma;
                let log_h1 = |x: f64| -> Result<f64> { Ok(norm_log_pdf(x) - log_norm_cdf(x)?) };
                let lb = log_h1(b)?;
                if lb < -700.0 {
                    return Err(Error::numeric(
                        "prior_density",
                        format!("h1 denominator underflows at argument {b}"),
                    ));
                }
                let r = -(log_h1(a)? - lb).exp_m1();
                Ok(base * r.max(0.0))
            }
        }
    }

    /// Selective log posterior in `(μ, log σ²)`, including the Jacobian.
    pub fn log_posterior(&self, kind: UnknownVarPrior, c: &dyn Fn(f64) -> f64, mu: f64, log_sigma2: f64) -> Result<f64> {
        let sigma2 = log_sigma2.exp();
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Ok(f64::NEG_INFINITY);
        }
        let p = self.prior_density(kind, c, mu, sigma2)?;
        if p <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(p.ln() + log_sigma2 + self.selective_loglik(mu, sigma2)?)
    }

    /// The known-variance normal proxy for `μ/σ` at fixed `σ²`.
    pub fn location_proxy(&self, sigma2: f64) -> Result<SplitNormalModel<f64>> {
        Self::check_sigma2(sigma2)?;
        let n1 = self.n1 as f64;
        let thr = self.t * self.stats.var1.sqrt() / n1.sqrt();
        SplitNormalModel::new(self.n() as f64, n1 / self.n() as f64, thr / sigma2.sqrt())
    }
}
