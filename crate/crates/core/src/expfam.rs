//! One-parameter exponential families with selection on the first-batch MLE.
//!
//! The sample splits into batches of sizes `n₁` and `n₂`; inference proceeds
//! only when the first-batch estimate `θ̂₁` passes a threshold rule. Priors
//! are induced from a selective normal proxy on the variance-stabilised
//! scale `ν = g(θ)`, `g′ = i^{1/2}`:
//! `π_θ(θ) ∝ i(θ)^{1/2} π_ν{g(θ)}` with the proxy
//! `SplitNormalModel(n₁ + n₂, n₁/n, g(c))`.

use std::f64::consts::PI;
use std::fmt;

use rand::distr::Bernoulli as BernoulliDist;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Exp, Gamma, InverseGaussian};

use crate::curve::{CurveMeta, PosteriorCurve};
use crate::error::{Error, Result};
use crate::normal::SplitNormalModel;
use crate::numeric::quad::{find_mode, log_integrate_region, QuadOptions};
use crate::numeric::roots::{bracket_monotone, brent};
use crate::numeric::{log_add_exp, Fallible};
use crate::prior::PriorKind;
use crate::special::{ln_gamma, log_inverse_gaussian_sf, log_regularized_gamma_cdf};

/// A regular one-parameter exponential family
/// `f(y; θ) = h(y) exp{η(θ) s(y) - A(θ)}`.
pub trait ExpFamily: fmt::Debug + Send + Sync {
    fn name(&self) -> &'static str;
    /// Open parameter interval.
    fn domain(&self) -> (f64, f64);
    fn natural_param(&self, theta: f64) -> f64;
    fn log_partition(&self, theta: f64) -> f64;
    fn sufficient_stat(&self, y: f64) -> f64;
    fn log_base_measure(&self, y: f64) -> f64;
    /// Per-observation Fisher information.
    fn fisher_info(&self, theta: f64) -> f64;
    /// Variance-stabilising transformation, increasing.
    fn vst(&self, theta: f64) -> f64;
    fn vst_inv(&self, nu: f64) -> f64;
    /// Image of [`domain`](ExpFamily::domain) under the transformation.
    fn vst_domain(&self) -> (f64, f64);
    /// MLE from the average sufficient statistic.
    fn mle_from_mean(&self, mean_stat: f64) -> Result<f64>;
    fn sample<R: RngCore + ?Sized>(&self, theta: f64, rng: &mut R) -> f64
    where
        Self: Sized;

    /// Sum of the sufficient statistic over `count` draws.
    fn sample_stat_sum<R: RngCore + ?Sized>(&self, theta: f64, count: u64, rng: &mut R) -> f64
    where
        Self: Sized,
    {
        (0..count).map(|_| self.sufficient_stat(self.sample(theta, rng))).sum()
    }

    /// `log P_θ(θ̂₁ passes rule)` in closed form, when one is available.
    fn log_selection_probability(
        &self,
        _theta: f64,
        _n1: u64,
        _rule: &SelectionRule,
    ) -> Option<Result<f64>> {
        None
    }

    fn log_density(&self, y: f64, theta: f64) -> f64 {
        self.log_base_measure(y) + self.natural_param(theta) * self.sufficient_stat(y)
            - self.log_partition(theta)
    }

    fn mle(&self, sample: &[f64]) -> Result<f64> {
        if sample.is_empty() {
            return Err(Error::domain("mle", "empty sample"));
        }
        let mean = sample.iter().map(|&y| self.sufficient_stat(y)).sum::<f64>() / sample.len() as f64;
        self.mle_from_mean(mean)
    }
}

/// Selection when the first-batch estimate exceeds `threshold`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionRule {
    pub threshold: f64,
    /// Accept equality, as in `ȳ₁ ≥ c` for discrete data.
    pub inclusive: bool,
}

impl SelectionRule {
    pub fn above(threshold: f64) -> Self {
        SelectionRule {
            threshold,
            inclusive: false,
        }
    }

    pub fn at_least(threshold: f64) -> Self {
        SelectionRule {
            threshold,
            inclusive: true,
        }
    }

    pub fn accepts(&self, estimate: f64) -> bool {
        if self.inclusive {
            estimate >= self.threshold
        } else {
            estimate > self.threshold
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SelectionMethod {
    /// Closed form where the family supplies one, Monte Carlo otherwise.
    Analytic,
    /// Simulation with a fixed seed per evaluation, so the estimate is a
    /// deterministic function of `θ`.
    MonteCarlo { reps: u64, seed: u64 },
}

/// Bernoulli observations; `Y₁ ~ Bin(n₁, θ)` is their first-batch sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct Bernoulli;

/// Exponential observations with rate `θ`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExponentialRate;

/// Inverse Gaussian observations with mean `θ` and known shape.
#[derive(Debug, Clone, Copy)]
pub struct InverseGaussianMean {
    pub shape: f64,
}

impl Default for InverseGaussianMean {
    fn default() -> Self {
        InverseGaussianMean { shape: 1.0 }
    }
}

impl ExpFamily for Bernoulli {
    fn name(&self) -> &'static str {
        "bernoulli"
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, 1.0)
    }
    fn natural_param(&self, theta: f64) -> f64 {
        (theta / (1.0 - theta)).ln()
    }
    fn log_partition(&self, theta: f64) -> f64 {
        -(-theta).ln_1p()
    }
    fn sufficient_stat(&self, y: f64) -> f64 {
        y
    }
    fn log_base_measure(&self, _y: f64) -> f64 {
        0.0
    }
    fn fisher_info(&self, theta: f64) -> f64 {
        1.0 / (theta * (1.0 - theta))
    }
    fn vst(&self, theta: f64) -> f64 {
        2.0 * theta.sqrt().asin()
    }
    fn vst_inv(&self, nu: f64) -> f64 {
        (nu / 2.0).sin().powi(2)
    }
    fn vst_domain(&self) -> (f64, f64) {
        (0.0, PI)
    }
    fn mle_from_mean(&self, mean_stat: f64) -> Result<f64> {
        if (0.0..=1.0).contains(&mean_stat) {
            Ok(mean_stat)
        } else {
            Err(Error::domain("bernoulli mle", format!("mean {mean_stat} outside [0, 1]")))
        }
    }
    fn sample<R: RngCore + ?Sized>(&self, theta: f64, rng: &mut R) -> f64 {
        let d = BernoulliDist::new(theta).expect("theta in [0, 1]");
        if rng.sample(d) {
            1.0
        } else {
            0.0
        }
    }
    fn sample_stat_sum<R: RngCore + ?Sized>(&self, theta: f64, count: u64, rng: &mut R) -> f64 {
        Binomial::new(count, theta).expect("theta in [0, 1]").sample(rng) as f64
    }
    fn log_selection_probability(&self, theta: f64, n1: u64, rule: &SelectionRule) -> Option<Result<f64>> {
        if !(theta > 0.0 && theta < 1.0) {
            return Some(Err(Error::domain("bernoulli", format!("theta = {theta} outside (0, 1)"))));
        }
        let n = n1 as f64;
        let mut acc = f64::NEG_INFINITY;
        for k in 0..=n1 {
            if rule.accepts(k as f64 / n) {
                let kf = k as f64;
                let lp = ln_gamma(n + 1.0) - ln_gamma(kf + 1.0) - ln_gamma(n - kf + 1.0)
                    + kf * theta.ln()
                    + (n - kf) * (-theta).ln_1p();
                acc = log_add_exp(acc, lp);
            }
        }
        Some(Ok(acc))
    }
}

impl ExpFamily for ExponentialRate {
    fn name(&self) -> &'static str {
        "exponential"
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
    fn natural_param(&self, theta: f64) -> f64 {
        -theta
    }
    fn log_partition(&self, theta: f64) -> f64 {
        -theta.ln()
    }
    fn sufficient_stat(&self, y: f64) -> f64 {
        y
    }
    fn log_base_measure(&self, _y: f64) -> f64 {
        0.0
    }
    fn fisher_info(&self, theta: f64) -> f64 {
        theta.powi(-2)
    }
    fn vst(&self, theta: f64) -> f64 {
        theta.ln()
    }
    fn vst_inv(&self, nu: f64) -> f64 {
        nu.exp()
    }
    fn vst_domain(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
    fn mle_from_mean(&self, mean_stat: f64) -> Result<f64> {
        if mean_stat > 0.0 {
            Ok(mean_stat.recip())
        } else {
            Err(Error::domain("exponential mle", format!("mean {mean_stat} not positive")))
        }
    }
    fn sample<R: RngCore + ?Sized>(&self, theta: f64, rng: &mut R) -> f64 {
        Exp::new(theta).expect("positive rate").sample(rng)
    }
    fn sample_stat_sum<R: RngCore + ?Sized>(&self, theta: f64, count: u64, rng: &mut R) -> f64 {
        Gamma::new(count as f64, theta.recip()).expect("positive rate").sample(rng)
    }
    fn log_selection_probability(&self, theta: f64, n1: u64, rule: &SelectionRule) -> Option<Result<f64>> {
        // θ̂₁ = n₁/S₁ > c  ⇔  S₁ < n₁/c, with S₁ ~ Gamma(n₁, θ).
        let n = n1 as f64;
        if rule.threshold <= 0.0 {
            return Some(Ok(0.0));
        }
        Some(log_regularized_gamma_cdf(n, theta, n / rule.threshold))
    }
}

impl ExpFamily for InverseGaussianMean {
    fn name(&self) -> &'static str {
        "inverse_gaussian"
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
    fn natural_param(&self, theta: f64) -> f64 {
        -self.shape / (2.0 * theta * theta)
    }
    fn log_partition(&self, theta: f64) -> f64 {
        -self.shape / theta
    }
    fn sufficient_stat(&self, y: f64) -> f64 {
        y
    }
    fn log_base_measure(&self, y: f64) -> f64 {
        0.5 * (self.shape / (2.0 * PI * y.powi(3))).ln() - self.shape / (2.0 * y)
    }
    fn fisher_info(&self, theta: f64) -> f64 {
        self.shape / theta.powi(3)
    }
    fn vst(&self, theta: f64) -> f64 {
        -2.0 * (self.shape / theta).sqrt()
    }
    fn vst_inv(&self, nu: f64) -> f64 {
        4.0 * self.shape / (nu * nu)
    }
    fn vst_domain(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, 0.0)
    }
    fn mle_from_mean(&self, mean_stat: f64) -> Result<f64> {
        if mean_stat > 0.0 {
            Ok(mean_stat)
        } else {
            Err(Error::domain("inverse gaussian mle", format!("mean {mean_stat} not positive")))
        }
    }
    fn sample<R: RngCore + ?Sized>(&self, theta: f64, rng: &mut R) -> f64 {
        InverseGaussian::new(theta, self.shape).expect("positive parameters").sample(rng)
    }
    fn sample_stat_sum<R: RngCore + ?Sized>(&self, theta: f64, count: u64, rng: &mut R) -> f64 {
        // The sample mean is IG(θ, count·shape).
        let d = InverseGaussian::new(theta, count as f64 * self.shape).expect("positive parameters");
        count as f64 * d.sample(rng)
    }
    fn log_selection_probability(&self, theta: f64, n1: u64, rule: &SelectionRule) -> Option<Result<f64>> {
        if rule.threshold <= 0.0 {
            return Some(Ok(0.0));
        }
        Some(log_inverse_gaussian_sf(theta, n1 as f64 * self.shape, rule.threshold))
    }
}

/// Observed data reduced to batch sums of the sufficient statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSample {
    pub stat1: f64,
    pub stat2: f64,
}

/// A family with a two-batch design and a selection rule on `θ̂₁`.
#[derive(Debug, Clone)]
pub struct ExpFamModel1D<F> {
    family: F,
    n1: u64,
    n2: u64,
    rule: SelectionRule,
    method: SelectionMethod,
}

impl<F: ExpFamily> ExpFamModel1D<F> {
    pub fn new(family: F, n1: u64, n2: u64, rule: SelectionRule) -> Result<Self> {
        if n1 == 0 {
            return Err(Error::domain("ExpFamModel1D", "n1 must be at least 1"));
        }
        if !rule.threshold.is_finite() {
            return Err(Error::domain("ExpFamModel1D", "selection threshold not finite"));
        }
        Ok(ExpFamModel1D {
            family,
            n1,
            n2,
            rule,
            method: SelectionMethod::Analytic,
        })
    }

    pub fn with_method(mut self, method: SelectionMethod) -> Self {
        self.method = method;
        self
    }

    pub fn family(&self) -> &F {
        &self.family
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

    pub fn rule(&self) -> SelectionRule {
        self.rule
    }

    pub fn gamma(&self) -> f64 {
        self.n1 as f64 / self.n() as f64
    }

    /// The selective normal model for `ν = g(θ)`.
    pub fn proxy(&self) -> Result<SplitNormalModel<f64>> {
        let (lo, hi) = self.family.domain();
        let c = self.rule.threshold.max(lo).min(hi);
        let t = self.family.vst(c);
        // A threshold at the lower edge of the domain means no selection; keep
        // the proxy finite by placing it far below the data.
        let t = if t.is_finite() { t } else { self.family.vst_domain().0.max(-1e6) };
        SplitNormalModel::new(self.n() as f64, self.gamma(), t)
    }

    fn check_theta(&self, theta: f64) -> Result<()> {
        let (lo, hi) = self.family.domain();
        if theta > lo && theta < hi {
            Ok(())
        } else {
            Err(Error::domain(
                self.family.name(),
                format!("theta = {theta} outside ({lo}, {hi})"),
            ))
        }
    }

    pub fn log_selection_probability(&self, theta: f64) -> Result<f64> {
        self.check_theta(theta)?;
        if let SelectionMethod::Analytic = self.method {
            if let Some(v) = self.family.log_selection_probability(theta, self.n1, &self.rule) {
                return v;
            }
        }
        let (reps, seed) = match self.method {
            SelectionMethod::MonteCarlo { reps, seed } => (reps, seed),
            SelectionMethod::Analytic => (100_000, 0x5e1ec7),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut hits = 0u64;
        for _ in 0..reps {
            let s = self.family.sample_stat_sum(theta, self.n1, &mut rng);
            if self.is_selected(s)? {
                hits += 1;
            }
        }
        if hits == 0 {
            return Err(Error::DegenerateEstimate(format!(
                "no selections in {reps} simulated first batches at theta = {theta}"
            )));
        }
        Ok((hits as f64 / reps as f64).ln())
    }

    pub fn selection_probability(&self, theta: f64) -> Result<f64> {
        Ok(self.log_selection_probability(theta)?.exp())
    }

    /// Whether a first batch with statistic sum `stat1` is selected.
    pub fn is_selected(&self, stat1: f64) -> Result<bool> {
        let est = self.family.mle_from_mean(stat1 / self.n1 as f64)?;
        Ok(self.rule.accepts(est))
    }

    pub fn sample_from_observations(&self, first: &[f64], second: &[f64]) -> Result<SplitSample> {
        if first.len() as u64 != self.n1 || second.len() as u64 != self.n2 {
            return Err(Error::InvalidObservation(format!(
                "batch sizes ({}, {}) do not match the design ({}, {})",
                first.len(),
                second.len(),
                self.n1,
                self.n2
            )));
        }
        let s = |v: &[f64]| v.iter().map(|&y| self.family.sufficient_stat(y)).sum::<f64>();
        Ok(SplitSample {
            stat1: s(first),
            stat2: s(second),
        })
    }

    fn check_sample(&self, data: &SplitSample) -> Result<()> {
        if !self.is_selected(data.stat1)? {
            return Err(Error::InvalidObservation(format!(
                "first-batch statistic {} does not satisfy the selection rule",
                data.stat1
            )));
        }
        Ok(())
    }

    /// Observation for the normal proxy: `γ g(θ̂₁) + (1 - γ) g(θ̂₂)`.
    pub fn nu_observation(&self, data: &SplitSample) -> Result<f64> {
        let g1 = self.family.vst(self.family.mle_from_mean(data.stat1 / self.n1 as f64)?);
        if self.n2 == 0 {
            return Ok(g1);
        }
        let g2 = self.family.vst(self.family.mle_from_mean(data.stat2 / self.n2 as f64)?);
        let gamma = self.gamma();
        Ok(gamma * g1 + (1.0 - gamma) * g2)
    }

    pub fn log_likelihood(&self, theta: f64, data: &SplitSample) -> f64 {
        let s = data.stat1 + data.stat2;
        let eta = self.family.natural_param(theta);
        let a = self.family.log_partition(theta);
        // 0 · (-∞) at the edge of a discrete family contributes nothing.
        let es = if s == 0.0 { 0.0 } else { eta * s };
        es - self.n() as f64 * a
    }

    fn log_nu_prior(&self, kind: PriorKind, nu: f64, y_nu: Option<f64>) -> Result<f64> {
        match kind {
            PriorKind::Uniform | PriorKind::NonSelectiveJeffreys => Ok(0.0),
            PriorKind::ExactMatching => {
                let y = y_nu.ok_or_else(|| {
                    Error::domain("induced_prior_density", "matching prior needs observed data")
                })?;
                self.proxy()?.log_prior_density(kind, nu, y)
            }
            other => self.proxy()?.log_prior_density(other, nu, 0.0),
        }
    }

    /// `π_θ(θ) = i(θ)^{1/2} π_ν{g(θ)}`, unnormalised.
    pub fn induced_prior_density(
        &self,
        kind: PriorKind,
        theta: f64,
        data: Option<&SplitSample>,
    ) -> Result<f64> {
        self.check_theta(theta)?;
        let y_nu = data.map(|d| self.nu_observation(d)).transpose()?;
        let lp = self.log_nu_prior(kind, self.family.vst(theta), y_nu)?;
        Ok(self.family.fisher_info(theta).sqrt() * lp.exp())
    }

    /// Selective log posterior on the `ν` scale, unnormalised.
    fn log_kernel_nu(&self, kind: PriorKind, nu: f64, data: &SplitSample, y_nu: f64) -> Result<f64> {
        let theta = self.family.vst_inv(nu);
        let (lo, hi) = self.family.domain();
        if !(theta > lo && theta < hi) {
            return Ok(f64::NEG_INFINITY);
        }
        let ll = self.log_likelihood(theta, data);
        if ll == f64::NEG_INFINITY {
            return Ok(ll);
        }
        Ok(self.log_nu_prior(kind, nu, Some(y_nu))? + ll - self.log_selection_probability(theta)?)
    }

    fn nu_start(&self, y_nu: f64) -> f64 {
        let (lo, hi) = self.family.vst_domain();
        let s = (self.n() as f64).sqrt().recip();
        let mut x = y_nu;
        if hi.is_finite() && x >= hi - s {
            x = if lo.is_finite() { hi - (hi - lo).min(2.0 * s) / 2.0 } else { hi - s };
        }
        if lo.is_finite() && x <= lo + s {
            x = if hi.is_finite() { lo + (hi - lo).min(2.0 * s) / 2.0 } else { lo + s };
        }
        x
    }

    /// `Π(θ₀ | data)` under the selective posterior.
    pub fn posterior_cdf_at(&self, theta0: f64, data: &SplitSample, kind: PriorKind) -> Result<f64> {
        self.check_theta(theta0)?;
        self.check_sample(data)?;
        let y_nu = self.nu_observation(data)?;
        let nu0 = self.family.vst(theta0);
        let (lo, hi) = self.family.vst_domain();
        let fl = Fallible::new(|nu| self.log_kernel_nu(kind, nu, data, y_nu));
        let lk = |nu: f64| fl.call(nu);
        let scale = (self.n() as f64).sqrt().recip();
        let opts = QuadOptions::default();
        let peak = fl.finish(find_mode(lk, lo, hi, self.nu_start(y_nu), scale, 1e-6))?;
        let log_l = fl.finish(log_integrate_region(lk, lo, nu0, peak, scale, &opts))?;
        let log_u = fl.finish(log_integrate_region(lk, nu0, hi, peak, scale, &opts))?;
        let total = log_add_exp(log_l, log_u);
        if !total.is_finite() {
            return Err(Error::DivergedPosterior(format!(
                "posterior normaliser {total} in the {} model",
                self.family.name()
            )));
        }
        Ok((log_l - total).exp())
    }

    /// Tabulated selective posterior of `θ`.
    pub fn selective_posterior(&self, data: &SplitSample, kind: PriorKind) -> Result<PosteriorCurve<f64>> {
        self.check_sample(data)?;
        let y_nu = self.nu_observation(data)?;
        let (lo, hi) = self.family.vst_domain();
        let meta = CurveMeta {
            model: format!("{}(n1={}, n2={})", self.family.name(), self.n1, self.n2),
            prior: kind,
            observed: vec![data.stat1, data.stat2],
        };
        let on_nu = PosteriorCurve::from_log_kernel(
            |nu| self.log_kernel_nu(kind, nu, data, y_nu),
            lo,
            hi,
            self.nu_start(y_nu),
            (self.n() as f64).sqrt().recip(),
            meta,
        )?;
        let fam = &self.family;
        Ok(on_nu.map_increasing(|nu| fam.vst_inv(nu), |nu| fam.fisher_info(fam.vst_inv(nu)).sqrt().recip()))
    }

    /// The `θ₀` with selection probability `q`.
    pub fn theta_for_selection_probability(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::domain("theta_for_selection_probability", format!("q = {q}")));
        }
        let (lo, hi) = self.family.vst_domain();
        let lq = q.ln();
        let f = |nu: f64| -> Result<f64> {
            Ok(self.log_selection_probability(self.family.vst_inv(nu))? - lq)
        };
        let start = self.family.vst(self.rule.threshold.max(self.family.domain().0 + 1e-6));
        let start = start.max(lo + 1e-3).min(hi - 1e-3);
        let step = (self.n1 as f64).sqrt().recip();
        let (a, b) = bracket_monotone(f, start, step, lo, hi, 200)?;
        Ok(self.family.vst_inv(brent(f, a, b, 1e-12, 200)?))
    }
}

/// A joint prior `c(λ) i_ψψ(ψ, λ)^{1/2} π_ν{g(ψ; λ)}` for an interest
/// parameter `ψ` orthogonal to a nuisance `λ`.
///
/// `nu_prior(ν, λ)` is the normal-location prior; it may depend on `λ`
/// through the proxy threshold.
pub struct OrthogonalPrior<C, I, G, P> {
    pub c: C,
    pub info: I,
    pub vst: G,
    pub nu_prior: P,
}

impl<C, I, G, P> OrthogonalPrior<C, I, G, P>
where
    C: Fn(&[f64]) -> f64,
    I: Fn(f64, &[f64]) -> f64,
    G: Fn(f64, &[f64]) -> f64,
    P: Fn(f64, &[f64]) -> Result<f64>,
{
    pub fn density(&self, psi: f64, lambda: &[f64]) -> Result<f64> {
        let nu = (self.vst)(psi, lambda);
        Ok((self.c)(lambda) * (self.info)(psi, lambda).sqrt() * (self.nu_prior)(nu, lambda)?)
    }
}
