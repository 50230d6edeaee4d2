//! The selective normal location model.
//!
//! `Y ~ N(θ, 1/n)` is the mean of `n` observations of which the first
//! `n₁ = γn` decide selection through `Ȳ₁ > t`. Reduced by sufficiency this is
//! the one-observation model with probit selection function
//! `p(y) = Φ{(nγ/(1-γ))^{1/2} (y - t)}`, or the indicator `1{y > t}` when
//! `γ = 1`.

use std::fmt;

use crate::curve::{CurveMeta, PosteriorCurve};
use crate::error::{Error, Result};
use crate::numeric::quad::{find_mode, log_integrate_region, QuadOptions};
use crate::numeric::roots::{bracket_monotone, brent};
use crate::numeric::{log1m_exp, log_add_exp, Fallible};
use crate::prior::PriorKind;
use crate::real::Real;
use crate::special::{
    hazard_pair, hazard_shift, log_norm_cdf, log_norm_sf, norm_cdf, norm_log_pdf, norm_sf,
    truncated_normal_variance,
};

/// Below this selection probability the closed-form matching prior is not
/// trusted and the finite-difference form is used instead.
const PMP_CLOSED_FORM_FLOOR: f64 = 1e-12;
/// Largest estimated relative rounding error accepted from the closed form.
const PMP_CLOSED_FORM_RTOL: f64 = 1e-6;

/// Selective posterior (conditional on selection) or the unadjusted one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PosteriorMode {
    Selective,
    Unadjusted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitNormalModel<T> {
    n: T,
    gamma: T,
    t: T,
}

impl<T: Real> fmt::Display for SplitNormalModel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "normal(n={}, gamma={}, t={})", self.n, self.gamma, self.t)
    }
}

impl<T: Real> SplitNormalModel<T> {
    pub fn new(n: T, gamma: T, t: T) -> Result<Self> {
        if !(n > T::zero() && n.is_finite()) {
            return Err(Error::domain("SplitNormalModel", format!("n = {n} must be positive")));
        }
        if !(gamma > T::zero() && gamma <= T::one()) {
            return Err(Error::domain(
                "SplitNormalModel",
                format!("gamma = {gamma} must lie in (0, 1]"),
            ));
        }
        if !t.is_finite() {
            return Err(Error::domain("SplitNormalModel", format!("threshold {t} not finite")));
        }
        Ok(SplitNormalModel { n, gamma, t })
    }

    pub fn n(&self) -> T {
        self.n
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn t(&self) -> T {
        self.t
    }

    pub fn n1(&self) -> T {
        self.gamma * self.n
    }

    pub fn n2(&self) -> T {
        self.n - self.n1()
    }

    /// Selection through the whole sample, so the observation is truncated.
    pub fn is_truncated(&self) -> bool {
        self.gamma == T::one()
    }

    fn sel_arg(&self, theta: T) -> T {
        self.n1().sqrt() * (theta - self.t)
    }

    /// Slope of the probit selection function; infinite when `γ = 1`.
    fn probit_slope(&self) -> T {
        (self.n * self.gamma / (T::one() - self.gamma)).sqrt()
    }

    /// Rejects observations that cannot occur under selection.
    pub fn check_observation(&self, y: T) -> Result<()> {
        if !y.is_finite() {
            return Err(Error::InvalidObservation(format!("observation {y} not finite")));
        }
        if self.is_truncated() && y <= self.t {
            return Err(Error::InvalidObservation(format!(
                "y = {y} does not exceed the threshold {} of a truncated model",
                self.t
            )));
        }
        Ok(())
    }

    /// Probability `p(y)` that inference proceeds given `Y = y`.
    pub fn selection_function(&self, y: T) -> Result<T> {
        Ok(self.log_selection_function(y)?.exp())
    }

    pub fn log_selection_function(&self, y: T) -> Result<T> {
        if self.is_truncated() {
            return Ok(if y > self.t { T::zero() } else { T::neg_infinity() });
        }
        log_norm_cdf(self.probit_slope() * (y - self.t))
    }

    /// `φ(θ) = Φ{n₁^{1/2}(θ - t)}`.
    pub fn selection_probability(&self, theta: T) -> Result<T> {
        norm_cdf(self.sel_arg(theta))
    }

    pub fn log_selection_probability(&self, theta: T) -> Result<T> {
        log_norm_cdf(self.sel_arg(theta))
    }

    /// `E[Y | S]` at `θ`.
    pub fn conditional_mean(&self, theta: T) -> Result<T> {
        let h = hazard_pair(self.sel_arg(theta))?;
        Ok(theta + self.n1().sqrt() / self.n * h.h1)
    }

    /// `Var[Y | S] = (1 + γ h2) / n`.
    pub fn conditional_variance(&self, theta: T) -> Result<T> {
        let v1 = truncated_normal_variance(self.sel_arg(theta))?;
        Ok(((T::one() - self.gamma) + self.gamma * v1) / self.n)
    }

    /// `(log H(θ; y), log{1 - H(θ; y)})` where `H(θ; y) = P_θ(Y ≥ y | S)`.
    pub fn log_confidence_cdf(&self, theta: T, y: T) -> Result<(T, T)> {
        self.log_confidence_with(theta, y, &QuadOptions::default())
    }

    fn log_confidence_with(&self, theta: T, y: T, opts: &QuadOptions<T>) -> Result<(T, T)> {
        self.check_observation(y)?;
        if !theta.is_finite() {
            return Err(Error::domain("confidence_cdf", format!("theta = {theta} not finite")));
        }
        let rn = self.n.sqrt();
        if self.is_truncated() {
            let a = rn * (theta - self.t);
            let b = rn * (theta - y);
            let la = log_norm_cdf(a)?;
            let log_h = log_norm_cdf(b)? - la;
            // 1 - H = {Φ̄(b) - Φ̄(a)} / Φ(a), formed in the upper tail when both are small.
            let log_1mh = if b > T::zero() {
                let sb = log_norm_sf(b)?;
                sb + log1m_exp(log_norm_sf(a)? - sb) - la
            } else {
                log1m_exp(log_h)
            };
            return Ok((log_h, log_1mh));
        }
        let k = self.probit_slope();
        let t = self.t;
        let lg = |u: T| -> T {
            match log_norm_cdf(k * (u - t)) {
                Ok(lp) => norm_log_pdf(rn * (u - theta)) + lp,
                Err(_) => T::nan(),
            }
        };
        let center = self.conditional_mean(theta)?;
        let scale = self.conditional_variance(theta)?.sqrt();
        let log_u = log_integrate_region(lg, y, T::infinity(), center, scale, opts)?;
        let log_l = log_integrate_region(lg, T::neg_infinity(), y, center, scale, opts)?;
        let total = log_add_exp(log_u, log_l);
        if !total.is_finite() {
            return Err(Error::numeric(
                "confidence_cdf",
                format!("conditional density vanished at theta = {theta}, y = {y}"),
            ));
        }
        Ok((log_u - total, log_l - total))
    }

    /// The confidence distribution `H(θ; y)`.
    pub fn confidence_cdf(&self, theta: T, y: T) -> Result<T> {
        Ok(self.log_confidence_cdf(theta, y)?.0.exp())
    }

    /// `θ` solving `H(θ; y) = α`.
    pub fn confidence_quantile(&self, alpha: T, y: T) -> Result<T> {
        if !(alpha > T::zero() && alpha < T::one()) {
            return Err(Error::domain(
                "confidence_quantile",
                format!("alpha = {alpha} outside (0, 1)"),
            ));
        }
        self.check_observation(y)?;
        let lower = alpha <= T::lit(0.5);
        let (la, l1a) = (alpha.ln(), (-alpha).ln_1p());
        // Compare on whichever log scale keeps relative accuracy.
        let f = |theta: T| -> Result<T> {
            let (lh, l1h) = self.log_confidence_cdf(theta, y)?;
            Ok(if lower { lh - la } else { l1a - l1h })
        };
        let step = self.n.sqrt().recip();
        let (a, b) = bracket_monotone(f, y, step, T::neg_infinity(), T::infinity(), 200)?;
        brent(f, a, b, step * T::lit(1e-10), 200)
    }

    /// Exact probability-matching prior `π_y(θ)`, unnormalised.
    pub fn pmp_prior_density(&self, theta: T, y: T) -> Result<T> {
        self.check_observation(y)?;
        if self.is_truncated() {
            return self.pmp_truncated(theta, y);
        }
        match self.pmp_closed_form(theta, y)? {
            Some(v) => Ok(v),
            None => self.pmp_prior_density_numeric(theta, y),
        }
    }

    /// `1 - h1(a)/h1(b)` with `a = √n(θ - t)`, `b = √n(θ - y)`.
    fn pmp_truncated(&self, theta: T, y: T) -> Result<T> {
        let rn = self.n.sqrt();
        let a = rn * (theta - self.t);
        let b = rn * (theta - y);
        let v = if b > T::zero() {
            let lh_a = norm_log_pdf(a) - log_norm_cdf(a)?;
            let lh_b = norm_log_pdf(b) - log_norm_cdf(b)?;
            -(lh_a - lh_b).exp_m1()
        } else {
            // h1 = δ - x with δ = h1 + x, free of cancellation for b ≤ 0.
            let db = hazard_shift(b)?;
            let da = hazard_shift(a)?;
            (rn * (y - self.t) + db - da) / (db - b)
        };
        if !(v >= T::zero() && v.is_finite()) {
            return Err(Error::numeric(
                "pmp_prior_density",
                format!("matching prior evaluated to {v} at theta = {theta}"),
            ));
        }
        Ok(v)
    }

    /// Closed form for `γ < 1`; `None` when it is numerically unreliable.
    fn pmp_closed_form(&self, theta: T, y: T) -> Result<Option<T>> {
        let a1 = self.sel_arg(theta);
        if log_norm_cdf(a1)? < T::lit(PMP_CLOSED_FORM_FLOOR).ln() {
            return Ok(None);
        }
        let g = self.gamma;
        let rn = self.n.sqrt();
        let big_a = rn * (y - theta + g * (theta - self.t)) / (T::one() - g).sqrt();
        let (lh, l1h) = self.log_confidence_cdf(theta, y)?;
        let (bracket, magnitude) = if lh < T::lit(0.5).ln() {
            let h = lh.exp();
            let upper = norm_sf(big_a)?;
            (upper - h, upper.max(h))
        } else {
            let h1 = l1h.exp();
            let lower = norm_cdf(big_a)?;
            (h1 - lower, h1.max(lower))
        };
        let ratio = g.sqrt() * (norm_log_pdf(a1) - norm_log_pdf(rn * (theta - y))).exp();
        let base = self.selection_function(y)?;
        let v = ratio * bracket + base;
        let err = ratio * magnitude * T::lit(1e-9);
        if v > T::zero() && v.is_finite() && err <= T::lit(PMP_CLOSED_FORM_RTOL) * v {
            Ok(Some(v))
        } else {
            Ok(None)
        }
    }

    /// `p(y) · {-∂H/∂θ} / {∂H/∂y}` by central differences of `log H`.
    pub fn pmp_prior_density_numeric(&self, theta: T, y: T) -> Result<T> {
        self.check_observation(y)?;
        let opts = QuadOptions::with_tol(T::lit(1e-13), T::lit(1e-13));
        let h = T::lit(1e-4) / self.n.sqrt();
        let (lh0, l1h0) = self.log_confidence_with(theta, y, &opts)?;
        // Differentiate whichever of H, 1 - H is smaller; the ratio is the same.
        let pick = |p: (T, T)| if lh0 <= l1h0 { p.0 } else { p.1 };
        let d_theta = (pick(self.log_confidence_with(theta + h, y, &opts)?)
            - pick(self.log_confidence_with(theta - h, y, &opts)?))
            / (h + h);
        if self.is_truncated() && y - h <= self.t {
            return Err(Error::numeric(
                "pmp_prior_density_numeric",
                format!("y = {y} too close to the threshold for a central difference"),
            ));
        }
        let d_y = (pick(self.log_confidence_with(theta, y + h, &opts)?)
            - pick(self.log_confidence_with(theta, y - h, &opts)?))
            / (h + h);
        let v = self.selection_function(y)? * (-d_theta / d_y);
        if !(v > T::zero() && v.is_finite()) {
            return Err(Error::numeric(
                "pmp_prior_density",
                format!(
                    "closed form and finite-difference fallback both failed at theta = {theta}, \
                     y = {y} (difference ratio {v})"
                ),
            ));
        }
        Ok(v)
    }

    /// Selective Jeffreys prior `[1 + γ h2{n₁^{1/2}(θ - t)}]^{1/2}`.
    pub fn jeffreys_prior_density(&self, theta: T) -> Result<T> {
        let v1 = truncated_normal_variance(self.sel_arg(theta))?;
        Ok(((T::one() - self.gamma) + self.gamma * v1).sqrt())
    }

    pub fn prior_density(&self, kind: PriorKind, theta: T, y: T) -> Result<T> {
        match kind {
            PriorKind::Uniform | PriorKind::NonSelectiveJeffreys => Ok(T::one()),
            PriorKind::ExactMatching => self.pmp_prior_density(theta, y),
            PriorKind::SelectiveJeffreys => self.jeffreys_prior_density(theta),
            PriorKind::Normal { .. } => Ok(self.log_prior_density(kind, theta, y)?.exp()),
        }
    }

    pub fn log_prior_density(&self, kind: PriorKind, theta: T, y: T) -> Result<T> {
        match kind {
            PriorKind::Uniform | PriorKind::NonSelectiveJeffreys => Ok(T::zero()),
            PriorKind::ExactMatching => Ok(self.pmp_prior_density(theta, y)?.ln()),
            PriorKind::SelectiveJeffreys => {
                let v1 = truncated_normal_variance(self.sel_arg(theta))?;
                Ok(((T::one() - self.gamma) + self.gamma * v1).ln() * T::lit(0.5))
            }
            PriorKind::Normal { mean, sd } => {
                let (m, s) = (T::lit(mean), T::lit(sd));
                Ok(norm_log_pdf((theta - m) / s) - s.ln())
            }
        }
    }

    /// Unnormalised log posterior density at `θ` given `Y = y`.
    pub fn log_posterior_kernel(
        &self,
        kind: PriorKind,
        mode: PosteriorMode,
        theta: T,
        y: T,
    ) -> Result<T> {
        let lp = self.log_prior_density(kind, theta, y)?;
        let ll = norm_log_pdf(self.n.sqrt() * (theta - y));
        match mode {
            PosteriorMode::Unadjusted => Ok(lp + ll),
            PosteriorMode::Selective => Ok(lp + ll - self.log_selection_probability(theta)?),
        }
    }

    /// Tabulated posterior of `θ` given `Y = y`.
    pub fn posterior_curve(
        &self,
        y: T,
        kind: PriorKind,
        mode: PosteriorMode,
    ) -> Result<PosteriorCurve<T>> {
        self.check_observation(y)?;
        let meta = CurveMeta {
            model: self.to_string(),
            prior: kind,
            observed: vec![y.as_f64()],
        };
        PosteriorCurve::from_log_kernel(
            |theta| self.log_posterior_kernel(kind, mode, theta, y),
            T::neg_infinity(),
            T::infinity(),
            y,
            self.n.sqrt().recip(),
            meta,
        )
    }

    /// Posterior distribution function `Π(θ₀ | y)`, integrated directly on
    /// either side of `θ₀` without tabulating the whole curve.
    pub fn posterior_cdf_at(
        &self,
        theta0: T,
        y: T,
        kind: PriorKind,
        mode: PosteriorMode,
    ) -> Result<T> {
        self.check_observation(y)?;
        let fl = Fallible::new(|theta| self.log_posterior_kernel(kind, mode, theta, y));
        let lk = |theta: T| fl.call(theta);
        let scale = self.n.sqrt().recip();
        let opts = QuadOptions::default();
        let peak = fl.finish(find_mode(
            lk,
            T::neg_infinity(),
            T::infinity(),
            y,
            scale,
            T::lit(1e-6),
        ))?;
        let log_l = fl.finish(log_integrate_region(
            lk,
            T::neg_infinity(),
            theta0,
            peak,
            scale,
            &opts,
        ))?;
        let log_u = fl.finish(log_integrate_region(lk, theta0, T::infinity(), peak, scale, &opts))?;
        let total = log_add_exp(log_l, log_u);
        if !total.is_finite() {
            return Err(Error::DivergedPosterior(format!(
                "posterior normaliser {total} for y = {y}"
            )));
        }
        Ok((log_l - total).exp())
    }
}
