//! Inference for the arm with the largest first-stage mean.
//!
//! `Yᵢ ~ N(θᵢ, 1/n₁)` for `i = 1..m`, the winner is relabelled as arm 1, and
//! a follow-up mean `Ỹ₁ ~ N(θ₁, 1/n₂)` is observed.

use std::fmt;

use crate::error::{Error, Result};
use crate::normal::SplitNormalModel;
use crate::numeric::quad::{find_mode, log_integrate_region, QuadOptions};
use crate::numeric::Fallible;
use crate::special::{log_norm_cdf, norm_log_pdf, truncated_normal_variance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WinnerLikelihood {
    /// Normalised by the probability that arm 1 wins, `E_θ Φ{n₁^{1/2}(θ₁ - T)}`.
    L1,
    /// Conditional on the losing arms: normalised by `Φ{n₁^{1/2}(θ₁ - t)}`.
    L2,
}

impl fmt::Display for WinnerLikelihood {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WinnerLikelihood::L1 => "L1",
            WinnerLikelihood::L2 => "L2",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WinnerModel {
    n1: f64,
    n2: f64,
    means: Vec<f64>,
    follow_up: f64,
    t: f64,
    kind: WinnerLikelihood,
}

impl WinnerModel {
    /// `means[0]` must be the largest first-stage mean.
    pub fn new(n1: f64, n2: f64, means: Vec<f64>, follow_up: f64, kind: WinnerLikelihood) -> Result<Self> {
        if means.len() < 2 {
            return Err(Error::domain("WinnerModel", "need at least two arms"));
        }
        if !(n1 > 0.0 && n2 > 0.0) {
            return Err(Error::domain("WinnerModel", format!("n1 = {n1}, n2 = {n2}")));
        }
        if means.iter().chain([&follow_up]).any(|v| !v.is_finite()) {
            return Err(Error::InvalidObservation("non-finite arm mean".into()));
        }
        let t = means[1..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if means[0] < t {
            return Err(Error::InvalidObservation(format!(
                "arm 1 mean {} is below the largest other mean {t}",
                means[0]
            )));
        }
        Ok(WinnerModel {
            n1,
            n2,
            means,
            follow_up,
            t,
            kind,
        })
    }

    pub fn m(&self) -> usize {
        self.means.len()
    }

    pub fn n1(&self) -> f64 {
        self.n1
    }

    pub fn n2(&self) -> f64 {
        self.n2
    }

    /// Largest losing first-stage mean.
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn follow_up(&self) -> f64 {
        self.follow_up
    }

    pub fn kind(&self) -> WinnerLikelihood {
        self.kind
    }

    pub fn with_kind(&self, kind: WinnerLikelihood) -> Self {
        WinnerModel { kind, ..self.clone() }
    }

    /// Combined estimate of `θ₁` from both stages.
    pub fn pooled_winner_mean(&self) -> f64 {
        (self.n1 * self.means[0] + self.n2 * self.follow_up) / (self.n1 + self.n2)
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.m() || theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("winner model", format!("theta {theta:?} for {} arms", self.m())));
        }
        Ok(())
    }

    fn log_numerator(&self, theta: &[f64]) -> f64 {
        let first: f64 = theta.iter().zip(&self.means).map(|(th, y)| (th - y).powi(2)).sum();
        -0.5 * self.n2 * (theta[0] - self.follow_up).powi(2) - 0.5 * self.n1 * first
    }

    /// Log of the selection-probability normaliser.
    pub fn log_denominator(&self, theta: &[f64]) -> Result<f64> {
        self.check_theta(theta)?;
        match self.kind {
            WinnerLikelihood::L2 => log_norm_cdf(self.n1.sqrt() * (theta[0] - self.t)),
            WinnerLikelihood::L1 => log_win_probability(self.n1, theta),
        }
    }

    pub fn loglik(&self, theta: &[f64]) -> Result<f64> {
        Ok(self.log_numerator(theta) - self.log_denominator(theta)?)
    }

    pub fn log_prior(&self, theta: &[f64]) -> Result<f64> {
        Ok(winner_prior(theta, self.n1, self.n1 + self.n2, self.t)?.ln())
    }

    pub fn log_posterior(&self, theta: &[f64]) -> Result<f64> {
        Ok(self.log_prior(theta)? + self.loglik(theta)?)
    }

    /// The one-dimensional problem for `θ₁` obtained by conditioning on the
    /// losing arms.
    pub fn reduced_model(&self) -> Result<SplitNormalModel<f64>> {
        let n = self.n1 + self.n2;
        SplitNormalModel::new(n, self.n1 / n, self.t)
    }
}

/// `[1 + (n₁/n) h2{n₁^{1/2}(θ₁ - t)}]^{1/2}`; flat in `θ₂, …, θ_m`.
pub fn winner_prior(theta: &[f64], n1: f64, n: f64, t: f64) -> Result<f64> {
    let th1 = *theta
        .first()
        .ok_or_else(|| Error::domain("winner_prior", "empty parameter"))?;
    let gamma = n1 / n;
    let v = truncated_normal_variance(n1.sqrt() * (th1 - t))?;
    Ok(((1.0 - gamma) + gamma * v).sqrt())
}

/// `log P_θ(Y₁ > max_{j≥2} Yⱼ)` with `Yᵢ ~ N(θᵢ, 1/n₁)`:
/// `log ∫ φ(z) ∏_{j≥2} Φ{z + n₁^{1/2}(θ₁ - θⱼ)} dz`.
pub fn log_win_probability(n1: f64, theta: &[f64]) -> Result<f64> {
    let sq = n1.sqrt();
    let d: Vec<f64> = theta[1..].iter().map(|tj| sq * (theta[0] - tj)).collect();
    if d.len() == 1 {
        return log_norm_cdf(d[0] / std::f64::consts::SQRT_2);
    }
    let fl = Fallible::new(|z: f64| -> Result<f64> {
        let mut acc = norm_log_pdf(z);
        for &dj in &d {
            acc += log_norm_cdf(z + dj)?;
        }
        Ok(acc)
    });
    let lf = |z: f64| fl.call(z);
    let start = d.iter().fold(0.0f64, |m, &dj| m.max(-dj));
    let opts = QuadOptions::with_tol(1e-8, 1e-8);
    let inf = f64::INFINITY;
    let peak = fl.finish(find_mode(lf, -inf, inf, start, 1.0, 1e-6))?;
    let v = fl
        .finish(log_integrate_region(lf, -inf, inf, peak, 1.0, &opts))
        .map_err(|e| {
            Error::numeric(
                "log_win_probability",
                format!("integration around z = {peak} for offsets {d:?}: {e}"),
            )
        })?;
    Ok(v.min(0.0))
}
