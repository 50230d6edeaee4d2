//! Random-walk Metropolis–Hastings with burn-in-only scale adaptation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::{Error, Result};

/// Proposals between adaptation updates during burn-in.
const ADAPT_WINDOW: usize = 50;
const TARGET_LOW: f64 = 0.2;
const TARGET_HIGH: f64 = 0.4;

#[derive(Debug, Clone, PartialEq)]
pub struct MHConfig {
    pub steps: usize,
    pub burn_in: usize,
    pub proposal_scales: Vec<f64>,
    pub seed: u64,
    /// Stream of the seeded generator; lets replications share a seed.
    pub stream: u64,
    pub adapt: bool,
}

impl MHConfig {
    /// Default burn-in of one fifth of `steps`, with adaptation on.
    pub fn new(steps: usize, proposal_scales: Vec<f64>, seed: u64) -> Self {
        MHConfig {
            steps,
            burn_in: steps / 5,
            proposal_scales,
            seed,
            stream: 0,
            adapt: true,
        }
    }

    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if self.burn_in >= self.steps {
            return Err(Error::Config(format!(
                "burn-in {} must be below steps {}",
                self.burn_in, self.steps
            )));
        }
        if self.proposal_scales.len() != dim {
            return Err(Error::Config(format!(
                "{} proposal scales for a {dim}-dimensional target",
                self.proposal_scales.len()
            )));
        }
        if let Some(s) = self.proposal_scales.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(Error::Config(format!("proposal scale {s} not positive")));
        }
        Ok(())
    }
}

/// Post-burn-in draws, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    dim: usize,
    samples: Vec<f64>,
    acceptance_rate: f64,
    final_scales: Vec<f64>,
    config: MHConfig,
}

impl Chain {
    /// Wraps externally produced draws, e.g. for testing summaries.
    pub fn from_draws(dim: usize, samples: Vec<f64>, config: MHConfig) -> Result<Self> {
        if dim == 0 || samples.is_empty() || samples.len() % dim != 0 {
            return Err(Error::Config(format!(
                "{} values do not form rows of length {dim}",
                samples.len()
            )));
        }
        let final_scales = config.proposal_scales.clone();
        Ok(Chain {
            dim,
            samples,
            acceptance_rate: f64::NAN,
            final_scales,
            config,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.samples.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Acceptance rate over the post-burn-in steps.
    pub fn acceptance_rate(&self) -> f64 {
        self.acceptance_rate
    }

    pub fn final_scales(&self) -> &[f64] {
        &self.final_scales
    }

    pub fn config(&self) -> &MHConfig {
        &self.config
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.samples[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coordinate(&self, j: usize) -> Vec<f64> {
        self.samples.iter().skip(j).step_by(self.dim).copied().collect()
    }

    pub fn mean(&self, j: usize) -> f64 {
        let c = self.coordinate(j);
        c.iter().sum::<f64>() / c.len() as f64
    }

    pub fn variance(&self, j: usize) -> f64 {
        let c = self.coordinate(j);
        let m = c.iter().sum::<f64>() / c.len() as f64;
        c.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (c.len() as f64 - 1.0)
    }

    /// Fraction of draws with coordinate `j` at or below `x`.
    pub fn cdf_at(&self, j: usize, x: f64) -> f64 {
        let c = self.coordinate(j);
        c.iter().filter(|&&v| v <= x).count() as f64 / c.len() as f64
    }

    /// Empirical quantile with linear interpolation between order statistics.
    pub fn quantile(&self, j: usize, p: f64) -> f64 {
        let mut c = self.coordinate(j);
        c.sort_by(f64::total_cmp);
        sorted_quantile(&c, p)
    }

    /// Effective sample size from the initial positive sequence of
    /// autocorrelation pairs.
    pub fn effective_sample_size(&self, j: usize) -> f64 {
        let c = self.coordinate(j);
        let n = c.len();
        let m = c.iter().sum::<f64>() / n as f64;
        let d: Vec<f64> = c.iter().map(|x| x - m).collect();
        let c0 = d.iter().map(|x| x * x).sum::<f64>() / n as f64;
        if c0 == 0.0 {
            return 1.0;
        }
        let rho = |k: usize| d[..n - k].iter().zip(&d[k..]).map(|(a, b)| a * b).sum::<f64>() / (n as f64 * c0);
        let mut tau = -1.0;
        let mut k = 0;
        while k + 1 < n {
            let pair = rho(k) + rho(k + 1);
            if pair <= 0.0 {
                break;
            }
            tau += 2.0 * pair;
            k += 2;
        }
        n as f64 / tau.max(1.0 / n as f64)
    }
}

fn sorted_quantile(c: &[f64], p: f64) -> f64 {
    let h = (c.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    c[lo] + (h - lo as f64) * (c[hi] - c[lo])
}

/// Equal-tailed interval from empirical quantiles of coordinate `j`.
pub fn credible_interval(chain: &Chain, j: usize, level: f64) -> (f64, f64) {
    let mut c = chain.coordinate(j);
    c.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    (sorted_quantile(&c, tail), sorted_quantile(&c, 1.0 - tail))
}

/// Metropolis acceptance probability for a symmetric proposal.
pub fn acceptance_probability(log_current: f64, log_proposed: f64) -> f64 {
    if log_proposed.is_nan() || log_proposed == f64::NEG_INFINITY {
        0.0
    } else {
        (log_proposed - log_current).exp().min(1.0)
    }
}

/// Joint Gaussian random walk with per-coordinate scales.
///
/// During burn-in a common multiplier on the scales is adjusted every
/// `ADAPT_WINDOW` proposals toward acceptance in [0.2, 0.4]; afterwards the
/// kernel is fixed. Errors from the target abort the chain.
pub fn mh_sample<F>(log_target: F, init: &[f64], config: &MHConfig) -> Result<Chain>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let dim = init.len();
    if dim == 0 {
        return Err(Error::Config("empty initial state".into()));
    }
    config.validate(dim)?;
    let mut lp = log_target(init)?;
    if !lp.is_finite() {
        return Err(Error::numeric("mh_sample", format!("log target {lp} at the initial state")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(config.stream);
    let unif = Uniform::new(0.0, 1.0).expect("valid range");
    let mut x = init.to_vec();
    let mut prop = vec![0.0; dim];
    let mut scales = config.proposal_scales.clone();
    let mut samples = Vec::with_capacity((config.steps - config.burn_in) * dim);
    let (mut window_acc, mut burn_acc, mut kept_acc) = (0usize, 0usize, 0usize);

    for step in 0..config.steps {
        for ((p, xi), s) in prop.iter_mut().zip(&x).zip(&scales) {
            let z: f64 = StandardNormal.sample(&mut rng);
            *p = xi + s * z;
        }
        let lq = log_target(&prop)?;
        let u: f64 = unif.sample(&mut rng);
        let accept = u < acceptance_probability(lp, lq);
        if accept {
            x.copy_from_slice(&prop);
            lp = lq;
        }
        if step < config.burn_in {
            if accept {
                window_acc += 1;
                burn_acc += 1;
            }
            if config.adapt && (step + 1) % ADAPT_WINDOW == 0 {
                let rate = window_acc as f64 / ADAPT_WINDOW as f64;
                let factor = if rate < TARGET_LOW {
                    (0.5 + rate / TARGET_LOW * 0.5).max(0.5)
                } else if rate > TARGET_HIGH {
                    1.0 + (rate - TARGET_HIGH) / (1.0 - TARGET_HIGH)
                } else {
                    1.0
                };
                scales.iter_mut().for_each(|s| *s *= factor);
                window_acc = 0;
            }
            if step + 1 == config.burn_in && burn_acc == 0 {
                return Err(Error::StuckChain(format!(
                    "no proposal accepted during {} burn-in steps",
                    config.burn_in
                )));
            }
        } else {
            if accept {
                kept_acc += 1;
            }
            samples.extend_from_slice(&x);
        }
    }
    let kept = config.steps - config.burn_in;
    if kept_acc == 0 {
        return Err(Error::StuckChain(format!("no proposal accepted in {kept} sampling steps")));
    }
    Ok(Chain {
        dim,
        samples,
        acceptance_rate: kept_acc as f64 / kept as f64,
        final_scales: scales,
        config: config.clone(),
    })
}

/// Proposal scales `2.38 d^{-1/2}` times the curvature standard deviation of
/// each coordinate at `x`, from central second differences.
pub fn curvature_scales<F>(log_target: F, x: &[f64], fallback: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let d = x.len();
    let f0 = log_target(x)?;
    let mut y = x.to_vec();
    let mut out = Vec::with_capacity(d);
    for j in 0..d {
        let h = 1e-3 * x[j].abs().max(fallback);
        y[j] = x[j] + h;
        let fp = log_target(&y)?;
        y[j] = x[j] - h;
        let fm = log_target(&y)?;
        y[j] = x[j];
        let curv = -(fp - 2.0 * f0 + fm) / (h * h);
        let sd = if curv.is_finite() && curv > 0.0 { curv.sqrt().recip() } else { fallback };
        out.push(2.38 / (d as f64).sqrt() * sd);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_chain() {
        let cfg = MHConfig::new(2000, vec![1.0, 1.0], 11);
        let lt = |x: &[f64]| Ok(-0.5 * (x[0] * x[0] + 4.0 * x[1] * x[1]));
        let a = mh_sample(lt, &[0.0, 0.0], &cfg).unwrap();
        let b = mh_sample(lt, &[0.0, 0.0], &cfg).unwrap();
        assert_eq!(a, b);
        let c = mh_sample(lt, &[0.0, 0.0], &cfg.clone().with_stream(1)).unwrap();
        assert_ne!(a.coordinate(0), c.coordinate(0));
        assert_eq!(a.len(), 1600);
    }

    #[test]
    fn adaptation_reaches_target_band() {
        let cfg = MHConfig::new(10_000, vec![50.0], 3);
        let ch = mh_sample(|x: &[f64]| Ok(-0.5 * x[0] * x[0]), &[0.0], &cfg).unwrap();
        let r = ch.acceptance_rate();
        assert!((0.15..0.5).contains(&r), "rate {r}");
    }

    #[test]
    fn stuck_chain_detected() {
        let mut cfg = MHConfig::new(500, vec![1.0], 1);
        cfg.adapt = false;
        let lt = |x: &[f64]| Ok(if x[0] == 0.0 { 0.0 } else { f64::NEG_INFINITY });
        assert!(matches!(mh_sample(lt, &[0.0], &cfg), Err(Error::StuckChain(_))));
    }

    #[test]
    fn config_validation() {
        let mut cfg = MHConfig::new(100, vec![1.0], 1);
        cfg.burn_in = 100;
        assert!(mh_sample(|_: &[f64]| Ok(0.0), &[0.0], &cfg).is_err());
        let cfg = MHConfig::new(100, vec![0.0], 1);
        assert!(mh_sample(|_: &[f64]| Ok(0.0), &[0.0], &cfg).is_err());
    }

    #[test]
    fn interval_on_uniform_grid() {
        let draws: Vec<f64> = (0..=10_000).map(|i| i as f64 / 10_000.0).collect();
        let ch = Chain::from_draws(1, draws, MHConfig::new(2, vec![1.0], 0)).unwrap();
        let (lo, hi) = credible_interval(&ch, 0, 0.9);
        assert!((lo - 0.05).abs() < 1e-12 && (hi - 0.95).abs() < 1e-12);
        let (lo2, hi2) = credible_interval(&ch, 0, 0.95);
        assert!(lo2 < lo && hi2 > hi);
    }

    #[test]
    fn detailed_balance_three_states() {
        // Discretised walk on {0, 1, 2} with symmetric proposal weights and
        // the sampler's acceptance rule.
        let lp = [0.3f64.ln(), 0.5f64.ln(), 0.2f64.ln()];
        let q = |i: usize, j: usize| {
            let d = i.abs_diff(j) as f64;
            (-0.5 * d * d).exp()
        };
        // One normaliser for all rows keeps the proposal symmetric.
        let norm = (0..3)
            .map(|i| (0..3).filter(|&j| j != i).map(|j| q(i, j)).sum::<f64>())
            .fold(0.0, f64::max);
        let mut p = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    p[i][j] = q(i, j) / norm * acceptance_probability(lp[i], lp[j]);
                }
            }
            p[i][i] = 1.0 - p[i].iter().sum::<f64>();
        }
        for i in 0..3 {
            for j in 0..3 {
                let lhs = lp[i].exp() * p[i][j];
                let rhs = lp[j].exp() * p[j][i];
                assert!((lhs - rhs).abs() < 1e-15, "{i}->{j}");
            }
        }
        let stationary: Vec<f64> = (0..3).map(|j| (0..3).map(|i| lp[i].exp() * p[i][j]).sum()).collect();
        for j in 0..3 {
            assert!((stationary[j] - lp[j].exp()).abs() < 1e-15);
        }
    }
}
