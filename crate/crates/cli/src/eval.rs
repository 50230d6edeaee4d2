//! One-off evaluations printed to standard output.

use clap::{Args, Subcommand, ValueEnum};

use selprior::expfam::{Bernoulli, ExpFamModel1D, ExpFamily, ExponentialRate, InverseGaussianMean, SelectionRule, SplitSample};
use selprior::normal::{PosteriorMode, SplitNormalModel};
use selprior::prior::PriorKind;
use selprior::simulate::coverage::deterministic_coverage_cell;
use selprior::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Normal,
    Binomial,
    Exponential,
    InverseGaussian,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value = "normal")]
    pub model: ModelArg,
    /// Total sample size (normal model).
    #[arg(long, default_value_t = 20.0, allow_hyphen_values = true)]
    pub n: f64,
    /// Fraction of the sample used for selection (normal model).
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub gamma: f64,
    /// Selection threshold on the first-batch mean (normal model).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub t: f64,
    /// Observed combined mean (normal model).
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<f64>,
    /// First-batch size (exponential families).
    #[arg(long)]
    pub n1: Option<u64>,
    /// Second-batch size (exponential families).
    #[arg(long, default_value_t = 0)]
    pub n2: u64,
    /// Threshold on the first-batch MLE (exponential families).
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub threshold: f64,
    /// Sum of the sufficient statistic over the first batch.
    #[arg(long)]
    pub y1: Option<f64>,
    /// Sum of the sufficient statistic over the second batch.
    #[arg(long, default_value_t = 0.0)]
    pub y2: f64,
    /// Shape of the inverse Gaussian family.
    #[arg(long, default_value_t = 1.0)]
    pub shape: f64,
    #[arg(long, default_value = "jeffreys")]
    pub prior: String,
}

#[derive(Debug, Clone, Subcommand)]
pub enum EvalCmd {
    /// Unnormalised prior density at THETA.
    Prior {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
    },
    /// Selective posterior distribution function at THETA.
    Posterior {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
    },
    /// Selective posterior quantile of order ALPHA.
    Quantile {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        alpha: f64,
    },
    /// Exact coverage of the one-sided bound of order ALPHA at THETA (normal model).
    CoverageCell {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long)]
        alpha: f64,
    },
}

enum Built {
    Normal(SplitNormalModel<f64>),
    Binomial(ExpFamModel1D<Bernoulli>),
    Exponential(ExpFamModel1D<ExponentialRate>),
    InverseGaussian(ExpFamModel1D<InverseGaussianMean>),
}

fn missing(flag: &str, model: ModelArg) -> Error {
    Error::Config(format!("--{flag} is required for the {model:?} model").to_lowercase())
}

fn build(a: &ModelArgs) -> Result<Built> {
    if a.model == ModelArg::Normal {
        return Ok(Built::Normal(SplitNormalModel::new(a.n, a.gamma, a.t)?));
    }
    let n1 = a.n1.ok_or_else(|| missing("n1", a.model))?;
    Ok(match a.model {
        ModelArg::Binomial => Built::Binomial(ExpFamModel1D::new(Bernoulli, n1, a.n2, SelectionRule::at_least(a.threshold))?),
        ModelArg::Exponential => {
            Built::Exponential(ExpFamModel1D::new(ExponentialRate, n1, a.n2, SelectionRule::above(a.threshold))?)
        }
        ModelArg::InverseGaussian => Built::InverseGaussian(ExpFamModel1D::new(
            InverseGaussianMean { shape: positive_shape(a.shape)? },
            n1,
            a.n2,
            SelectionRule::above(a.threshold),
        )?),
        ModelArg::Normal => unreachable!(),
    })
}

fn positive_shape(shape: f64) -> Result<f64> {
    if shape > 0.0 && shape.is_finite() {
        Ok(shape)
    } else {
        Err(Error::Config(format!("--shape must be positive, got {shape}")))
    }
}

fn normal_y(a: &ModelArgs) -> Result<f64> {
    a.y.ok_or_else(|| missing("y", a.model))
}

fn split(a: &ModelArgs) -> Result<SplitSample> {
    Ok(SplitSample {
        stat1: a.y1.ok_or_else(|| missing("y1", a.model))?,
        stat2: a.y2,
    })
}

fn expfam_value<F: ExpFamily>(m: &ExpFamModel1D<F>, a: &ModelArgs, kind: PriorKind, q: &Query) -> Result<f64> {
    match *q {
        Query::Prior(theta) => {
            // Data only matter for the matching prior.
            let data = if kind.is_data_dependent() { Some(split(a)?) } else { None };
            m.induced_prior_density(kind, theta, data.as_ref())
        }
        Query::Posterior(theta) => m.posterior_cdf_at(theta, &split(a)?, kind),
        Query::Quantile(alpha) => m.selective_posterior(&split(a)?, kind)?.quantile(alpha),
        Query::Coverage(..) => Err(Error::Config("coverage-cell supports the normal model only".into())),
    }
}

enum Query {
    Prior(f64),
    Posterior(f64),
    Quantile(f64),
    Coverage(f64, f64),
}

fn echo(a: &ModelArgs) -> String {
    match a.model {
        ModelArg::Normal => {
            let mut s = format!("model=normal n={} gamma={} t={}", a.n, a.gamma, a.t);
            if let Some(y) = a.y {
                s += &format!(" y={y}");
            }
            s
        }
        m => {
            let name = format!("{m:?}").to_lowercase();
            let mut s = format!("model={name} n1={} n2={} threshold={}", a.n1.unwrap_or(0), a.n2, a.threshold);
            if m == ModelArg::InverseGaussian {
                s += &format!(" shape={}", a.shape);
            }
            if let Some(y1) = a.y1 {
                s += &format!(" y1={y1} y2={}", a.y2);
            }
            s
        }
    }
}

/// Returns the echo line and the value.
pub fn evaluate(cmd: &EvalCmd) -> Result<(String, f64)> {
    let (a, q, name) = match cmd {
        EvalCmd::Prior { model, theta } => (model, Query::Prior(*theta), "prior"),
        EvalCmd::Posterior { model, theta } => (model, Query::Posterior(*theta), "posterior"),
        EvalCmd::Quantile { model, alpha } => (model, Query::Quantile(*alpha), "quantile"),
        EvalCmd::CoverageCell { model, theta, alpha } => (model, Query::Coverage(*theta, *alpha), "coverage-cell"),
    };
    let kind: PriorKind = a.prior.parse()?;
    let mut line = format!("{name} {} prior={kind}", echo(a));
    match q {
        Query::Prior(x) | Query::Posterior(x) => line += &format!(" theta={x}"),
        Query::Quantile(p) => line += &format!(" alpha={p}"),
        Query::Coverage(x, p) => line += &format!(" theta={x} alpha={p}"),
    }
    let value = match build(a)? {
        Built::Normal(m) => match q {
            Query::Prior(theta) => {
                let y = if kind.is_data_dependent() { normal_y(a)? } else { a.y.unwrap_or(m.t()) };
                m.prior_density(kind, theta, y)?
            }
            Query::Posterior(theta) => m.posterior_cdf_at(theta, normal_y(a)?, kind, PosteriorMode::Selective)?,
            Query::Quantile(alpha) => m
                .posterior_curve(normal_y(a)?, kind, PosteriorMode::Selective)?
                .quantile(alpha)?,
            Query::Coverage(theta, alpha) => deterministic_coverage_cell(&m, kind, theta, alpha)?,
        },
        Built::Binomial(m) => expfam_value(&m, a, kind, &q)?,
        Built::Exponential(m) => expfam_value(&m, a, kind, &q)?,
        Built::InverseGaussian(m) => expfam_value(&m, a, kind, &q)?,
    };
    Ok((line, value))
}
