//! Experiment registry: defaults per scale and the code that fills each table.

use serde_json::{json, Value};

use selprior::expfam::{Bernoulli, ExpFamModel1D, ExponentialRate, InverseGaussianMean, SelectionRule, SplitSample};
use selprior::multiparam::{UnknownVarPrior, WinnerLikelihood};
use selprior::normal::{PosteriorMode, SplitNormalModel};
use selprior::prior::PriorKind;
use selprior::simulate::coverage::{coverage_deterministic, coverage_mc, CoverageMethod, CoverageSpec};
use selprior::simulate::ecdf_on_grid;
use selprior::simulate::studies::{expfam_coverage, fig1, pit_ecdf, winner_study, ExpFamStudy, Fig1Study, PitStudy, WinnerStudy};
use selprior::{Error, Result};

use crate::config::{Params, Scale};
use crate::output::{Cell, Table};

pub struct Experiment {
    pub id: &'static str,
    pub summary: &'static str,
    pub defaults: fn(Scale) -> Vec<(&'static str, String)>,
    pub run: fn(&Params, u64) -> Result<Table>,
}

pub const EXPERIMENTS: &[Experiment] = &[
    Experiment {
        id: "table1",
        summary: "exact coverage of one-sided bounds, uniform and Jeffreys priors, normal model",
        defaults: table1_defaults,
        run: run_table1,
    },
    Experiment {
        id: "table2",
        summary: "credible intervals for the winner of m arms under L1 and L2",
        defaults: table2_defaults,
        run: run_table2,
    },
    Experiment {
        id: "fig1",
        summary: "interval coverage with a normal prior, with and without selection",
        defaults: fig1_defaults,
        run: run_fig1,
    },
    Experiment {
        id: "fig2",
        summary: "priors and posteriors, normal model (n, gamma, t, y) = (20, 1, 0, 0.2)",
        defaults: fig2_defaults,
        run: run_normal_curves,
    },
    Experiment {
        id: "fig3",
        summary: "priors and posteriors, normal model (n, gamma, t, y) = (20, 0.75, 0, 0)",
        defaults: fig3_defaults,
        run: run_normal_curves,
    },
    Experiment {
        id: "fig4",
        summary: "priors and posteriors, two binomial batches with selection y1/n1 >= 0.5",
        defaults: fig4_defaults,
        run: run_fig4,
    },
    Experiment {
        id: "fig5",
        summary: "coverage against alpha, exponential rate with selection on the first-batch MLE",
        defaults: fig5_defaults,
        run: run_expfam_coverage,
    },
    Experiment {
        id: "fig6",
        summary: "coverage against alpha, inverse Gaussian mean with selection on the first-batch MLE",
        defaults: fig6_defaults,
        run: run_expfam_coverage,
    },
    Experiment {
        id: "fig7",
        summary: "ECDF of posterior CDF at the truth, unknown-variance normal after a t-test",
        defaults: fig7_defaults,
        run: run_fig7,
    },
    Experiment {
        id: "custom",
        summary: "coverage study on a user-specified split normal model",
        defaults: custom_defaults,
        run: run_custom,
    },
];

pub fn find(id: &str) -> Result<&'static Experiment> {
    EXPERIMENTS
        .iter()
        .find(|e| e.id == id)
        .ok_or_else(|| {
            let ids: Vec<&str> = EXPERIMENTS.iter().map(|e| e.id).collect();
            Error::Config(format!("unknown experiment '{id}'; expected one of {ids:?}"))
        })
}

fn kv(pairs: &[(&'static str, &str)]) -> Vec<(&'static str, String)> {
    pairs.iter().map(|(k, v)| (*k, v.to_string())).collect()
}

const TABLE1_ALPHAS: &str = "0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95";
const DECILES: &str = "0.1:0.1:0.9";

fn table1_defaults(_: Scale) -> Vec<(&'static str, String)> {
    kv(&[
        ("n", "20"),
        ("t", "0"),
        ("thetas", "-0.5, 0, 0.5"),
        ("gammas", "0.5, 0.75, 1"),
        ("alphas", TABLE1_ALPHAS),
        ("priors", "uniform, jeffreys"),
    ])
}

fn table2_defaults(scale: Scale) -> Vec<(&'static str, String)> {
    let (ms, reps, steps) = match scale {
        Scale::Paper => ("2, 5, 10, 20", "5000", "10000"),
        Scale::Desk => ("2, 5", "1000", "4000"),
    };
    kv(&[
        ("ms", ms),
        ("n1", "5"),
        ("n2", "5"),
        ("likelihoods", "L1, L2"),
        ("level", "0.9"),
        ("reps", reps),
        ("steps", steps),
    ])
}

fn fig1_defaults(scale: Scale) -> Vec<(&'static str, String)> {
    let reps = match scale {
        Scale::Paper => "100000",
        Scale::Desk => "50000",
    };
    kv(&[
        ("n", "5"),
        ("t", "0"),
        ("prior_mean", "0"),
        ("prior_sd", "1"),
        ("level", "0.9"),
        ("thetas", "-1:0.1:2"),
        ("reps", reps),
    ])
}

fn normal_curve_defaults(gamma: &str, y: &str) -> Vec<(&'static str, String)> {
    kv(&[
        ("n", "20"),
        ("gamma", gamma),
        ("t", "0"),
        ("y", y),
        ("thetas", "-1:0.01:1.5"),
    ])
}

fn fig2_defaults(_: Scale) -> Vec<(&'static str, String)> {
    normal_curve_defaults("1", "0.2")
}

fn fig3_defaults(_: Scale) -> Vec<(&'static str, String)> {
    normal_curve_defaults("0.75", "0")
}

fn fig4_defaults(_: Scale) -> Vec<(&'static str, String)> {
    kv(&[
        ("n1", "8"),
        ("n2", "2"),
        ("y1", "4"),
        ("y2", "1"),
        ("threshold", "0.5"),
        ("thetas", "0.01:0.01:0.99"),
    ])
}

fn expfam_defaults(family: &str, scale: Scale) -> Vec<(&'static str, String)> {
    let (reps, priors) = match scale {
        Scale::Paper => ("10000", "jeffreys, pmp, nonselective_jeffreys"),
        Scale::Desk => ("2000", "jeffreys, nonselective_jeffreys"),
    };
    kv(&[
        ("family", family),
        ("ns", "10, 30, 80"),
        ("first_fraction", "0.8"),
        ("threshold", "1"),
        ("qs", "0.1, 0.5, 0.9"),
        ("alphas", DECILES),
        ("priors", priors),
        ("reps", reps),
    ])
}

fn fig5_defaults(scale: Scale) -> Vec<(&'static str, String)> {
    expfam_defaults("exponential", scale)
}

fn fig6_defaults(scale: Scale) -> Vec<(&'static str, String)> {
    expfam_defaults("inverse_gaussian", scale)
}

fn fig7_defaults(scale: Scale) -> Vec<(&'static str, String)> {
    let reps = match scale {
        Scale::Paper => "5000",
        Scale::Desk => "500",
    };
    kv(&[
        ("n1", "50"),
        ("n2", "10"),
        ("t", "2"),
        ("mu0", "0"),
        ("sigma2_0", "1"),
        ("priors", "unadjusted, jeffreys"),
        ("reps", reps),
        ("steps", "5000"),
        ("grid", "0:0.01:1"),
    ])
}

fn custom_defaults(scale: Scale) -> Vec<(&'static str, String)> {
    let reps = match scale {
        Scale::Paper => "10000",
        Scale::Desk => "2000",
    };
    kv(&[
        ("n", "20"),
        ("gamma", "1"),
        ("t", "0"),
        ("prior", "jeffreys"),
        ("thetas", "-0.5, 0, 0.5"),
        ("alphas", TABLE1_ALPHAS),
        ("method", "deterministic"),
        ("reps", reps),
    ])
}

fn parse_priors(p: &Params, key: &str) -> Result<Vec<PriorKind>> {
    // Priors may contain commas inside normal(m,s); split on top-level commas.
    let raw = p.raw(key)?;
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0usize);
    for (i, ch) in raw.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(raw[start..i].parse()?);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(raw[start..].parse()?);
    Ok(out)
}

fn run_table1(p: &Params, _seed: u64) -> Result<Table> {
    let (n, t): (f64, f64) = (p.get("n")?, p.get("t")?);
    let thetas: Vec<f64> = p.list("thetas")?;
    let gammas: Vec<f64> = p.list("gammas")?;
    let alphas: Vec<f64> = p.list("alphas")?;
    let priors = parse_priors(p, "priors")?;
    let mut table = Table::new(vec!["theta", "gamma", "alpha", "prior", "coverage"]);
    for &gamma in &gammas {
        let model = SplitNormalModel::new(n, gamma, t)?;
        for &prior in &priors {
            let spec = CoverageSpec {
                model,
                prior,
                thetas: thetas.clone(),
                alphas: alphas.clone(),
                reps: 1,
                seed: 0,
                method: CoverageMethod::Deterministic,
            };
            for e in coverage_deterministic(&spec)?.entries {
                table.push(vec![e.theta.into(), gamma.into(), e.alpha.into(), prior.label().into(), e.coverage.into()]);
            }
        }
    }
    sort_rows(&mut table, &[0, 1, 2, 3]);
    Ok(table)
}

/// Sorts rows lexicographically by the given columns.
fn sort_rows(table: &mut Table, keys: &[usize]) {
    let cmp = |a: &Cell, b: &Cell| match (a, b) {
        (Cell::Num(x), Cell::Num(y)) => x.total_cmp(y),
        (Cell::Int(x), Cell::Int(y)) => x.cmp(y),
        (Cell::Text(x), Cell::Text(y)) => x.cmp(y),
        _ => std::cmp::Ordering::Equal,
    };
    table.rows.sort_by(|a, b| {
        keys.iter()
            .map(|&k| cmp(&a[k], &b[k]))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
}

fn run_table2(p: &Params, seed: u64) -> Result<Table> {
    let kinds = p
        .list::<String>("likelihoods")?
        .iter()
        .map(|s| match s.to_ascii_uppercase().as_str() {
            "L1" => Ok(WinnerLikelihood::L1),
            "L2" => Ok(WinnerLikelihood::L2),
            other => Err(Error::Config(format!("unknown likelihood '{other}'"))),
        })
        .collect::<Result<Vec<_>>>()?;
    let study = WinnerStudy {
        ms: p.list("ms")?,
        n1: p.get("n1")?,
        n2: p.get("n2")?,
        kinds,
        level: p.get("level")?,
        reps: p.get("reps")?,
        steps: p.get("steps")?,
        seed,
    };
    let mut table = Table::new(vec!["m", "likelihood", "coverage", "coverage_se", "mean_length", "length_se"]);
    for r in winner_study(&study)? {
        table.push(vec![
            r.m.into(),
            r.kind.to_string().into(),
            r.coverage.into(),
            r.coverage_se.into(),
            r.mean_length.into(),
            r.length_se.into(),
        ]);
    }
    Ok(table)
}

fn run_fig1(p: &Params, seed: u64) -> Result<Table> {
    let study = Fig1Study {
        n: p.get("n")?,
        t: p.get("t")?,
        prior_mean: p.get("prior_mean")?,
        prior_sd: p.get("prior_sd")?,
        level: p.get("level")?,
        thetas: p.list("thetas")?,
        reps: p.get("reps")?,
        seed,
    };
    let mut table = Table::new(vec![
        "theta",
        "nonselective",
        "nonselective_se",
        "unadjusted",
        "unadjusted_se",
        "selective",
        "selective_se",
    ]);
    for r in fig1(&study)? {
        table.push(vec![
            r.theta.into(),
            r.nonselective.into(),
            r.nonselective_se.into(),
            r.unadjusted.into(),
            r.unadjusted_se.into(),
            r.selective.into(),
            r.selective_se.into(),
        ]);
    }
    Ok(table)
}

fn run_normal_curves(p: &Params, _seed: u64) -> Result<Table> {
    let model = SplitNormalModel::new(p.get("n")?, p.get("gamma")?, p.get("t")?)?;
    let y: f64 = p.get("y")?;
    let kinds = [PriorKind::Uniform, PriorKind::ExactMatching, PriorKind::SelectiveJeffreys];
    let curves = kinds
        .iter()
        .map(|&k| model.posterior_curve(y, k, PosteriorMode::Selective))
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(vec![
        "theta",
        "uniform_prior",
        "pmp_prior",
        "jeffreys_prior",
        "posterior_u",
        "posterior_pmp",
        "posterior_j",
    ]);
    for th in p.list::<f64>("thetas")? {
        let mut row: Vec<Cell> = vec![th.into()];
        for &k in &kinds {
            row.push(model.prior_density(k, th, y)?.into());
        }
        for c in &curves {
            row.push(c.density(th).into());
        }
        table.push(row);
    }
    table.notes.insert(
        "sup_cdf_distance_pmp_jeffreys".into(),
        json!(curves[1].sup_distance(&curves[2])),
    );
    Ok(table)
}

fn run_fig4(p: &Params, _seed: u64) -> Result<Table> {
    let n1: u64 = p.get("n1")?;
    let n2: u64 = p.get("n2")?;
    let model = ExpFamModel1D::new(Bernoulli, n1, n2, SelectionRule::at_least(p.get("threshold")?))?;
    let data = SplitSample {
        stat1: p.get("y1")?,
        stat2: p.get("y2")?,
    };
    let kinds = [PriorKind::NonSelectiveJeffreys, PriorKind::ExactMatching, PriorKind::SelectiveJeffreys];
    let curves = kinds
        .iter()
        .map(|&k| model.selective_posterior(&data, k))
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(vec![
        "theta",
        "nonselective_jeffreys_prior",
        "pmp_prior",
        "jeffreys_prior",
        "posterior_nsj",
        "posterior_pmp",
        "posterior_j",
    ]);
    for th in p.list::<f64>("thetas")? {
        let mut row: Vec<Cell> = vec![th.into()];
        for &k in &kinds {
            row.push(model.induced_prior_density(k, th, Some(&data))?.into());
        }
        for c in &curves {
            row.push(c.density(th).into());
        }
        table.push(row);
    }
    table.notes.insert(
        "sup_cdf_distance_pmp_jeffreys".into(),
        json!(curves[1].sup_distance(&curves[2])),
    );
    Ok(table)
}

fn run_expfam_coverage(p: &Params, seed: u64) -> Result<Table> {
    let family: String = p.get("family")?;
    let mut table = Table::new(vec!["n", "n1", "q", "theta0", "prior", "alpha", "coverage", "se"]);
    let mut solved = Vec::new();
    let (ns, qs): (Vec<u64>, Vec<f64>) = (p.list("ns")?, p.list("qs")?);
    let mut cell = 0u64;
    for &n in &ns {
        for &q in &qs {
            let study = ExpFamStudy {
                n,
                first_fraction: p.get("first_fraction")?,
                threshold: p.get("threshold")?,
                q,
                priors: parse_priors(p, "priors")?,
                alphas: p.list("alphas")?,
                reps: p.get("reps")?,
                seed,
            };
            let res = match family.as_str() {
                "exponential" => expfam_coverage(ExponentialRate, &study, cell)?,
                "inverse_gaussian" => expfam_coverage(InverseGaussianMean::default(), &study, cell)?,
                other => return Err(Error::Config(format!("unsupported family '{other}'"))),
            };
            cell += 1;
            solved.push(json!({"n": n, "q": q, "theta0": res.theta0, "acceptance_rate": res.acceptance_rate}));
            for (prior, e) in &res.entries {
                table.push(vec![
                    n.into(),
                    res.n1.into(),
                    q.into(),
                    res.theta0.into(),
                    prior.label().into(),
                    e.alpha.into(),
                    e.coverage.into(),
                    e.se.into(),
                ]);
            }
        }
    }
    table.notes.insert("theta0".into(), Value::Array(solved));
    Ok(table)
}

fn run_fig7(p: &Params, seed: u64) -> Result<Table> {
    let priors = p
        .list::<String>("priors")?
        .iter()
        .map(|s| match s.as_str() {
            "unadjusted" | "inverse_sd" => Ok(UnknownVarPrior::Unadjusted),
            "jeffreys" => Ok(UnknownVarPrior::JeffreysBased),
            other => Err(Error::Config(format!("unknown prior '{other}' (unadjusted or jeffreys)"))),
        })
        .collect::<Result<Vec<_>>>()?;
    let study = PitStudy {
        n1: p.get("n1")?,
        n2: p.get("n2")?,
        t: p.get("t")?,
        mu0: p.get("mu0")?,
        sigma2_0: p.get("sigma2_0")?,
        priors,
        reps: p.get("reps")?,
        steps: p.get("steps")?,
        seed,
    };
    let grid: Vec<f64> = p.list("grid")?;
    let mut table = Table::new(vec!["prior", "u", "ecdf", "se", "ks"]);
    let mut ks = serde_json::Map::new();
    for r in pit_ecdf(&study)? {
        let label = prior_label(r.prior);
        ks.insert(label.into(), json!(r.ks));
        for (u, f) in grid.iter().zip(ecdf_on_grid(&r.pits, &grid)) {
            let se = (f * (1.0 - f) / r.pits.len() as f64).sqrt();
            table.push(vec![label.into(), (*u).into(), f.into(), se.into(), r.ks.into()]);
        }
    }
    table.notes.insert("ks".into(), Value::Object(ks));
    Ok(table)
}

fn prior_label(p: UnknownVarPrior) -> &'static str {
    match p {
        UnknownVarPrior::Unadjusted => "unadjusted",
        UnknownVarPrior::JeffreysBased => "jeffreys",
        UnknownVarPrior::PmpGamma1(_) => "pmp",
    }
}

fn run_custom(p: &Params, seed: u64) -> Result<Table> {
    let method = match p.raw("method")? {
        "deterministic" => CoverageMethod::Deterministic,
        "monte_carlo" | "mc" => CoverageMethod::MonteCarlo,
        other => return Err(Error::Config(format!("unknown method '{other}'"))),
    };
    let spec = CoverageSpec {
        model: SplitNormalModel::new(p.get("n")?, p.get("gamma")?, p.get("t")?)?,
        prior: p.raw("prior")?.parse()?,
        thetas: p.list("thetas")?,
        alphas: p.list("alphas")?,
        reps: p.get("reps")?,
        seed,
        method,
    };
    let report = match method {
        CoverageMethod::Deterministic => coverage_deterministic(&spec)?,
        CoverageMethod::MonteCarlo => coverage_mc(&spec)?,
    };
    let mut table = Table::new(vec!["theta", "alpha", "coverage", "se", "matching_error"]);
    for e in report.entries {
        table.push(vec![e.theta.into(), e.alpha.into(), e.coverage.into(), e.se.into(), e.matching_error().into()]);
    }
    Ok(table)
}
