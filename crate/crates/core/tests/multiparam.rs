use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, Normal};

use selprior::expfam::OrthogonalPrior;
use selprior::multiparam::unknown_var::{inverse_sd, tstat_selection_probability};
use selprior::multiparam::{
    mh_sample, MHConfig, UnknownVarModel, UnknownVarPrior, UnknownVarStats, WinnerLikelihood, WinnerModel,
};
use selprior::simulate::{kolmogorov_critical, ks_two_sample, sample_conditional, UnknownVarSampler, DEFAULT_FLOOR};
use selprior::special::{hazard_pair, log_norm_cdf, regularized_gamma_sf};
use selprior::NormalModel;

fn within_3se(p_hat: f64, p: f64, n: usize) -> bool {
    (p_hat - p).abs() <= 3.0 * (p * (1.0 - p) / n as f64).sqrt()
}

#[test]
fn tstat_selection_probability_against_simulation() {
    let (mu, sigma2, n1, t) = (0.0, 1.0, 50u64, 2.0);
    let p = tstat_selection_probability(mu, sigma2, n1, t).unwrap();
    let mean = Normal::new(mu, (sigma2 / n1 as f64).sqrt()).unwrap();
    let chi = ChiSquared::new((n1 - 1) as f64).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let reps = 1_000_000;
    let hits = (0..reps)
        .filter(|_| {
            let ybar = mean.sample(&mut rng);
            let v1 = sigma2 * chi.sample(&mut rng) / n1 as f64;
            ybar / v1.sqrt() > t / (n1 as f64).sqrt()
        })
        .count();
    assert!(within_3se(hits as f64 / reps as f64, p, reps), "{p} vs {hits}");
}

#[test]
fn first_batch_variance_depends_on_mean_under_selection() {
    let draws = |mu: f64, seed: u64| -> Vec<f64> {
        let s = UnknownVarSampler { n1: 50, n2: 10, t: 2.0, mu, sigma2: 1.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        sample_conditional(&s, 3000, DEFAULT_FLOOR, &mut rng)
            .unwrap()
            .draws
            .iter()
            .map(|d| d.var1)
            .collect()
    };
    let (a, b) = (draws(0.0, 1), draws(1.0, 2));
    let d = ks_two_sample(&a, &b);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let crit = kolmogorov_critical(0.01) * ((n + m) / (n * m)).sqrt();
    assert!(d > crit, "D = {d}, critical {crit}");
    // Without selection the law of V₁ is free of μ.
    let free = |mu: f64, seed: u64| -> Vec<f64> {
        let s = UnknownVarSampler { n1: 50, n2: 10, t: f64::NEG_INFINITY, mu, sigma2: 1.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        sample_conditional(&s, 3000, DEFAULT_FLOOR, &mut rng).unwrap().draws.iter().map(|d| d.var1).collect()
    };
    assert!(ks_two_sample(&free(0.0, 3), &free(1.0, 4)) < crit);
}

fn stats() -> UnknownVarStats {
    UnknownVarStats { mean1: 0.45, var1: 0.9, mean2: 0.2, var2: 1.3 }
}

#[test]
fn jeffreys_based_prior_is_orthogonal_construction() {
    let model = UnknownVarModel::new(50, 10, 2.0, stats()).unwrap();
    let (n1, n) = (50.0f64, 60.0f64);
    let v1 = stats().var1;
    // c(σ²) absorbs the i_μμ^{1/2} = σ⁻¹ factor so both sides carry c = σ⁻¹.
    let prior = OrthogonalPrior {
        c: |l: &[f64]| inverse_sd(l[0]) * l[0].sqrt(),
        info: |_psi: f64, l: &[f64]| 1.0 / l[0],
        vst: |psi: f64, l: &[f64]| psi / l[0].sqrt(),
        nu_prior: |nu: f64, l: &[f64]| {
            let proxy = NormalModel::new(n, n1 / n, 2.0 * v1.sqrt() / (n1.sqrt() * l[0].sqrt()))?;
            proxy.jeffreys_prior_density(nu)
        },
    };
    for &(mu, s2) in &[(-0.3, 0.5), (0.0, 1.0), (0.2, 1.7), (0.9, 0.3)] {
        let a = prior.density(mu, &[s2]).unwrap();
        let b = model.prior_density(UnknownVarPrior::JeffreysBased, &inverse_sd, mu, s2).unwrap();
        assert!((a - b).abs() <= 1e-12 * b, "({mu}, {s2}): {a} vs {b}");
        // The displayed form: c(σ²){1 + (n₁/n) h2(n₁^{1/2}μ/σ - t v₁^{1/2}/σ)}^{1/2}.
        let x = n1.sqrt() * mu / s2.sqrt() - 2.0 * v1.sqrt() / s2.sqrt();
        let shown = inverse_sd(s2) * (1.0 + n1 / n * hazard_pair(x).unwrap().h2).sqrt();
        assert!((shown - b).abs() <= 1e-9 * b);
    }
}

#[test]
fn jeffreys_based_prior_increases_in_mean() {
    let model = UnknownVarModel::new(50, 10, 2.0, stats()).unwrap();
    for s2 in [0.3, 1.0, 3.0] {
        let mut prev = 0.0;
        for i in 0..=40 {
            let mu = -1.0 + 0.05 * i as f64;
            let p = model.prior_density(UnknownVarPrior::JeffreysBased, &inverse_sd, mu, s2).unwrap();
            // Past x ≈ 8.8 the factor rounds to exactly 1 in f64.
            assert!(p > prev || (p == prev && mu > 0.5), "sigma2={s2} mu={mu}");
            prev = p;
        }
    }
}

#[test]
fn unadjusted_likelihood_gradient() {
    let model = UnknownVarModel::new(50, 10, 2.0, stats()).unwrap();
    let s = stats();
    let (n1, n2) = (50.0, 10.0);
    let ss = |mu: f64| n1 * (s.var1 + (s.mean1 - mu).powi(2)) + n2 * (s.var2 + (s.mean2 - mu).powi(2));
    for &(mu, s2) in &[(0.1, 0.8), (0.5, 1.2), (-0.2, 2.0)] {
        let d_mu = (n1 * (s.mean1 - mu) + n2 * (s.mean2 - mu)) / s2;
        let d_s2 = -(n1 + n2) / (2.0 * s2) + ss(mu) / (2.0 * s2 * s2);
        let h = 1e-6;
        let f = |a: f64, b: f64| model.loglik_unadjusted(a, b).unwrap();
        let fd_mu = (f(mu + h, s2) - f(mu - h, s2)) / (2.0 * h);
        let fd_s2 = (f(mu, s2 + h) - f(mu, s2 - h)) / (2.0 * h);
        assert!((fd_mu - d_mu).abs() <= 1e-5 * d_mu.abs().max(1.0), "{fd_mu} vs {d_mu}");
        assert!((fd_s2 - d_s2).abs() <= 1e-5 * d_s2.abs().max(1.0), "{fd_s2} vs {d_s2}");
    }
}

#[test]
fn two_arm_win_probability_against_simulation() {
    let model = WinnerModel::new(5.0, 5.0, vec![0.4, 0.1], 0.2, WinnerLikelihood::L1).unwrap();
    let theta = [0.1, 0.3];
    let p = model.log_denominator(&theta).unwrap().exp();
    let sd = (1.0f64 / 5.0).sqrt();
    let (a, b) = (Normal::new(theta[0], sd).unwrap(), Normal::new(theta[1], sd).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let reps = 1_000_000;
    let hits = (0..reps).filter(|_| a.sample(&mut rng) > b.sample(&mut rng)).count();
    assert!(within_3se(hits as f64 / reps as f64, p, reps), "{p} vs {hits}");
}

#[test]
fn conditioning_on_losers_gives_one_dimensional_likelihood() {
    let (n1, n2, y, fu) = (5.0, 5.0, vec![0.7, 0.2, -0.1], 0.4);
    let model = WinnerModel::new(n1, n2, y.clone(), fu, WinnerLikelihood::L2).unwrap();
    let t = 0.2;
    let direct = |th1: f64, rest: &[f64]| {
        let mut ll = -0.5 * n2 * (th1 - fu).powi(2) - 0.5 * n1 * (th1 - y[0]).powi(2);
        for (th, yy) in rest.iter().zip(&y[1..]) {
            ll -= 0.5 * n1 * (th - yy).powi(2);
        }
        ll - log_norm_cdf(n1.sqrt() * (th1 - t)).unwrap()
    };
    let rest = [0.1, -0.3];
    let base = model.loglik(&[0.0, rest[0], rest[1]]).unwrap() - direct(0.0, &rest);
    for i in 0..=20 {
        let th1 = -1.0 + 0.1 * i as f64;
        let got = model.loglik(&[th1, rest[0], rest[1]]).unwrap() - direct(th1, &rest);
        assert!((got - base).abs() < 1e-10, "theta1={th1}");
    }
    let reduced = model.reduced_model().unwrap();
    assert_eq!(reduced.t(), t);
    assert!((reduced.gamma() - 0.5).abs() < 1e-15);
}

#[test]
fn winner_prior_form() {
    let model = WinnerModel::new(5.0, 5.0, vec![0.7, 0.2], 0.4, WinnerLikelihood::L2).unwrap();
    for th1 in [-1.0, 0.0, 0.5, 2.0] {
        let lp = model.log_prior(&[th1, 0.3]).unwrap();
        let h2 = hazard_pair(5f64.sqrt() * (th1 - 0.2)).unwrap().h2;
        assert!((lp - 0.5 * (1.0 + 0.5 * h2).ln()).abs() < 1e-12);
        assert_eq!(lp, model.log_prior(&[th1, -4.0]).unwrap());
    }
}

#[test]
fn mh_recovers_standard_normal() {
    let cfg = MHConfig::new(12_500, vec![1.0], 41);
    let chain = mh_sample(|x: &[f64]| Ok(-0.5 * x[0] * x[0]), &[3.0], &cfg).unwrap();
    let (m, v) = (chain.mean(0), chain.variance(0));
    let ess = chain.effective_sample_size(0);
    assert!(m.abs() <= 3.0 * (v / ess).sqrt(), "mean {m}, ess {ess}");
    assert!((v - 1.0).abs() <= 0.1, "var {v}");
}

#[test]
fn mh_matches_conjugate_posterior() {
    // No selection and π ∝ σ⁻¹: σ⁻² | y ~ Gamma(n/2 - 1, S/2) and μ | y is
    // Student t on n - 2 degrees of freedom.
    let s = UnknownVarStats { mean1: 0.3, var1: 1.1, mean2: 0.0, var2: 0.0 };
    let model = UnknownVarModel::new(12, 0, f64::NEG_INFINITY, s).unwrap();
    let n = 12.0f64;
    let ss = n * s.var1;
    let lt = |x: &[f64]| model.log_posterior(UnknownVarPrior::Unadjusted, &inverse_sd, x[0], x[1]);
    let cfg = MHConfig::new(60_000, vec![0.5, 0.5], 43);
    let chain = mh_sample(lt, &[0.3, 0.1], &cfg).unwrap();
    let ess = chain.effective_sample_size(0).min(chain.effective_sample_size(1));

    let shape = n / 2.0 - 1.0;
    let scale = (ss / (n * (n - 2.0))).sqrt();
    let nu = n - 2.0;
    // t CDF by Simpson on the kernel, anchored at the centre.
    let t_cdf = |x: f64| {
        let k = |u: f64| (1.0 + u * u / nu).powf(-(nu + 1.0) / 2.0);
        let simpson = |a: f64, b: f64| {
            let m = 20_000;
            let h = (b - a) / m as f64;
            (0..=m)
                .map(|i| {
                    let w = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                    w * k(a + i as f64 * h)
                })
                .sum::<f64>()
                * h
                / 3.0
        };
        let total = 2.0 * simpson(0.0, 2000.0);
        0.5 + simpson(0.0, x.abs()).copysign(x) / total
    };
    for z in [-1.5, -0.5, 0.0, 0.7, 1.8] {
        let mu = s.mean1 + z * scale;
        let want = t_cdf(z);
        let got = chain.cdf_at(0, mu);
        let tol = 4.0 * (want * (1.0 - want) / ess).sqrt();
        assert!((got - want).abs() <= tol, "mu cdf at z={z}: {got} vs {want} (ess {ess})");
    }
    for q in [0.5, 0.8, 1.1, 1.6] {
        let want = regularized_gamma_sf(shape, ss / 2.0, 1.0 / q).unwrap();
        let got = chain.cdf_at(1, q.ln());
        let tol = 4.0 * (want * (1.0 - want) / ess).sqrt();
        assert!((got - want).abs() <= tol, "sigma2 cdf at {q}: {got} vs {want}");
    }
}
