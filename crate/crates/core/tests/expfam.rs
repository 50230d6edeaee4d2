use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, InverseGaussian};

use selprior::expfam::{
    Bernoulli, ExpFamModel1D, ExpFamily, ExponentialRate, InverseGaussianMean, SelectionRule, SplitSample,
};
use selprior::special::truncated_normal_variance;
use selprior::PriorKind;

fn vst_moments<F: ExpFamily>(family: &F, theta: f64, n1: u64, reps: usize, seed: u64) -> (f64, f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z: Vec<f64> = (0..reps)
        .map(|_| {
            let s = family.sample_stat_sum(theta, n1, &mut rng);
            let est = family.mle_from_mean(s / n1 as f64).unwrap();
            (n1 as f64).sqrt() * (family.vst(est) - family.vst(theta))
        })
        .collect();
    let mean = z.iter().sum::<f64>() / reps as f64;
    let var = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    (mean, var, (var / reps as f64).sqrt())
}

#[test]
fn vst_estimates_are_near_standard_normal() {
    // The estimate carries an O(n₁^{-1/2}) bias on this scale, hence the allowance.
    for n1 in [10u64, 80] {
        let slack = 1.0 / (n1 as f64).sqrt();
        for theta in [0.75, 1.0, 1.25] {
            let (m, v, se) = vst_moments(&ExponentialRate, theta, n1, 20_000, n1);
            assert!(m.abs() <= 3.0 * se + slack, "exponential n1={n1}: mean {m}");
            assert!((v - 1.0).abs() <= 0.1, "exponential n1={n1}: var {v}");
            let (m, v, se) = vst_moments(&InverseGaussianMean::default(), theta, n1, 20_000, n1 + 1);
            assert!(m.abs() <= 3.0 * se + slack, "inverse gaussian n1={n1}: mean {m}");
            assert!((v - 1.0).abs() <= 0.1, "inverse gaussian n1={n1}: var {v}");
        }
    }
}

#[test]
fn named_transformations_and_flat_priors() {
    let e = ExponentialRate;
    let ig = InverseGaussianMean::default();
    let ne = ExpFamModel1D::new(e, 8, 2, SelectionRule::above(1.0)).unwrap();
    let ni = ExpFamModel1D::new(ig, 8, 2, SelectionRule::above(1.0)).unwrap();
    for th in [0.2, 0.9, 3.0, 11.0] {
        assert!((e.vst(th) - th.ln()).abs() < 1e-14);
        assert!((ig.vst(th) + 2.0 / th.sqrt()).abs() < 1e-14);
        let pe = ne.induced_prior_density(PriorKind::NonSelectiveJeffreys, th, None).unwrap();
        let pi = ni.induced_prior_density(PriorKind::NonSelectiveJeffreys, th, None).unwrap();
        assert!((pe * th - 1.0).abs() < 1e-12, "{pe}");
        assert!((pi * th.powf(1.5) - 1.0).abs() < 1e-12, "{pi}");
    }
}

fn binomial_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

#[test]
fn exponential_selection_probability_against_simulation() {
    let m = ExpFamModel1D::new(ExponentialRate, 8, 0, SelectionRule::above(1.0)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for theta in [0.7, 1.3] {
        let exp = Exp::new(theta).unwrap();
        let reps = 1_000_000;
        let hits = (0..reps)
            .filter(|_| {
                let s: f64 = (0..8).map(|_| exp.sample(&mut rng)).sum();
                8.0 / s > 1.0
            })
            .count();
        let p = m.selection_probability(theta).unwrap();
        let p_hat = hits as f64 / reps as f64;
        assert!((p - p_hat).abs() <= 3.0 * binomial_se(p, reps), "theta={theta}: {p} vs {p_hat}");
    }
}

#[test]
fn inverse_gaussian_selection_probability_against_simulation() {
    let m = ExpFamModel1D::new(InverseGaussianMean::default(), 8, 0, SelectionRule::above(1.0)).unwrap();
    let ig = InverseGaussian::new(1.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let reps = 1_000_000;
    let hits = (0..reps)
        .filter(|_| (0..8).map(|_| ig.sample(&mut rng)).sum::<f64>() / 8.0 > 1.0)
        .count();
    let p = m.selection_probability(1.0).unwrap();
    let p_hat = hits as f64 / reps as f64;
    assert!((p - p_hat).abs() <= 3.0 * binomial_se(p, reps), "{p} vs {p_hat}");
}

#[test]
fn binomial_selective_priors_nearly_coincide() {
    let m = ExpFamModel1D::new(Bernoulli, 8, 2, SelectionRule::at_least(0.5)).unwrap();
    let d = SplitSample { stat1: 4.0, stat2: 1.0 };
    let j = m.selective_posterior(&d, PriorKind::SelectiveJeffreys).unwrap();
    let p = m.selective_posterior(&d, PriorKind::ExactMatching).unwrap();
    let nsj = m.selective_posterior(&d, PriorKind::NonSelectiveJeffreys).unwrap();
    assert!(j.sup_distance(&p) <= 0.02, "{}", j.sup_distance(&p));
    // Both selective priors favour values with large selection probability.
    assert!(j.quantile(0.5).unwrap() > nsj.quantile(0.5).unwrap());
}

/// `log P(Gamma(k, rate) ≤ x)` for integer `k` via Poisson sums.
fn log_erlang_cdf(k: u64, rate: f64, x: f64) -> f64 {
    let lam = rate * x;
    if lam < k as f64 {
        // Upper Poisson tail, summed directly to avoid cancellation.
        let mut log_term = -lam + k as f64 * lam.ln() - (1..=k).map(|i| (i as f64).ln()).sum::<f64>();
        let mut sum = 0.0;
        let first = log_term;
        for i in k..k + 400 {
            sum += (log_term - first).exp();
            log_term += lam.ln() - ((i + 1) as f64).ln();
        }
        first + sum.ln()
    } else {
        let mut term = (-lam).exp();
        let mut sum = term;
        for i in 1..k {
            term *= lam / i as f64;
            sum += term;
        }
        (1.0 - sum).ln()
    }
}

#[test]
fn exponential_posterior_against_dense_grid() {
    let (n1, n2) = (8u64, 2u64);
    let m = ExpFamModel1D::new(ExponentialRate, n1, n2, SelectionRule::above(1.0)).unwrap();
    let d = SplitSample { stat1: 6.2, stat2: 2.1 };
    let (n, gamma) = ((n1 + n2) as f64, n1 as f64 / (n1 + n2) as f64);
    // Log posterior on ν = log θ, where the θ-scale Jacobian and √i(θ) cancel.
    let log_post = |nu: f64| {
        let theta = nu.exp();
        let loglik = n * nu - theta * (d.stat1 + d.stat2);
        let sel = log_erlang_cdf(n1, theta, n1 as f64);
        let j = ((1.0 - gamma) + gamma * truncated_normal_variance((n1 as f64).sqrt() * nu).unwrap()).sqrt();
        j.ln() + loglik - sel
    };
    let (lo, hi, steps) = (-12.0f64, 4.0f64, 400_000usize);
    let h = (hi - lo) / steps as f64;
    let peak = (0..=steps).map(|i| log_post(lo + i as f64 * h)).fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = (0..=steps).map(|i| (log_post(lo + i as f64 * h) - peak).exp()).collect();
    let cdf_at = |theta0: f64| {
        let k = ((theta0.ln() - lo) / h).round() as usize;
        let trap = |a: usize, b: usize| (a..b).map(|i| 0.5 * (w[i] + w[i + 1])).sum::<f64>();
        trap(0, k) / trap(0, steps)
    };
    for theta0 in [0.6f64, 1.0, 1.2, 1.6] {
        // Snap θ₀ to the grid so the oracle needs no interpolation.
        let k = ((theta0.ln() - lo) / h).round();
        let snapped = (lo + k * h).exp();
        let got = m.posterior_cdf_at(snapped, &d, PriorKind::SelectiveJeffreys).unwrap();
        let want = cdf_at(snapped);
        assert!((got - want).abs() <= 1e-4, "theta0={theta0}: {got} vs {want}");
    }
}

fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

#[test]
fn inverse_gaussian_posterior_against_dense_grid() {
    let (n1, n2) = (8u64, 2u64);
    let m = ExpFamModel1D::new(InverseGaussianMean::default(), n1, n2, SelectionRule::above(1.0)).unwrap();
    let d = SplitSample { stat1: 12.0, stat2: 4.0 };
    let (n, gamma, lam) = (10.0f64, 0.8f64, n1 as f64);
    // On ν = -2θ^{-1/2} the θ^{-3/2} factor is absorbed by the Jacobian.
    let log_post = |nu: f64| {
        let theta = 4.0 / (nu * nu);
        let loglik = -(d.stat1 + d.stat2) / (2.0 * theta * theta) + n / theta;
        // P(Ȳ₁ > 1) with Ȳ₁ ~ IG(θ, n₁).
        let a = lam.sqrt();
        let sel = phi(-a * (1.0 / theta - 1.0)) - (2.0 * lam / theta).exp() * phi(-a * (1.0 / theta + 1.0));
        let j = ((1.0 - gamma) + gamma * truncated_normal_variance(lam.sqrt() * (nu + 2.0)).unwrap()).sqrt();
        j.ln() + loglik - sel.ln()
    };
    let (lo, hi, steps) = (-5.0f64, -1e-9f64, 400_000usize);
    let h = (hi - lo) / steps as f64;
    let lp: Vec<f64> = (0..=steps).map(|i| log_post(lo + i as f64 * h)).collect();
    let peak = lp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = lp.iter().map(|l| (l - peak).exp()).collect();
    let trap = |a: usize, b: usize| (a..b).map(|i| 0.5 * (w[i] + w[i + 1])).sum::<f64>();
    let total = trap(0, steps);
    for theta0 in [1.0f64, 1.5, 2.5] {
        let k = ((-2.0 / theta0.sqrt() - lo) / h).round();
        let snapped = 4.0 / (lo + k * h).powi(2);
        let got = m.posterior_cdf_at(snapped, &d, PriorKind::SelectiveJeffreys).unwrap();
        let want = trap(0, k as usize) / total;
        assert!((got - want).abs() <= 1e-4, "theta0={theta0}: {got} vs {want}");
    }
}

#[test]
fn theta_for_selection_probability_solves() {
    let m = ExpFamModel1D::new(ExponentialRate, 8, 2, SelectionRule::above(1.0)).unwrap();
    for q in [0.1, 0.5, 0.9] {
        let th = m.theta_for_selection_probability(q).unwrap();
        assert!((m.selection_probability(th).unwrap() - q).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn induced_priors_positive_when_split(theta in 0.02f64..20.0, s1 in 0.5f64..7.9, s2 in 0.1f64..5.0) {
        let m = ExpFamModel1D::new(ExponentialRate, 8, 2, SelectionRule::above(1.0)).unwrap();
        let d = SplitSample { stat1: s1, stat2: s2 };
        for kind in [PriorKind::Uniform, PriorKind::SelectiveJeffreys, PriorKind::ExactMatching, PriorKind::NonSelectiveJeffreys] {
            let p = m.induced_prior_density(kind, theta, Some(&d)).unwrap();
            prop_assert!(p > 0.0 && p.is_finite(), "{} at {}: {}", kind, theta, p);
        }
    }

    #[test]
    fn posterior_cdf_increasing(a in 0.1f64..3.0, b in 0.1f64..3.0) {
        let m = ExpFamModel1D::new(InverseGaussianMean::default(), 8, 2, SelectionRule::above(1.0)).unwrap();
        let d = SplitSample { stat1: 10.0, stat2: 2.4 };
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(hi - lo > 1e-3);
        let fl = m.posterior_cdf_at(lo, &d, PriorKind::SelectiveJeffreys).unwrap();
        let fh = m.posterior_cdf_at(hi, &d, PriorKind::SelectiveJeffreys).unwrap();
        prop_assert!(fl < fh && (0.0..=1.0).contains(&fl) && (0.0..=1.0).contains(&fh));
    }
}
