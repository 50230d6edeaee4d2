//! Standard normal distribution functions, the log-Φ derivative family,
//! incomplete gamma and inverse Gaussian distribution functions.
//!
//! Lower normal tails are handled through the Mills ratio
//! `m(u) = Φ(-u)/φ(u)` evaluated by its continued fraction, so that
//! `log Φ(x)`, `h1(x) = φ(x)/Φ(x)` and `1 + h2(x)` keep full relative
//! accuracy far into the tail where `Φ(x)` itself underflows.

use crate::error::{Error, Result};
use crate::real::Real;

/// Below this point `log Φ` is evaluated from the Mills-ratio continued fraction.
const LOG_CDF_CF_BELOW: f64 = -8.0;
/// Below this point `h1`, `h1 + x` and `1 + h2` come from the continued fraction.
const HAZARD_CF_BELOW: f64 = -5.0;
const CF_MAX_ITER: usize = 10_000;

/// The first two derivatives of `log Φ` at a point.
///
/// `h1 = φ/Φ` and `h2 = -x h1 - h1²`. In exact arithmetic `h1 > 0`,
/// `h1 + x > 0` and `-1 < h2 < 0` everywhere; in floating point `h1`
/// underflows to zero once `x` exceeds roughly 38 (f64).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HazardPair<T> {
    pub h1: T,
    pub h2: T,
}

#[inline]
fn check_finite<T: Real>(func: &'static str, x: T) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(func, format!("non-finite argument {x}")))
    }
}

#[inline]
fn ln_sqrt_2pi<T: Real>() -> T {
    T::lit(0.918_938_533_204_672_8)
}

/// Standard normal density.
#[inline]
pub fn norm_pdf<T: Real>(x: T) -> T {
    norm_log_pdf(x).exp()
}

/// Log of the standard normal density.
#[inline]
pub fn norm_log_pdf<T: Real>(x: T) -> T {
    -T::lit(0.5) * x * x - ln_sqrt_2pi::<T>()
}

/// Continued fraction `k0/(u + (k0+1)/(u + (k0+2)/(u + ...)))` by the
/// modified Lentz method. With `k0 = 1` this is `1/m(u) - u`.
fn mills_tail_fraction<T: Real>(u: T, k0: usize) -> T {
    let tiny = T::min_positive_value() * T::lit(1e10);
    let eps = T::epsilon();
    let mut f = tiny;
    let mut c = f;
    let mut d = T::zero();
    for j in 0..CF_MAX_ITER {
        let a = T::from_usize(k0 + j).unwrap();
        d = u + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = u + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = d.recip();
        let delta = c * d;
        f = f * delta;
        if (delta - T::one()).abs() < eps {
            break;
        }
    }
    f
}

/// Standard normal distribution function Φ(x).
pub fn norm_cdf<T: Real>(x: T) -> Result<T> {
    check_finite("norm_cdf", x)?;
    if x < T::lit(LOG_CDF_CF_BELOW) {
        Ok(log_norm_cdf(x)?.exp())
    } else {
        Ok(T::lit(0.5) * (-x * T::FRAC_1_SQRT_2()).erfc())
    }
}

/// Upper tail `1 - Φ(x)`.
#[inline]
pub fn norm_sf<T: Real>(x: T) -> Result<T> {
    norm_cdf(-x)
}

/// `log Φ(x)`, accurate in relative terms throughout the lower tail.
pub fn log_norm_cdf<T: Real>(x: T) -> Result<T> {
    check_finite("log_norm_cdf", x)?;
    if x < T::lit(LOG_CDF_CF_BELOW) {
        let u = -x;
        let h1 = u + mills_tail_fraction(u, 1);
        Ok(norm_log_pdf(x) - h1.ln())
    } else if x > T::zero() {
        let upper = T::lit(0.5) * (x * T::FRAC_1_SQRT_2()).erfc();
        Ok((-upper).ln_1p())
    } else {
        Ok((T::lit(0.5) * (-x * T::FRAC_1_SQRT_2()).erfc()).ln())
    }
}

/// `log(1 - Φ(x))`.
#[inline]
pub fn log_norm_sf<T: Real>(x: T) -> Result<T> {
    log_norm_cdf(-x)
}

/// Mills ratio `Φ(-u)/φ(u)`.
pub fn mills_ratio<T: Real>(u: T) -> Result<T> {
    check_finite("mills_ratio", u)?;
    if -u < T::lit(HAZARD_CF_BELOW) {
        Ok((u + mills_tail_fraction(u, 1)).recip())
    } else {
        Ok((log_norm_cdf(-u)? - norm_log_pdf(u)).exp())
    }
}

/// `h1(x) + x`, strictly positive and free of cancellation for `x ≪ 0`.
pub fn hazard_shift<T: Real>(x: T) -> Result<T> {
    check_finite("hazard_shift", x)?;
    if x < T::lit(HAZARD_CF_BELOW) {
        Ok(mills_tail_fraction(-x, 1))
    } else {
        Ok(h1_direct(x)? + x)
    }
}

fn h1_direct<T: Real>(x: T) -> Result<T> {
    Ok((norm_log_pdf(x) - log_norm_cdf(x)?).exp())
}

/// `h1(x) = d/dx log Φ(x)` and `h2(x) = d²/dx² log Φ(x)`.
pub fn hazard_pair<T: Real>(x: T) -> Result<HazardPair<T>> {
    check_finite("hazard_pair", x)?;
    let (h1, delta) = if x < T::lit(HAZARD_CF_BELOW) {
        let delta = mills_tail_fraction(-x, 1);
        (delta - x, delta)
    } else {
        let h1 = h1_direct(x)?;
        (h1, h1 + x)
    };
    Ok(HazardPair { h1, h2: -h1 * delta })
}

/// `1 + h2(x)`: the variance of `N(x, 1)` truncated to `(0, ∞)`.
///
/// In the lower tail this is evaluated as `δ (R₂ - δ)` from the continued
/// fraction, which avoids the cancellation in `1 - h1 (h1 + x)`.
pub fn truncated_normal_variance<T: Real>(x: T) -> Result<T> {
    check_finite("truncated_normal_variance", x)?;
    if x < T::lit(HAZARD_CF_BELOW) {
        let u = -x;
        let delta = mills_tail_fraction(u, 1);
        let r2 = mills_tail_fraction(u, 2);
        Ok(delta * (r2 - delta))
    } else {
        let h1 = h1_direct(x)?;
        Ok(T::one() - h1 * (h1 + x))
    }
}

/// Inverse of the standard normal distribution function.
///
/// Rational starting approximation followed by one Halley step against
/// [`norm_cdf`].
pub fn norm_quantile<T: Real>(p: T) -> Result<T> {
    if !(p > T::zero() && p < T::one()) {
        return Err(Error::domain(
            "norm_quantile",
            format!("probability {p} outside (0, 1)"),
        ));
    }
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    let pf = p.as_f64();
    let p_low = 0.02425;
    let x0 = if pf < p_low || pf > 1.0 - p_low {
        let q = if pf < p_low {
            (-2.0 * pf.ln()).sqrt()
        } else {
            (-2.0 * (1.0 - pf).ln()).sqrt()
        };
        let num = ((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5];
        let den = (((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0;
        if pf < p_low {
            num / den
        } else {
            -num / den
        }
    } else {
        let q = pf - 0.5;
        let r = q * q;
        let num = (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q;
        let den = ((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0;
        num / den
    };
    let mut x = T::lit(x0);
    // Halley refinement; in the lower tail work with log Φ to keep relative accuracy.
    for _ in 0..2 {
        let (e, u) = if x < T::zero() {
            let lc = log_norm_cdf(x)?;
            let e = T::one() - (p.ln() - lc).exp();
            // e is the relative residual (Φ - p)/Φ; scale by 1/h1.
            let h1 = hazard_pair(x)?.h1;
            (e, e / h1)
        } else {
            let e = norm_cdf(x)? - p;
            (e, e / norm_pdf(x))
        };
        if e == T::zero() {
            break;
        }
        x = x - u / (T::one() + x * u * T::lit(0.5));
    }
    Ok(x)
}

/// Antiderivative of `x φ(x) Φ(a + b x)` in `x`:
/// `F(x; a, b) = (b/d) φ(a/d) Φ(d x + a b/d) - φ(x) Φ(a + b x)`, `d = (1 + b²)^{1/2}`.
pub fn owen_linear_antiderivative<T: Real>(x: T, a: T, b: T) -> Result<T> {
    for v in [x, a, b] {
        check_finite("owen_linear_antiderivative", v)?;
    }
    let d = (T::one() + b * b).sqrt();
    let first = b / d * norm_pdf(a / d) * norm_cdf(d * x + a * b / d)?;
    let second = norm_pdf(x) * norm_cdf(a + b * x)?;
    Ok(first - second)
}

/// Natural log of the gamma function for positive arguments (Lanczos, g = 7).
pub fn ln_gamma<T: Real>(a: T) -> T {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if a < T::lit(0.5) {
        // Reflection: Γ(a)Γ(1-a) = π / sin(πa)
        let pi = T::PI();
        return (pi / (pi * a).sin()).abs().ln() - ln_gamma(T::one() - a);
    }
    let z = a - T::one();
    let mut s = T::lit(COEF[0]);
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        s = s + T::lit(c) / (z + T::from_usize(i).unwrap());
    }
    let t = z + T::lit(G + 0.5);
    T::lit(0.5) * (T::lit(2.0) * T::PI()).ln() + (z + T::lit(0.5)) * t.ln() - t + s.ln()
}

/// Lower and upper regularized incomplete gamma functions `(P(a, z), Q(a, z))`
/// together with `log P`.
fn incomplete_gamma_parts<T: Real>(a: T, z: T) -> (T, T, T) {
    if z == T::zero() {
        return (T::zero(), T::one(), T::neg_infinity());
    }
    let log_prefix = -z + a * z.ln() - ln_gamma(a);
    let eps = T::epsilon();
    if z < a + T::one() {
        let mut ap = a;
        let mut term = a.recip();
        let mut sum = term;
        for _ in 0..CF_MAX_ITER {
            ap = ap + T::one();
            term = term * z / ap;
            sum = sum + term;
            if term.abs() < sum.abs() * eps {
                break;
            }
        }
        let log_p = log_prefix + sum.ln();
        let p = log_p.exp();
        (p, T::one() - p, log_p)
    } else {
        let tiny = T::min_positive_value() * T::lit(1e10);
        let mut b = z + T::one() - a;
        let mut c = tiny.recip();
        let mut d = b.recip();
        let mut h = d;
        for i in 1..CF_MAX_ITER {
            let fi = T::from_usize(i).unwrap();
            let an = -fi * (fi - a);
            b = b + T::lit(2.0);
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = d.recip();
            let del = d * c;
            h = h * del;
            if (del - T::one()).abs() < eps {
                break;
            }
        }
        let q = (log_prefix + h.ln()).exp();
        (T::one() - q, q, (-q).ln_1p())
    }
}

fn check_positive<T: Real>(func: &'static str, name: &str, v: T) -> Result<()> {
    if v > T::zero() && !v.is_nan() {
        Ok(())
    } else {
        Err(Error::domain(func, format!("{name} must be positive, got {v}")))
    }
}

/// `P(G ≤ x)` for `G ~ Gamma(shape, rate)`.
pub fn regularized_gamma_cdf<T: Real>(shape: T, rate: T, x: T) -> Result<T> {
    Ok(log_regularized_gamma_cdf(shape, rate, x)?.exp())
}

/// `log P(G ≤ x)` for `G ~ Gamma(shape, rate)`.
pub fn log_regularized_gamma_cdf<T: Real>(shape: T, rate: T, x: T) -> Result<T> {
    const F: &str = "regularized_gamma_cdf";
    check_positive(F, "shape", shape)?;
    check_positive(F, "rate", rate)?;
    check_positive(F, "x", x)?;
    if !shape.is_finite() || !rate.is_finite() {
        return Err(Error::domain(F, "non-finite shape or rate"));
    }
    if x == T::infinity() {
        return Ok(T::zero());
    }
    Ok(incomplete_gamma_parts(shape, rate * x).2)
}

/// `P(G > x)` for `G ~ Gamma(shape, rate)`.
pub fn regularized_gamma_sf<T: Real>(shape: T, rate: T, x: T) -> Result<T> {
    regularized_gamma_cdf(shape, rate, x)?;
    if x == T::infinity() {
        return Ok(T::zero());
    }
    Ok(incomplete_gamma_parts(shape, rate * x).1)
}

fn check_ig<T: Real>(mean: T, shape: T, x: T) -> Result<()> {
    const F: &str = "inverse_gaussian_cdf";
    check_positive(F, "mean", mean)?;
    check_positive(F, "shape", shape)?;
    check_positive(F, "x", x)?;
    if !mean.is_finite() || !shape.is_finite() {
        return Err(Error::domain(F, "non-finite mean or shape"));
    }
    Ok(())
}

/// Distribution function of the inverse Gaussian law `IG(mean, shape)`.
pub fn inverse_gaussian_cdf<T: Real>(mean: T, shape: T, x: T) -> Result<T> {
    check_ig(mean, shape, x)?;
    if x == T::infinity() {
        return Ok(T::one());
    }
    let r = (shape / x).sqrt();
    let a = r * (x / mean - T::one());
    if a > T::zero() {
        return Ok(T::one() - log_inverse_gaussian_sf(mean, shape, x)?.exp());
    }
    let b = r * (x / mean + T::one());
    let second = (T::lit(2.0) * shape / mean + log_norm_cdf(-b)?).exp();
    Ok(norm_cdf(a)? + second)
}

/// `log P(X > x)` for `X ~ IG(mean, shape)`, accurate when the tail is tiny.
pub fn log_inverse_gaussian_sf<T: Real>(mean: T, shape: T, x: T) -> Result<T> {
    check_ig(mean, shape, x)?;
    if x == T::infinity() {
        return Ok(T::neg_infinity());
    }
    let r = (shape / x).sqrt();
    let a = r * (x / mean - T::one());
    let b = r * (x / mean + T::one());
    if a > T::zero() {
        // φ(a) e^{2λ/μ} = φ(b), so the survival is φ(a) (m(a) - m(b)).
        let diff = mills_ratio(a)? - mills_ratio(b)?;
        Ok(norm_log_pdf(a) + diff.ln())
    } else {
        let second = (T::lit(2.0) * shape / mean + log_norm_cdf(-b)?).exp();
        Ok((norm_sf(a)? - second).ln())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn cdf_reference_values() {
        assert_eq!(norm_cdf(0.0_f64).unwrap(), 0.5);
        // P(Y > 0) for Y ~ N(-0.5, 0.2) is Φ(-0.5/√0.2) ≈ 0.13.
        let p = norm_cdf(-0.5 / 0.2_f64.sqrt()).unwrap();
        assert!((p - 0.131_776_236_239_156_76).abs() < 1e-6);
        assert!((p - 0.13).abs() < 0.005);
        assert!(rel(norm_cdf(-10.0).unwrap(), 7.619_853_024_160_526e-24) < 1e-13);
        assert!(rel(norm_cdf(-20.0).unwrap(), 2.753_624_118_606_233_7e-89) < 1e-12);
    }

    #[test]
    fn log_cdf_deep_tail() {
        // mpmath, 50 digits
        let cases = [
            (-40.0, -804.608_442_013_753_8),
            (-20.0, -203.917_155_371_097_26),
            (-10.0, -53.231_285_150_512_47),
            (-8.0, -35.013_437_159_914_55),
            (-5.0, -15.064_998_393_988_726),
            (3.0, -0.001_350_809_964_748_193_8),
            (10.0, -7.619_853_024_160_526e-24),
        ];
        for (x, want) in cases {
            let got = log_norm_cdf(x).unwrap();
            assert!(rel(got, want) < 1e-13, "x={x} got={got} want={want}");
        }
        // Asymptotic expansion at -40: log φ(40) - log 40 + log(1 - 1/40² + 3/40⁴ - 15/40⁶)
        let u: f64 = 40.0;
        let series = 1.0 - u.powi(-2) + 3.0 * u.powi(-4) - 15.0 * u.powi(-6);
        let asym = norm_log_pdf(u) - u.ln() + series.ln();
        assert!(rel(log_norm_cdf(-40.0).unwrap(), asym) < 1e-10);
    }

    #[test]
    fn hazard_reference_values() {
        let hp = hazard_pair(0.0_f64).unwrap();
        assert!((hp.h1 - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-15);
        assert!((hp.h2 + 2.0 / std::f64::consts::PI).abs() < 1e-15);

        let cases = [
            (-40.0, 40.024_968_847_207_26, -0.999_377_331_621_408_6, 6.226_683_785_913_888e-4),
            (-10.0, 10.098_093_233_962_512, -0.990_554_622_174_343_7, 9.445_377_825_656_261e-3),
            (-5.0, 5.186_503_967_125_842, -0.967_303_565_382_887_8, 3.269_643_461_711_222_5e-2),
            (-1.118034, 1.620_462_219_234_003_3, -0.814_165_947_145_721_4, 0.185_834_052_854_278_62),
            (3.0, 4.437_839_042_125_663_8e-3, -1.333_321_154_174_080_6e-2, 0.986_666_788_458_259_2),
        ];
        for (x, h1, h2, v) in cases {
            let hp = hazard_pair(x).unwrap();
            assert!(rel(hp.h1, h1) < 1e-13, "h1 x={x}");
            assert!(rel(hp.h2, h2) < 1e-12, "h2 x={x}");
            assert!(rel(truncated_normal_variance(x).unwrap(), v) < 1e-11, "var x={x}");
        }
        let hp = hazard_pair(10.0_f64).unwrap();
        assert!(rel(hp.h1, 7.694_598_626_706_419e-23) < 1e-12);
        assert!(rel(hp.h2, -10.0 * 7.694_598_626_706_419e-23) < 1e-10);
    }

    #[test]
    fn hazard_branches_join() {
        let x = HAZARD_CF_BELOW;
        let below = hazard_pair(x - 1e-12).unwrap();
        let above = hazard_pair(x + 1e-12).unwrap();
        assert!(rel(below.h1, above.h1) < 1e-12);
        assert!(rel(below.h2, above.h2) < 1e-12);
        let lc = log_norm_cdf(LOG_CDF_CF_BELOW - 1e-12).unwrap();
        let hc = log_norm_cdf(LOG_CDF_CF_BELOW + 1e-12).unwrap();
        assert!(rel(lc, hc) < 1e-12);
    }

    #[test]
    fn non_finite_is_domain_error() {
        assert!(matches!(norm_cdf(f64::NAN), Err(Error::Domain { .. })));
        assert!(matches!(hazard_pair(f64::INFINITY), Err(Error::Domain { .. })));
        assert!(matches!(log_norm_cdf(f64::NEG_INFINITY), Err(Error::Domain { .. })));
    }

    #[test]
    fn quantile_reference_values() {
        assert!((norm_quantile(0.975_f64).unwrap() - 1.959_963_984_540_054_2).abs() < 1e-13);
        assert!((norm_quantile(1e-10_f64).unwrap() + 6.361_340_902_404_056).abs() < 1e-12);
        assert!((norm_quantile(1e-300_f64).unwrap() + 37.047_096_299_361_2).abs() < 1e-10);
        assert_eq!(norm_quantile(0.5_f64).unwrap(), 0.0);
        assert!(norm_quantile(0.0_f64).is_err());
        assert!(norm_quantile(1.0_f64).is_err());
    }

    #[test]
    fn owen_special_cases() {
        // b = 0: F = -φ(x) Φ(a)
        let (x, a) = (0.7_f64, -0.4_f64);
        let f = owen_linear_antiderivative(x, a, 0.0).unwrap();
        assert!((f + norm_pdf(x) * norm_cdf(a).unwrap()).abs() < 1e-16);
        // derivative check at (0.3, -1.2, 2.0)
        let (x, a, b) = (0.3, -1.2, 2.0);
        let h = 1e-5;
        let fd = (owen_linear_antiderivative(x + h, a, b).unwrap()
            - owen_linear_antiderivative(x - h, a, b).unwrap())
            / (2.0 * h);
        let want = x * norm_pdf(x) * norm_cdf(a + b * x).unwrap();
        assert!(rel(fd, want) < 1e-8, "fd={fd} want={want}");
    }

    #[test]
    fn ln_gamma_reference_values() {
        let cases = [
            (0.5_f64, 0.572_364_942_924_700_1),
            (1.0, 0.0),
            (3.7, 1.428_072_326_665_388_1),
            (8.0, 8.525_161_361_065_414),
            (50.5, 146.519_255_490_720_63),
            (200.0, 857.933_669_825_857_4),
        ];
        for (a, want) in cases {
            assert!((ln_gamma(a) - want).abs() < 1e-12 * want.abs().max(1.0), "a={a}");
        }
    }

    #[test]
    fn gamma_cdf_values() {
        let e = regularized_gamma_cdf(1.0, 1.0, 1.0_f64).unwrap();
        assert!((e - (1.0 - (-1.0_f64).exp())).abs() < 1e-15);
        let cases = [
            (8.0, 1.0, 8.0, 0.547_039_190_513_005_5),
            (2.5, 1.0, 1.3, 0.238_634_732_154_986_1),
            (30.0, 1.0, 45.0, 0.992_662_800_702_203_5),
            (0.5, 1.0, 0.01, 0.112_462_916_018_284_89),
            (8.0, 2.0, 4.0, 0.547_039_190_513_005_5),
        ];
        for (k, r, x, want) in cases {
            assert!(rel(regularized_gamma_cdf(k, r, x).unwrap(), want) < 1e-12);
        }
        assert_eq!(regularized_gamma_cdf(3.0, 1.0, f64::INFINITY).unwrap(), 1.0);
        assert!(regularized_gamma_cdf(0.0, 1.0, 1.0_f64).is_err());
        assert!(regularized_gamma_cdf(1.0, -1.0, 1.0_f64).is_err());
        assert!(regularized_gamma_cdf(1.0, 1.0, 0.0_f64).is_err());
    }

    #[test]
    fn gamma_cdf_matches_poisson_sum() {
        // Integer shape: P(k, x) = 1 - e^{-x} Σ_{j<k} x^j / j!
        for k in 1..20 {
            for &x in &[0.3, 1.0, 4.5, 12.0, 30.0] {
                let mut term = 1.0_f64;
                let mut sum = 1.0;
                for j in 1..k {
                    term *= x / j as f64;
                    sum += term;
                }
                let want = 1.0 - (-x).exp() * sum;
                let got = regularized_gamma_cdf(k as f64, 1.0, x).unwrap();
                assert!((got - want).abs() < 1e-13, "k={k} x={x}");
            }
        }
    }

    #[test]
    fn inverse_gaussian_values() {
        assert!(rel(inverse_gaussian_cdf(1.0, 8.0, 1.5_f64).unwrap(), 0.910_389_503_885_694_9) < 1e-13);
        let sf = [
            ((1.0, 8.0, 1.0), -0.840_487_139_982_677_4),
            ((2.0, 8.0, 1.0), -0.118_305_075_310_591_42),
            ((0.2, 64.0, 1.0), -517.485_343_055_809_2),
        ];
        for ((m, l, x), want) in sf {
            let got = log_inverse_gaussian_sf(m, l, x).unwrap();
            assert!(rel(got, want) < 1e-11, "{m} {l} {x}: {got} vs {want}");
        }
        // Concentration at the mean as the shape grows.
        assert!((inverse_gaussian_cdf(1.0, 1e12, 1.0_f64).unwrap() - 0.5).abs() < 1e-5);
        assert!(inverse_gaussian_cdf(1.0, 8.0, 1e-9_f64).unwrap() < 1e-300);
        assert!(inverse_gaussian_cdf(1.0, 8.0, -1.0_f64).is_err());
        assert_eq!(inverse_gaussian_cdf(1.0, 8.0, f64::INFINITY).unwrap(), 1.0);
        // Large 2λ/μ must not overflow.
        let v = inverse_gaussian_cdf(0.01, 50.0, 0.009_f64).unwrap();
        assert!(v.is_finite() && v > 0.0 && v < 1.0);
    }

    #[test]
    fn works_in_single_precision() {
        let p = norm_cdf(-1.0_f32).unwrap();
        assert!((p - 0.158_655_25).abs() < 1e-6);
        let lc = log_norm_cdf(-20.0_f32).unwrap();
        assert!((lc + 203.917_16).abs() / 203.9 < 1e-5);
        let hp = hazard_pair(-12.0_f32).unwrap();
        assert!(hp.h1 > 12.0 && hp.h2 > -1.0 && hp.h2 < 0.0);
    }
}
