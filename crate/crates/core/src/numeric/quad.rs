//! Adaptive Gauss–Kronrod quadrature.
//!
//! [`integrate`] bisects the subinterval with the largest error estimate
//! until the global tolerance is met. [`integrate_region`] extends it to
//! half-lines and the real line by integrating outward from a centre in
//! pieces of doubling width until the remaining tail is negligible.
//! [`log_integrate_region`] does the same for integrands supplied on the log
//! scale, so integrals far below `f64::MIN_POSITIVE` keep relative accuracy.

use crate::error::{Error, Result};
use crate::real::Real;

/// Kronrod abscissae on [-1, 1] (non-negative half, descending).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
/// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5, 7.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Relative size of the last tail piece at which outward integration stops.
pub const TAIL_TOL: f64 = 1e-12;
const MAX_TAIL_PIECES: usize = 80;

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_subdivisions: usize,
}

impl<T: Real> Default for QuadOptions<T> {
    fn default() -> Self {
        QuadOptions {
            abs_tol: T::lit(1e-10),
            rel_tol: T::lit(1e-10),
            max_subdivisions: 2000,
        }
    }
}

impl<T: Real> QuadOptions<T> {
    pub fn with_tol(abs_tol: T, rel_tol: T) -> Self {
        QuadOptions {
            abs_tol,
            rel_tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
}

/// One 15-point Kronrod rule on `[a, b]`, returning `(estimate, error)`.
pub fn gauss_kronrod<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> (T, T) {
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    let fc = f(mid);
    let mut kron = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let pair = f(mid - dx) + f(mid + dx);
        kron = kron + pair * T::lit(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + pair * T::lit(WG[j / 2]);
        }
    }
    let kron = kron * half;
    let gauss = gauss * half;
    (kron, (kron - gauss).abs())
}

struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

/// Globally adaptive integration of `f` over the finite interval `[a, b]`.
pub fn integrate<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    b: T,
    opts: &QuadOptions<T>,
) -> Result<Integral<T>> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("integrate", "bounds must be finite"));
    }
    if a == b {
        return Ok(Integral {
            value: T::zero(),
            error: T::zero(),
            evaluations: 0,
        });
    }
    let abs_tol = T::tol_floor(opts.abs_tol);
    let rel_tol = T::tol_floor(opts.rel_tol);
    let (value, error) = gauss_kronrod(&mut f, a, b);
    let mut evaluations = 15;
    let mut segments = vec![Segment { a, b, value, error }];
    let mut total = value;
    let mut total_err = error;
    // Error from segments too narrow to split further.
    let mut frozen_err = T::zero();
    loop {
        if !total.is_finite() || !total_err.is_finite() {
            return Err(Error::numeric(
                "integrate",
                format!("non-finite integrand on [{a}, {b}]"),
            ));
        }
        if total_err + frozen_err <= abs_tol.max(rel_tol * total.abs()) {
            break;
        }
        if segments.len() >= opts.max_subdivisions {
            return Err(Error::numeric(
                "integrate",
                format!(
                    "no convergence on [{a}, {b}] after {} subdivisions: \
                     estimate {total}, error {}",
                    segments.len(),
                    total_err + frozen_err
                ),
            ));
        }
        let (idx, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).unwrap())
            .unwrap();
        if segments[idx].error == T::zero() {
            break;
        }
        let seg = segments.swap_remove(idx);
        let mid = (seg.a + seg.b) * T::lit(0.5);
        let width = seg.b - seg.a;
        if width.abs() <= T::epsilon() * T::lit(100.0) * mid.abs().max(T::one()) {
            frozen_err = frozen_err + seg.error;
            total_err = total_err - seg.error;
            segments.push(Segment {
                error: T::zero(),
                ..seg
            });
            continue;
        }
        let (v1, e1) = gauss_kronrod(&mut f, seg.a, mid);
        let (v2, e2) = gauss_kronrod(&mut f, mid, seg.b);
        evaluations += 30;
        total = total - seg.value + v1 + v2;
        total_err = total_err - seg.error + e1 + e2;
        segments.push(Segment {
            a: seg.a,
            b: mid,
            value: v1,
            error: e1,
        });
        segments.push(Segment {
            a: mid,
            b: seg.b,
            value: v2,
            error: e2,
        });
    }
    // Re-sum to shed accumulated rounding from the running updates.
    let value = segments.iter().fold(T::zero(), |s, g| s + g.value);
    let error = segments.iter().fold(frozen_err, |s, g| s + g.error);
    Ok(Integral {
        value,
        error,
        evaluations,
    })
}

/// Integrates `f` over `[lo, hi]` where either bound may be infinite.
///
/// The integrand should be of order one near `center` and `scale` should be
/// its natural width; the absolute tolerance is applied relative to `scale`.
/// Outward pieces double in width and stop once both the last piece and the
/// integrand at its outer edge times its width fall below
/// [`TAIL_TOL`] relative to the running total.
pub fn integrate_region<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    lo: T,
    hi: T,
    center: T,
    scale: T,
    opts: &QuadOptions<T>,
) -> Result<Integral<T>> {
    if lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(Error::domain("integrate_region", format!("bad region [{lo}, {hi}]")));
    }
    if !(scale > T::zero() && scale.is_finite()) || !center.is_finite() {
        return Err(Error::domain(
            "integrate_region",
            format!("bad centre {center} or scale {scale}"),
        ));
    }
    if lo == hi {
        return Ok(Integral {
            value: T::zero(),
            error: T::zero(),
            evaluations: 0,
        });
    }
    let center = center.max(lo).min(hi);
    let piece_opts = QuadOptions {
        abs_tol: opts.abs_tol * scale,
        ..*opts
    };
    let tail_tol = T::lit(TAIL_TOL);
    let mut acc = Integral {
        value: T::zero(),
        error: T::zero(),
        evaluations: 0,
    };
    for dir in [T::one(), -T::one()] {
        let bound = if dir > T::zero() { hi } else { lo };
        if bound == center {
            continue;
        }
        let mut a = center;
        let mut width = scale;
        let mut pieces = 0;
        loop {
            let raw = a + dir * width;
            let b = if dir > T::zero() { raw.min(bound) } else { raw.max(bound) };
            let (x0, x1) = if dir > T::zero() { (a, b) } else { (b, a) };
            let piece = integrate(&mut f, x0, x1, &piece_opts)?;
            acc.value = acc.value + piece.value;
            acc.error = acc.error + piece.error;
            acc.evaluations += piece.evaluations;
            if b == bound {
                break;
            }
            pieces += 1;
            let edge = f(b).abs() * width;
            acc.evaluations += 1;
            let small = tail_tol * acc.value.abs();
            if pieces >= 2 && piece.value.abs() <= small && edge <= small {
                break;
            }
            if pieces > MAX_TAIL_PIECES {
                return Err(Error::numeric(
                    "integrate_region",
                    format!("integrand tail did not decay beyond {b}"),
                ));
            }
            a = b;
            width = width * T::lit(2.0);
        }
    }
    Ok(acc)
}

/// `log ∫ exp(lf(x)) dx` over `[lo, hi]`.
///
/// `center` should be at or near the maximiser of `lf`; the integrand is
/// rescaled by `exp(-lf(center))` before integration. Returns `-∞` when the
/// integrand vanishes identically on the region.
pub fn log_integrate_region<T: Real, F: FnMut(T) -> T>(
    mut lf: F,
    lo: T,
    hi: T,
    center: T,
    scale: T,
    opts: &QuadOptions<T>,
) -> Result<T> {
    if lo >= hi {
        return Ok(T::neg_infinity());
    }
    let c = center.max(lo).min(hi);
    // Nudge off an infinite bound to a finite evaluation point.
    let mut reference = lf(c);
    if reference == T::neg_infinity() || reference.is_nan() {
        // Search inward for a point with positive density.
        let mut found = false;
        for k in 0..60 {
            let step = scale * T::lit(2f64.powi(k) / 1024.0);
            for cand in [c + step, c - step] {
                if cand > lo && cand < hi {
                    let v = lf(cand);
                    if v.is_finite() {
                        reference = v;
                        found = true;
                        break;
                    }
                }
            }
            if found {
                break;
            }
        }
        if !found {
            return Ok(T::neg_infinity());
        }
    }
    if !reference.is_finite() {
        return Err(Error::numeric(
            "log_integrate_region",
            format!("log-integrand not finite at reference point {c}"),
        ));
    }
    let integral = integrate_region(
        |x| {
            let v = lf(x) - reference;
            if v.is_nan() {
                v
            } else {
                v.exp()
            }
        },
        lo,
        hi,
        c,
        scale,
        opts,
    )?;
    if integral.value < T::zero() {
        return Err(Error::numeric(
            "log_integrate_region",
            "negative integral of a positive integrand",
        ));
    }
    Ok(integral.value.ln() + reference)
}

/// Locates the maximiser of a unimodal log-density on `(lo, hi)`.
///
/// Climbs from `start` in steps that double from `scale`, then refines by
/// golden-section search to `rel_tol * scale`.
pub fn find_mode<T: Real, F: FnMut(T) -> T>(
    mut lf: F,
    lo: T,
    hi: T,
    start: T,
    scale: T,
    rel_tol: T,
) -> Result<T> {
    let inside = |x: T| x > lo && x < hi;
    let clamp_in = |x: T, from: T| {
        if x <= lo {
            lo + (from - lo) * T::lit(0.5)
        } else if x >= hi {
            hi - (hi - from) * T::lit(0.5)
        } else {
            x
        }
    };
    let mut x0 = start;
    if !inside(x0) {
        return Err(Error::domain("find_mode", format!("start {start} outside region")));
    }
    let mut f0 = lf(x0);
    // Pick the uphill direction.
    let mut step = scale;
    let xr = clamp_in(x0 + step, x0);
    let fr = lf(xr);
    let xl = clamp_in(x0 - step, x0);
    let fl = lf(xl);
    if !(f0.is_finite() || fr.is_finite() || fl.is_finite()) {
        return Err(Error::numeric("find_mode", format!("log-density not finite near {start}")));
    }
    let nan_low = |v: T| if v.is_nan() { T::neg_infinity() } else { v };
    let (f0n, frn, fln) = (nan_low(f0), nan_low(fr), nan_low(fl));
    let (mut a, mut b);
    if f0n >= frn && f0n >= fln {
        a = xl;
        b = xr;
    } else {
        let dir = if frn > fln { T::one() } else { -T::one() };
        let (mut prev, mut cur, mut fcur) = if dir > T::zero() { (x0, xr, frn) } else { (x0, xl, fln) };
        x0 = cur;
        f0 = fcur;
        let mut iters = 0;
        loop {
            step = step * T::lit(2.0);
            let next = clamp_in(cur + dir * step, cur);
            let fnext = nan_low(lf(next));
            iters += 1;
            if fnext <= fcur || iters > 200 || (next - cur).abs() <= T::epsilon() * next.abs() {
                a = prev.min(next);
                b = prev.max(next);
                break;
            }
            prev = cur;
            cur = next;
            fcur = fnext;
            x0 = cur;
            f0 = fcur;
        }
        let _ = f0;
    }
    // Golden-section search on [a, b].
    let g = T::lit(0.618_033_988_749_894_8);
    let tol = T::tol_floor(rel_tol) * scale;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = nan_low(lf(c));
    let mut fd = nan_low(lf(d));
    let mut iters = 0;
    while (b - a).abs() > tol && iters < 200 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = nan_low(lf(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = nan_low(lf(d));
        }
        iters += 1;
    }
    let _ = x0;
    Ok((a + b) * T::lit(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_exact_for_low_degree_polynomials() {
        // 15-point Kronrod integrates degree ≤ 22 exactly.
        for deg in 0..=22 {
            let (v, _) = gauss_kronrod(&mut |x: f64| x.powi(deg), 0.0, 1.0);
            let want = 1.0 / (deg as f64 + 1.0);
            assert!((v - want).abs() < 1e-14, "degree {deg}");
        }
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let opts = QuadOptions::default();
        // ∫_0^1 1/(1e-4 + (x-0.3)^2) dx = 100 (atan(70) + atan(30))
        let got = integrate(|x: f64| 1.0 / (1e-4 + (x - 0.3).powi(2)), 0.0, 1.0, &opts).unwrap();
        let want = 100.0 * (70f64.atan() + 30f64.atan());
        assert!((got.value - want).abs() / want < 1e-10);
    }

    #[test]
    fn region_over_real_line() {
        let opts = QuadOptions::default();
        let r = integrate_region(
            |x: f64| (-0.5 * x * x).exp(),
            f64::NEG_INFINITY,
            f64::INFINITY,
            0.3,
            1.0,
            &opts,
        )
        .unwrap();
        assert!((r.value - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-10);
        // Slowly decaying exponential tail.
        let r = integrate_region(|x: f64| (-0.01 * x).exp(), 0.0, f64::INFINITY, 0.0, 1.0, &opts).unwrap();
        assert!((r.value - 100.0).abs() < 1e-8);
    }

    #[test]
    fn log_region_far_below_underflow() {
        let opts = QuadOptions::default();
        // ∫_{40}^{∞} φ(x) dx = Φ(-40), log ≈ -804.608...
        let lf = |x: f64| -0.5 * x * x - 0.918_938_533_204_672_8;
        let v = log_integrate_region(lf, 40.0, f64::INFINITY, 40.0, 1.0 / 40.0, &opts).unwrap();
        assert!((v + 804.608_442_013_753_8).abs() < 1e-9);
    }

    #[test]
    fn mode_of_skewed_density() {
        // Gamma(5, 1) log-density: mode at 4
        let lf = |x: f64| 4.0 * x.ln() - x;
        let m = find_mode(lf, 0.0, f64::INFINITY, 0.5, 0.25, 1e-9).unwrap();
        assert!((m - 4.0).abs() < 1e-6);
    }

    #[test]
    fn nan_integrand_is_error() {
        let opts = QuadOptions::default();
        assert!(integrate(|_x: f64| f64::NAN, 0.0, 1.0, &opts).is_err());
    }
}
