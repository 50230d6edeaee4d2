//! Bracketed root finding.

use crate::error::{Error, Result};
use crate::real::Real;

/// Brent's method on a sign-changing bracket `[a, b]`.
///
/// The objective may fail; its errors are propagated unchanged.
pub fn brent<T: Real, F: FnMut(T) -> Result<T>>(
    mut f: F,
    a: T,
    b: T,
    xtol: T,
    max_iter: usize,
) -> Result<T> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if fa.is_nan() || fb.is_nan() || (fa > T::zero()) == (fb > T::zero()) {
        return Err(Error::numeric(
            "brent",
            format!("no sign change on [{a}, {b}]: f = {fa}, {fb}"),
        ));
    }
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if (fb > T::zero()) == (fc > T::zero()) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = two * T::epsilon() * b.abs() + half * xtol.max(T::min_positive_value());
        let m = half * (c - b);
        if m.abs() <= tol || fb == T::zero() {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * m * s;
                q = T::one() - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (two * m * qa * (qa - r) - (b - a) * (r - T::one()));
                q = (qa - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            } else {
                p = -p;
            }
            if two * p < (T::lit(3.0) * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b = if d.abs() > tol {
            b + d
        } else if m > T::zero() {
            b + tol
        } else {
            b - tol
        };
        fb = f(b)?;
        if fb.is_nan() {
            return Err(Error::numeric("brent", format!("objective is NaN at {b}")));
        }
    }
    Err(Error::numeric(
        "brent",
        format!("no convergence after {max_iter} iterations near {b}"),
    ))
}

/// Expands outward from `x0` until `f` changes sign, for monotone `f`.
///
/// `lo` and `hi` are open limits of the domain; a finite limit is approached
/// geometrically rather than crossed. Returns the bracket `(a, b)` with
/// `a < b`.
pub fn bracket_monotone<T: Real, F: FnMut(T) -> Result<T>>(
    mut f: F,
    x0: T,
    step: T,
    lo: T,
    hi: T,
    max_expand: usize,
) -> Result<(T, T)> {
    if !(x0 > lo && x0 < hi) || !(step > T::zero()) {
        return Err(Error::domain(
            "bracket_monotone",
            format!("start {x0} not inside ({lo}, {hi}) or step {step} not positive"),
        ));
    }
    let f0 = f(x0)?;
    if f0 == T::zero() {
        return Ok((x0, x0));
    }
    let f_hi = f(next_toward(x0, step, hi))?;
    let increasing = if f_hi == f0 { f0 < T::zero() } else { f_hi > f0 };
    // Move in the direction that changes the sign of f.
    let go_up = (f0 < T::zero()) == increasing;
    let limit = if go_up { hi } else { lo };
    let mut prev = x0;
    let mut w = step;
    for _ in 0..max_expand {
        let x = next_toward(prev, w, limit);
        let fx = f(x)?;
        if fx.is_nan() {
            return Err(Error::numeric("bracket_monotone", format!("objective is NaN at {x}")));
        }
        if (fx > T::zero()) != (f0 > T::zero()) || fx == T::zero() {
            return Ok(if x < prev { (x, prev) } else { (prev, x) });
        }
        if x == prev {
            break;
        }
        prev = x;
        w = w * T::lit(2.0);
    }
    Err(Error::numeric(
        "bracket_monotone",
        format!("no sign change found from {x0} toward {limit}"),
    ))
}

fn next_toward<T: Real>(x: T, w: T, limit: T) -> T {
    let dir = if limit > x { T::one() } else { -T::one() };
    let cand = x + dir * w;
    let crossed = if dir > T::zero() { cand >= limit } else { cand <= limit };
    if crossed && limit.is_finite() {
        limit + (x - limit) * T::lit(0.25)
    } else {
        cand
    }
}
