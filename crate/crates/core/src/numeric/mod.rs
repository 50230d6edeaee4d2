//! Quadrature, root finding and small log-scale helpers.

pub mod quad;
pub mod roots;

use std::cell::RefCell;

use crate::error::{Error, Result};
use crate::real::Real;

/// Adapts a fallible function for routines that take plain `Fn(T) -> T`.
///
/// A failed evaluation returns NaN and the first error is kept; [`finish`]
/// reports it in preference to whatever the routine made of the NaN.
///
/// [`finish`]: Fallible::finish
pub(crate) struct Fallible<F> {
    f: RefCell<F>,
    err: RefCell<Option<Error>>,
}

impl<F> Fallible<F> {
    pub(crate) fn new(f: F) -> Self {
        Fallible {
            f: RefCell::new(f),
            err: RefCell::new(None),
        }
    }

    pub(crate) fn call<T: Real>(&self, x: T) -> T
    where
        F: FnMut(T) -> Result<T>,
    {
        match (self.f.borrow_mut())(x) {
            Ok(v) => v,
            Err(e) => {
                self.err.borrow_mut().get_or_insert(e);
                T::nan()
            }
        }
    }

    pub(crate) fn finish<R>(&self, r: Result<R>) -> Result<R> {
        match self.err.borrow_mut().take() {
            Some(e) => Err(e),
            None => r,
        }
    }
}

/// `log(exp(a) + exp(b))` without overflow.
pub fn log_add_exp<T: Real>(a: T, b: T) -> T {
    if a == T::neg_infinity() {
        return b;
    }
    if b == T::neg_infinity() {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `log(1 - exp(x))` for `x ≤ 0`.
pub fn log1m_exp<T: Real>(x: T) -> T {
    if x > -T::LN_2() {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}
