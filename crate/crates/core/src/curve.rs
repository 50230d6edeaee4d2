//! Tabulated posterior distribution functions.

use crate::error::{Error, Result};
use crate::numeric::Fallible;
use crate::numeric::quad::{find_mode, integrate, QuadOptions};
use crate::numeric::roots::brent;
use crate::prior::PriorKind;
use crate::real::Real;

/// Cells per curvature standard deviation near the mode.
const CELLS_PER_SD: f64 = 8.0;
/// Half-width of the uniformly spaced core, in curvature standard deviations.
const CORE_SDS: f64 = 10.0;
const TAIL_GROWTH: f64 = 1.2;
/// Stop extending a side once its estimated remaining mass falls below this
/// fraction of the mass accumulated so far.
const TAIL_MASS: f64 = 1e-12;
const MAX_CELLS: usize = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub struct CurveMeta {
    pub model: String,
    pub prior: PriorKind,
    pub observed: Vec<f64>,
}

/// A normalised posterior tabulated on an adaptive grid.
///
/// Between nodes the distribution function is the cubic Hermite interpolant
/// of the tabulated CDF and density; beyond the ends it decays exponentially
/// at the rate observed in the outermost cell.
#[derive(Debug, Clone)]
pub struct PosteriorCurve<T> {
    grid: Vec<T>,
    cdf: Vec<T>,
    density: Vec<T>,
    left_rate: T,
    right_rate: T,
    meta: CurveMeta,
}

struct Side<T> {
    nodes: Vec<T>,
    dens: Vec<T>,
    masses: Vec<T>,
    tail: T,
    rate: T,
}

impl<T: Real> PosteriorCurve<T> {
    /// Tabulates the distribution with unnormalised log-density `lk` on
    /// `(lo, hi)`. `start` seeds the mode search and `scale` is a rough width.
    pub fn from_log_kernel<F>(
        lk: F,
        lo: T,
        hi: T,
        start: T,
        scale: T,
        meta: CurveMeta,
    ) -> Result<Self>
    where
        F: FnMut(T) -> Result<T>,
    {
        let fl = Fallible::new(lk);
        let eval = |x: T| fl.call(x);

        let mode = fl.finish(find_mode(eval, lo, hi, start, scale, T::lit(1e-9)))?;
        let peak = fl.finish(Ok(eval(mode)))?;
        if !peak.is_finite() {
            return Err(Error::DivergedPosterior(format!(
                "log-density {peak} at the mode {mode}"
            )));
        }
        let sd = curvature_sd(&eval, mode, scale, lo, hi, peak);
        let kernel = |x: T| (eval(x) - peak).exp();

        let sides = extend_side(&kernel, &eval, peak, mode, sd, hi, T::one()).and_then(|r| {
            extend_side(&kernel, &eval, peak, mode, sd, lo, -T::one()).map(|l| (l, r))
        });
        let (left, right) = fl.finish(sides)?;

        let mut grid = Vec::with_capacity(left.nodes.len() + right.nodes.len() + 1);
        let mut dens = Vec::with_capacity(grid.capacity());
        let mut masses = Vec::with_capacity(grid.capacity());
        for i in (0..left.nodes.len()).rev() {
            grid.push(left.nodes[i]);
            dens.push(left.dens[i]);
            masses.push(left.masses[i]);
        }
        grid.push(mode);
        dens.push(T::one());
        masses.extend(right.masses.iter().copied());
        grid.extend(right.nodes.iter().copied());
        dens.extend(right.dens.iter().copied());

        let body = masses.iter().fold(T::zero(), |s, &m| s + m);
        let total = body + left.tail + right.tail;
        if !(total > T::zero() && total.is_finite()) {
            return Err(Error::DivergedPosterior(format!(
                "normalising constant {total} not positive and finite"
            )));
        }
        let mut cdf = Vec::with_capacity(grid.len());
        let mut acc = left.tail;
        cdf.push(acc / total);
        for m in &masses {
            acc = acc + *m;
            cdf.push((acc / total).min(T::one()));
        }
        let density = dens.into_iter().map(|d| d / total).collect();
        Ok(PosteriorCurve {
            grid,
            cdf,
            density,
            left_rate: left.rate,
            right_rate: right.rate,
            meta,
        })
    }

    pub fn grid(&self) -> &[T] {
        &self.grid
    }

    pub fn cdf_values(&self) -> &[T] {
        &self.cdf
    }

    pub fn density_values(&self) -> &[T] {
        &self.density
    }

    pub fn meta(&self) -> &CurveMeta {
        &self.meta
    }

    /// Posterior distribution function at `x`.
    pub fn cdf(&self, x: T) -> T {
        let n = self.grid.len();
        if x <= self.grid[0] {
            return self.cdf[0] * (self.left_rate * (x - self.grid[0])).exp();
        }
        if x >= self.grid[n - 1] {
            let tail = T::one() - self.cdf[n - 1];
            return T::one() - tail * (-self.right_rate * (x - self.grid[n - 1])).exp();
        }
        let i = self.grid.partition_point(|&g| g <= x) - 1;
        self.hermite(i, x)
    }

    /// Posterior density at `x`, from the derivative of the interpolant.
    pub fn density(&self, x: T) -> T {
        let n = self.grid.len();
        if x <= self.grid[0] {
            return self.density[0] * (self.left_rate * (x - self.grid[0])).exp();
        }
        if x >= self.grid[n - 1] {
            return self.density[n - 1] * (-self.right_rate * (x - self.grid[n - 1])).exp();
        }
        let i = self.grid.partition_point(|&g| g <= x) - 1;
        let (x0, x1) = (self.grid[i], self.grid[i + 1]);
        let h = x1 - x0;
        let s = (x - x0) / h;
        let (c0, c1, d0, d1) = (self.cdf[i], self.cdf[i + 1], self.density[i], self.density[i + 1]);
        let six = T::lit(6.0);
        let dh00 = (six * s * s - six * s) / h;
        let dh10 = T::lit(3.0) * s * s - T::lit(4.0) * s + T::one();
        let dh01 = -dh00;
        let dh11 = T::lit(3.0) * s * s - T::lit(2.0) * s;
        (dh00 * c0 + dh10 * d0 + dh01 * c1 + dh11 * d1).max(T::zero())
    }

    fn hermite(&self, i: usize, x: T) -> T {
        let (x0, x1) = (self.grid[i], self.grid[i + 1]);
        let h = x1 - x0;
        let s = (x - x0) / h;
        let (c0, c1, d0, d1) = (self.cdf[i], self.cdf[i + 1], self.density[i], self.density[i + 1]);
        let s2 = s * s;
        let s3 = s2 * s;
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let h00 = two * s3 - three * s2 + T::one();
        let h10 = s3 - two * s2 + s;
        let h01 = three * s2 - two * s3;
        let h11 = s3 - s2;
        let v = h00 * c0 + h10 * h * d0 + h01 * c1 + h11 * h * d1;
        v.max(c0).min(c1)
    }

    /// Posterior quantile: the `x` with `cdf(x) = p`.
    pub fn quantile(&self, p: T) -> Result<T> {
        if !(p > T::zero() && p < T::one()) {
            return Err(Error::domain("quantile", format!("probability {p} outside (0, 1)")));
        }
        let n = self.grid.len();
        if p <= self.cdf[0] {
            if self.cdf[0] == T::zero() || !(self.left_rate > T::zero()) {
                return Ok(self.grid[0]);
            }
            return Ok(self.grid[0] + (p / self.cdf[0]).ln() / self.left_rate);
        }
        if p >= self.cdf[n - 1] {
            let tail = T::one() - self.cdf[n - 1];
            if tail == T::zero() || !(self.right_rate > T::zero()) {
                return Ok(self.grid[n - 1]);
            }
            return Ok(self.grid[n - 1] - ((T::one() - p) / tail).ln() / self.right_rate);
        }
        let i = (self.cdf.partition_point(|&c| c < p)).clamp(1, n - 1) - 1;
        let (x0, x1) = (self.grid[i], self.grid[i + 1]);
        if self.cdf[i] == p {
            return Ok(x0);
        }
        let xtol = (x1 - x0) * T::lit(1e-12);
        brent(|x| Ok(self.hermite(i, x) - p), x0, x1, xtol, 200)
    }

    /// Largest absolute difference between two distribution functions,
    /// evaluated at the nodes and cell midpoints of both grids.
    pub fn sup_distance(&self, other: &PosteriorCurve<T>) -> T {
        let mut worst = T::zero();
        for curve in [self, other] {
            for w in curve.grid.windows(2) {
                for x in [w[0], (w[0] + w[1]) * T::lit(0.5)] {
                    worst = worst.max((self.cdf(x) - other.cdf(x)).abs());
                }
            }
        }
        worst
    }

    /// Posterior mean and standard deviation by Simpson's rule over the cells.
    pub fn moments(&self) -> (T, T) {
        let mut m0 = T::zero();
        let mut m1 = T::zero();
        let mut m2 = T::zero();
        let six = T::lit(6.0);
        for i in 0..self.grid.len() - 1 {
            let (a, b) = (self.grid[i], self.grid[i + 1]);
            let c = (a + b) * T::lit(0.5);
            let (fa, fb, fc) = (self.density[i], self.density[i + 1], self.density(c));
            let w = (b - a) / six;
            m0 = m0 + w * (fa + T::lit(4.0) * fc + fb);
            m1 = m1 + w * (a * fa + T::lit(4.0) * c * fc + b * fb);
            m2 = m2 + w * (a * a * fa + T::lit(4.0) * c * c * fc + b * b * fb);
        }
        let mean = m1 / m0;
        (mean, (m2 / m0 - mean * mean).max(T::zero()).sqrt())
    }

    /// Re-expresses the curve in a new variable `u = g(x)` for increasing `g`
    /// with derivative `dg`.
    pub fn map_increasing<G, D>(&self, g: G, dg: D) -> PosteriorCurve<T>
    where
        G: Fn(T) -> T,
        D: Fn(T) -> T,
    {
        let n = self.grid.len();
        let grid: Vec<T> = self.grid.iter().map(|&x| g(x)).collect();
        let density = self
            .grid
            .iter()
            .zip(&self.density)
            .map(|(&x, &d)| d / dg(x))
            .collect();
        PosteriorCurve {
            left_rate: self.left_rate / dg(self.grid[0]),
            right_rate: self.right_rate / dg(self.grid[n - 1]),
            grid,
            cdf: self.cdf.clone(),
            density,
            meta: self.meta.clone(),
        }
    }
}

/// Standard deviation implied by the curvature of `lk` at the mode, kept
/// within a factor of ten of `scale`.
fn curvature_sd<T: Real, F: Fn(T) -> T>(lk: &F, mode: T, scale: T, lo: T, hi: T, peak: T) -> T {
    let h = scale * T::lit(1e-3);
    if mode - h <= lo || mode + h >= hi {
        return scale;
    }
    let second = (lk(mode + h) - peak * T::lit(2.0) + lk(mode - h)) / (h * h);
    let sd = if second < T::zero() && second.is_finite() {
        (-second).recip().sqrt()
    } else {
        scale
    };
    sd.max(scale * T::lit(0.1)).min(scale * T::lit(10.0))
}

fn extend_side<T, K, L>(
    kernel: &K,
    lk: &L,
    peak: T,
    mode: T,
    sd: T,
    bound: T,
    dir: T,
) -> Result<Side<T>>
where
    T: Real,
    K: Fn(T) -> T,
    L: Fn(T) -> T,
{
    let opts = QuadOptions::with_tol(T::lit(1e-14) * sd, T::lit(1e-12));
    let core_step = sd / T::lit(CELLS_PER_SD);
    let core_end = sd * T::lit(CORE_SDS);
    let mut side = Side {
        nodes: Vec::new(),
        dens: Vec::new(),
        masses: Vec::new(),
        tail: T::zero(),
        rate: T::zero(),
    };
    let mut x = mode;
    let mut ld_prev = T::zero();
    let mut step = core_step;
    let mut mass = T::zero();
    loop {
        let room = (bound - x) * dir;
        if room <= T::epsilon() * T::lit(16.0) * x.abs().max(sd) {
            // Reached a finite edge of the support.
            side.rate = T::infinity();
            return Ok(side);
        }
        let next = if step < room { x + dir * step } else { x + dir * room * T::lit(0.5) };
        if !next.is_finite() {
            return Err(Error::DivergedPosterior(format!(
                "posterior tail does not decay (reached {next})"
            )));
        }
        let (a, b) = if dir > T::zero() { (x, next) } else { (next, x) };
        let cell = integrate(kernel, a, b, &opts).map_err(|e| match e {
            Error::Numeric { detail, .. } => Error::DivergedPosterior(detail),
            other => other,
        })?;
        let ld = lk(next) - peak;
        if ld.is_nan() {
            return Err(Error::numeric("posterior_curve", format!("log-density NaN at {next}")));
        }
        mass = mass + cell.value;
        side.nodes.push(next);
        side.dens.push(ld.exp());
        side.masses.push(cell.value);
        if side.nodes.len() > MAX_CELLS {
            return Err(Error::DivergedPosterior(format!(
                "posterior mass still growing after {MAX_CELLS} cells at {next}"
            )));
        }
        let dist = (next - mode).abs();
        if dist >= core_end {
            let rate = (ld_prev - ld) / (next - x).abs();
            if rate > T::zero() {
                let tail = ld.exp() / rate;
                if tail <= T::lit(TAIL_MASS) * mass {
                    side.tail = tail;
                    side.rate = rate;
                    return Ok(side);
                }
            }
            step = step * T::lit(TAIL_GROWTH);
        }
        ld_prev = ld;
        x = next;
    }
}
