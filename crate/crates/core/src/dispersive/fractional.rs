//! Riemann–Liouville fractional integrals of uniformly sampled signals.
//!
//! `I_alpha f(t) = (1/Gamma(alpha)) ∫_0^t (t-s)^{alpha-1} f(s) ds` for
//! `alpha > 0`, `I_0 = id`, and `I_alpha = d^k/dt^k I_{alpha+k}` below zero.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// A real function sampled at `t0 + i dt`, `i = 0..len`.
///
/// Spatial signals reuse the same type with `t0`, `dt` read as `x0`, `dx`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledSignal {
    pub samples: Vec<f64>,
    pub t0: f64,
    pub dt: f64,
}

impl SampledSignal {
    pub fn new(samples: Vec<f64>, t0: f64, dt: f64) -> Result<Self> {
        let s = SampledSignal { samples, t0, dt };
        s.validate()?;
        Ok(s)
    }

    /// Samples `f` at `n` points spanning `[t0, t1]` inclusive.
    pub fn from_fn(t0: f64, t1: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSignal("need at least two samples".into()));
        }
        let dt = (t1 - t0) / (n - 1) as f64;
        SampledSignal::new((0..n).map(|i| f(t0 + i as f64 * dt)).collect(), t0, dt)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidSignal(format!("step must be positive, got {}", self.dt)));
        }
        if self.samples.len() < 2 {
            return Err(Error::InvalidSignal("need at least two samples".into()));
        }
        if !self.t0.is_finite() {
            return Err(Error::InvalidSignal("start must be finite".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.time(i))
    }

    pub fn end(&self) -> f64 {
        self.time(self.len() - 1)
    }

    /// Linear interpolation; `None` outside the sampled interval.
    pub fn interpolate(&self, t: f64) -> Option<f64> {
        let pos = (t - self.t0) / self.dt;
        let last = (self.len() - 1) as f64;
        if !(pos >= -1e-9 && pos <= last + 1e-9) {
            return None;
        }
        let pos = pos.clamp(0.0, last);
        let i = (pos.floor() as usize).min(self.len() - 2);
        let w = pos - i as f64;
        Some((1.0 - w) * self.samples[i] + w * self.samples[i + 1])
    }

    fn with_samples(&self, samples: Vec<f64>) -> SampledSignal {
        SampledSignal {
            samples,
            t0: self.t0,
            dt: self.dt,
        }
    }

    /// Maximum absolute difference against `g` evaluated at the sample points.
    pub fn sup_distance(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.times()
            .zip(&self.samples)
            .map(|(t, v)| (v - g(t)).abs())
            .fold(0.0, f64::max)
    }

    /// CSV with header `{axis},value`.
    pub fn to_csv(&self, axis: &str) -> String {
        let mut out = format!("{axis},value\n");
        for (t, v) in self.times().zip(&self.samples) {
            out.push_str(&format!("{t},{v}\n"));
        }
        out
    }
}

/// `sum_{r = 2, 4, ...} 2 C(p, r) x^r`, i.e. `(1+x)^p + (1-x)^p - 2` for small `x`.
fn even_binomial_tail(p: f64, x: f64) -> f64 {
    let mut coef = p * (p - 1.0) / 2.0;
    let x2 = x * x;
    let mut pow = x2;
    let mut sum = 0.0;
    let mut r = 2.0;
    loop {
        let term = 2.0 * coef * pow;
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() || r > 60.0 {
            break;
        }
        coef *= (p - r) * (p - r - 1.0) / ((r + 1.0) * (r + 2.0));
        pow *= x2;
        r += 2.0;
    }
    sum
}

/// `sum_{r >= 2} C(p, r) (-x)^r`, i.e. `(1-x)^p - 1 + p x` for small `x`.
fn binomial_tail(p: f64, x: f64) -> f64 {
    let mut coef = p * (p - 1.0) / 2.0;
    let mut pow = x * x;
    let mut sum = 0.0;
    let mut r = 2.0;
    loop {
        let term = coef * pow;
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() || r > 60.0 {
            break;
        }
        coef *= (p - r) / (r + 1.0);
        pow *= -x;
        r += 1.0;
    }
    sum
}

/// Toeplitz weights `c_d = (d+1)^p - 2 d^p + (d-1)^p`, `c_0 = 1`, with `p = alpha + 1`.
fn interior_weights(alpha: f64, n: usize) -> Vec<f64> {
    let p = alpha + 1.0;
    (0..n)
        .map(|d| match d {
            0 => 1.0,
            d if d < 16 => {
                let d = d as f64;
                (d + 1.0).powf(p) - 2.0 * d.powf(p) + (d - 1.0).powf(p)
            }
            d => {
                let d = d as f64;
                d.powf(p) * even_binomial_tail(p, 1.0 / d)
            }
        })
        .collect()
}

/// Weight of `f_0` in the `n`-th output: `(n-1)^p - (n-1-alpha) n^alpha`.
fn start_weight(alpha: f64, n: usize) -> f64 {
    let p = alpha + 1.0;
    if n < 16 {
        let nf = n as f64;
        (nf - 1.0).powf(p) - (nf - 1.0 - alpha) * nf.powf(alpha)
    } else {
        let nf = n as f64;
        nf.powf(p) * binomial_tail(p, 1.0 / nf)
    }
}

/// Product-trapezoid rule: `f` is piecewise linear between samples and the
/// kernel `(t-s)^{alpha-1}` is integrated exactly on every cell.
fn integrate_positive(f: &[f64], dt: f64, alpha: f64) -> Vec<f64> {
    let n = f.len();
    let scale = dt.powf(alpha) / gamma(alpha + 2.0);
    let c = interior_weights(alpha, n);
    let mut out = vec![0.0; n];
    for (i, o) in out.iter_mut().enumerate().skip(1) {
        let mut acc = start_weight(alpha, i) * f[0];
        for j in 1..=i {
            acc += c[i - j] * f[j];
        }
        *o = scale * acc;
    }
    out
}

/// Fourth-order first derivative; one-sided stencils at the ends.
pub(crate) fn derivative(f: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = f.len();
    if n < 5 {
        return Err(Error::InvalidSignal("differentiation needs at least five samples".into()));
    }
    let s = 1.0 / (12.0 * h);
    let mut d = vec![0.0; n];
    d[0] = s * (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]);
    d[1] = s * (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]);
    for i in 2..n - 2 {
        d[i] = s * (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]);
    }
    d[n - 2] = s * (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]);
    d[n - 1] = s * (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4] + 3.0 * f[n - 5]);
    Ok(d)
}

/// `I_alpha f` on the grid of `f`, for `alpha > -2`. The signal must start at `t = 0`.
pub fn riemann_liouville(f: &SampledSignal, alpha: f64) -> Result<SampledSignal> {
    f.validate()?;
    if f.t0 != 0.0 {
        return Err(Error::InvalidSignal(format!("signal must start at t = 0, got {}", f.t0)));
    }
    if !(alpha > -2.0) || !alpha.is_finite() {
        return Err(Error::UnsupportedOrder(alpha));
    }
    if alpha == 0.0 {
        return Ok(f.clone());
    }
    if alpha > 0.0 {
        return Ok(f.with_samples(integrate_positive(&f.samples, f.dt, alpha)));
    }
    // Smallest k with alpha + k >= 0; I_0 is the identity, so no Gamma pole arises.
    let k = (-alpha).ceil() as usize;
    let shifted = alpha + k as f64;
    let mut g = if shifted == 0.0 {
        f.samples.clone()
    } else {
        integrate_positive(&f.samples, f.dt, shifted)
    };
    for _ in 0..k {
        g = derivative(&g, f.dt)?;
    }
    Ok(f.with_samples(g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn tails_match_direct_formulas() {
        for &p in &[1.2, 1.5, 1.8, 0.2] {
            for &x in &[0.05_f64, 0.01] {
                let direct = (1.0 + x).powf(p) + (1.0 - x).powf(p) - 2.0;
                assert_abs_diff_eq!(even_binomial_tail(p, x), direct, epsilon = 1e-14);
                let direct = (1.0 - x).powf(p) - 1.0 + p * x;
                assert_abs_diff_eq!(binomial_tail(p, x), direct, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn first_order_is_cumulative_trapezoid() {
        let f = SampledSignal::from_fn(0.0, 1.0, 101, |_| 1.0).unwrap();
        let g = riemann_liouville(&f, 1.0).unwrap();
        assert!(g.sup_distance(|t| t) < 1e-13);
    }

    #[test]
    fn zero_order_is_identity() {
        let f = SampledSignal::from_fn(0.0, 1.0, 50, |t| t.sin()).unwrap();
        assert_eq!(riemann_liouville(&f, 0.0).unwrap(), f);
    }

    #[test]
    fn power_law() {
        // I_a t^2 = Gamma(3)/Gamma(3+a) t^{2+a}
        let f = SampledSignal::from_fn(0.0, 1.0, 2001, |t| t * t).unwrap();
        for a in [0.3, 0.5, 1.7] {
            let g = riemann_liouville(&f, a).unwrap();
            let c = 2.0 / gamma(3.0 + a);
            assert!(g.sup_distance(|t| c * t.powf(2.0 + a)) < 1e-6, "a={a}");
        }
    }

    #[test]
    fn negative_orders() {
        let f = SampledSignal::from_fn(0.0, 1.0, 2001, |t| t.sin()).unwrap();
        let d = riemann_liouville(&f, -1.0).unwrap();
        assert!(d.sup_distance(|t| t.cos()) < 1e-8);
        // I_{-1/2} t^2 = Gamma(3)/Gamma(5/2) t^{3/2}
        let f = SampledSignal::from_fn(0.0, 1.0, 4001, |t| t * t).unwrap();
        let g = riemann_liouville(&f, -0.5).unwrap();
        let c = 2.0 / gamma(2.5);
        let err = g
            .times()
            .zip(&g.samples)
            .skip(40)
            .map(|(t, v)| (v - c * t.powf(1.5)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn errors() {
        let f = SampledSignal::from_fn(0.0, 1.0, 10, |t| t).unwrap();
        assert_eq!(riemann_liouville(&f, -2.0), Err(Error::UnsupportedOrder(-2.0)));
        let shifted = SampledSignal::new(vec![0.0; 10], 0.5, 0.1).unwrap();
        assert!(riemann_liouville(&shifted, 0.5).is_err());
        assert!(SampledSignal::new(vec![1.0], 0.0, 0.1).is_err());
        assert!(SampledSignal::new(vec![1.0, 2.0], 0.0, 0.0).is_err());
    }

    #[test]
    fn interpolation() {
        let f = SampledSignal::from_fn(0.0, 1.0, 11, |t| 2.0 * t).unwrap();
        assert_abs_diff_eq!(f.interpolate(0.55).unwrap(), 1.1, epsilon = 1e-14);
        assert_eq!(f.interpolate(1.2), None);
    }
}
