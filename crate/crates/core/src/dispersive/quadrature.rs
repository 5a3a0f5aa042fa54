//! Adaptive Gauss–Legendre quadrature for smooth complex integrands.

use std::sync::OnceLock;

use num_complex::Complex64;

const ORDER: usize = 20;
const MAX_DEPTH: u32 = 40;

/// Nodes and weights on `[-1, 1]`, found by Newton iteration on `P_n`.
fn gauss_legendre() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = ORDER;
        let mut rule = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=n {
                    let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            rule.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
        }
        rule
    })
}

/// Result of an adaptive integration of `N` simultaneous integrands.
#[derive(Debug, Clone, Copy)]
pub struct Integral<const N: usize> {
    pub value: [Complex64; N],
    pub error: f64,
}

fn panel<const N: usize>(f: &impl Fn(f64) -> [Complex64; N], a: f64, b: f64) -> ([Complex64; N], f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = [Complex64::new(0.0, 0.0); N];
    let mut mag = 0.0;
    for &(x, w) in gauss_legendre() {
        let v = f(mid + half * x);
        for (s, vi) in acc.iter_mut().zip(v.iter()) {
            *s += vi * w;
        }
        mag += w * v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    }
    for s in acc.iter_mut() {
        *s *= half;
    }
    (acc, mag * half.abs())
}

fn max_diff<const N: usize>(a: &[Complex64; N], b: &[Complex64; N]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Integrates `f` over `[a, b]` split into `pieces` initial panels, bisecting
/// any panel whose two-half estimate disagrees with the whole-panel estimate
/// by more than its share of `tol`.
pub fn integrate<const N: usize>(f: impl Fn(f64) -> [Complex64; N], a: f64, b: f64, pieces: usize, tol: f64) -> Integral<N> {
    let mut value = [Complex64::new(0.0, 0.0); N];
    let mut error = 0.0;
    let width = (b - a) / pieces as f64;
    let mut stack: Vec<(f64, f64, [Complex64; N], f64, u32)> = (0..pieces)
        .map(|i| {
            let lo = a + i as f64 * width;
            let hi = if i + 1 == pieces { b } else { lo + width };
            let (q, m) = panel(&f, lo, hi);
            (lo, hi, q, m, 0)
        })
        .collect();
    let total = b - a;
    while let Some((lo, hi, whole, whole_mag, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let (left, lm) = panel(&f, lo, mid);
        let (right, rm) = panel(&f, mid, hi);
        let mut halves = left;
        for (h, r) in halves.iter_mut().zip(right.iter()) {
            *h += r;
        }
        let diff = max_diff(&whole, &halves);
        let share = tol * (hi - lo) / total;
        let roundoff = 64.0 * f64::EPSILON * whole_mag.max(lm + rm);
        if diff <= share.max(roundoff) || depth >= MAX_DEPTH {
            for (v, h) in value.iter_mut().zip(halves.iter()) {
                *v += h;
            }
            error += diff.max(roundoff);
        } else {
            stack.push((lo, mid, left, lm, depth + 1));
            stack.push((mid, hi, right, rm, depth + 1));
        }
    }
    Integral { value, error }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn weights_sum_to_two() {
        let s: f64 = gauss_legendre().iter().map(|(_, w)| w).sum();
        assert_abs_diff_eq!(s, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| [Complex64::new(x.powi(7), 0.0)], 0.0, 2.0, 1, 1e-12);
        assert_abs_diff_eq!(r.value[0].re, 32.0, epsilon = 1e-12);
    }

    #[test]
    fn gaussian() {
        let r = integrate(|x| [Complex64::new((-x * x).exp(), 0.0)], -10.0, 10.0, 4, 1e-13);
        assert_abs_diff_eq!(r.value[0].re, std::f64::consts::PI.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn oscillatory() {
        let r = integrate(|x| [Complex64::new(0.0, 40.0 * x).exp()], 0.0, 1.0, 1, 1e-12);
        let exact = (Complex64::new(0.0, 40.0).exp() - 1.0) / Complex64::new(0.0, 40.0);
        assert_abs_diff_eq!((r.value[0] - exact).norm(), 0.0, epsilon = 1e-12);
    }
}
