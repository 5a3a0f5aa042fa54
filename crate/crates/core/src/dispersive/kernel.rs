//! The fifth-order oscillatory kernel
//! `B(x) = (1/2pi) ∫ exp(i x xi + i xi^5) dxi` and the constants built from it.
//!
//! Each half-line integral is moved onto a ray where `exp(i xi^5)` turns
//! into `exp(-r^5)`: `xi = r e^{i pi/10}` for `xi > 0` and, after reflecting,
//! `r e^{-i pi/10}` for `xi < 0`. The two rays are integrated independently,
//! so the imaginary part of their sum is a genuine accuracy check.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::gamma;

use super::quadrature::integrate;
use crate::error::{Error, Result};

/// Largest `|x|` accepted by [`airy5`].
pub const KERNEL_RANGE: f64 = 50.0;
/// Absolute accuracy target for the quadrature.
pub const KERNEL_TOL: f64 = 1e-10;
/// Error estimates above this are a failure.
pub const KERNEL_FAIL: f64 = 1e-6;
/// Node spacing of [`KernelTable`].
pub const TABLE_STEP: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelValue {
    pub value: f64,
    pub abs_error_estimate: f64,
}

/// `B(x)` together with `B'(x)` and the residual imaginary part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEvaluation {
    pub value: f64,
    pub derivative: f64,
    pub imaginary: f64,
    pub quadrature_error: f64,
}

/// Ray length beyond which the integrand is below `e^{-50}` relative to its peak.
fn ray_length(x: f64) -> f64 {
    let growth = x.abs() * (PI / 10.0).sin();
    let mut r: f64 = 2.0;
    while r.powi(5) - growth * r < 50.0 + growth * r {
        r += 0.25;
    }
    r
}

/// Computes `B(x)` and `B'(x)` by contour rotation.
pub fn airy5_full(x: f64) -> Result<KernelEvaluation> {
    if !(x.abs() <= KERNEL_RANGE) {
        return Err(Error::KernelRange(x));
    }
    let up = Complex64::from_polar(1.0, PI / 10.0);
    let down = up.conj();
    let i = Complex64::i();
    let len = ray_length(x);
    let pieces = (len * (1.0 + x.abs() / 4.0)).ceil() as usize;
    // xi > 0 half: xi = r up, integrand exp(i x xi + i xi^5) dxi = up exp(i x r up - r^5) dr.
    // xi < 0 half: xi = -r down, giving down exp(-i x r down - r^5) dr.
    let integrand = |r: f64| {
        let damp = -r.powi(5);
        let plus = up * (i * x * r * up + damp).exp();
        let minus = down * (-i * x * r * down + damp).exp();
        // d/dx multiplies by i xi: i r up on the upper ray, -i r down on the lower.
        [plus + minus, plus * (i * r * up) + minus * (-i * r * down)]
    };
    let res = integrate(integrand, 0.0, len, pieces.max(4), KERNEL_TOL * 2.0 * PI);
    let scale = 1.0 / (2.0 * PI);
    Ok(KernelEvaluation {
        value: res.value[0].re * scale,
        derivative: res.value[1].re * scale,
        imaginary: res.value[0].im * scale,
        quadrature_error: res.error * scale,
    })
}

/// `B(x)` with an absolute error estimate.
pub fn airy5(x: f64) -> Result<KernelValue> {
    let full = airy5_full(x)?;
    let estimate = full.quadrature_error.max(full.imaginary.abs());
    if !(estimate <= KERNEL_FAIL) {
        return Err(Error::Quadrature { estimate });
    }
    Ok(KernelValue {
        value: full.value,
        abs_error_estimate: estimate,
    })
}

/// `B(0)` in closed form, `Gamma(6/5) cos(pi/10) / pi`.
pub fn kernel_at_zero_closed_form() -> f64 {
    gamma(1.2) * (PI / 10.0).cos() / PI
}

/// `1 / (B(0) Gamma(4/5))`, with `B(0)` from the quadrature.
pub fn forcing_constant() -> f64 {
    static VALUE: OnceLock<f64> = OnceLock::new();
    *VALUE.get_or_init(|| {
        let b0 = airy5(0.0).expect("B(0) quadrature converges").value;
        1.0 / (b0 * gamma(0.8))
    })
}

/// Vertex trace constant of the right-edge forcing operator with index `lambda`.
pub fn trace_coefficient_plus(lambda: f64) -> f64 {
    4.0 * (PI / 10.0).sin() * (PI * (1.0 - lambda) / 5.0).cos()
}

/// Vertex trace constant of the left-edge forcing operator with index `lambda`.
pub fn trace_coefficient_minus(lambda: f64) -> f64 {
    2.0 * (PI / 10.0).sin() * (2.0 * (2.0 * PI * (1.0 - lambda) / 5.0).cos() + 1.0)
}

/// The same constant written through the forcing constant `m`:
/// `m cos((1+4 lambda) pi/10) / (5 sin((1-lambda) pi/5))`.
/// Singular at `lambda = 1 + 5n`.
pub fn trace_plus_via_kernel(lambda: f64, m: f64) -> f64 {
    m * ((1.0 + 4.0 * lambda) * PI / 10.0).cos() / (5.0 * ((1.0 - lambda) * PI / 5.0).sin())
}

/// `m cos((1-6 lambda) pi/10) / (5 sin((1-lambda) pi/5))`.
pub fn trace_minus_via_kernel(lambda: f64, m: f64) -> f64 {
    m * ((1.0 - 6.0 * lambda) * PI / 10.0).cos() / (5.0 * ((1.0 - lambda) * PI / 5.0).sin())
}

/// `B` and `B'` tabulated on `[-50, 50]` with spacing 0.01, evaluated by
/// cubic Hermite interpolation. Zero outside the tabulated range.
#[derive(Debug, Clone)]
pub struct KernelTable {
    values: Vec<f64>,
    derivs: Vec<f64>,
    /// Largest quadrature error estimate over all nodes.
    pub max_node_error: f64,
    /// `max(|B(-50)|, |B(50)|)`, the size of the jump introduced by truncation.
    pub tail_magnitude: f64,
}

impl KernelTable {
    pub fn build() -> Result<KernelTable> {
        let n = (2.0 * KERNEL_RANGE / TABLE_STEP).round() as usize + 1;
        let nodes: Vec<KernelEvaluation> = (0..n)
            .into_par_iter()
            .map(|i| airy5_full((-KERNEL_RANGE + i as f64 * TABLE_STEP).clamp(-KERNEL_RANGE, KERNEL_RANGE)))
            .collect::<Result<_>>()?;
        let max_node_error = nodes
            .iter()
            .map(|e| e.quadrature_error.max(e.imaginary.abs()))
            .fold(0.0, f64::max);
        if max_node_error > KERNEL_FAIL {
            return Err(Error::Quadrature {
                estimate: max_node_error,
            });
        }
        let tail_magnitude = nodes[0].value.abs().max(nodes[n - 1].value.abs());
        Ok(KernelTable {
            values: nodes.iter().map(|e| e.value).collect(),
            derivs: nodes.iter().map(|e| e.derivative).collect(),
            max_node_error,
            tail_magnitude,
        })
    }

    /// Process-wide table, built on first use.
    pub fn global() -> &'static KernelTable {
        static TABLE: OnceLock<KernelTable> = OnceLock::new();
        TABLE.get_or_init(|| KernelTable::build().expect("kernel table quadrature converges"))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        if !(x.abs() <= KERNEL_RANGE) {
            return 0.0;
        }
        let pos = (x + KERNEL_RANGE) / TABLE_STEP;
        let i = (pos.floor() as usize).min(self.values.len() - 2);
        let t = pos - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.derivs[i] * TABLE_STEP, self.derivs[i + 1] * TABLE_STEP);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * d0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * d1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    // B(0) = Gamma(6/5) cos(pi/10)/pi = 0.277957858260206761... (mpmath, 30 digits).
    const B0: f64 = 0.277_957_858_260_206_76;

    #[test]
    fn value_at_zero() {
        let b = airy5(0.0).unwrap();
        assert_abs_diff_eq!(b.value, B0, epsilon = 1e-10);
        assert!(b.abs_error_estimate < 1e-9);
        assert_abs_diff_eq!(kernel_at_zero_closed_form(), B0, epsilon = 1e-13);
    }

    #[test]
    fn real_on_the_real_line() {
        for x in [-50.0, -17.3, -3.0, -0.5, 0.0, 1.0, 7.5, 50.0] {
            let e = airy5_full(x).unwrap();
            assert!(e.imaginary.abs() < 1e-10, "x={x}: {e:?}");
        }
    }

    #[test]
    fn decays_on_the_right() {
        let b10 = airy5(10.0).unwrap().value.abs();
        assert!(b10 < B0);
        assert!(b10 < 1e-3, "{b10}");
        assert!(airy5(-10.0).unwrap().value.abs() > b10);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for x in [-20.0, -2.0, 0.0, 1.5] {
            let h = 1e-4;
            let fd = (airy5(x + h).unwrap().value - airy5(x - h).unwrap().value) / (2.0 * h);
            assert_abs_diff_eq!(airy5_full(x).unwrap().derivative, fd, epsilon = 1e-6);
        }
    }

    #[test]
    fn out_of_range() {
        assert_eq!(airy5(50.5), Err(Error::KernelRange(50.5)));
        assert!(airy5(f64::NAN).is_err());
    }

    #[test]
    fn forcing_constant_value() {
        let m = forcing_constant();
        // 1/(B(0) Gamma(4/5)) = 5 sin(pi/5)/cos(pi/10) = 10 sin(pi/10).
        assert_abs_diff_eq!(m, 10.0 * (PI / 10.0).sin(), epsilon = 1e-9);
        assert_abs_diff_eq!(m * airy5(0.0).unwrap().value * gamma(0.8), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m * (PI / 10.0).cos() / (5.0 * (PI / 5.0).sin()), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn trace_constants() {
        assert_abs_diff_eq!(trace_coefficient_plus(0.0), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(trace_coefficient_minus(0.0), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(trace_coefficient_plus(0.3), 1.118427744728769, epsilon = 1e-13);
    }

    #[test]
    fn table_interpolates_between_nodes() {
        let table = KernelTable::global();
        assert_eq!(table.len(), 10_001);
        for x in [-33.333, -4.005, 0.0, 0.0137, 2.71, 49.999] {
            assert_abs_diff_eq!(table.eval(x), airy5(x).unwrap().value, epsilon = 1e-9);
        }
        assert_eq!(table.eval(50.01), 0.0);
    }
}
