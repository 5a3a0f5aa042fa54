//! Scalar entries of the coupling matrix.
//!
//! `rho(theta, lambda)` is the x = 0 trace of the `theta`-th spatial derivative
//! of a left-edge forcing operator with index `lambda`, and `iota` the same for
//! right edges. Both are short trigonometric closed forms.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// `sin(pi/10)`, the common factor of every entry.
#[inline]
pub fn sin_pi_10() -> f64 {
    (PI / 10.0).sin()
}

fn check_order(theta: u8) -> Result<()> {
    if theta > 4 {
        Err(Error::OrderOutOfRange(theta as i64))
    } else {
        Ok(())
    }
}

/// `2 sin(pi/10) [2 cos(-(2pi/5) lambda + 2pi/5 + 2pi theta/5) + 1]`.
pub fn rho(theta: u8, lambda: f64) -> Result<f64> {
    check_order(theta)?;
    Ok(rho_unchecked(theta, lambda))
}

/// `4 sin(pi/10) cos(-(pi/5) beta + pi/5 + pi theta/5)`.
pub fn iota(theta: u8, beta: f64) -> Result<f64> {
    check_order(theta)?;
    Ok(iota_unchecked(theta, beta))
}

#[inline]
pub(crate) fn rho_unchecked(theta: u8, lambda: f64) -> f64 {
    let t = theta as f64;
    let arg = -2.0 * PI / 5.0 * lambda + 2.0 * PI / 5.0 + 2.0 * PI * t / 5.0;
    2.0 * sin_pi_10() * (2.0 * arg.cos() + 1.0)
}

#[inline]
pub(crate) fn iota_unchecked(theta: u8, beta: f64) -> f64 {
    let t = theta as f64;
    let arg = -PI / 5.0 * beta + PI / 5.0 + PI * t / 5.0;
    4.0 * sin_pi_10() * arg.cos()
}
