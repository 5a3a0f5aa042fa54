//! Free linear flow `exp(t d^5/dx^5)` on a periodic grid.

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::fractional::SampledSignal;
use crate::error::{Error, Result};

/// Signed angular frequency of FFT bin `n` on a period of length `period`.
///
/// The Nyquist bin of an even-length grid gets frequency zero: its mode is
/// real on the grid, and any other choice would break either realness or
/// unitarity of the discrete flow.
pub fn grid_frequency(n: usize, len: usize, period: f64) -> f64 {
    let base = 2.0 * std::f64::consts::PI / period;
    let half = len / 2;
    if n < half || (len % 2 == 1 && n == half) {
        base * n as f64
    } else if len.is_multiple_of(2) && n == half {
        0.0
    } else {
        base * (n as f64 - len as f64)
    }
}

/// Applies `exp(t d^5/dx^5)`: each Fourier mode `e^{i xi x}` is multiplied by
/// `e^{i t xi^5}`. The samples are one period of a periodic function; the
/// length must be a power of two.
pub fn free_propagator(phi: &SampledSignal, t: f64) -> Result<SampledSignal> {
    phi.validate()?;
    let len = phi.len();
    if !len.is_power_of_two() {
        return Err(Error::InvalidSignal(format!("length {len} is not a power of two")));
    }
    if !t.is_finite() {
        return Err(Error::InvalidArgument(format!("time must be finite, got {t}")));
    }
    let period = len as f64 * phi.dt;
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(len);
    let inverse = planner.plan_fft_inverse(len);
    let mut buf: Vec<Complex64> = phi.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward.process(&mut buf);
    for (n, c) in buf.iter_mut().enumerate() {
        let xi = grid_frequency(n, len, period);
        *c *= Complex64::from_polar(1.0, t * xi.powi(5));
    }
    inverse.process(&mut buf);
    let scale = 1.0 / len as f64;
    Ok(SampledSignal {
        samples: buf.iter().map(|c| c.re * scale).collect(),
        t0: phi.t0,
        dt: phi.dt,
    })
}
