//! Boundary forcing operator
//! `L0 f(t, x) = M ∫_0^t B(x / (t-s)^{1/5}) (t-s)^{-1/5} I_{-4/5} f(s) ds`.
//!
//! The inner `I_{-4/5} f` is computed once per signal. The outer integral
//! treats `B(..) I_{-4/5} f` as piecewise linear on the sample grid and
//! integrates the weight `(t-s)^{-1/5}` exactly on each cell, so the endpoint
//! singularity costs nothing. `B` comes from the interpolation table and is
//! set to zero for `|x/(t-s)^{1/5}| > 50`; on the right half-line `B` has
//! decayed far below double precision there, on the left the dropped piece
//! is bounded by [`KernelTable::tail_magnitude`] times the integral of the weight
//! over `t - s < (|x|/50)^5`.

use super::fractional::{riemann_liouville, SampledSignal};
use super::kernel::{forcing_constant, KernelTable, KERNEL_RANGE};
use crate::error::{Error, Result};

const WEIGHT_POWER: f64 = -0.2;

/// `L0 f` for a fixed forcing signal, ready to be evaluated at many `(x, t)`.
#[derive(Debug, Clone)]
pub struct DuhamelForcing<'a> {
    fractional: SampledSignal,
    constant: f64,
    table: &'a KernelTable,
}

impl DuhamelForcing<'static> {
    pub fn new(f: &SampledSignal) -> Result<Self> {
        DuhamelForcing::with_table(f, KernelTable::global())
    }
}

impl<'a> DuhamelForcing<'a> {
    pub fn with_table(f: &SampledSignal, table: &'a KernelTable) -> Result<Self> {
        Ok(DuhamelForcing {
            fractional: riemann_liouville(f, -0.8)?,
            constant: forcing_constant(),
            table,
        })
    }

    /// `I_{-4/5} f` on the signal grid.
    pub fn fractional_forcing(&self) -> &SampledSignal {
        &self.fractional
    }

    fn kernel(&self, x: f64, tau: f64) -> f64 {
        if tau <= 0.0 {
            return if x == 0.0 { self.table.eval(0.0) } else { 0.0 };
        }
        let z = x / tau.powf(0.2);
        if z.abs() > KERNEL_RANGE {
            0.0
        } else {
            self.table.eval(z)
        }
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        let g = &self.fractional;
        if !(t >= 0.0 && t <= g.end() * (1.0 + 1e-12)) {
            return Err(Error::InvalidArgument(format!("time {t} outside the signal grid [0, {}]", g.end())));
        }
        if !x.is_finite() {
            return Err(Error::InvalidArgument(format!("position must be finite, got {x}")));
        }
        let dt = g.dt;
        let full = ((t / dt) + 1e-9).floor() as usize;
        let full = full.min(g.len() - 1);
        let mut nodes: Vec<(f64, f64)> = (0..=full).map(|j| (j as f64 * dt, g.samples[j])).collect();
        let last = full as f64 * dt;
        if t - last > 1e-9 * dt {
            nodes.push((t, g.interpolate(t).unwrap_or(0.0)));
        } else if let Some(n) = nodes.last_mut() {
            n.0 = t;
        }
        if nodes.len() < 2 {
            return Ok(0.0);
        }
        let h: Vec<f64> = nodes
            .iter()
            .map(|&(s, gv)| if gv == 0.0 { 0.0 } else { self.kernel(x, t - s) * gv })
            .collect();
        let p0 = WEIGHT_POWER + 1.0;
        let p1 = WEIGHT_POWER + 2.0;
        let mut acc = 0.0;
        for j in 0..nodes.len() - 1 {
            let (hl, hr) = (h[j], h[j + 1]);
            if hl == 0.0 && hr == 0.0 {
                continue;
            }
            let tau_b = (t - nodes[j].0).max(0.0);
            let tau_a = (t - nodes[j + 1].0).max(0.0);
            let width = tau_b - tau_a;
            if width <= 0.0 {
                continue;
            }
            let w0 = (tau_b.powf(p0) - tau_a.powf(p0)) / p0;
            let w1 = (tau_b.powf(p1) - tau_a.powf(p1)) / p1 - tau_a * w0;
            // h is hr at tau_a and hl at tau_b.
            acc += hr * w0 + (hl - hr) * w1 / width;
        }
        Ok(self.constant * acc)
    }
}

/// `L0 f(t, x)` for a signal `f` sampled from `t = 0`.
pub fn duhamel_forcing(f: &SampledSignal, x: f64, t: f64) -> Result<f64> {
    DuhamelForcing::new(f)?.eval(x, t)
}
