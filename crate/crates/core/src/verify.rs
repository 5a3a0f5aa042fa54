//! Self-checks of the numerical identities the rest of the crate relies on.
//!
//! Each suite returns one [`PropertyResult`] per property with the measured
//! discrepancy next to its tolerance, so a failure says by how much.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bc_matrix::{assemble, iota, rho, AssemblyMode, Lu};
use crate::dispersive::{
    airy5, airy5_full, forcing_constant, free_propagator, kernel_at_zero_closed_form, riemann_liouville,
    trace_coefficient_minus, trace_coefficient_plus, trace_minus_via_kernel, trace_plus_via_kernel, SampledSignal,
};
use crate::energy::{boundary_form, constrained_traces, form_magnitude, free_len, reduced_form};
use crate::error::{Error, Result};
use crate::graph::{is_contraction, spectral_norm, ParameterSet, StarGraphSpec};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Trig,
    Energy,
    Fractional,
    Kernel,
    All,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trig" => Ok(Suite::Trig),
            "energy" => Ok(Suite::Energy),
            "fractional" => Ok(Suite::Fractional),
            "kernel" => Ok(Suite::Kernel),
            "all" => Ok(Suite::All),
            other => Err(Error::InvalidArgument(format!(
                "unknown suite '{other}' (expected trig, energy, fractional, kernel or all)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyResult {
    pub suite: Suite,
    pub property: String,
    pub pass: bool,
    /// Worst observed discrepancy (or, for inequalities, the worst value).
    pub measured: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub pass: bool,
    pub results: Vec<PropertyResult>,
}

/// Number of random draws in the energy suite.
pub const ENERGY_DRAWS: usize = 10_000;
/// Sample count of the fractional semigroup check.
pub const SEMIGROUP_SAMPLES: usize = 10_000;

fn check(suite: Suite, property: &str, measured: f64, tolerance: f64) -> PropertyResult {
    PropertyResult {
        suite,
        property: property.to_string(),
        pass: measured <= tolerance,
        measured,
        tolerance,
    }
}

fn worst(it: impl IntoIterator<Item = f64>) -> f64 {
    // NaN must fail, so it wins over everything.
    it.into_iter()
        .fold(0.0, |acc: f64, v| if v.is_nan() || acc.is_nan() { f64::NAN } else { acc.max(v) })
}

fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = (hi - lo) / (n + 1) as f64;
    (1..=n).map(move |i| lo + i as f64 * step)
}

fn trig_suite() -> Result<Vec<PropertyResult>> {
    let s = Suite::Trig;
    let mut out = Vec::new();
    let lambdas: Vec<f64> = grid(-4.0, 4.0, 100).collect();

    let mut period = Vec::new();
    for theta in 0..5u8 {
        for &x in &lambdas {
            period.push((rho(theta, x)? - rho(theta, x + 5.0)?).abs());
            period.push((iota(theta, x)? - iota(theta, x + 10.0)?).abs());
        }
    }
    out.push(check(s, "Table 1 periodicity", worst(period), 1e-12));

    let mut shift = Vec::new();
    for theta in 0..5u8 {
        for &x in &lambdas {
            let t = f64::from(theta);
            shift.push((rho(theta, x)? - trace_coefficient_minus(x - t)).abs());
            shift.push((iota(theta, x)? - trace_coefficient_plus(x - t)).abs());
        }
    }
    out.push(check(s, "Table 1 shift of the trace constants", worst(shift), 1e-12));

    // Scaling one row scales the determinant: a cheap end-to-end check of the LU.
    let spec = StarGraphSpec::y_junction();
    let params = ParameterSet::table_rule(1, 2);
    let base = assemble(&spec, &params, AssemblyMode::PaperBlocks)?;
    let d0 = base.determinant();
    let mut rel = Vec::new();
    for r in 0..base.dim() {
        let mut scaled = base.entries.clone();
        scaled.row_mut(r).iter_mut().for_each(|v| *v *= -2.5);
        let d = Lu::new(&scaled).determinant();
        rel.push((d - (-2.5) * d0).abs() / d0.abs());
    }
    out.push(check(s, "row scaling of the determinant", worst(rel), 1e-9));
    Ok(out)
}

fn random_spec(rng: &mut ChaCha8Rng, sigma: f64) -> Result<StarGraphSpec> {
    let k = rng.random_range(1..=6);
    let m = rng.random_range(1..=6);
    let coef = |n: usize, rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..n)
            .map(|_| {
                let v: f64 = rng.random_range(0.5..2.0);
                if rng.random_bool(0.5) { v } else { -v }
            })
            .collect()
    };
    let mut a = coef(k + m, rng);
    let mut b = coef(k + m, rng);
    a[0] = 1.0;
    b[0] = 1.0;
    let raw = Matrix::from_fn(k, m, |_, _| rng.random_range(-1.0..1.0));
    let norm = spectral_norm(&raw)?.sigma;
    let c = raw.scaled(sigma / norm.max(f64::MIN_POSITIVE));
    let spec = StarGraphSpec { k, m, a, b, c };
    spec.validate()?;
    Ok(spec)
}

fn energy_suite(seed: u64) -> Result<Vec<PropertyResult>> {
    let s = Suite::Energy;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reduction = Vec::with_capacity(ENERGY_DRAWS);
    let mut sign = Vec::with_capacity(ENERGY_DRAWS);
    for _ in 0..ENERGY_DRAWS {
        let sigma = rng.random_range(0.0..1.0);
        let spec = random_spec(&mut rng, sigma)?;
        let free: Vec<f64> = (0..free_len(spec.k, spec.m)).map(|_| rng.random_range(-3.0..3.0)).collect();
        let tr = constrained_traces(&free, &spec)?;
        let d2v = &free[2..2 + spec.m];
        let form = boundary_form(&tr);
        let reduced = reduced_form(d2v, &spec.c)?;
        reduction.push((form - reduced).abs() / form_magnitude(&tr));
        sign.push(form);
    }
    let mut out = vec![
        check(s, "boundary form reduces to d2Vᵀ(CᵀC - I)d2V", worst(reduction), 1e-10),
        check(s, "boundary form is non-positive for contractions", worst(sign), 1e-10),
    ];

    // For sigma > 1 the top singular direction gives a positive form.
    let spec = random_spec(&mut rng, 1.5)?;
    let witness = is_contraction(&spec.c, 1e-9)?
        .witness
        .ok_or_else(|| Error::InvalidArgument("expected a non-contraction".into()))?;
    let mut free = vec![0.0; free_len(spec.k, spec.m)];
    free[2..2 + spec.m].copy_from_slice(&witness);
    let form = boundary_form(&constrained_traces(&free, &spec)?);
    // Passing means form > 0; report -form so that "measured <= 0" is the test.
    out.push(PropertyResult {
        pass: form > 0.0,
        ..check(s, "non-contraction witness makes the form positive", -form, 0.0)
    });
    Ok(out)
}

fn fractional_suite() -> Result<Vec<PropertyResult>> {
    let s = Suite::Fractional;
    let smooth = |t: f64| (2.0 * t).sin() + t * t * (-t).exp();
    let f = SampledSignal::from_fn(0.0, 1.0, SEMIGROUP_SAMPLES, smooth)?;
    let orders = [0.2, 0.5, 0.8];
    let mut errs = Vec::new();
    for &a in &orders {
        for &b in &orders {
            let nested = riemann_liouville(&riemann_liouville(&f, b)?, a)?;
            let direct = riemann_liouville(&f, a + b)?;
            errs.push(worst(nested.samples.iter().zip(&direct.samples).map(|(x, y)| (x - y).abs())));
        }
    }
    let mut out = vec![check(s, "semigroup I_a I_b = I_(a+b)", worst(errs), 1e-3)];

    let sin = SampledSignal::from_fn(0.0, 2.0, 2001, f64::sin)?;
    let d = riemann_liouville(&sin, -1.0)?;
    out.push(check(s, "I_(-1) sin = cos", d.sup_distance(f64::cos), 1e-4));

    // I_(-4/5) undoes I_(4/5) on functions vanishing at 0.
    let g = SampledSignal::from_fn(0.0, 1.0, 4001, |t| t * t * (3.0 * t).cos())?;
    let back = riemann_liouville(&riemann_liouville(&g, 0.8)?, -0.8)?;
    let interior = back
        .samples
        .iter()
        .zip(&g.samples)
        .skip(40)
        .take(g.len() - 80)
        .map(|(x, y)| (x - y).abs());
    out.push(check(s, "I_(-4/5) inverts I_(4/5)", worst(interior), 1e-3));
    Ok(out)
}

fn kernel_suite() -> Result<Vec<PropertyResult>> {
    let s = Suite::Kernel;
    let mut out = Vec::new();
    let b0 = airy5(0.0)?;
    out.push(check(
        s,
        "B(0) = Gamma(6/5) cos(pi/10)/pi",
        (b0.value - kernel_at_zero_closed_form()).abs(),
        1e-10,
    ));
    let imag = [-40.0, -10.0, -1.0, 0.5, 3.0, 20.0]
        .iter()
        .map(|&x| airy5_full(x).map(|e| e.imaginary.abs()))
        .collect::<Result<Vec<_>>>()?;
    out.push(check(s, "B is real", worst(imag), 1e-10));

    let m = forcing_constant();
    let mut cross = Vec::new();
    for l in grid(-3.9, 0.9, 50) {
        cross.push((trace_plus_via_kernel(l, m) - trace_coefficient_plus(l)).abs());
        cross.push((trace_minus_via_kernel(l, m) - trace_coefficient_minus(l)).abs());
    }
    out.push(check(s, "trace constants through the forcing constant", worst(cross), 1e-6));

    let (n, dx) = (1024, 0.1);
    let centre = n as f64 * dx / 2.0;
    let phi = SampledSignal::new(
        (0..n)
            .map(|i| {
                let x = i as f64 * dx - centre;
                (-x * x).exp() * (1.0 + 0.3 * (2.0 * x).sin())
            })
            .collect(),
        0.0,
        dx,
    )?;
    let (t1, t2) = (4e-4, 6e-4);
    let two_step = free_propagator(&free_propagator(&phi, t1)?, t2)?;
    let one_step = free_propagator(&phi, t1 + t2)?;
    let group = worst(two_step.samples.iter().zip(&one_step.samples).map(|(a, b)| (a - b).abs()));
    out.push(check(s, "free flow group law", group, 1e-10));
    let l2 = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let drift = (l2(&one_step.samples) - l2(&phi.samples)).abs() / l2(&phi.samples);
    out.push(check(s, "free flow preserves the L2 norm", drift, 1e-12));
    Ok(out)
}

/// Runs `suite` with the given seed for the randomized parts.
pub fn run_suite(suite: Suite, seed: u64) -> Result<VerifyReport> {
    let mut results = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Trig {
        results.extend(trig_suite()?);
    }
    if all || suite == Suite::Energy {
        results.extend(energy_suite(seed)?);
    }
    if all || suite == Suite::Fractional {
        results.extend(fractional_suite()?);
    }
    if all || suite == Suite::Kernel {
        results.extend(kernel_suite()?);
    }
    Ok(VerifyReport {
        pass: results.iter().all(|r| r.pass),
        results,
    })
}
