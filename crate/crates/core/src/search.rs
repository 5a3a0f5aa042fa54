//! Parameter sweeps over graph sizes and searches for forcing indices that
//! certify the widest regularity range.
//!
//! The certified range of a parameter set is `(max p - 1/2, min p + 2)`, so
//! its width is `5/2 - (max p - min p)`: the search is a hunt for the
//! tightest cluster of indices that still keeps `M(lambda, beta)` invertible.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::admissibility::{admissible_s_range, RegularityInterval};
use crate::bc_matrix::{normalized_determinant, AssemblyMode};
use crate::error::{Error, Result};
use crate::graph::{ParameterSet, StarGraphSpec};
use crate::matrix::Matrix;

/// Default floor on `|normalized det|` for a point to count as invertible.
pub const DEFAULT_DET_FLOOR: f64 = 1e-6;
/// Coarse grid spacing.
pub const GRID_STEP: f64 = 0.01;
/// Refinement stops once the coordinate step falls below this.
pub const MIN_REFINE_STEP: f64 = 1e-4;

/// How `lambda` and `beta` are assigned across the edges of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterRule {
    pub lambda: [f64; 3],
    pub beta: [f64; 2],
}

impl Default for ParameterRule {
    /// `lambda = (0.48, 0.32, 0.16)`, `beta = (0.48, 0.23)` on every edge.
    fn default() -> Self {
        ParameterRule {
            lambda: [0.48, 0.32, 0.16],
            beta: [0.48, 0.23],
        }
    }
}

impl ParameterRule {
    pub fn params(&self, k: usize, m: usize) -> ParameterSet {
        ParameterSet::tied(k, m, self.lambda, self.beta)
    }

    pub fn describe(&self) -> String {
        format!(
            "lambda_i = ({}, {}, {}), beta_j = ({}, {}); a = b = 1, C = [(km)^(-1/2)]",
            self.lambda[0], self.lambda[1], self.lambda[2], self.beta[0], self.beta[1]
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: usize,
    pub m: usize,
    pub normalized_det: f64,
    pub mode: AssemblyMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub parameter_rule: String,
}

/// `x` with six significant digits, trailing zeros dropped (C's `%.6g`).
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    // Rounding can carry into the next decade; re-derive the exponent from the rounded text.
    let sci = format!("{:.5e}", x);
    let (mantissa, e) = sci.split_once('e').expect("scientific format");
    let exp_rounded: i32 = e.parse().unwrap_or(exp);
    if (-5..6).contains(&exp_rounded) {
        let decimals = (5 - exp_rounded).max(0) as usize;
        let s = format!("{:.*}", decimals, x);
        trim_zeros(&s)
    } else {
        format!("{}e{}", trim_zeros(mantissa), exp_rounded)
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

impl SweepResult {
    /// CSV with header `k,m,normalized_det,mode`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,m,normalized_det,mode\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{}", r.k, r.m, format_sig6(r.normalized_det), r.mode);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Vec<SweepRow>> {
        let mut lines = text.lines();
        match lines.next() {
            Some("k,m,normalized_det,mode") => {}
            other => return Err(Error::InvalidArgument(format!("unexpected CSV header {other:?}"))),
        }
        lines
            .filter(|l| !l.trim().is_empty())
            .map(|line| {
                let fields: Vec<&str> = line.split(',').collect();
                let bad = || Error::InvalidArgument(format!("malformed CSV row '{line}'"));
                if fields.len() != 4 {
                    return Err(bad());
                }
                Ok(SweepRow {
                    k: fields[0].parse().map_err(|_| bad())?,
                    m: fields[1].parse().map_err(|_| bad())?,
                    normalized_det: fields[2].parse().map_err(|_| bad())?,
                    mode: fields[3].parse().map_err(|_| bad())?,
                })
            })
            .collect()
    }

    /// Value at `(k, m)`, if swept.
    pub fn get(&self, k: usize, m: usize) -> Option<f64> {
        self.rows.iter().find(|r| r.k == k && r.m == m).map(|r| r.normalized_det)
    }
}

/// Normalized determinants for every `1 <= k <= k_max`, `1 <= m <= m_max` on
/// the uniform graph. Rows are ordered by `k`, then `m`.
pub fn sweep_table(k_max: usize, m_max: usize, rule: ParameterRule, mode: AssemblyMode) -> Result<SweepResult> {
    if k_max == 0 || m_max == 0 {
        return Err(Error::InvalidArgument("k_max and m_max must be at least 1".into()));
    }
    let pairs: Vec<(usize, usize)> = (1..=k_max).flat_map(|k| (1..=m_max).map(move |m| (k, m))).collect();
    let rows = pairs
        .par_iter()
        .map(|&(k, m)| {
            let nd = normalized_determinant(&StarGraphSpec::uniform(k, m), &rule.params(k, m), mode)?;
            Ok(SweepRow {
                k,
                m,
                normalized_det: nd,
                mode,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        rows,
        parameter_rule: rule.describe(),
    })
}

/// Five index values shared by all edges: `lambda_{., 1..3}` then `beta_{., 1..2}`.
pub type Template = [f64; 5];

#[derive(Debug, Clone, PartialEq)]
pub enum SearchGrid {
    /// Clusters of width `w` starting at `lo`, both on a 0.01 lattice, with a
    /// few fixed arrangements of the five template values inside the cluster.
    /// Narrow clusters are visited first.
    Clusters,
    /// Exactly these template points, in this order.
    Points(Vec<Template>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOptions {
    pub det_floor: f64,
    /// Maximum number of matrix assemblies.
    pub budget: usize,
    pub mode: AssemblyMode,
    pub grid: SearchGrid,
    /// Run coordinate refinement after the coarse phase.
    pub refine: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            det_floor: DEFAULT_DET_FLOOR,
            budget: 20_000,
            mode: AssemblyMode::default(),
            grid: SearchGrid::Clusters,
            refine: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchOutcome {
    pub best_params: ParameterSet,
    pub certified_range: RegularityInterval,
    pub normalized_det: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
struct Candidate {
    values: Vec<f64>,
    width: f64,
    det: f64,
}

impl Candidate {
    /// Reduction order: wider range first, then lexicographically smaller
    /// values. Independent of evaluation order.
    fn beats(&self, other: &Candidate) -> bool {
        if self.width != other.width {
            return self.width > other.width;
        }
        self.values.iter().partial_cmp(other.values.iter()) == Some(std::cmp::Ordering::Less)
    }

    /// Refinement accepts a move that widens the range, or keeps the width
    /// and moves away from singularity.
    fn improves_on(&self, other: &Candidate) -> bool {
        self.width > other.width || (self.width == other.width && self.det.abs() > other.det.abs())
    }
}

fn params_from_values(k: usize, m: usize, values: &[f64]) -> ParameterSet {
    ParameterSet {
        lambda: Matrix::from_row_major(k, 3, values[..3 * k].to_vec()).expect("lambda block"),
        beta: Matrix::from_row_major(m, 2, values[3 * k..].to_vec()).expect("beta block"),
    }
}

fn expand_template(k: usize, m: usize, t: &Template) -> Vec<f64> {
    let mut v = Vec::with_capacity(3 * k + 2 * m);
    for _ in 0..k {
        v.extend_from_slice(&t[..3]);
    }
    for _ in 0..m {
        v.extend_from_slice(&t[3..]);
    }
    v
}

fn width_of(values: &[f64]) -> f64 {
    let r = crate::admissibility::admissible_range_of(values.iter().copied());
    if r.is_empty() {
        0.0
    } else {
        r.hi - r.lo
    }
}

struct Evaluator<'a> {
    spec: &'a StarGraphSpec,
    mode: AssemblyMode,
    det_floor: f64,
    budget: usize,
    used: usize,
}

impl Evaluator<'_> {
    fn remaining(&self) -> usize {
        self.budget.saturating_sub(self.used)
    }

    /// Evaluates up to `remaining()` points in parallel; returns the feasible ones in input order.
    fn evaluate(&mut self, points: Vec<Vec<f64>>) -> Result<Vec<Candidate>> {
        let take = points.len().min(self.remaining());
        self.used += take;
        let (k, m, mode, floor) = (self.spec.k, self.spec.m, self.mode, self.det_floor);
        let spec = self.spec;
        let scored = points
            .into_par_iter()
            .take(take)
            .map(|values| {
                let width = width_of(&values);
                if width <= 0.0 {
                    return Ok(None);
                }
                let det = normalized_determinant(spec, &params_from_values(k, m, &values), mode)?;
                Ok((det.is_finite() && det.abs() >= floor).then_some(Candidate { values, width, det }))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(scored.into_iter().flatten().collect())
    }
}

fn best_of(cands: Vec<Candidate>) -> Option<Candidate> {
    cands.into_iter().fold(None, |best, c| match best {
        Some(b) if !c.beats(&b) => Some(b),
        _ => Some(c),
    })
}

fn on_lattice(i: usize) -> f64 {
    // Round to the lattice so 0.01 * i prints as written.
    (i as f64 * GRID_STEP * 1e6).round() / 1e6
}

/// The templates with cluster start `lo` and width `w`.
fn cluster_templates(lo: f64, w: f64) -> Vec<Template> {
    let hi = lo + w;
    let mut out = Vec::new();
    for frac in [0.5, 0.25, 0.75] {
        let mid = lo + frac * w;
        for (lam, bet) in [
            ([hi, mid, lo], [hi, lo]),
            ([hi, mid, lo], [lo, hi]),
            ([lo, mid, hi], [hi, lo]),
            ([lo, mid, hi], [lo, hi]),
        ] {
            out.push([lam[0], lam[1], lam[2], bet[0], bet[1]]);
        }
    }
    out
}

fn coarse_phase(eval: &mut Evaluator<'_>, grid: &SearchGrid) -> Result<Option<Candidate>> {
    let (k, m) = (eval.spec.k, eval.spec.m);
    match grid {
        SearchGrid::Points(points) => {
            let pts = points.iter().map(|t| expand_template(k, m, t)).collect();
            Ok(best_of(eval.evaluate(pts)?))
        }
        SearchGrid::Clusters => {
            // Width levels w = 0.01, 0.02, ...; the first level with a feasible
            // point wins, since every wider cluster certifies a narrower range.
            let lattice = (0.5 / GRID_STEP).round() as usize;
            for wi in 1..lattice - 1 {
                if eval.remaining() == 0 {
                    break;
                }
                let w = on_lattice(wi);
                let pts: Vec<Vec<f64>> = (1..lattice - wi)
                    .flat_map(|li| cluster_templates(on_lattice(li), w))
                    .map(|t| expand_template(k, m, &t))
                    .collect();
                if let Some(best) = best_of(eval.evaluate(pts)?) {
                    return Ok(Some(best));
                }
            }
            Ok(None)
        }
    }
}

/// Coordinate moves on single entries with a halving step.
fn refine(eval: &mut Evaluator<'_>, mut best: Candidate) -> Result<Candidate> {
    let mut step = GRID_STEP / 2.0;
    while step >= MIN_REFINE_STEP && eval.remaining() > 0 {
        let mut improved = true;
        while improved && eval.remaining() > 0 {
            improved = false;
            for idx in 0..best.values.len() {
                if eval.remaining() == 0 {
                    break;
                }
                let moves: Vec<Vec<f64>> = [step, -step]
                    .iter()
                    .map(|d| {
                        let mut v = best.values.clone();
                        v[idx] += d;
                        v
                    })
                    .filter(|v| v[idx] > 0.0 && v[idx] < 0.5)
                    .collect();
                let cands = eval.evaluate(moves)?;
                let pick = cands.into_iter().fold(None::<Candidate>, |acc, c| match acc {
                    Some(a) if !c.improves_on(&a) => Some(a),
                    _ => Some(c),
                });
                if let Some(c) = pick {
                    if c.improves_on(&best) {
                        best = c;
                        improved = true;
                    }
                }
            }
        }
        step /= 2.0;
    }
    Ok(best)
}

/// Looks for indices in `(0, 1/2)` maximizing the certified regularity range
/// subject to `|normalized det| >= det_floor`. Deterministic for fixed inputs;
/// returns the best point visited, with no claim of global optimality.
pub fn search_params(spec: &StarGraphSpec, options: &SearchOptions) -> Result<SearchOutcome> {
    spec.validate()?;
    if options.budget == 0 {
        return Err(Error::InvalidArgument("budget must be at least 1".into()));
    }
    if !(options.det_floor > 0.0) {
        return Err(Error::InvalidArgument("det_floor must be positive".into()));
    }
    let mut eval = Evaluator {
        spec,
        mode: options.mode,
        det_floor: options.det_floor,
        budget: options.budget,
        used: 0,
    };
    let mut best = coarse_phase(&mut eval, &options.grid)?.ok_or(Error::NoInvertiblePoint)?;
    if options.refine {
        best = refine(&mut eval, best)?;
    }
    let best_params = params_from_values(spec.k, spec.m, &best.values);
    Ok(SearchOutcome {
        certified_range: admissible_s_range(&best_params),
        best_params,
        normalized_det: best.det,
        evaluations: eval.used,
    })
}
