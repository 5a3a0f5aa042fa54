//! Which Sobolev regularities `s` a given choice of forcing indices certifies,
//! and the vertex compatibility conditions required of the initial data.
//!
//! For fixed `s` every index must lie in the open window
//! `(max{s-2, 0}, min{s+1/2, 1/2})`. Inverting this for a fixed parameter set
//! gives `s` in `(max p - 1/2, min p + 2)`, intersected with `(-1/2, 5/2)`
//! and with the points `1/2`, `3/2` removed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ParameterSet, StarGraphSpec};

/// Lower end of the regularity range covered by the theory.
pub const S_MIN: f64 = -0.5;
/// Upper end of the regularity range covered by the theory.
pub const S_MAX: f64 = 2.5;
/// Regularities at which the well-posedness result does not apply.
pub const EXCLUDED_S: [f64; 2] = [0.5, 1.5];

/// An open interval `(lo, hi)`; empty when `lo >= hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpenInterval {
    pub lo: f64,
    pub hi: f64,
}

impl OpenInterval {
    pub fn is_empty(&self) -> bool {
        !(self.lo < self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }
}

/// Admissible regularities: an open interval minus a few isolated points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityInterval {
    pub lo: f64,
    pub hi: f64,
    pub excluded: Vec<f64>,
}

impl RegularityInterval {
    pub fn empty() -> Self {
        RegularityInterval {
            lo: 0.0,
            hi: 0.0,
            excluded: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo < self.hi)
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }

    pub fn contains(&self, s: f64) -> bool {
        self.lo < s && s < self.hi && !self.excluded.contains(&s)
    }
}

/// The window `(max{s-2, 0}, min{s+1/2, 1/2})` for the forcing indices at regularity `s`.
pub fn window(s: f64) -> OpenInterval {
    OpenInterval {
        lo: (s - 2.0).max(0.0),
        hi: (s + 0.5).min(0.5),
    }
}

/// The set of `s` for which every entry of `params` sits inside `window(s)`.
pub fn admissible_s_range(params: &ParameterSet) -> RegularityInterval {
    admissible_range_of(params.values())
}

pub(crate) fn admissible_range_of(values: impl IntoIterator<Item = f64>) -> RegularityInterval {
    let mut max_p = f64::NEG_INFINITY;
    let mut min_p = f64::INFINITY;
    let mut any = false;
    for p in values {
        if !(p > 0.0 && p < 0.5) {
            return RegularityInterval::empty();
        }
        any = true;
        max_p = max_p.max(p);
        min_p = min_p.min(p);
    }
    if !any {
        return RegularityInterval::empty();
    }
    let lo = (max_p - 0.5).max(S_MIN);
    let hi = (min_p + 2.0).min(S_MAX);
    if !(lo < hi) {
        return RegularityInterval::empty();
    }
    RegularityInterval {
        lo,
        hi,
        excluded: EXCLUDED_S.iter().copied().filter(|&e| lo < e && e < hi).collect(),
    }
}

/// Values and first derivatives of the initial data at the vertex, ordered
/// `u_1 .. u_k, v_1 .. v_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeTraces {
    pub value: Vec<f64>,
    pub deriv: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ViolationKind {
    Value,
    Deriv,
}

/// One failed equality `lhs = rhs` on edge `edge` (1-based, `a`/`b` numbering).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub edge: usize,
    pub lhs: f64,
    pub rhs: f64,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let label = match self.kind {
            ViolationKind::Value => "value",
            ViolationKind::Deriv => "∂ₓ",
        };
        write!(f, "{label}: edge {} ({} != {})", self.edge, self.lhs, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityReport {
    pub pass: bool,
    pub violations: Vec<Violation>,
}

/// Checks the vertex compatibility conditions demanded at regularity `s`:
/// values for `s > 1/2`, first derivatives as well for `s > 3/2`.
pub fn check_compatibility(traces: &EdgeTraces, s: f64, spec: &StarGraphSpec, tol: f64) -> Result<CompatibilityReport> {
    let n = spec.edges();
    for (name, v) in [("value", &traces.value), ("deriv", &traces.deriv)] {
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                field: format!("traces.{name}"),
                expected: n.to_string(),
                found: v.len().to_string(),
            });
        }
    }
    if spec.a.len() != n || spec.b.len() != n {
        return Err(Error::DimensionMismatch {
            field: "a/b".into(),
            expected: n.to_string(),
            found: format!("{}/{}", spec.a.len(), spec.b.len()),
        });
    }
    let mut violations = Vec::new();
    let mut check = |kind: ViolationKind, data: &[f64], coef: &[f64]| {
        let pivot = data[0];
        for e in 1..n {
            let rhs = coef[e] * data[e];
            if !((pivot - rhs).abs() <= tol) {
                violations.push(Violation {
                    kind,
                    edge: e + 1,
                    lhs: pivot,
                    rhs,
                });
            }
        }
    };
    if s > 0.5 {
        check(ViolationKind::Value, &traces.value, &spec.a);
    }
    if s > 1.5 {
        check(ViolationKind::Deriv, &traces.deriv, &spec.b);
    }
    Ok(CompatibilityReport {
        pass: violations.is_empty(),
        violations,
    })
}
