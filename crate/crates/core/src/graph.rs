//! Star-graph topology, vertex coefficients and the forcing-operator indices.
//!
//! A star graph has `k` edges modelled on `(-inf, 0)` and `m` edges on
//! `(0, inf)`, all meeting at the vertex `x = 0`. The vertex conditions are
//! parameterized by the value coefficients `a`, the derivative coefficients
//! `b` and the `k x m` second-derivative coupling `C`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dot, norm2, Matrix};

/// Iteration cap for the power method.
pub const POWER_MAX_ITER: usize = 10_000;
/// Convergence threshold on successive Rayleigh quotients.
pub const POWER_RAYLEIGH_TOL: f64 = 1e-14;

/// Topology and vertex coefficients.
///
/// `a` and `b` are stored in the order `a_1 .. a_{k+m}`: the `k` left edges
/// first, then the `m` right edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarGraphSpec {
    pub k: usize,
    pub m: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    #[serde(rename = "C")]
    pub c: Matrix,
}

/// Forcing indices: `lambda` is `k x 3`, `beta` is `m x 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet {
    pub lambda: Matrix,
    pub beta: Matrix,
}

/// The on-disk document: a graph and a parameter set side by side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphConfig {
    #[serde(flatten)]
    pub graph: StarGraphSpec,
    #[serde(flatten)]
    pub params: ParameterSet,
}

impl StarGraphSpec {
    /// Graph with all `a`, `b` equal to one and a uniform coupling
    /// `C = [(km)^{-1/2}]`, which has spectral norm exactly one.
    pub fn uniform(k: usize, m: usize) -> Self {
        let entry = 1.0 / ((k * m) as f64).sqrt();
        StarGraphSpec {
            k,
            m,
            a: vec![1.0; k + m],
            b: vec![1.0; k + m],
            c: Matrix::filled(k, m, entry),
        }
    }

    /// The Y-junction: one incoming edge, two outgoing, `C = [1/sqrt2, 1/sqrt2]`.
    pub fn y_junction() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        StarGraphSpec {
            k: 1,
            m: 2,
            a: vec![1.0; 3],
            b: vec![1.0; 3],
            c: Matrix::filled(1, 2, h),
        }
    }

    pub fn edges(&self) -> usize {
        self.k + self.m
    }

    /// Side length `3k + 2m` of the coupling matrix.
    pub fn system_size(&self) -> usize {
        3 * self.k + 2 * self.m
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidArgument("k must be positive".into()));
        }
        if self.m == 0 {
            return Err(Error::InvalidArgument("m must be positive".into()));
        }
        for (name, coeffs) in [("a", &self.a), ("b", &self.b)] {
            if coeffs.len() != self.edges() {
                return Err(Error::DimensionMismatch {
                    field: name.into(),
                    expected: format!("{}", self.edges()),
                    found: format!("{}", coeffs.len()),
                });
            }
            if let Some(i) = coeffs.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    field: format!("{name}_{}", i + 1),
                });
            }
        }
        if self.a[0] != 1.0 {
            return Err(Error::Normalization {
                field: "a_1".into(),
                value: self.a[0],
            });
        }
        if self.b[0] != 1.0 {
            return Err(Error::Normalization {
                field: "b_1".into(),
                value: self.b[0],
            });
        }
        for (name, coeffs) in [("a", &self.a), ("b", &self.b)] {
            if let Some(i) = coeffs.iter().position(|&v| v == 0.0) {
                return Err(Error::ZeroCoefficient {
                    field: format!("{name}_{}", i + 1),
                });
            }
        }
        if self.c.shape() != (self.k, self.m) {
            return Err(Error::DimensionMismatch {
                field: "C".into(),
                expected: format!("{}x{}", self.k, self.m),
                found: format!("{}x{}", self.c.rows(), self.c.cols()),
            });
        }
        if !self.c.all_finite() {
            return Err(Error::NonFinite { field: "C".into() });
        }
        Ok(())
    }
}

/// Checks every invariant and hands the spec back unchanged.
pub fn validate_graph(spec: StarGraphSpec) -> Result<StarGraphSpec> {
    spec.validate()?;
    Ok(spec)
}

impl ParameterSet {
    /// Every left edge gets the same `lambda` row, every right edge the same `beta` row.
    pub fn tied(k: usize, m: usize, lambda: [f64; 3], beta: [f64; 2]) -> Self {
        ParameterSet {
            lambda: Matrix::from_fn(k, 3, |_, l| lambda[l]),
            beta: Matrix::from_fn(m, 2, |_, p| beta[p]),
        }
    }

    /// Lambda row `(0.48, 0.32, 0.16)` and beta row `(0.48, 0.23)` on every edge.
    pub fn table_rule(k: usize, m: usize) -> Self {
        ParameterSet::tied(k, m, [0.48, 0.32, 0.16], [0.48, 0.23])
    }

    /// All entries, lambda first (row-major), then beta.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.lambda
            .as_slice()
            .iter()
            .chain(self.beta.as_slice())
            .copied()
    }

    pub fn validate_for(&self, spec: &StarGraphSpec) -> Result<()> {
        if self.lambda.shape() != (spec.k, 3) {
            return Err(Error::DimensionMismatch {
                field: "lambda".into(),
                expected: format!("{}x3", spec.k),
                found: format!("{}x{}", self.lambda.rows(), self.lambda.cols()),
            });
        }
        if self.beta.shape() != (spec.m, 2) {
            return Err(Error::DimensionMismatch {
                field: "beta".into(),
                expected: format!("{}x2", spec.m),
                found: format!("{}x{}", self.beta.rows(), self.beta.cols()),
            });
        }
        if !self.lambda.all_finite() {
            return Err(Error::NonFinite {
                field: "lambda".into(),
            });
        }
        if !self.beta.all_finite() {
            return Err(Error::NonFinite {
                field: "beta".into(),
            });
        }
        Ok(())
    }
}

impl GraphConfig {
    pub fn validate(&self) -> Result<()> {
        self.graph.validate()?;
        self.params.validate_for(&self.graph)
    }
}

/// Largest singular value with its right singular vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralNorm {
    pub sigma: f64,
    /// Unit vector `x` with `|Cx| = sigma`.
    pub direction: Vec<f64>,
    pub iterations: usize,
}

/// Outcome of the contraction test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionCheck {
    pub contraction: bool,
    pub sigma: f64,
    /// Maximizing direction, reported only when the test fails.
    pub witness: Option<Vec<f64>>,
}

/// Number of squarings applied to `CᵀC` before iterating.
const POWER_SQUARINGS: usize = 10;

/// `g^(2^POWER_SQUARINGS)`, rescaled to unit max entry after every squaring.
///
/// Plain power iteration contracts the error by `(s_2/s_1)^2` per step and
/// stalls when the top two singular values nearly coincide, which is common
/// for random couplings. Iterating with this power has the same fixed point
/// and contracts `2^POWER_SQUARINGS` times faster.
fn accelerated(gram: &Matrix) -> Matrix {
    let mut p = gram.clone();
    for _ in 0..POWER_SQUARINGS {
        let sq = p.matmul(&p);
        let n = sq.rows();
        let sym = Matrix::from_fn(n, n, |i, j| 0.5 * (sq[(i, j)] + sq[(j, i)]));
        let scale = sym.as_slice().iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        if scale == 0.0 || !scale.is_finite() {
            break;
        }
        p = sym.scaled(1.0 / scale);
    }
    p
}

/// Dominant eigenpair of a symmetric positive semidefinite matrix. The
/// iteration applies `step` (a power of `gram`); the Rayleigh quotient is
/// taken with `gram` itself.
fn power_iteration(gram: &Matrix, step: &Matrix, start: Vec<f64>) -> Result<(f64, Vec<f64>, usize)> {
    let mut x = start;
    let nx = norm2(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut rayleigh = dot(&x, &gram.mul_vec(&x));
    for iter in 1..=POWER_MAX_ITER {
        let mut y = step.mul_vec(&x);
        let ny = norm2(&y);
        if ny == 0.0 {
            return Ok((0.0, x, iter));
        }
        y.iter_mut().for_each(|v| *v /= ny);
        let next = dot(&y, &gram.mul_vec(&y));
        x = y;
        let converged = (next - rayleigh).abs() <= POWER_RAYLEIGH_TOL * next.abs().max(f64::MIN_POSITIVE);
        rayleigh = next;
        if converged {
            return Ok((rayleigh, x, iter));
        }
    }
    Err(Error::NoConvergence {
        iterations: POWER_MAX_ITER,
        estimate: rayleigh.max(0.0).sqrt(),
    })
}

/// Largest singular value of `c`, by power iteration on `CᵀC`.
///
/// The primary start vector is all-ones. Coordinate vectors are tried as
/// well, since a start orthogonal to the dominant eigenvector would otherwise
/// converge to a smaller eigenvalue.
pub fn spectral_norm(c: &Matrix) -> Result<SpectralNorm> {
    if c.is_empty() {
        return Err(Error::InvalidArgument("matrix must be nonempty".into()));
    }
    let gram = c.transpose().matmul(c);
    let step = accelerated(&gram);
    let n = gram.rows();
    let mut best: Option<(f64, Vec<f64>, usize)> = None;
    let mut total = 0;
    let starts = std::iter::once(vec![1.0; n]).chain((0..n).map(|j| {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        e
    }));
    for start in starts {
        let (value, vec, iters) = power_iteration(&gram, &step, start)?;
        total += iters;
        if best.as_ref().is_none_or(|(b, _, _)| value > *b * (1.0 + 1e-13)) {
            best = Some((value, vec, iters));
        }
    }
    let (value, mut direction, _) = best.expect("at least one start vector");
    // Fix the sign so the largest component is positive.
    let pivot = direction
        .iter()
        .copied()
        .fold(0.0_f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
    if pivot < 0.0 {
        direction.iter_mut().for_each(|v| *v = -*v);
    }
    Ok(SpectralNorm {
        sigma: value.max(0.0).sqrt(),
        direction,
        iterations: total,
    })
}

/// `true` iff `|C|_2 <= 1 + tol`.
pub fn is_contraction(c: &Matrix, tol: f64) -> Result<ContractionCheck> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be nonnegative, got {tol}")));
    }
    let norm = spectral_norm(c)?;
    let contraction = norm.sigma <= 1.0 + tol;
    Ok(ContractionCheck {
        contraction,
        sigma: norm.sigma,
        witness: (!contraction).then_some(norm.direction),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn y_junction_is_valid() {
        let spec = validate_graph(StarGraphSpec::y_junction()).unwrap();
        assert_eq!(spec.system_size(), 7);
    }

    #[test]
    fn zero_coefficient_named() {
        let spec = StarGraphSpec {
            k: 1,
            m: 1,
            a: vec![1.0, 0.0],
            b: vec![1.0, 1.0],
            c: Matrix::filled(1, 1, 1.0),
        };
        let err = validate_graph(spec).unwrap_err();
        assert_eq!(err, Error::ZeroCoefficient { field: "a_2".into() });
        assert_eq!(err.to_string(), "zero coefficient a_2");
    }

    #[test]
    fn c_shape_mismatch() {
        let mut spec = StarGraphSpec::uniform(2, 2);
        spec.c = Matrix::filled(1, 2, 0.5);
        let err = validate_graph(spec).unwrap_err();
        assert!(err.to_string().starts_with("C dimension mismatch"), "{err}");
    }

    #[test]
    fn normalization_enforced() {
        let mut spec = StarGraphSpec::uniform(1, 1);
        spec.b[0] = 2.0;
        let err = validate_graph(spec).unwrap_err();
        assert!(matches!(err, Error::Normalization { ref field, .. } if field == "b_1"));
    }

    #[test]
    fn spectral_norm_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let y = Matrix::filled(1, 2, h);
        assert_relative_eq!(spectral_norm(&y).unwrap().sigma, 1.0, max_relative = 1e-10);
        assert_relative_eq!(spectral_norm(&Matrix::identity(2)).unwrap().sigma, 1.0, max_relative = 1e-10);
        let c = Matrix::from_rows(vec![vec![0.3, 0.4], vec![0.0, 0.0]]).unwrap();
        assert_relative_eq!(spectral_norm(&c).unwrap().sigma, 0.5, max_relative = 1e-10);
    }

    #[test]
    fn orthogonal_start_is_not_a_trap() {
        // CᵀC = [[3,-1],[-1,3]]: the all-ones vector is an eigenvector for 2,
        // the dominant eigenvalue 4 lives on (1,-1).
        let c = Matrix::from_rows(vec![vec![1.0, -1.0], vec![1.0, 1.0], vec![1.0, -1.0]]).unwrap();
        let gram = c.transpose().matmul(&c);
        assert_eq!(gram.to_rows(), vec![vec![3.0, -1.0], vec![-1.0, 3.0]]);
        assert_relative_eq!(spectral_norm(&c).unwrap().sigma, 2.0, max_relative = 1e-10);
    }

    #[test]
    fn contraction_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(is_contraction(&Matrix::filled(1, 2, h), 1e-9).unwrap().contraction);
        assert!(is_contraction(&StarGraphSpec::uniform(3, 3).c, 1e-9).unwrap().contraction);
        let check = is_contraction(&Matrix::filled(1, 1, 1.1), 1e-9).unwrap();
        assert!(!check.contraction);
        assert_eq!(check.witness, Some(vec![1.0]));
    }

    #[test]
    fn zero_matrix_has_zero_norm() {
        assert_eq!(spectral_norm(&Matrix::zeros(2, 3)).unwrap().sigma, 0.0);
    }

    #[test]
    fn config_json_matches_documented_layout() {
        let doc = r#"{"k":1,"m":2,"a":[1,1,1],"b":[1,1,1],"C":[[0.7071067811865476,0.7071067811865476]],"lambda":[[0.48,0.32,0.16]],"beta":[[0.48,0.48],[0.23,0.23]]}"#;
        let cfg: GraphConfig = serde_json::from_str(doc).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.graph, StarGraphSpec::y_junction());
        assert_eq!(cfg.params.beta.to_rows(), vec![vec![0.48, 0.48], vec![0.23, 0.23]]);
        let back: GraphConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }
}
