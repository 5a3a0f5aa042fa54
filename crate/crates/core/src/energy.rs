//! Boundary energy form at the vertex.
//!
//! Multiplying the linear equation by the solution and integrating by parts
//! leaves, at each time, the vertex quadratic form
//!
//! ```text
//! sum_i (u_i'')^2 - sum_j (v_j'')^2
//!   - 2 sum_i u_i u_i'''' + 2 sum_j v_j v_j''''
//!   + 2 sum_i u_i' u_i''' - 2 sum_j v_j' v_j'''
//! ```
//!
//! Under the vertex conditions the cross terms cancel and the form collapses
//! to `V''ᵀ (CᵀC - I) V''`, which is non-positive exactly when `C` is a
//! contraction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::StarGraphSpec;
use crate::matrix::{dot, Matrix};

/// Vertex traces of derivatives 0 through 4, ordered `u_1..u_k, v_1..v_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexTraces {
    pub k: usize,
    pub d0: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub d3: Vec<f64>,
    pub d4: Vec<f64>,
}

impl VertexTraces {
    pub fn zeros(k: usize, m: usize) -> Self {
        let z = vec![0.0; k + m];
        VertexTraces {
            k,
            d0: z.clone(),
            d1: z.clone(),
            d2: z.clone(),
            d3: z.clone(),
            d4: z,
        }
    }

    pub fn m(&self) -> usize {
        self.d0.len() - self.k
    }
}

/// Evaluates the vertex quadratic form.
pub fn boundary_form(tr: &VertexTraces) -> f64 {
    let k = tr.k;
    let split = |v: &[f64]| -> (Vec<f64>, Vec<f64>) { (v[..k].to_vec(), v[k..].to_vec()) };
    let (d0u, d0v) = split(&tr.d0);
    let (d1u, d1v) = split(&tr.d1);
    let (d2u, d2v) = split(&tr.d2);
    let (d3u, d3v) = split(&tr.d3);
    let (d4u, d4v) = split(&tr.d4);
    dot(&d2u, &d2u) - dot(&d2v, &d2v) - 2.0 * dot(&d0u, &d4u) + 2.0 * dot(&d0v, &d4v) + 2.0 * dot(&d1u, &d3u)
        - 2.0 * dot(&d1v, &d3v)
}

/// Sum of the absolute values of the terms of [`boundary_form`], the scale
/// against which its rounding error is measured.
pub fn form_magnitude(tr: &VertexTraces) -> f64 {
    let abs_dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| (a * b).abs()).sum::<f64>();
    abs_dot(&tr.d2, &tr.d2) + 2.0 * abs_dot(&tr.d0, &tr.d4) + 2.0 * abs_dot(&tr.d1, &tr.d3)
}

/// Number of free parameters accepted by [`constrained_traces`].
pub fn free_len(k: usize, m: usize) -> usize {
    2 + m + 2 * (k + m - 1)
}

/// Produces vertex traces satisfying all five vertex conditions.
///
/// Layout of `free` (length [`free_len`]):
/// 1. `u_1(0)`
/// 2. `u_1'(0)`
/// 3. `V''(0)`, `m` entries
/// 4. third derivatives of `u_2..u_k, v_1..v_m` (`k+m-1` entries)
/// 5. fourth derivatives of `u_2..u_k, v_1..v_m` (`k+m-1` entries)
///
/// `U''` is set to `C V''`; `u_1'''` and `u_1''''` are solved from the two
/// flux conditions.
pub fn constrained_traces(free: &[f64], spec: &StarGraphSpec) -> Result<VertexTraces> {
    spec.validate()?;
    let (k, m) = (spec.k, spec.m);
    let n = k + m;
    if free.len() != free_len(k, m) {
        return Err(Error::DimensionMismatch {
            field: "free".into(),
            expected: free_len(k, m).to_string(),
            found: free.len().to_string(),
        });
    }
    let (u1, du1) = (free[0], free[1]);
    let d2v = &free[2..2 + m];
    let d3_free = &free[2 + m..2 + m + n - 1];
    let d4_free = &free[2 + m + n - 1..];

    let d0: Vec<f64> = spec.a.iter().map(|&a| u1 / a).collect();
    let d1: Vec<f64> = spec.b.iter().map(|&b| du1 / b).collect();
    let mut d2 = spec.c.mul_vec(d2v);
    d2.extend_from_slice(d2v);

    // Sum over the left edges minus sum over the right edges of coef^{-1} x.
    let flux = |coef: &[f64], free: &[f64]| -> Vec<f64> {
        let mut d = vec![0.0; n];
        d[1..].copy_from_slice(free);
        let right: f64 = (k..n).map(|e| d[e] / coef[e]).sum();
        let left_rest: f64 = (1..k).map(|e| d[e] / coef[e]).sum();
        d[0] = coef[0] * (right - left_rest);
        d
    };
    let d3 = flux(&spec.b, d3_free);
    let d4 = flux(&spec.a, d4_free);
    Ok(VertexTraces { k, d0, d1, d2, d3, d4 })
}

/// `d2vᵀ (CᵀC - I_m) d2v`.
pub fn reduced_form(d2v: &[f64], c: &Matrix) -> Result<f64> {
    if d2v.len() != c.cols() {
        return Err(Error::DimensionMismatch {
            field: "d2V".into(),
            expected: c.cols().to_string(),
            found: d2v.len().to_string(),
        });
    }
    let cv = c.mul_vec(d2v);
    Ok(dot(&cv, &cv) - dot(d2v, d2v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_terms() {
        let mut tr = VertexTraces::zeros(1, 1);
        assert_eq!(boundary_form(&tr), 0.0);
        tr.d2[0] = 1.0;
        assert_eq!(boundary_form(&tr), 1.0);
        let mut tr = VertexTraces::zeros(1, 1);
        tr.d2[1] = 1.0;
        assert_eq!(boundary_form(&tr), -1.0);
    }

    #[test]
    fn zero_free_gives_zero_traces() {
        let spec = StarGraphSpec::uniform(3, 2);
        let tr = constrained_traces(&vec![0.0; free_len(3, 2)], &spec).unwrap();
        assert_eq!(tr, VertexTraces::zeros(3, 2));
    }

    #[test]
    fn y_junction_traces() {
        let spec = StarGraphSpec::y_junction();
        let mut free = vec![0.0; free_len(1, 2)];
        free[0] = 1.0;
        free[2] = 1.0;
        free[3] = -1.0;
        let tr = constrained_traces(&free, &spec).unwrap();
        assert_eq!(tr.d0, vec![1.0, 1.0, 1.0]);
        assert_abs_diff_eq!(tr.d2[0], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn reduced_form_examples() {
        let c = StarGraphSpec::y_junction().c;
        assert_abs_diff_eq!(reduced_form(&[1.0, 1.0], &c).unwrap(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(reduced_form(&[1.0, -1.0], &c).unwrap(), -2.0, epsilon = 1e-14);
        assert_eq!(reduced_form(&[0.0, 0.0], &c).unwrap(), 0.0);
        assert!(reduced_form(&[1.0], &c).is_err());
    }

    #[test]
    fn flux_conditions_hold() {
        let mut spec = StarGraphSpec::uniform(3, 2);
        spec.a = vec![1.0, 2.0, -0.5, 3.0, 0.25];
        spec.b = vec![1.0, -1.5, 4.0, 0.5, 2.0];
        let free: Vec<f64> = (0..free_len(3, 2)).map(|i| (i as f64 * 0.37).sin()).collect();
        let tr = constrained_traces(&free, &spec).unwrap();
        let lhs3: f64 = (0..3).map(|i| tr.d3[i] / spec.b[i]).sum();
        let rhs3: f64 = (3..5).map(|e| tr.d3[e] / spec.b[e]).sum();
        assert_abs_diff_eq!(lhs3, rhs3, epsilon = 1e-14);
        let lhs4: f64 = (0..3).map(|i| tr.d4[i] / spec.a[i]).sum();
        let rhs4: f64 = (3..5).map(|e| tr.d4[e] / spec.a[e]).sum();
        assert_abs_diff_eq!(lhs4, rhs4, epsilon = 1e-14);
        for e in 1..5 {
            assert_abs_diff_eq!(tr.d0[0], spec.a[e] * tr.d0[e], epsilon = 1e-14);
            assert_abs_diff_eq!(tr.d1[0], spec.b[e] * tr.d1[e], epsilon = 1e-14);
        }
        let reduction = reduced_form(&tr.d2[3..], &spec.c).unwrap();
        assert_abs_diff_eq!(boundary_form(&tr), reduction, epsilon = 1e-12);
    }
}
