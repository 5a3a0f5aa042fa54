//! LU factorization with partial pivoting, plus the usual by-products:
//! determinant, linear solves and a 1-norm condition estimate.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Pivot columns whose entries all fall below this are treated as exactly zero.
pub const ZERO_PIVOT: f64 = 1e-300;
/// A solve is refused when the smallest pivot is below this fraction of the
/// largest row norm.
pub const SINGULAR_RATIO: f64 = 1e-12;

/// `PA = LU`, with unit lower `L` and `U` packed into one matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    factors: Matrix,
    perm: Vec<usize>,
    sign: f64,
    exactly_singular: bool,
    max_row_norm: f64,
}

impl Lu {
    pub fn new(a: &Matrix) -> Lu {
        assert!(a.is_square(), "LU requires a square matrix");
        let n = a.rows();
        let max_row_norm = a.norm_inf();
        let mut f = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut exactly_singular = false;
        for col in 0..n {
            let (piv, piv_abs) = (col..n)
                .map(|r| (r, f[(r, col)].abs()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if piv_abs < ZERO_PIVOT {
                exactly_singular = true;
                for r in col..n {
                    f[(r, col)] = 0.0;
                }
                continue;
            }
            if piv != col {
                for j in 0..n {
                    let tmp = f[(col, j)];
                    f[(col, j)] = f[(piv, j)];
                    f[(piv, j)] = tmp;
                }
                perm.swap(col, piv);
                sign = -sign;
            }
            let p = f[(col, col)];
            for r in col + 1..n {
                let factor = f[(r, col)] / p;
                f[(r, col)] = factor;
                if factor != 0.0 {
                    for j in col + 1..n {
                        let u = f[(col, j)];
                        f[(r, j)] -= factor * u;
                    }
                }
            }
        }
        Lu {
            factors: f,
            perm,
            sign,
            exactly_singular,
            max_row_norm,
        }
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn determinant(&self) -> f64 {
        if self.exactly_singular {
            return 0.0;
        }
        (0..self.dim()).fold(self.sign, |acc, i| acc * self.factors[(i, i)])
    }

    /// `min |u_ii| / max_i sum_j |a_ij|`; zero for an exactly singular matrix.
    pub fn pivot_ratio(&self) -> f64 {
        if self.exactly_singular {
            return 0.0;
        }
        if self.max_row_norm == 0.0 {
            return 0.0;
        }
        let min_pivot = (0..self.dim())
            .map(|i| self.factors[(i, i)].abs())
            .fold(f64::INFINITY, f64::min);
        min_pivot / self.max_row_norm
    }

    pub fn is_singular(&self) -> bool {
        self.exactly_singular || self.pivot_ratio() < SINGULAR_RATIO
    }

    fn check(&self) -> Result<()> {
        if self.is_singular() {
            Err(Error::Singular {
                pivot_ratio: self.pivot_ratio(),
            })
        } else {
            Ok(())
        }
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.check()?;
        let n = self.dim();
        assert_eq!(b.len(), n);
        let f = &self.factors;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| f[(i, j)] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| f[(i, j)] * x[j]).sum();
            x[i] = (x[i] - s) / f[(i, i)];
        }
        Ok(x)
    }

    /// Solves `Aᵀ x = b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.check()?;
        let n = self.dim();
        assert_eq!(b.len(), n);
        let f = &self.factors;
        // Aᵀ = Uᵀ Lᵀ P, so solve Uᵀ z = b, Lᵀ w = z, x = Pᵀ w.
        let mut z = b.to_vec();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| f[(j, i)] * z[j]).sum();
            z[i] = (z[i] - s) / f[(i, i)];
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| f[(j, i)] * z[j]).sum();
            z[i] -= s;
        }
        let mut x = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = z[i];
        }
        Ok(x)
    }

    /// Hager–Higham estimate of `|A^{-1}|_1`.
    pub fn inverse_norm_one_estimate(&self) -> Result<f64> {
        self.check()?;
        let n = self.dim();
        let mut x = vec![1.0 / n as f64; n];
        let mut estimate = 0.0;
        for _ in 0..5 {
            let y = self.solve(&x)?;
            let ynorm: f64 = y.iter().map(|v| v.abs()).sum();
            if ynorm <= estimate {
                break;
            }
            estimate = ynorm;
            let xi: Vec<f64> = y.iter().map(|&v| if v >= 0.0 { 1.0 } else { -1.0 }).collect();
            let z = self.solve_transpose(&xi)?;
            let (jmax, zmax) = z
                .iter()
                .enumerate()
                .map(|(j, v)| (j, v.abs()))
                .fold((0, -1.0), |b, c| if c.1 > b.1 { c } else { b });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
            if zmax <= ztx {
                break;
            }
            x = vec![0.0; n];
            x[jmax] = 1.0;
        }
        // Higham's alternating-sign safeguard.
        let alt: Vec<f64> = (0..n)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                s * (1.0 + i as f64 / (n as f64 - 1.0).max(1.0))
            })
            .collect();
        let y = self.solve(&alt)?;
        let alt_est = 2.0 * y.iter().map(|v| v.abs()).sum::<f64>() / (3.0 * n as f64);
        Ok(estimate.max(alt_est))
    }
}

/// Sign times product of pivots; exactly zero for a rank-deficient pivot column.
pub fn determinant(a: &Matrix) -> f64 {
    Lu::new(a).determinant()
}

/// Solves `A x = rhs`, refusing near-singular matrices.
pub fn solve(a: &Matrix, rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != a.rows() {
        return Err(Error::DimensionMismatch {
            field: "rhs".into(),
            expected: format!("{}", a.rows()),
            found: format!("{}", rhs.len()),
        });
    }
    Lu::new(a).solve(rhs)
}

/// `|A|_1 |A^{-1}|_1` estimate; `+inf` for singular input.
pub fn condition_estimate(a: &Matrix) -> f64 {
    let lu = Lu::new(a);
    match lu.inverse_norm_one_estimate() {
        Ok(inv) => a.norm_one() * inv,
        Err(_) => f64::INFINITY,
    }
}
