//! The `(3k+2m) x (3k+2m)` vertex coupling matrix.
//!
//! Columns are the forcing unknowns, edge by edge: three `gamma` columns for
//! each left edge, then two `theta` columns for each right edge. Rows follow
//! the vertex conditions in order:
//!
//! | rows      | condition                                     |
//! |-----------|-----------------------------------------------|
//! | `k-1`     | `u_1 = a_i u_i`, `i = 2..k`                   |
//! | `m`       | `u_1 = a_{k+j} v_j`                           |
//! | `k-1`     | `u_1' = b_i u_i'`                             |
//! | `m`       | `u_1' = b_{k+j} v_j'`                         |
//! | `k`       | `U'' = C V''`                                 |
//! | `1`       | `sum b_i^{-1} u_i''' = sum b_{k+j}^{-1} v_j'''` |
//! | `1`       | `sum a_i^{-1} u_i'''' = sum a_{k+j}^{-1} v_j''''` |

mod lu;
mod terms;

use serde::{Deserialize, Serialize};

pub use lu::{condition_estimate, determinant, solve, Lu, SINGULAR_RATIO, ZERO_PIVOT};
pub use terms::{iota, rho, sin_pi_10};

use crate::error::Result;
use crate::graph::{ParameterSet, StarGraphSpec};
use crate::matrix::Matrix;
use terms::{iota_unchecked, rho_unchecked};

/// How the value-continuity block is filled.
///
/// The two modes differ in one column only: `AppendixCode` puts
/// `rho0(lambda_{1,2})` in the third column of the value rows, where
/// `PaperBlocks` has `rho0(lambda_{1,3})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "kebab-case")]
pub enum AssemblyMode {
    #[default]
    PaperBlocks,
    AppendixCode,
}

impl AssemblyMode {
    pub const ALL: [AssemblyMode; 2] = [AssemblyMode::PaperBlocks, AssemblyMode::AppendixCode];

    pub fn as_str(&self) -> &'static str {
        match self {
            AssemblyMode::PaperBlocks => "paper-blocks",
            AssemblyMode::AppendixCode => "appendix-code",
        }
    }
}

impl std::fmt::Display for AssemblyMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for AssemblyMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "paper-blocks" => Ok(AssemblyMode::PaperBlocks),
            "appendix-code" => Ok(AssemblyMode::AppendixCode),
            other => Err(format!("unknown assembly mode '{other}' (expected paper-blocks or appendix-code)")),
        }
    }
}

/// Which vertex condition a row encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    /// `u_1 = a_i u_i`, carrying the 1-based edge index `i >= 2`.
    ValueLeft(usize),
    /// `u_1 = a_{k+j} v_j`, carrying `j`.
    ValueRight(usize),
    DerivLeft(usize),
    DerivRight(usize),
    /// Row `i` of `U'' = C V''`.
    SecondDeriv(usize),
    ThirdFlux,
    FourthFlux,
}

/// Assembled matrix together with its layout.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    pub entries: Matrix,
    pub k: usize,
    pub m: usize,
    pub mode: AssemblyMode,
}

impl CouplingMatrix {
    pub fn dim(&self) -> usize {
        3 * self.k + 2 * self.m
    }

    /// Column of `gamma_{i,l}` (0-based `i < k`, `l < 3`).
    pub fn gamma_col(&self, i: usize, l: usize) -> usize {
        3 * i + l
    }

    /// Column of `theta_{j,p}` (0-based `j < m`, `p < 2`).
    pub fn theta_col(&self, j: usize, p: usize) -> usize {
        3 * self.k + 2 * j + p
    }

    pub fn row_kinds(&self) -> Vec<RowKind> {
        row_kinds(self.k, self.m)
    }

    pub fn determinant(&self) -> f64 {
        determinant(&self.entries)
    }

    /// Determinant scaled by `sin(pi/10)^{-(3k+2m)}`.
    pub fn normalized_determinant(&self) -> f64 {
        self.determinant() / sin_pi_10().powi(self.dim() as i32)
    }

    pub fn condition_estimate(&self) -> f64 {
        condition_estimate(&self.entries)
    }
}

fn row_kinds(k: usize, m: usize) -> Vec<RowKind> {
    let mut rows = Vec::with_capacity(3 * k + 2 * m);
    rows.extend((2..=k).map(RowKind::ValueLeft));
    rows.extend((1..=m).map(RowKind::ValueRight));
    rows.extend((2..=k).map(RowKind::DerivLeft));
    rows.extend((1..=m).map(RowKind::DerivRight));
    rows.extend((1..=k).map(RowKind::SecondDeriv));
    rows.push(RowKind::ThirdFlux);
    rows.push(RowKind::FourthFlux);
    rows
}

/// Builds the coupling matrix for `spec` at the indices `params`.
pub fn assemble(spec: &StarGraphSpec, params: &ParameterSet, mode: AssemblyMode) -> Result<CouplingMatrix> {
    spec.validate()?;
    params.validate_for(spec)?;
    let (k, m) = (spec.k, spec.m);
    let n = spec.system_size();
    let lam = &params.lambda;
    let bet = &params.beta;
    let (a, b, c) = (&spec.a, &spec.b, &spec.c);
    let gcol = |i: usize, l: usize| 3 * i + l;
    let tcol = |j: usize, p: usize| 3 * k + 2 * j + p;

    let mut out = Matrix::zeros(n, n);
    for (r, kind) in row_kinds(k, m).into_iter().enumerate() {
        let row = out.row_mut(r);
        match kind {
            RowKind::ValueLeft(_) | RowKind::ValueRight(_) | RowKind::DerivLeft(_) | RowKind::DerivRight(_) => {
                let (theta, coef) = match kind {
                    RowKind::ValueLeft(_) | RowKind::ValueRight(_) => (0, a),
                    _ => (1, b),
                };
                for l in 0..3 {
                    row[gcol(0, l)] = rho_unchecked(theta, lam[(0, l)]);
                }
                if theta == 0 && mode == AssemblyMode::AppendixCode {
                    row[gcol(0, 2)] = rho_unchecked(0, lam[(0, 1)]);
                }
                match kind {
                    RowKind::ValueLeft(i) | RowKind::DerivLeft(i) => {
                        let e = i - 1;
                        for l in 0..3 {
                            row[gcol(e, l)] = -coef[e] * rho_unchecked(theta, lam[(e, l)]);
                        }
                    }
                    RowKind::ValueRight(j) | RowKind::DerivRight(j) => {
                        let e = j - 1;
                        for p in 0..2 {
                            row[tcol(e, p)] = -coef[k + e] * iota_unchecked(theta, bet[(e, p)]);
                        }
                    }
                    _ => unreachable!(),
                }
            }
            RowKind::SecondDeriv(i) => {
                let e = i - 1;
                for l in 0..3 {
                    row[gcol(e, l)] = -rho_unchecked(2, lam[(e, l)]);
                }
                for j in 0..m {
                    for p in 0..2 {
                        row[tcol(j, p)] = c[(e, j)] * iota_unchecked(2, bet[(j, p)]);
                    }
                }
            }
            RowKind::ThirdFlux | RowKind::FourthFlux => {
                let (theta, coef) = if kind == RowKind::ThirdFlux { (3, b) } else { (4, a) };
                for i in 0..k {
                    for l in 0..3 {
                        row[gcol(i, l)] = rho_unchecked(theta, lam[(i, l)]) / coef[i];
                    }
                }
                for j in 0..m {
                    for p in 0..2 {
                        row[tcol(j, p)] = -iota_unchecked(theta, bet[(j, p)]) / coef[k + j];
                    }
                }
            }
        }
    }
    Ok(CouplingMatrix {
        entries: out,
        k,
        m,
        mode,
    })
}

/// `det M(lambda, beta) * sin(pi/10)^{-(3k+2m)}`.
pub fn normalized_determinant(spec: &StarGraphSpec, params: &ParameterSet, mode: AssemblyMode) -> Result<f64> {
    Ok(assemble(spec, params, mode)?.normalized_determinant())
}

/// Solves `M [gamma; theta] = rhs`. The solution uses the column layout of `m`.
pub fn solve_forcing(m: &CouplingMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    solve(&m.entries, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn dimensions() {
        let y = assemble(&StarGraphSpec::y_junction(), &ParameterSet::table_rule(1, 2), AssemblyMode::PaperBlocks).unwrap();
        assert_eq!(y.entries.shape(), (7, 7));
        let big = assemble(&StarGraphSpec::uniform(10, 10), &ParameterSet::table_rule(10, 10), AssemblyMode::PaperBlocks).unwrap();
        assert_eq!(big.entries.shape(), (50, 50));
        assert_eq!(big.row_kinds().len(), 50);
    }

    #[test]
    fn first_value_row_for_two_left_edges() {
        let mut spec = StarGraphSpec::uniform(2, 1);
        spec.a = vec![1.0, 2.5, 1.5];
        let params = ParameterSet {
            lambda: Matrix::from_rows(vec![vec![0.1, 0.2, 0.3], vec![0.35, 0.25, 0.15]]).unwrap(),
            beta: Matrix::from_rows(vec![vec![0.4, 0.45]]).unwrap(),
        };
        let cm = assemble(&spec, &params, AssemblyMode::PaperBlocks).unwrap();
        let r = cm.entries.row(0);
        assert_eq!(r[0], rho(0, 0.1).unwrap());
        assert_eq!(r[2], rho(0, 0.3).unwrap());
        assert_eq!(r[3], -2.5 * rho(0, 0.35).unwrap());
        assert_eq!(r[5], -2.5 * rho(0, 0.15).unwrap());
        // theta columns of the left value row are structurally zero
        assert_eq!(&r[6..], &[0.0, 0.0]);
        let code = assemble(&spec, &params, AssemblyMode::AppendixCode).unwrap();
        assert_eq!(code.entries.row(0)[2], rho(0, 0.2).unwrap());
        // derivative rows are identical in the two modes
        for row in 2..cm.dim() {
            assert_eq!(cm.entries.row(row), code.entries.row(row));
        }
    }

    #[test]
    fn zero_blocks_in_left_rows() {
        let spec = StarGraphSpec::uniform(3, 2);
        let cm = assemble(&spec, &ParameterSet::table_rule(3, 2), AssemblyMode::PaperBlocks).unwrap();
        for (r, kind) in cm.row_kinds().into_iter().enumerate() {
            if matches!(kind, RowKind::ValueLeft(_) | RowKind::DerivLeft(_)) {
                for j in 0..2 {
                    for p in 0..2 {
                        assert_eq!(cm.entries[(r, cm.theta_col(j, p))], 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn single_left_edge_has_no_left_rows() {
        let spec = StarGraphSpec::uniform(1, 3);
        let cm = assemble(&spec, &ParameterSet::table_rule(1, 3), AssemblyMode::PaperBlocks).unwrap();
        assert_eq!(cm.dim(), 9);
        assert!(!cm.row_kinds().iter().any(|r| matches!(r, RowKind::ValueLeft(_) | RowKind::DerivLeft(_))));
    }

    #[test]
    fn shape_mismatch_rejected() {
        let spec = StarGraphSpec::uniform(2, 2);
        let params = ParameterSet::table_rule(1, 2);
        assert!(assemble(&spec, &params, AssemblyMode::PaperBlocks).is_err());
    }

    #[test]
    fn y_junction_first_set() {
        let spec = StarGraphSpec::y_junction();
        let params = ParameterSet::tied(1, 2, [0.48, 0.32, 0.16], [0.48, 0.23]);
        let nd = normalized_determinant(&spec, &params, AssemblyMode::AppendixCode).unwrap();
        assert_relative_eq!(nd, -9.2205, max_relative = 5e-3);
    }

    #[test]
    fn equal_beta_pair_is_singular() {
        // beta_{j,1} = beta_{j,2} duplicates the two theta columns of edge j.
        let spec = StarGraphSpec::y_junction();
        let params = ParameterSet {
            lambda: Matrix::from_rows(vec![vec![0.48, 0.32, 0.16]]).unwrap(),
            beta: Matrix::from_rows(vec![vec![0.48, 0.48], vec![0.23, 0.23]]).unwrap(),
        };
        for mode in AssemblyMode::ALL {
            let cm = assemble(&spec, &params, mode).unwrap();
            assert!(cm.normalized_determinant().abs() < 1e-12);
            assert!(solve_forcing(&cm, &[1.0; 7]).is_err());
        }
    }

    #[test]
    fn mode_round_trips_through_str() {
        for mode in AssemblyMode::ALL {
            assert_eq!(mode.as_str().parse::<AssemblyMode>().unwrap(), mode);
            assert_eq!(serde_json::to_string(&mode).unwrap(), format!("\"{mode}\""));
        }
    }
}
