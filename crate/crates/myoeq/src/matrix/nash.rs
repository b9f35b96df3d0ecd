//! Support-enumeration Nash oracle for small bimatrix games.
//!
//! Test-side oracle: enumerates equal-size support pairs, solves the tie
//! systems, and keeps solutions surviving a no-profitable-pure-deviation
//! check. Singular support systems raise the degenerate flag instead of
//! failing.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::simplex::SimplexPoint;

#[derive(Clone, Debug, Serialize)]
pub struct NashPoint {
    pub row: SimplexPoint,
    pub col: SimplexPoint,
    pub payoffs: (f64, f64),
}

#[derive(Clone, Debug, Serialize)]
pub struct NashOutcome {
    pub equilibria: Vec<NashPoint>,
    /// Set when some support system was singular; the listing may then be
    /// incomplete.
    pub degenerate: bool,
}

const VERIFY_TOL: f64 = 1e-9;

/// All Nash equilibria of (A, B) found by support enumeration.
pub fn nash_bimatrix(a: &Mat, b: &Mat) -> Result<NashOutcome> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::Dimension("payoff matrices must share shape".into()));
    }
    let (r, c) = (a.rows(), a.cols());
    if r > 4 || c > 4 {
        return Err(Error::InvalidInput(
            "support enumeration oracle is limited to 4x4 games".into(),
        ));
    }
    let mut out = Vec::new();
    let mut degenerate = false;
    for size in 1..=r.min(c) {
        for s_mask in subsets_of_size(r, size) {
            for t_mask in subsets_of_size(c, size) {
                match solve_support(a, b, &s_mask, &t_mask) {
                    Some((p, q, u, v)) => {
                        if verify(a, b, &p, &q, u, v) {
                            push_dedup(&mut out, p, q, u, v);
                        }
                    }
                    None => degenerate = true,
                }
            }
        }
    }
    out.sort_by(|x, y| {
        x.row
            .coords()
            .iter()
            .chain(x.col.coords())
            .partial_cmp(y.row.coords().iter().chain(y.col.coords()))
            .unwrap()
    });
    Ok(NashOutcome {
        equilibria: out,
        degenerate,
    })
}

/// Is (p, q) a Nash point of (A, B)? Pure-deviation check at `tol`.
pub fn verify_nash(a: &Mat, b: &Mat, p: &[f64], q: &[f64], tol: f64) -> bool {
    let (r, c) = (a.rows(), a.cols());
    let u: f64 = (0..r)
        .map(|i| p[i] * (0..c).map(|j| a.at(i, j) * q[j]).sum::<f64>())
        .sum();
    let v: f64 = (0..c)
        .map(|j| q[j] * (0..r).map(|i| b.at(i, j) * p[i]).sum::<f64>())
        .sum();
    let best_row = (0..r)
        .map(|i| (0..c).map(|j| a.at(i, j) * q[j]).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    let best_col = (0..c)
        .map(|j| (0..r).map(|i| b.at(i, j) * p[i]).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    best_row <= u + tol && best_col <= v + tol
}

fn subsets_of_size(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 1u32..(1 << n) {
        if mask.count_ones() as usize == size {
            out.push((0..n).filter(|i| mask & (1 << i) != 0).collect());
        }
    }
    out
}

/// Solves the two tie systems for a support pair; `None` when singular.
fn solve_support(
    a: &Mat,
    b: &Mat,
    s: &[usize],
    t: &[usize],
) -> Option<(Vec<f64>, Vec<f64>, f64, f64)> {
    let k = s.len();
    // unknowns: q over t plus u.  rows: (A q)_i = u for i in s; mass 1.
    let mut m1 = DMatrix::zeros(k + 1, k + 1);
    let mut rhs1 = DVector::zeros(k + 1);
    for (row, &i) in s.iter().enumerate() {
        for (col, &j) in t.iter().enumerate() {
            m1[(row, col)] = a.at(i, j);
        }
        m1[(row, k)] = -1.0;
    }
    for col in 0..k {
        m1[(k, col)] = 1.0;
    }
    rhs1[k] = 1.0;
    let sol1 = m1.lu().solve(&rhs1)?;

    // unknowns: p over s plus v.  rows: (B^T p)_j = v for j in t; mass 1.
    let mut m2 = DMatrix::zeros(k + 1, k + 1);
    let mut rhs2 = DVector::zeros(k + 1);
    for (row, &j) in t.iter().enumerate() {
        for (col, &i) in s.iter().enumerate() {
            m2[(row, col)] = b.at(i, j);
        }
        m2[(row, k)] = -1.0;
    }
    for col in 0..k {
        m2[(k, col)] = 1.0;
    }
    rhs2[k] = 1.0;
    let sol2 = m2.lu().solve(&rhs2)?;

    let mut q = vec![0.0; a.cols()];
    for (col, &j) in t.iter().enumerate() {
        if sol1[col] < -1e-9 {
            return Some((vec![], vec![], f64::NAN, f64::NAN)); // rejected later
        }
        q[j] = sol1[col].max(0.0);
    }
    let mut p = vec![0.0; a.rows()];
    for (col, &i) in s.iter().enumerate() {
        if sol2[col] < -1e-9 {
            return Some((vec![], vec![], f64::NAN, f64::NAN));
        }
        p[i] = sol2[col].max(0.0);
    }
    Some((p, q, sol1[k], sol2[k]))
}

fn verify(a: &Mat, b: &Mat, p: &[f64], q: &[f64], u: f64, v: f64) -> bool {
    if p.is_empty() || !u.is_finite() || !v.is_finite() {
        return false;
    }
    let sp: f64 = p.iter().sum();
    let sq: f64 = q.iter().sum();
    if (sp - 1.0).abs() > 1e-7 || (sq - 1.0).abs() > 1e-7 {
        return false;
    }
    verify_nash(a, b, p, q, VERIFY_TOL)
}

fn push_dedup(out: &mut Vec<NashPoint>, p: Vec<f64>, q: Vec<f64>, u: f64, v: f64) {
    let close = |x: &[f64], y: &[f64]| {
        x.iter()
            .zip(y)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
            < 1e-7
    };
    if out
        .iter()
        .any(|e| close(e.row.coords(), &p) && close(e.col.coords(), &q))
    {
        return;
    }
    out.push(NashPoint {
        row: SimplexPoint::new_unchecked(p),
        col: SimplexPoint::new_unchecked(q),
        payoffs: (u, v),
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> Mat {
        Mat::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn prisoners_dilemma_unique_defection() {
        // payoffs (T=0 cooperate, B=1 defect): defect strictly dominates
        let a = mat(&[&[3.0, 0.0], &[5.0, 1.0]]);
        let b = mat(&[&[3.0, 5.0], &[0.0, 1.0]]);
        let out = nash_bimatrix(&a, &b).unwrap();
        assert_eq!(out.equilibria.len(), 1);
        let e = &out.equilibria[0];
        assert!((e.row.get(1) - 1.0).abs() < 1e-9);
        assert!((e.col.get(1) - 1.0).abs() < 1e-9);
        assert!((e.payoffs.0 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn matching_pennies_mixed() {
        let a = mat(&[&[1.0, -1.0], &[-1.0, 1.0]]);
        let b = a.scaled(-1.0);
        let out = nash_bimatrix(&a, &b).unwrap();
        assert_eq!(out.equilibria.len(), 1);
        let e = &out.equilibria[0];
        assert!((e.row.get(0) - 0.5).abs() < 1e-9);
        assert!((e.col.get(0) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn coordination_three_equilibria() {
        let a = mat(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let out = nash_bimatrix(&a, &a.clone()).unwrap();
        assert_eq!(out.equilibria.len(), 3);
    }

    #[test]
    fn rejects_large_inputs() {
        let a = Mat::new(5, 5, vec![0.0; 25]).unwrap();
        assert!(nash_bimatrix(&a, &a.clone()).is_err());
    }
}
