//! Dense two-phase simplex with Bland's rule.
//!
//! Small self-contained solver for the desk-scale linear programs this crate
//! needs (matrix-game values, convex-hull membership, witness feasibility,
//! joint-plan feasibility). Variables are nonnegative unless marked free;
//! free variables are split internally. Degenerate ties are broken by lowest
//! index, which also guarantees termination.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct LpBuilder {
    n_vars: usize,
    minimize: Vec<f64>,
    free: Vec<bool>,
    rows: Vec<(Vec<f64>, Cmp, f64)>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

const EPS: f64 = 1e-9;
const PIVOT_EPS: f64 = 1e-11;

impl LpBuilder {
    /// A program over `n_vars` nonnegative variables minimizing 0.
    pub fn new(n_vars: usize) -> Self {
        LpBuilder {
            n_vars,
            minimize: vec![0.0; n_vars],
            free: vec![false; n_vars],
            rows: Vec::new(),
        }
    }

    /// Sets the objective to minimize.
    pub fn minimize(&mut self, c: &[f64]) -> &mut Self {
        assert_eq!(c.len(), self.n_vars);
        self.minimize = c.to_vec();
        self
    }

    /// Allows a variable to take any sign.
    pub fn mark_free(&mut self, var: usize) -> &mut Self {
        self.free[var] = true;
        self
    }

    /// Adds a sparse constraint row.
    pub fn constraint(&mut self, coeffs: &[(usize, f64)], cmp: Cmp, rhs: f64) -> &mut Self {
        let mut row = vec![0.0; self.n_vars];
        for &(j, v) in coeffs {
            assert!(j < self.n_vars);
            row[j] += v;
        }
        self.rows.push((row, cmp, rhs));
        self
    }

    pub fn solve(&self) -> Result<LpSolution> {
        // Standard form: split free vars, add slack/surplus, normalize rhs >= 0.
        let mut col_of_var = Vec::with_capacity(self.n_vars); // (pos col, neg col)
        let mut n_std = 0usize;
        for j in 0..self.n_vars {
            if self.free[j] {
                col_of_var.push((n_std, Some(n_std + 1)));
                n_std += 2;
            } else {
                col_of_var.push((n_std, None));
                n_std += 1;
            }
        }
        let n_structural = n_std;
        let m = self.rows.len();
        n_std += m; // one slack/surplus or padding column per row (unused for Eq)

        let mut a = vec![vec![0.0; n_std]; m];
        let mut b = vec![0.0; m];
        let mut cost = vec![0.0; n_std];
        for j in 0..self.n_vars {
            let (pc, nc) = col_of_var[j];
            cost[pc] = self.minimize[j];
            if let Some(nc) = nc {
                cost[nc] = -self.minimize[j];
            }
        }
        for (i, (row, cmp, rhs)) in self.rows.iter().enumerate() {
            let sign = if *rhs < 0.0 { -1.0 } else { 1.0 };
            for j in 0..self.n_vars {
                let (pc, nc) = col_of_var[j];
                a[i][pc] = sign * row[j];
                if let Some(nc) = nc {
                    a[i][nc] = -sign * row[j];
                }
            }
            b[i] = sign * rhs;
            let slack_col = n_structural + i;
            match cmp {
                Cmp::Le => a[i][slack_col] = sign,
                Cmp::Ge => a[i][slack_col] = -sign,
                Cmp::Eq => {}
            }
        }

        // Phase 1: artificial basis.
        let total = n_std + m;
        let mut tab = vec![vec![0.0; total]; m];
        for i in 0..m {
            tab[i][..n_std].copy_from_slice(&a[i]);
            tab[i][n_std + i] = 1.0;
        }
        let mut basis: Vec<usize> = (0..m).map(|i| n_std + i).collect();
        let mut phase1 = vec![0.0; total];
        for k in 0..m {
            phase1[n_std + k] = 1.0;
        }
        run_simplex(&mut tab, &mut b, &mut basis, &phase1, n_std)?;
        let infeas: f64 = basis
            .iter()
            .zip(&b)
            .filter(|(j, _)| **j >= n_std)
            .map(|(_, v)| v.abs())
            .sum();
        if infeas > 1e-7 {
            return Err(Error::Numeric(format!(
                "LP infeasible (phase-1 residual {infeas:.3e})"
            )));
        }
        // Drive leftover artificials out of the basis or drop redundant rows.
        let mut keep = vec![true; m];
        for i in 0..m {
            if basis[i] >= n_std {
                if let Some(col) = (0..n_std).find(|&j| tab[i][j].abs() > 1e-8) {
                    pivot(&mut tab, &mut b, &mut basis, i, col);
                } else {
                    keep[i] = false;
                }
            }
        }
        let (mut tab, mut b, mut basis) = compact_rows(tab, b, basis, &keep);

        // Phase 2 over the real objective (artificial columns barred).
        let mut phase2 = vec![0.0; total];
        phase2[..n_std].copy_from_slice(&cost[..n_std]);
        run_simplex(&mut tab, &mut b, &mut basis, &phase2, n_std)?;

        let mut x_std = vec![0.0; n_std];
        for (i, &j) in basis.iter().enumerate() {
            if j < n_std {
                x_std[j] = b[i];
            }
        }
        let mut x = vec![0.0; self.n_vars];
        for j in 0..self.n_vars {
            let (pc, nc) = col_of_var[j];
            x[j] = x_std[pc] - nc.map_or(0.0, |c| x_std[c]);
        }
        let objective = x.iter().zip(&self.minimize).map(|(a, c)| a * c).sum();
        Ok(LpSolution { x, objective })
    }
}

fn compact_rows(
    tab: Vec<Vec<f64>>,
    b: Vec<f64>,
    basis: Vec<usize>,
    keep: &[bool],
) -> (Vec<Vec<f64>>, Vec<f64>, Vec<usize>) {
    let mut t2 = Vec::new();
    let mut b2 = Vec::new();
    let mut bs2 = Vec::new();
    for i in 0..tab.len() {
        if keep[i] {
            t2.push(tab[i].clone());
            b2.push(b[i]);
            bs2.push(basis[i]);
        }
    }
    (t2, b2, bs2)
}

/// Bland-rule simplex on an explicit tableau. Columns at index >= `bar_from`
/// may stay basic but never enter.
fn run_simplex(
    tab: &mut [Vec<f64>],
    b: &mut [f64],
    basis: &mut [usize],
    cost: &[f64],
    bar_from: usize,
) -> Result<()> {
    let m = tab.len();
    if m == 0 {
        return Ok(());
    }
    let n = tab[0].len();
    for _ in 0..200_000 {
        // reduced costs from scratch keeps drift bounded
        let mut entering = None;
        for j in 0..n.min(bar_from) {
            if basis.contains(&j) {
                continue;
            }
            let mut rc = cost[j];
            for i in 0..m {
                rc -= cost[basis[i]] * tab[i][j];
            }
            if rc < -EPS {
                entering = Some(j);
                break; // Bland: lowest index
            }
        }
        let Some(col) = entering else {
            return Ok(());
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            if tab[i][col] > PIVOT_EPS {
                let ratio = b[i] / tab[i][col];
                match leave {
                    None => leave = Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - 1e-12
                            || (ratio < lr + 1e-12 && basis[i] < basis[li])
                        {
                            leave = Some((i, ratio));
                        }
                    }
                }
            }
        }
        let Some((row, _)) = leave else {
            return Err(Error::Numeric("LP unbounded".into()));
        };
        pivot(tab, b, basis, row, col);
    }
    Err(Error::Numeric("simplex iteration limit reached".into()))
}

fn pivot(tab: &mut [Vec<f64>], b: &mut [f64], basis: &mut [usize], row: usize, col: usize) {
    let m = tab.len();
    let p = tab[row][col];
    for v in tab[row].iter_mut() {
        *v /= p;
    }
    b[row] /= p;
    for i in 0..m {
        if i == row {
            continue;
        }
        let f = tab[i][col];
        if f.abs() > 0.0 {
            for j in 0..tab[i].len() {
                tab[i][j] -= f * tab[row][j];
            }
            b[i] -= f * b[row];
        }
    }
    basis[row] = col;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_feasibility() {
        // min -x - y  s.t. x + y <= 1, x,y >= 0  => x + y = 1, obj -1
        let mut lp = LpBuilder::new(2);
        lp.minimize(&[-1.0, -1.0]);
        lp.constraint(&[(0, 1.0), (1, 1.0)], Cmp::Le, 1.0);
        let s = lp.solve().unwrap();
        assert!((s.objective + 1.0).abs() < 1e-9);
        assert!((s.x[0] + s.x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn equality_and_free_vars() {
        // min t  s.t. t free, t >= x - 1, t >= 1 - x, x = 0.25  => t = 0.75
        let mut lp = LpBuilder::new(2);
        lp.mark_free(0);
        lp.minimize(&[1.0, 0.0]);
        lp.constraint(&[(0, 1.0), (1, -1.0)], Cmp::Ge, -1.0);
        lp.constraint(&[(0, 1.0), (1, 1.0)], Cmp::Ge, 1.0);
        lp.constraint(&[(1, 1.0)], Cmp::Eq, 0.25);
        let s = lp.solve().unwrap();
        assert!((s.x[1] - 0.25).abs() < 1e-9);
        assert!((s.objective - 0.75).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible() {
        let mut lp = LpBuilder::new(1);
        lp.constraint(&[(0, 1.0)], Cmp::Le, 1.0);
        lp.constraint(&[(0, 1.0)], Cmp::Ge, 2.0);
        assert!(lp.solve().is_err());
    }

    #[test]
    fn detects_unbounded() {
        let mut lp = LpBuilder::new(1);
        lp.minimize(&[-1.0]);
        lp.constraint(&[(0, 1.0)], Cmp::Ge, 0.0);
        assert!(lp.solve().is_err());
    }

    #[test]
    fn redundant_equalities() {
        // consistent duplicated rows must not break phase 1
        let mut lp = LpBuilder::new(2);
        lp.minimize(&[1.0, 2.0]);
        lp.constraint(&[(0, 1.0), (1, 1.0)], Cmp::Eq, 1.0);
        lp.constraint(&[(0, 2.0), (1, 2.0)], Cmp::Eq, 2.0);
        let s = lp.solve().unwrap();
        assert!((s.x[0] - 1.0).abs() < 1e-9);
        assert!((s.objective - 1.0).abs() < 1e-9);
    }
}
