//! Zero-sum matrix-game machinery: LP values and optimal strategies,
//! state-weighted matrices, individual-rationality checks, and joint-payoff
//! vectors. Submodules add convex envelopes, an approachability simulation,
//! and a support-enumeration Nash oracle.

pub mod approach;
pub mod envelope;
pub mod lp;
pub mod nash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::{simplex_grid, SimplexPoint};
use lp::{Cmp, LpBuilder};

/// Dense row-major matrix of payoffs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "matrix {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("matrix entries must be finite".into()));
        }
        Ok(Mat { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Dimension("matrix needs at least one row".into()));
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged matrix".into()));
        }
        Mat::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn scaled(&self, s: f64) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn min_entry(&self) -> f64 {
        self.data.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_entry(&self) -> f64 {
        self.data.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Per-state payoff matrices for the two players.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateMatrices {
    pub a: Vec<Mat>,
    pub b: Vec<Mat>,
}

impl StateMatrices {
    pub fn new(a: Vec<Mat>, b: Vec<Mat>) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() {
            return Err(Error::Dimension(
                "need one A and one B matrix per state".into(),
            ));
        }
        let (r, c) = (a[0].rows(), a[0].cols());
        for m in a.iter().chain(b.iter()) {
            if m.rows() != r || m.cols() != c {
                return Err(Error::Dimension("state matrices must share dimensions".into()));
            }
        }
        Ok(StateMatrices { a, b })
    }

    pub fn states(&self) -> usize {
        self.a.len()
    }

    pub fn n_rows(&self) -> usize {
        self.a[0].rows()
    }

    pub fn n_cols(&self) -> usize {
        self.a[0].cols()
    }

    /// Prior-weighted matrix sum(p_k M_k) for one player's family.
    pub fn weighted(mats: &[Mat], p: &[f64]) -> Result<Mat> {
        if mats.len() != p.len() {
            return Err(Error::Dimension("prior length must match state count".into()));
        }
        let (r, c) = (mats[0].rows(), mats[0].cols());
        let mut data = vec![0.0; r * c];
        for (m, &w) in mats.iter().zip(p) {
            for (d, v) in data.iter_mut().zip(&m.data) {
                *d += w * v;
            }
        }
        Mat::new(r, c, data)
    }

    /// Largest absolute payoff entry over both players and all states.
    pub fn payoff_bound(&self) -> f64 {
        self.a
            .iter()
            .chain(self.b.iter())
            .map(|m| m.max_entry().abs().max(m.min_entry().abs()))
            .fold(0.0, f64::max)
    }
}

/// Value and optimal strategies of a zero-sum matrix game (row maximizes).
#[derive(Clone, Debug, Serialize)]
pub struct GameValue {
    pub value: f64,
    pub row: SimplexPoint,
    pub col: SimplexPoint,
    /// |row guarantee - column guarantee| from the two independent LPs.
    pub duality_gap: f64,
}

/// Solves the zero-sum game by two LPs (one per player) and checks that the
/// guarantees coincide.
pub fn game_value(m: &Mat) -> Result<GameValue> {
    let (r, c) = (m.rows(), m.cols());
    // Row player: max v  s.t.  sum_i p_i M[i][j] >= v for all j, p in simplex.
    let mut row_lp = LpBuilder::new(r + 1);
    let mut obj = vec![0.0; r + 1];
    obj[r] = -1.0;
    row_lp.minimize(&obj);
    row_lp.mark_free(r);
    for j in 0..c {
        let mut coeffs: Vec<(usize, f64)> = (0..r).map(|i| (i, -m.at(i, j))).collect();
        coeffs.push((r, 1.0));
        row_lp.constraint(&coeffs, Cmp::Le, 0.0);
    }
    row_lp.constraint(&(0..r).map(|i| (i, 1.0)).collect::<Vec<_>>(), Cmp::Eq, 1.0);
    let row_sol = row_lp.solve()?;
    let v_row = row_sol.x[r];

    // Column player: min u  s.t.  sum_j q_j M[i][j] <= u for all i.
    let mut col_lp = LpBuilder::new(c + 1);
    let mut obj = vec![0.0; c + 1];
    obj[c] = 1.0;
    col_lp.minimize(&obj);
    col_lp.mark_free(c);
    for i in 0..r {
        let mut coeffs: Vec<(usize, f64)> = (0..c).map(|j| (j, m.at(i, j))).collect();
        coeffs.push((c, -1.0));
        col_lp.constraint(&coeffs, Cmp::Le, 0.0);
    }
    col_lp.constraint(&(0..c).map(|j| (j, 1.0)).collect::<Vec<_>>(), Cmp::Eq, 1.0);
    let col_sol = col_lp.solve()?;
    let v_col = col_sol.x[c];

    let gap = (v_row - v_col).abs();
    if gap > 1e-9 {
        return Err(Error::Numeric(format!(
            "minimax duality gap {gap:.3e} exceeds 1e-9"
        )));
    }
    let mut p = row_sol.x[..r].to_vec();
    let mut q = col_sol.x[..c].to_vec();
    // LP rounding can leave tiny negatives; clean and renormalize.
    for v in p.iter_mut().chain(q.iter_mut()) {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let sp: f64 = p.iter().sum();
    let sq: f64 = q.iter().sum();
    for v in p.iter_mut() {
        *v /= sp;
    }
    for v in q.iter_mut() {
        *v /= sq;
    }
    Ok(GameValue {
        value: 0.5 * (v_row + v_col),
        row: SimplexPoint::new_unchecked(p),
        col: SimplexPoint::new_unchecked(q),
        duality_gap: gap,
    })
}

/// Value of the prior-weighted game for Player One's matrices.
pub fn a_star(mats: &StateMatrices, p: &[f64]) -> Result<f64> {
    Ok(game_value(&StateMatrices::weighted(&mats.a, p)?)?.value)
}

/// What Player Two can defend in the prior-weighted game on his own
/// matrices: the value with Player Two maximizing.
pub fn b_star(mats: &StateMatrices, p: &[f64]) -> Result<f64> {
    let w = StateMatrices::weighted(&mats.b, p)?;
    Ok(-game_value(&w.scaled(-1.0))?.value)
}

/// Report of the semi-infinite individual-rationality check for Player One,
/// evaluated on a grid of priors.
#[derive(Clone, Debug, Serialize)]
pub struct IrReport {
    pub ok: bool,
    /// Prior minimizing y.q - a*(q) over the grid.
    pub worst_q: Vec<f64>,
    /// The minimized margin (negative means violated).
    pub margin: f64,
}

/// Checks `y . q >= a*(q) - tol` over the barycentric grid with `grid_m`
/// subdivisions per edge.
pub fn individually_rational_p1(
    y: &[f64],
    mats: &StateMatrices,
    grid_m: usize,
    tol: f64,
) -> Result<IrReport> {
    if y.len() != mats.states() {
        return Err(Error::Dimension("vector length must match state count".into()));
    }
    let mut worst = (f64::INFINITY, vec![]);
    for q in simplex_grid(mats.states(), grid_m) {
        let lhs: f64 = y.iter().zip(&q).map(|(a, b)| a * b).sum();
        let margin = lhs - a_star(mats, &q)?;
        if margin < worst.0 {
            worst = (margin, q);
        }
    }
    Ok(IrReport {
        ok: worst.0 >= -tol,
        worst_q: worst.1,
        margin: worst.0,
    })
}

/// Player Two's individual rationality at prior `p`: `r >= vex(b*)(p) - tol`.
pub fn individually_rational_p2(
    r: f64,
    p: &[f64],
    vex_b: &envelope::Envelope,
    tol: f64,
) -> Result<bool> {
    Ok(r >= vex_b.eval(p)? - tol)
}

/// Per-state expected payoffs (gamma A, gamma B) of a joint distribution over
/// action pairs, with gamma flattened row-major over I x J.
pub fn gamma_payoffs(gamma: &SimplexPoint, mats: &StateMatrices) -> Result<(Vec<f64>, Vec<f64>)> {
    let (r, c) = (mats.n_rows(), mats.n_cols());
    if gamma.len() != r * c {
        return Err(Error::Dimension(format!(
            "gamma has {} entries, expected {}",
            gamma.len(),
            r * c
        )));
    }
    let mut ga = vec![0.0; mats.states()];
    let mut gb = vec![0.0; mats.states()];
    for k in 0..mats.states() {
        for i in 0..r {
            for j in 0..c {
                let g = gamma.get(i * c + j);
                ga[k] += g * mats.a[k].at(i, j);
                gb[k] += g * mats.b[k].at(i, j);
            }
        }
    }
    Ok((ga, gb))
}

/// Grid density used for prior simplices of each cardinality.
pub fn default_grid_m(states: usize) -> usize {
    match states {
        1 => 1,
        2 => 100,
        3 => 20,
        _ => 10,
    }
}
