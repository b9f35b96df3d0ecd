//! Convex (vex) and concave (cav) envelopes of functions sampled on a
//! barycentric grid of the prior simplex.
//!
//! Two states: the exact one-dimensional lower/upper hull of the sampled
//! graph (monotone chain). Three or more states: the lower convex hull of
//! the graph, evaluated pointwise by a small LP over convex combinations of
//! grid points.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::lp::{Cmp, LpBuilder};
use crate::simplex::simplex_grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EnvelopeKind {
    Vex,
    Cav,
}

/// An envelope of grid-sampled values over the simplex of `k` states.
#[derive(Clone, Debug, Serialize)]
pub struct Envelope {
    k: usize,
    m: usize,
    grid: Vec<Vec<f64>>,
    input: Vec<f64>,
    values: Vec<f64>,
    kind: EnvelopeKind,
}

impl Envelope {
    /// Computes the envelope of `values` given in `simplex_grid(k, m)` order.
    pub fn compute(k: usize, m: usize, values: &[f64], kind: EnvelopeKind) -> Result<Envelope> {
        if k < 1 || m < 1 {
            return Err(Error::InvalidInput("grid needs at least 2 points per edge".into()));
        }
        let grid = simplex_grid(k, m);
        if values.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "expected {} grid values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("grid values must be finite".into()));
        }
        let signed: Vec<f64> = match kind {
            EnvelopeKind::Vex => values.to_vec(),
            EnvelopeKind::Cav => values.iter().map(|v| -v).collect(),
        };
        let lower = if k <= 2 {
            lower_envelope_1d(&grid, &signed)
        } else {
            lower_envelope_lp(&grid, &signed)?
        };
        let env_values: Vec<f64> = match kind {
            EnvelopeKind::Vex => lower,
            EnvelopeKind::Cav => lower.into_iter().map(|v| -v).collect(),
        };
        Ok(Envelope {
            k,
            m,
            grid,
            input: values.to_vec(),
            values: env_values,
            kind,
        })
    }

    /// Samples `f` on the grid and computes the envelope.
    pub fn from_fn(
        k: usize,
        m: usize,
        mut f: impl FnMut(&[f64]) -> Result<f64>,
        kind: EnvelopeKind,
    ) -> Result<Envelope> {
        let grid = simplex_grid(k, m);
        let mut values = Vec::with_capacity(grid.len());
        for p in &grid {
            values.push(f(p)?);
        }
        Envelope::compute(k, m, &values, kind)
    }

    pub fn kind(&self) -> EnvelopeKind {
        self.kind
    }

    pub fn grid(&self) -> &[Vec<f64>] {
        &self.grid
    }

    pub fn input(&self) -> &[f64] {
        &self.input
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Envelope value at an arbitrary prior (hull evaluation; exact at grid
    /// points for k = 2, LP-based for larger k).
    pub fn eval(&self, p: &[f64]) -> Result<f64> {
        if p.len() != self.k {
            return Err(Error::Dimension(format!(
                "prior has {} coordinates, envelope expects {}",
                p.len(),
                self.k
            )));
        }
        let signed_vals: Vec<f64> = match self.kind {
            EnvelopeKind::Vex => self.input.clone(),
            EnvelopeKind::Cav => self.input.iter().map(|v| -v).collect(),
        };
        let v = if self.k <= 2 {
            eval_lower_1d(&self.grid, &signed_vals, if self.k == 2 { p[0] } else { 1.0 })
        } else {
            eval_lower_lp(&self.grid, &signed_vals, p)?
        };
        Ok(match self.kind {
            EnvelopeKind::Vex => v,
            EnvelopeKind::Cav => -v,
        })
    }

    /// Checks the envelope-side inequality and grid convexity (midpoint
    /// inequality along lattice directions) within `tol`.
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        for (i, (&e, &f)) in self.values.iter().zip(&self.input).enumerate() {
            let bad = match self.kind {
                EnvelopeKind::Vex => e > f + tol,
                EnvelopeKind::Cav => e < f - tol,
            };
            if bad {
                return Err(Error::Numeric(format!(
                    "envelope violates side inequality at grid index {i}: {e} vs {f}"
                )));
            }
        }
        // midpoint convexity/concavity along grid lines
        let index: HashMap<Vec<i64>, usize> = self
            .grid
            .iter()
            .enumerate()
            .map(|(i, p)| (quantize(p, self.m), i))
            .collect();
        let sign = match self.kind {
            EnvelopeKind::Vex => 1.0,
            EnvelopeKind::Cav => -1.0,
        };
        for (i, p) in self.grid.iter().enumerate() {
            let c = quantize(p, self.m);
            for a in 0..self.k {
                for b in (a + 1)..self.k {
                    let mut up = c.clone();
                    up[a] += 1;
                    up[b] -= 1;
                    let mut dn = c.clone();
                    dn[a] -= 1;
                    dn[b] += 1;
                    if let (Some(&iu), Some(&id)) = (index.get(&up), index.get(&dn)) {
                        let second =
                            sign * (self.values[iu] + self.values[id] - 2.0 * self.values[i]);
                        if second < -tol {
                            return Err(Error::Numeric(format!(
                                "envelope violates midpoint inequality at grid index {i}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn quantize(p: &[f64], m: usize) -> Vec<i64> {
    p.iter().map(|v| (v * m as f64).round() as i64).collect()
}

/// Lower hull of (t, f) pairs for the 1-simplex parameterized by p[0].
fn lower_envelope_1d(grid: &[Vec<f64>], values: &[f64]) -> Vec<f64> {
    let ts: Vec<f64> = grid.iter().map(|p| p[0]).collect();
    let hull = lower_hull(&ts, values);
    ts.iter().map(|&t| eval_hull(&hull, t)).collect()
}

fn eval_lower_1d(grid: &[Vec<f64>], values: &[f64], t: f64) -> f64 {
    let ts: Vec<f64> = grid.iter().map(|p| p[0]).collect();
    let hull = lower_hull(&ts, values);
    eval_hull(&hull, t)
}

fn lower_hull(ts: &[f64], values: &[f64]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = ts.iter().cloned().zip(values.iter().cloned()).collect();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let o = hull[hull.len() - 2];
            let a = hull[hull.len() - 1];
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

fn eval_hull(hull: &[(f64, f64)], t: f64) -> f64 {
    if hull.len() == 1 || t <= hull[0].0 {
        return hull[0].1;
    }
    for w in hull.windows(2) {
        let (t0, v0) = w[0];
        let (t1, v1) = w[1];
        if t <= t1 {
            let s = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
            return v0 + s * (v1 - v0);
        }
    }
    hull.last().unwrap().1
}

/// Lower hull values at every grid point via one LP per point.
fn lower_envelope_lp(grid: &[Vec<f64>], values: &[f64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(grid.len());
    for p in grid {
        out.push(eval_lower_lp(grid, values, p)?);
    }
    Ok(out)
}

fn eval_lower_lp(grid: &[Vec<f64>], values: &[f64], p: &[f64]) -> Result<f64> {
    let g = grid.len();
    let k = p.len();
    let mut lp = LpBuilder::new(g);
    lp.minimize(values);
    // convex combination of grid points hitting p; last coordinate equation
    // is implied by the others plus the mass constraint
    for d in 0..k.saturating_sub(1) {
        let coeffs: Vec<(usize, f64)> = (0..g).map(|i| (i, grid[i][d])).collect();
        lp.constraint(&coeffs, Cmp::Eq, p[d]);
    }
    lp.constraint(&(0..g).map(|i| (i, 1.0)).collect::<Vec<_>>(), Cmp::Eq, 1.0);
    Ok(lp.solve()?.objective)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tent(p: &[f64]) -> f64 {
        (2.0 * p[0] - 1.0).abs()
    }

    #[test]
    fn vex_of_convex_is_itself() {
        let env = Envelope::from_fn(2, 40, |p| Ok(tent(p)), EnvelopeKind::Vex).unwrap();
        for (e, p) in env.values().iter().zip(env.grid()) {
            assert!((e - tent(p)).abs() < 1e-12);
        }
        env.check_invariants(1e-10).unwrap();
    }

    #[test]
    fn vex_of_negative_tent_is_constant() {
        let env = Envelope::from_fn(2, 40, |p| Ok(-tent(p)), EnvelopeKind::Vex).unwrap();
        for e in env.values() {
            assert!((e + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cav_mirrors_vex() {
        let env = Envelope::from_fn(2, 40, |p| Ok(tent(p)), EnvelopeKind::Cav).unwrap();
        for e in env.values() {
            assert!((e - 1.0).abs() < 1e-12);
        }
        env.check_invariants(1e-10).unwrap();
    }

    /// Brute-force oracle: max over chords between grid points that minorize
    /// the sampled values everywhere on the grid.
    pub(crate) fn affine_minorant_oracle(ts: &[f64], f: &[f64], at: f64) -> f64 {
        let n = ts.len();
        let mut best = f64::NEG_INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                let slope = (f[j] - f[i]) / (ts[j] - ts[i]);
                let line = |t: f64| f[i] + slope * (t - ts[i]);
                if (0..n).all(|e| line(ts[e]) <= f[e] + 1e-10) {
                    best = best.max(line(at));
                }
            }
        }
        best
    }

    #[test]
    fn random_piecewise_matches_minorant_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let m = 24;
            let vals: Vec<f64> = (0..=m).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let env = Envelope::compute(2, m, &vals, EnvelopeKind::Vex).unwrap();
            let ts: Vec<f64> = env.grid().iter().map(|p| p[0]).collect();
            for (i, &t) in ts.iter().enumerate() {
                let want = affine_minorant_oracle(&ts, &vals, t);
                assert!(
                    (env.values()[i] - want).abs() < 1e-9,
                    "at {t}: {} vs {}",
                    env.values()[i],
                    want
                );
            }
        }
    }

    #[test]
    fn three_state_envelope_sandwich() {
        let f = |p: &[f64]| Ok(-((p[0] - 0.4).powi(2) + (p[1] - 0.3).powi(2)).sqrt());
        let vex = Envelope::from_fn(3, 8, f, EnvelopeKind::Vex).unwrap();
        let cav = Envelope::from_fn(3, 8, f, EnvelopeKind::Cav).unwrap();
        for i in 0..vex.values().len() {
            assert!(vex.values()[i] <= vex.input()[i] + 1e-9);
            assert!(cav.values()[i] >= cav.input()[i] - 1e-9);
        }
        vex.check_invariants(1e-8).unwrap();
        cav.check_invariants(1e-8).unwrap();
    }
}
