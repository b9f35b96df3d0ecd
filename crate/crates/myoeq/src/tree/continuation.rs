//! Continuation payoffs for truncated trees: per common-knowledge class, a
//! correspondence given by finitely many continuous selections over the
//! conditional distribution on the class, whose pointwise convex hull is the
//! correspondence value. Endpoint wrappers g compose the stage payoff with
//! the continuation value.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matrix::lp::{Cmp, LpBuilder};
use crate::simplex::simplex_grid;
use crate::tree::CommonKnowledge;

/// A continuous increasing wrapper applied to each endpoint's continuation
/// value before strategy payoffs are aggregated.
#[derive(Clone)]
pub struct GWrapper {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub desc: String,
}

impl std::fmt::Debug for GWrapper {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GWrapper({})", self.desc)
    }
}

impl GWrapper {
    /// offset + slope * t with slope > 0.
    pub fn affine(offset: f64, slope: f64) -> Result<Self> {
        if !(slope > 0.0) || !offset.is_finite() || !slope.is_finite() {
            return Err(Error::InvalidInput(format!(
                "affine wrapper needs a positive finite slope, got {slope}"
            )));
        }
        Ok(GWrapper {
            f: Arc::new(move |t| offset + slope * t),
            desc: format!("{offset} + {slope}*t"),
        })
    }

    pub fn identity() -> Self {
        GWrapper {
            f: Arc::new(|t| t),
            desc: "t".into(),
        }
    }

    pub fn from_fn(f: impl Fn(f64) -> f64 + Send + Sync + 'static, desc: &str) -> Self {
        GWrapper {
            f: Arc::new(f),
            desc: desc.into(),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    /// Sampled monotonicity check over [lo, hi].
    pub fn check_increasing(&self, lo: f64, hi: f64, samples: usize) -> Result<()> {
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=samples {
            let t = lo + (hi - lo) * k as f64 / samples as f64;
            let v = self.eval(t);
            if !v.is_finite() || v <= prev {
                return Err(Error::InvalidInput(format!(
                    "wrapper `{}` is not increasing near t = {t}",
                    self.desc
                )));
            }
            prev = v;
        }
        Ok(())
    }
}

/// One continuous selection of a class's correspondence: maps a conditional
/// distribution over the class's endpoints (local order) to a value per
/// (local endpoint, player), flattened e * players + n.
pub trait Selection: Send + Sync {
    fn eval(&self, conditional: &[f64]) -> Result<Vec<f64>>;
}

/// A selection that ignores the conditional.
pub struct ConstantSelection {
    pub values: Vec<f64>,
}

impl Selection for ConstantSelection {
    fn eval(&self, _conditional: &[f64]) -> Result<Vec<f64>> {
        Ok(self.values.clone())
    }
}

/// Closure-backed selection.
pub struct FnSelection<F>(pub F);

impl<F> Selection for FnSelection<F>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync,
{
    fn eval(&self, conditional: &[f64]) -> Result<Vec<f64>> {
        (self.0)(conditional)
    }
}

/// The correspondence attached to one common-knowledge class.
pub struct ClassContinuation {
    pub selections: Vec<Arc<dyn Selection>>,
    /// Declared bound on the magnitude of all selection values.
    pub bound: f64,
}

/// Continuation data for every class of the common-knowledge partition.
pub struct ContinuationSystem {
    pub classes: Vec<ClassContinuation>,
}

impl ContinuationSystem {
    pub fn new(classes: Vec<ClassContinuation>) -> Self {
        ContinuationSystem { classes }
    }

    /// Bound dominating all payoffs of all classes.
    pub fn global_bound(&self) -> f64 {
        self.classes.iter().map(|c| c.bound).fold(1.0, f64::max)
    }

    /// Checks shape against the partition, that every class has a selection,
    /// and that the declared bounds strictly dominate sampled values.
    pub fn validate(&self, q: &CommonKnowledge, players: usize) -> Result<()> {
        if self.classes.len() != q.classes.len() {
            return Err(Error::Dimension(format!(
                "continuation system covers {} classes, partition has {}",
                self.classes.len(),
                q.classes.len()
            )));
        }
        for (c, cont) in self.classes.iter().enumerate() {
            if cont.selections.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "class {c} has no continuation selection"
                )));
            }
            let ne = q.classes[c].len();
            let grid_m = if ne == 1 { 1 } else { 4 };
            for (si, sel) in cont.selections.iter().enumerate() {
                for p in simplex_grid(ne, grid_m) {
                    let vals = sel.eval(&p)?;
                    if vals.len() != ne * players {
                        return Err(Error::Dimension(format!(
                            "selection {si} of class {c} returned {} values, expected {}",
                            vals.len(),
                            ne * players
                        )));
                    }
                    if vals.iter().any(|v| !v.is_finite() || v.abs() >= cont.bound) {
                        return Err(Error::InvalidInput(format!(
                            "selection {si} of class {c} exceeds its declared bound {}",
                            cont.bound
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Distance (infinity norm) from `value` to the hull of the class's
    /// selections evaluated at `conditional`.
    pub fn hull_distance(&self, class: usize, conditional: &[f64], value: &[f64]) -> Result<f64> {
        let cont = &self.classes[class];
        let points: Vec<Vec<f64>> = cont
            .selections
            .iter()
            .map(|s| s.eval(conditional))
            .collect::<Result<_>>()?;
        hull_membership_distance(&points, value)
    }
}

/// Infinity-norm distance from `target` to the convex hull of `points`.
pub fn hull_membership_distance(points: &[Vec<f64>], target: &[f64]) -> Result<f64> {
    let m = points.len();
    let d = target.len();
    // vars: mu_0..mu_{m-1}, s ; minimize s with |sum mu p - target|_inf <= s
    let mut lp = LpBuilder::new(m + 1);
    let mut obj = vec![0.0; m + 1];
    obj[m] = 1.0;
    lp.minimize(&obj);
    lp.constraint(&(0..m).map(|k| (k, 1.0)).collect::<Vec<_>>(), Cmp::Eq, 1.0);
    for j in 0..d {
        let mut coeffs: Vec<(usize, f64)> = (0..m).map(|k| (k, points[k][j])).collect();
        coeffs.push((m, -1.0));
        lp.constraint(&coeffs, Cmp::Le, target[j]);
        let mut coeffs: Vec<(usize, f64)> = (0..m).map(|k| (k, -points[k][j])).collect();
        coeffs.push((m, -1.0));
        lp.constraint(&coeffs, Cmp::Le, -target[j]);
    }
    Ok(lp.solve()?.objective.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_wrapper_validation() {
        assert!(GWrapper::affine(1.0, 0.0).is_err());
        assert!(GWrapper::affine(1.0, -2.0).is_err());
        let g = GWrapper::affine(1.0, 0.5).unwrap();
        assert!((g.eval(2.0) - 2.0).abs() < 1e-15);
        g.check_increasing(-10.0, 10.0, 50).unwrap();
        let bad = GWrapper::from_fn(|t| -t, "-t");
        assert!(bad.check_increasing(-1.0, 1.0, 10).is_err());
    }

    #[test]
    fn hull_distance_basics() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!(hull_membership_distance(&pts, &[0.25, 0.25]).unwrap() < 1e-9);
        let far = hull_membership_distance(&pts, &[1.0, 1.0]).unwrap();
        assert!(far > 0.4, "distance {far}");
    }
}
