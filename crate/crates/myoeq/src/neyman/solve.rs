//! End-to-end solving of the weighted-stage game: continuation selections are
//! piecewise-linear interpolants of joint-plan payoffs over a posterior grid
//! (continuity is what the composite machinery needs; the hull of the
//! interpolants may under-approximate the full equilibrium set off-grid), the
//! composite solver runs on the built tree, zero-probability classes receive
//! the conditional induced by Player One's strategy alone, and an independent
//! verifier re-checks deviations, conditionals, hull membership, and
//! individual rationality.

use std::collections::HashMap;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{default_grid_m, individually_rational_p1};
use crate::neyman::plans::{
    continuation_payoffs, joint_plan_search, GameData, PlanObjective, PlanSearchOptions,
};
use crate::neyman::{build_neyman_tree, NeymanGameSpec, NeymanTree};
use crate::simplex::{sample_simplex, simplex_grid, SimplexPoint};
use crate::tree::continuation::{ClassContinuation, ContinuationSystem, Selection};
use crate::tree::solve::{
    deviation_certificate, proper_vector_from_nu, solve_composite, CompositeConfig,
    CompositeSolution,
};
use crate::tree::OutcomeDistribution;

#[derive(Clone, Debug)]
pub struct NeymanConfig {
    /// Subdivisions of the posterior grid carrying the interpolated
    /// continuation selections.
    pub selection_grid_m: usize,
    /// Grid used for individual-rationality checks and the defended-value
    /// envelope; zero picks a density from the state count.
    pub ir_grid_m: usize,
    pub plan_opts: PlanSearchOptions,
    pub composite: CompositeConfig,
    /// Tolerance on deviation gains and IR margins in verification.
    pub verify_tol: f64,
    /// Tolerance on the conditional-independence check.
    pub star_tol: f64,
    /// Tolerance on hull membership of assigned continuation values.
    pub member_tol: f64,
    pub seed: u64,
}

impl Default for NeymanConfig {
    fn default() -> Self {
        NeymanConfig {
            selection_grid_m: 200,
            ir_grid_m: 0,
            plan_opts: PlanSearchOptions::default(),
            composite: CompositeConfig::default(),
            verify_tol: 1e-4,
            star_tol: 1e-10,
            member_tol: 1e-6,
            seed: 17,
        }
    }
}

/// Piecewise-linear interpolation of per-grid payoff vectors over the
/// posterior simplex (exact 1-D interpolation for two states, triangulated
/// barycentric interpolation for three).
pub struct GridSelection {
    k: usize,
    m: usize,
    /// Value vector (2k entries, state-major: state * 2 + player) per grid
    /// point, in `simplex_grid(k, m)` order.
    values: Vec<Vec<f64>>,
    index: HashMap<Vec<i64>, usize>,
}

impl GridSelection {
    pub fn new(k: usize, m: usize, values: Vec<Vec<f64>>) -> Result<Self> {
        let grid = simplex_grid(k, m);
        if values.len() != grid.len() {
            return Err(Error::Dimension("one value vector per grid point".into()));
        }
        let index = grid
            .iter()
            .enumerate()
            .map(|(i, p)| {
                (
                    p.iter().map(|v| (v * m as f64).round() as i64).collect(),
                    i,
                )
            })
            .collect();
        Ok(GridSelection {
            k,
            m,
            values,
            index,
        })
    }

    fn at_counts(&self, counts: &[i64]) -> &[f64] {
        &self.values[self.index[counts]]
    }
}

impl Selection for GridSelection {
    fn eval(&self, conditional: &[f64]) -> Result<Vec<f64>> {
        if conditional.len() != self.k {
            return Err(Error::Dimension("conditional has wrong length".into()));
        }
        let m = self.m as f64;
        match self.k {
            1 => Ok(self.values[0].clone()),
            2 => {
                let u = (conditional[0] * m).clamp(0.0, m);
                let i = (u.floor() as i64).min(self.m as i64 - 1);
                let frac = u - i as f64;
                let lo = self.at_counts(&[i, self.m as i64 - i]);
                let hi = self.at_counts(&[i + 1, self.m as i64 - i - 1]);
                Ok(lo
                    .iter()
                    .zip(hi)
                    .map(|(a, b)| a + frac * (b - a))
                    .collect())
            }
            3 => {
                let u0 = (conditional[0] * m).clamp(0.0, m);
                let u1 = (conditional[1] * m).clamp(0.0, m);
                let mut i = (u0.floor() as i64).min(self.m as i64 - 1);
                let mut j = (u1.floor() as i64).min(self.m as i64 - 1);
                if i + j >= self.m as i64 {
                    // clamp into the triangle
                    let over = i + j - self.m as i64 + 1;
                    if i >= j {
                        i -= over;
                    } else {
                        j -= over;
                    }
                }
                let r0 = u0 - i as f64;
                let r1 = u1 - j as f64;
                let mtot = self.m as i64;
                let (verts, wts) = if r0 + r1 <= 1.0 {
                    (
                        [
                            vec![i, j, mtot - i - j],
                            vec![i + 1, j, mtot - i - j - 1],
                            vec![i, j + 1, mtot - i - j - 1],
                        ],
                        [1.0 - r0 - r1, r0, r1],
                    )
                } else {
                    (
                        [
                            vec![i + 1, j + 1, mtot - i - j - 2],
                            vec![i, j + 1, mtot - i - j - 1],
                            vec![i + 1, j, mtot - i - j - 1],
                        ],
                        [r0 + r1 - 1.0, 1.0 - r0, 1.0 - r1],
                    )
                };
                let d = self.values[0].len();
                let mut out = vec![0.0; d];
                for (v, w) in verts.iter().zip(wts) {
                    let vals = self.at_counts(v);
                    for (o, x) in out.iter_mut().zip(vals) {
                        *o += w * x;
                    }
                }
                Ok(out)
            }
            _ => Err(Error::InvalidInput(
                "grid selections support at most three states".into(),
            )),
        }
    }
}

/// A finished pipeline run: everything verification needs.
pub struct NeymanRun {
    pub spec: NeymanGameSpec,
    pub nt: NeymanTree,
    pub data: GameData,
    pub cont: ContinuationSystem,
    pub solution: CompositeSolution,
    pub cfg: NeymanConfig,
}

/// Builds the tree, constructs interpolated continuation selections from the
/// plan recipes, solves the composite game, and reassigns zero-probability
/// conditionals from Player One's strategy alone.
pub fn solve_neyman(spec: &NeymanGameSpec, cfg: &NeymanConfig) -> Result<NeymanRun> {
    let k = spec.states();
    if k > 3 {
        return Err(Error::InvalidInput(
            "the pipeline supports at most three states".into(),
        ));
    }
    let ir_grid = if cfg.ir_grid_m == 0 {
        default_grid_m(k)
    } else {
        cfg.ir_grid_m
    };
    let data = GameData::new(spec.mats.clone(), ir_grid)?;
    let nt = build_neyman_tree(spec)?;

    // one value vector per grid point per recipe; a recipe survives only if
    // it is feasible on the whole grid, which keeps its interpolant a
    // genuine continuous selection
    let sel_m = cfg.selection_grid_m;
    let grid = simplex_grid(k, sel_m);
    let mut recipe_values: Vec<Vec<Vec<f64>>> = vec![Vec::new(); 2];
    let mut recipe_alive = [true, true];
    let nr_opts = PlanSearchOptions {
        posterior_grid_m: 0,
        want: 2,
        ..cfg.plan_opts.clone()
    };
    for p in &grid {
        let plans = joint_plan_search(p, &data, &nr_opts)?;
        for (r, _objective) in [PlanObjective::FavorTwo, PlanObjective::FavorOne]
            .iter()
            .enumerate()
        {
            if !recipe_alive[r] {
                continue;
            }
            match plans.get(r) {
                Some(plan) => {
                    let pt = plan.payoff_point(&data.mats)?;
                    let mut v = Vec::with_capacity(2 * k);
                    for s in 0..k {
                        v.push(pt.p1[s]);
                        v.push(pt.p2[s]);
                    }
                    recipe_values[r].push(v);
                }
                None => recipe_alive[r] = false,
            }
        }
        if !recipe_alive.iter().any(|a| *a) {
            break;
        }
    }
    let mut selections: Vec<Arc<dyn Selection>> = Vec::new();
    let mut bound: f64 = 1.0;
    for (r, alive) in recipe_alive.iter().enumerate() {
        if *alive && recipe_values[r].len() == grid.len() {
            for v in &recipe_values[r] {
                for x in v {
                    bound = bound.max(x.abs() + 1.0);
                }
            }
            selections.push(Arc::new(GridSelection::new(
                k,
                sel_m,
                recipe_values[r].clone(),
            )?));
        }
    }
    if selections.is_empty() {
        return Err(Error::ContinuationUnavailable(
            "no plan recipe is feasible across the posterior grid".into(),
        ));
    }
    let cont = ContinuationSystem::new(
        nt.q
            .classes
            .iter()
            .map(|_| ClassContinuation {
                selections: selections.clone(),
                bound,
            })
            .collect(),
    );

    let mut solution = solve_composite(&nt.tree, &cont, &nt.g, &cfg.composite)?;
    reassign_unreached_conditionals(&nt, &cont, &mut solution)?;
    Ok(NeymanRun {
        spec: spec.clone(),
        nt,
        data,
        cont,
        solution,
        cfg: cfg.clone(),
    })
}

/// For classes unreached under the solved profile, the conditional on the
/// class is already pinned down by Player One's strategy together with any
/// Player Two strategy reaching it; assign the selection value there.
fn reassign_unreached_conditionals(
    nt: &NeymanTree,
    cont: &ContinuationSystem,
    solution: &mut CompositeSolution,
) -> Result<()> {
    let tree = &nt.tree;
    let players = tree.players();
    let tables = tree.outcome_tables();
    let x = solution.proper.profile.clone();
    let probe = x.with_block(
        1,
        SimplexPoint::barycenter(tree.num_pure_strategies(1)),
    );
    let probe_dist = OutcomeDistribution::compute(&tables, &probe);
    let probe_conds = probe_dist.conditionals(&nt.q);
    let dist = OutcomeDistribution::compute(&tables, &x);
    let conds = dist.conditionals(&nt.q);
    let mut nu = solution.proper.nu.clone();
    let mut changed = false;
    for (c, members) in nt.q.classes.iter().enumerate() {
        if conds[c].is_none() {
            if let Some(cond) = &probe_conds[c] {
                let vals = cont.classes[c].selections[0].eval(cond)?;
                for (local, &e) in members.iter().enumerate() {
                    for n in 0..players {
                        nu[e * players + n] = vals[local * players + n];
                    }
                }
                solution.conditionals[c] = Some(cond.clone());
                changed = true;
            }
        }
    }
    if changed {
        let pv = proper_vector_from_nu(tree, &tables, &dist, &nt.g, x, nu)?;
        solution.certificate = deviation_certificate(&pv, tree, 1e-6);
        solution.proper = pv;
    }
    Ok(())
}

/// The four verification flags of a solved run.
#[derive(Clone, Debug, Serialize)]
pub struct NeymanVerification {
    /// Largest shortfall of a supported pure strategy from its player's best
    /// composite value.
    pub deviation_gain: f64,
    pub flag_deviations: bool,
    /// Largest disagreement of class conditionals across Player Two
    /// perturbations.
    pub star_diff: f64,
    pub flag_star: bool,
    /// Worst hull-membership distance of assigned continuation values at
    /// freshly recomputed plan hulls.
    pub membership_worst: f64,
    pub flag_membership: bool,
    /// Smallest individual-rationality margin of the assigned Player One
    /// continuation vectors.
    pub ir_margin: f64,
    pub flag_ir: bool,
    pub pass: bool,
    pub details: Vec<String>,
}

pub fn verify_neyman_equilibrium(run: &NeymanRun) -> Result<NeymanVerification> {
    let tree = &run.nt.tree;
    let players = tree.players();
    let cfg = &run.cfg;
    let mut details = Vec::new();

    // (i) deviation gains for both players from the proper vector
    let deviation_gain = deviation_certificate(&run.solution.proper, tree, 1e-6);
    let flag_deviations = deviation_gain <= cfg.verify_tol;
    details.push(format!("deviation gain {deviation_gain:.3e}"));

    // (ii) conditionals do not depend on Player Two's strategy
    let tables = tree.outcome_tables();
    let mut star_diff: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let s2 = tree.num_pure_strategies(1);
    for _ in 0..4 {
        let tau_a = sample_simplex(s2, &mut rng);
        let tau_b = sample_simplex(s2, &mut rng);
        let xa = run.solution.proper.profile.with_block(1, tau_a);
        let xb = run.solution.proper.profile.with_block(1, tau_b);
        let ca = OutcomeDistribution::compute(&tables, &xa).conditionals(&run.nt.q);
        let cb = OutcomeDistribution::compute(&tables, &xb).conditionals(&run.nt.q);
        for (a, b) in ca.iter().zip(&cb) {
            if let (Some(a), Some(b)) = (a, b) {
                for (x, y) in a.iter().zip(b) {
                    star_diff = star_diff.max((x - y).abs());
                }
            }
        }
    }
    let flag_star = star_diff <= cfg.star_tol;
    details.push(format!("conditional independence gap {star_diff:.3e}"));

    // (iii) hull membership of assigned continuation blocks at fresh hulls
    let mut membership_worst: f64 = 0.0;
    for (c, members) in run.nt.q.classes.iter().enumerate() {
        let cond = match &run.solution.conditionals[c] {
            Some(cond) => cond.clone(),
            None => SimplexPoint::barycenter(members.len()).coords().to_vec(),
        };
        let hull = continuation_payoffs(&cond, &run.data, &cfg.plan_opts)?;
        let k = members.len();
        let mut target = vec![0.0; 2 * k];
        for (local, &e) in members.iter().enumerate() {
            target[local] = run.solution.proper.nu[e * players];
            target[k + local] = run.solution.proper.nu[e * players + 1];
        }
        let d = hull.membership_distance(&target)?;
        membership_worst = membership_worst.max(d);
    }
    let flag_membership = membership_worst <= cfg.member_tol;
    details.push(format!("hull membership distance {membership_worst:.3e}"));

    // (iv) the Player One part of every assigned continuation is IR
    let mut ir_margin = f64::INFINITY;
    for members in &run.nt.q.classes {
        let yvec: Vec<f64> = members
            .iter()
            .map(|&e| run.solution.proper.nu[e * players])
            .collect();
        let rep = individually_rational_p1(&yvec, &run.spec.mats, run.data.grid_m, cfg.verify_tol)?;
        ir_margin = ir_margin.min(rep.margin);
    }
    let flag_ir = ir_margin >= -cfg.verify_tol;
    details.push(format!("IR margin {ir_margin:.3e}"));

    Ok(NeymanVerification {
        deviation_gain,
        flag_deviations,
        star_diff,
        flag_star,
        membership_worst,
        flag_membership,
        ir_margin,
        flag_ir,
        pass: flag_deviations && flag_star && flag_membership && flag_ir,
        details,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Mat;
    use crate::matrix::StateMatrices;

    fn motivating_spec() -> NeymanGameSpec {
        let a1 = Mat::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let a2 = Mat::from_rows(&[vec![0.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let b = Mat::from_rows(&[vec![3.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let mats = StateMatrices::new(vec![a1, a2], vec![b.clone(), b]).unwrap();
        NeymanGameSpec::new(mats, vec![0.5, 0.5], vec![1.0 / 3.0], vec![1.0 / 3.0]).unwrap()
    }

    fn fast_cfg() -> NeymanConfig {
        NeymanConfig {
            selection_grid_m: 64,
            ir_grid_m: 40,
            ..NeymanConfig::default()
        }
    }

    #[test]
    fn grid_selection_interpolates() {
        // linear data reproduced exactly
        let m = 4;
        let grid = simplex_grid(2, m);
        let values: Vec<Vec<f64>> = grid
            .iter()
            .map(|p| vec![2.0 * p[0] - 1.0, 0.5 * p[1], 0.0, 1.0])
            .collect();
        let sel = GridSelection::new(2, m, values).unwrap();
        for t in [0.0, 0.13, 0.5, 0.77, 1.0] {
            let v = sel.eval(&[t, 1.0 - t]).unwrap();
            assert!((v[0] - (2.0 * t - 1.0)).abs() < 1e-12);
            assert!((v[1] - 0.5 * (1.0 - t)).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_selection_three_states_continuous() {
        let m = 6;
        let grid = simplex_grid(3, m);
        let values: Vec<Vec<f64>> = grid.iter().map(|p| vec![p[0] + 2.0 * p[2]]).collect();
        let sel = GridSelection::new(3, m, values).unwrap();
        // linear function reproduced everywhere
        for p in [[0.2, 0.3, 0.5], [0.0, 0.0, 1.0], [0.31, 0.44, 0.25]] {
            let v = sel.eval(&p).unwrap();
            assert!((v[0] - (p[0] + 2.0 * p[2])).abs() < 1e-10, "at {p:?}: {v:?}");
        }
    }

    #[test]
    fn solves_and_verifies_motivating_instance() {
        let spec = motivating_spec();
        let run = solve_neyman(&spec, &fast_cfg()).unwrap();
        assert!(run.solution.certificate <= run.cfg.composite.certificate_tol);
        let ver = verify_neyman_equilibrium(&run).unwrap();
        assert!(ver.pass, "{:?}", ver);
    }

    #[test]
    fn one_state_reduces_to_one_shot_composition() {
        // single state: the composite is an ordinary weighted one-shot game
        // plus a constant continuation
        let a = Mat::from_rows(&[vec![3.0, 0.0], vec![5.0, 1.0]]).unwrap();
        let b = Mat::from_rows(&[vec![3.0, 5.0], vec![0.0, 1.0]]).unwrap();
        let mats = StateMatrices::new(vec![a], vec![b]).unwrap();
        let spec = NeymanGameSpec::new(mats, vec![1.0], vec![0.25], vec![0.25]).unwrap();
        let run = solve_neyman(&spec, &fast_cfg()).unwrap();
        let ver = verify_neyman_equilibrium(&run).unwrap();
        assert!(ver.pass, "{:?}", ver);
        // defection dominates stage-wise and the continuation is constant:
        // the equilibrium plays (defect, defect)
        let x = &run.solution.proper.profile;
        assert!((x.prob(0, 1) - 1.0).abs() < 1e-3, "{:?}", x);
        assert!((x.prob(1, 1) - 1.0).abs() < 1e-3, "{:?}", x);
    }

    #[test]
    fn zero_lambda_collapses_to_continuation_choice() {
        // no truncated weight: stage payoffs vanish and any profile paired
        // with the right continuation is myopic
        let spec = motivating_spec();
        let zero = NeymanGameSpec::new(
            spec.mats.clone(),
            spec.p0.clone(),
            vec![0.0],
            vec![0.0],
        )
        .unwrap();
        let run = solve_neyman(&zero, &fast_cfg()).unwrap();
        assert!(run.solution.certificate <= run.cfg.composite.certificate_tol);
    }
}
