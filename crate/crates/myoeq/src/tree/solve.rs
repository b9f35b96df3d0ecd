//! Composite solving over truncated trees.
//!
//! For each epsilon of a decreasing schedule, the composite payoff family
//! blends the continuation selection at the induced conditional with a
//! dominating penalty value 2B on classes of probability below epsilon, and a
//! myopic equilibrium of the blended family is computed. Two consecutive
//! solutions agreeing in profile and payoff form a cluster; the cluster is
//! assembled into a proper vector whose continuation entries come from the
//! selections at the limit conditionals, from the last on-path values for
//! classes that lost their probability along the way, or from the first
//! selection at the class barycenter if the class was never reached.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::myopic::{solve_myopic_seeded, PayoffFamily, SolverConfig};
use crate::profile::{Layout, MixedProfile};
use crate::simplex::SimplexPoint;
use crate::tree::continuation::{ContinuationSystem, GWrapper};
use crate::tree::{CommonKnowledge, OutcomeDistribution, OutcomeTables, TruncatedGameTree};

/// Which continuous selection drives the perturbed solve, per class.
#[derive(Clone, Debug, Default)]
pub enum Selector {
    /// First selection of every class.
    #[default]
    First,
    /// Explicit selection index per class.
    PerClass(Vec<usize>),
}

impl Selector {
    fn index(&self, class: usize) -> usize {
        match self {
            Selector::First => 0,
            Selector::PerClass(v) => v[class],
        }
    }
}

/// The blended composite family at one epsilon.
pub struct EpsilonFamily<'a> {
    tree: &'a TruncatedGameTree,
    tables: &'a OutcomeTables,
    q: &'a CommonKnowledge,
    cont: &'a ContinuationSystem,
    g: &'a [GWrapper],
    selector: &'a Selector,
    epsilon: f64,
    two_b: f64,
    layout: Layout,
}

/// Builds the perturbed family for one epsilon. `g` is indexed endpoint-major:
/// `endpoint * players + player`.
pub fn epsilon_payoff_family<'a>(
    tree: &'a TruncatedGameTree,
    tables: &'a OutcomeTables,
    q: &'a CommonKnowledge,
    cont: &'a ContinuationSystem,
    g: &'a [GWrapper],
    epsilon: f64,
    selector: &'a Selector,
) -> Result<EpsilonFamily<'a>> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidInput(format!("epsilon must be positive, got {epsilon}")));
    }
    if g.len() != tree.endpoints().len() * tree.players() {
        return Err(Error::Dimension(format!(
            "need one wrapper per endpoint and player: {} vs {}",
            g.len(),
            tree.endpoints().len() * tree.players()
        )));
    }
    let layout = tree.strategy_layout()?;
    let two_b = 2.0 * cont.global_bound();
    Ok(EpsilonFamily {
        tree,
        tables,
        q,
        cont,
        g,
        selector,
        epsilon,
        two_b,
        layout,
    })
}

impl EpsilonFamily<'_> {
    /// Per-endpoint, per-player wrapped continuation values at profile x.
    fn endpoint_values(&self, x: &MixedProfile) -> Result<(Vec<f64>, OutcomeDistribution)> {
        let players = self.tree.players();
        let ne = self.tree.endpoints().len();
        let dist = OutcomeDistribution::compute(self.tables, x);
        let class_probs = dist.class_probs(self.q);
        let conditionals = dist.conditionals(self.q);
        let mut f_en = vec![0.0; ne * players];
        for (c, members) in self.q.classes.iter().enumerate() {
            let p_c = class_probs[c];
            if p_c > 0.0 {
                let lambda = if p_c >= self.epsilon { 1.0 } else { p_c / self.epsilon };
                let cond = conditionals[c].as_ref().unwrap();
                let sel = &self.cont.classes[c].selections[self.selector.index(c)];
                let vals = sel.eval(cond)?;
                for (local, &e) in members.iter().enumerate() {
                    for n in 0..players {
                        let nu = lambda * vals[local * players + n] + (1.0 - lambda) * self.two_b;
                        f_en[e * players + n] = self.g[e * players + n].eval(nu);
                    }
                }
            } else {
                for &e in members {
                    for n in 0..players {
                        f_en[e * players + n] = self.g[e * players + n].eval(self.two_b);
                    }
                }
            }
        }
        Ok((f_en, dist))
    }
}

impl PayoffFamily for EpsilonFamily<'_> {
    fn layout(&self) -> &Layout {
        &self.layout
    }

    fn eval_into(&self, x: &MixedProfile, out: &mut [f64]) -> Result<()> {
        let players = self.tree.players();
        let (f_en, dist) = self.endpoint_values(x)?;
        for n in 0..players {
            for s in 0..self.layout.actions(n) {
                let p_rep = dist.replaced(self.tables, n, s);
                let v: f64 = p_rep
                    .iter()
                    .enumerate()
                    .map(|(e, &pe)| pe * f_en[e * players + n])
                    .sum();
                out[self.layout.flat_index(n, s)] = v;
            }
        }
        Ok(())
    }
}

/// A profile with consistent per-strategy values and a continuation vector
/// whose on-path blocks lie in the correspondence at the induced conditional.
#[derive(Clone, Debug, Serialize)]
pub struct ProperVector {
    pub profile: MixedProfile,
    /// Value per (player, pure strategy), in strategy-layout order.
    pub y: Vec<f64>,
    /// Continuation value per (endpoint, player), endpoint-major.
    pub nu: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompositeSolution {
    pub proper: ProperVector,
    /// Largest shortfall of a supported pure strategy from its player's best
    /// value; the equilibrium certificate.
    pub certificate: f64,
    pub class_probs: Vec<f64>,
    /// Conditional used per class, when one was defined or reconstructed.
    pub conditionals: Vec<Option<Vec<f64>>>,
    /// Epsilons actually solved before the cluster was accepted.
    pub epsilons_used: Vec<f64>,
    pub trace: String,
}

#[derive(Clone, Debug)]
pub struct CompositeConfig {
    /// Decreasing epsilon schedule.
    pub schedule: Vec<f64>,
    /// Two consecutive limit candidates within this distance (profile and
    /// per-strategy values) form a cluster.
    pub cluster_tol: f64,
    /// Acceptance threshold for the deviation certificate.
    pub certificate_tol: f64,
    /// Pure strategies above this probability count as supported.
    pub support_tol: f64,
    /// Strategy weights below `snap_factor * epsilon` are treated as
    /// vanishing along the sequence and dropped from the limit candidate.
    pub snap_factor: f64,
    pub solver: SolverConfig,
}

impl Default for CompositeConfig {
    fn default() -> Self {
        CompositeConfig {
            schedule: (3..=12).map(|k| 0.5_f64.powi(k)).collect(),
            cluster_tol: 1e-4,
            certificate_tol: 1e-4,
            support_tol: 1e-6,
            snap_factor: 6.0,
            solver: SolverConfig {
                mesh: 2,
                restarts: 16,
                ..SolverConfig::default()
            },
        }
    }
}

/// Drops coordinates at or below `tol` and renormalizes each block: the
/// numerical limit of a family of solutions whose dust decays with epsilon.
fn snap_profile(x: &MixedProfile, tol: f64) -> Result<MixedProfile> {
    let layout = x.layout()?;
    let mut blocks = Vec::with_capacity(layout.players());
    for n in 0..layout.players() {
        let mut coords: Vec<f64> = x.block(n).coords().to_vec();
        for c in coords.iter_mut() {
            if *c <= tol {
                *c = 0.0;
            }
        }
        let mass: f64 = coords.iter().sum();
        if mass <= 0.0 {
            return Err(Error::Numeric("snap emptied a strategy block".into()));
        }
        for c in coords.iter_mut() {
            *c /= mass;
        }
        blocks.push(SimplexPoint::new_unchecked(coords));
    }
    Ok(MixedProfile::new(blocks))
}

/// Solves the composite game attached to a truncated tree. Warns (does not
/// block) when some player lacks perfect recall.
pub fn solve_composite(
    tree: &TruncatedGameTree,
    cont: &ContinuationSystem,
    g: &[GWrapper],
    cfg: &CompositeConfig,
) -> Result<CompositeSolution> {
    let validation = tree.validate();
    if !validation.is_valid() {
        return Err(Error::InvalidInput(format!(
            "tree fails validation: {}",
            validation.issues.join("; ")
        )));
    }
    let mut warnings = Vec::new();
    for n in 0..tree.players() {
        let rec = tree.check_perfect_recall(n);
        if !rec.ok {
            warnings.push(format!(
                "player {} lacks perfect recall ({})",
                n + 1,
                rec.counterexample.unwrap_or_default()
            ));
        }
    }
    let q = tree.common_knowledge();
    cont.validate(&q, tree.players())?;
    let bound = cont.global_bound();
    for w in g {
        w.check_increasing(-2.5 * bound, 2.5 * bound, 64)?;
    }
    let tables = tree.outcome_tables();
    let selector = Selector::First;

    let mut warm: Option<MixedProfile> = None;
    let mut prev_limit: Option<(MixedProfile, Vec<f64>)> = None;
    let mut recorded: Vec<Option<Vec<f64>>> = vec![None; q.classes.len()];
    let mut epsilons_used = Vec::new();
    let mut best_cert: Option<(f64, CompositeSolution)> = None;

    for &eps in &cfg.schedule {
        let fam = epsilon_payoff_family(tree, &tables, &q, cont, g, eps, &selector)?;
        let extra: Vec<MixedProfile> = warm.iter().cloned().collect();
        let reports = match solve_myopic_seeded(&fam, &cfg.solver, &extra) {
            Ok(r) => r,
            Err(Error::BudgetExhausted { .. }) => continue,
            Err(e) => return Err(e),
        };
        // prefer the solution nearest the previous epsilon's, for clustering
        let pick = match &warm {
            Some(px) => reports
                .iter()
                .min_by(|a, b| {
                    a.profile
                        .dist_inf(px)
                        .partial_cmp(&b.profile.dist_inf(px))
                        .unwrap()
                })
                .unwrap(),
            None => &reports[0],
        };
        let x = pick.profile.clone();
        epsilons_used.push(eps);
        warm = Some(x.clone());

        // remember on-path selection values for the zero-probability rule
        let dist = OutcomeDistribution::compute(&tables, &x);
        let conds = dist.conditionals(&q);
        for (c, cond) in conds.iter().enumerate() {
            if let Some(cond) = cond {
                let sel = &cont.classes[c].selections[selector.index(c)];
                recorded[c] = Some(sel.eval(cond)?);
            }
        }

        // limit candidate: strategy weights vanishing at the rate of epsilon
        // are dust accumulated by the penalty mechanism, not support; the
        // snap picks the limit face
        let snapped = match snap_profile(&x, cfg.snap_factor * eps) {
            Ok(s) => s,
            Err(_) => x.clone(),
        };
        // pin the limit point on that face: supported strategies of the
        // snapped profile never meet the penalty branch, so the tie system of
        // the near-zero-epsilon family is the unperturbed composite
        let limit_x = {
            let limit_fam =
                epsilon_payoff_family(tree, &tables, &q, cont, g, 1e-9, &selector)?;
            match crate::myopic::refine_support(&limit_fam, &snapped, 1e-7, &cfg.solver) {
                Ok(Some((px, _))) if px.dist_inf(&snapped) < 0.2 => px,
                _ => snapped,
            }
        };
        let sol = assemble(
            tree,
            &tables,
            &q,
            cont,
            g,
            &selector,
            &recorded,
            limit_x.clone(),
            &epsilons_used,
            &warnings,
        )?;
        let clustered = match &prev_limit {
            Some((px, py)) => {
                limit_x.dist_inf(px) <= cfg.cluster_tol
                    && sol
                        .proper
                        .y
                        .iter()
                        .zip(py)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                        <= cfg.cluster_tol
            }
            None => false,
        };
        prev_limit = Some((limit_x, sol.proper.y.clone()));
        if clustered && sol.certificate <= cfg.certificate_tol {
            return Ok(sol);
        }
        if best_cert
            .as_ref()
            .map_or(true, |(c, _)| sol.certificate < *c)
        {
            best_cert = Some((sol.certificate, sol));
        }
    }
    if let Some((c, sol)) = best_cert {
        if c <= cfg.certificate_tol {
            return Ok(sol);
        }
        return Err(Error::BudgetExhausted {
            best_residual: c,
            detail: "clustered but the deviation certificate stayed above tolerance".into(),
        });
    }
    Err(Error::BudgetExhausted {
        best_residual: f64::INFINITY,
        detail: format!(
            "no cluster within the epsilon schedule ({} solves)",
            epsilons_used.len()
        ),
    })
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    tree: &TruncatedGameTree,
    tables: &OutcomeTables,
    q: &CommonKnowledge,
    cont: &ContinuationSystem,
    g: &[GWrapper],
    selector: &Selector,
    recorded: &[Option<Vec<f64>>],
    x: MixedProfile,
    epsilons_used: &[f64],
    warnings: &[String],
) -> Result<CompositeSolution> {
    let players = tree.players();
    let dist = OutcomeDistribution::compute(tables, &x);
    let class_probs = dist.class_probs(q);
    let conds = dist.conditionals(q);
    let mut nu = vec![0.0; tree.endpoints().len() * players];
    let mut used_conds: Vec<Option<Vec<f64>>> = vec![None; q.classes.len()];
    for (c, members) in q.classes.iter().enumerate() {
        let sel = &cont.classes[c].selections[selector.index(c)];
        let values = if let Some(cond) = &conds[c] {
            used_conds[c] = Some(cond.clone());
            sel.eval(cond)?
        } else if let Some(v) = &recorded[c] {
            v.clone()
        } else {
            let bary = SimplexPoint::barycenter(members.len());
            used_conds[c] = Some(bary.coords().to_vec());
            cont.classes[c].selections[0].eval(bary.coords())?
        };
        for (local, &e) in members.iter().enumerate() {
            for n in 0..players {
                nu[e * players + n] = values[local * players + n];
            }
        }
    }
    let pv = proper_vector_from_nu(tree, tables, &dist, g, x, nu)?;
    let certificate = deviation_certificate(&pv, tree, 1e-6);
    Ok(CompositeSolution {
        proper: pv,
        certificate,
        class_probs,
        conditionals: used_conds,
        epsilons_used: epsilons_used.to_vec(),
        trace: if warnings.is_empty() {
            format!("{} epsilon solves", epsilons_used.len())
        } else {
            format!("{} epsilon solves; {}", epsilons_used.len(), warnings.join("; "))
        },
    })
}

/// Builds the proper vector for a given continuation assignment: each pure
/// strategy's value is its endpoint distribution weighted by the wrapped
/// continuation values.
pub fn proper_vector_from_nu(
    tree: &TruncatedGameTree,
    tables: &OutcomeTables,
    dist: &OutcomeDistribution,
    g: &[GWrapper],
    x: MixedProfile,
    nu: Vec<f64>,
) -> Result<ProperVector> {
    let players = tree.players();
    let layout = tree.strategy_layout()?;
    let mut y = vec![0.0; layout.flat_len()];
    for n in 0..players {
        for s in 0..layout.actions(n) {
            let p_rep = dist.replaced(tables, n, s);
            y[layout.flat_index(n, s)] = p_rep
                .iter()
                .enumerate()
                .map(|(e, &pe)| pe * g[e * players + n].eval(nu[e * players + n]))
                .sum();
        }
    }
    Ok(ProperVector { profile: x, y, nu })
}

/// max over players and supported strategies of (best value - own value).
pub fn deviation_certificate(pv: &ProperVector, tree: &TruncatedGameTree, support_tol: f64) -> f64 {
    let layout = tree.strategy_layout().expect("layout");
    let mut worst: f64 = 0.0;
    for n in 0..tree.players() {
        let top = layout
            .block(n)
            .map(|c| pv.y[c])
            .fold(f64::NEG_INFINITY, f64::max);
        for s in 0..layout.actions(n) {
            if pv.profile.prob(n, s) > support_tol {
                worst = worst.max(top - pv.y[layout.flat_index(n, s)]);
            }
        }
    }
    worst
}

/// Re-derives the y-identity of a proper vector and the hull membership of
/// its on-path continuation blocks.
#[derive(Clone, Debug, Serialize)]
pub struct ProperCheck {
    /// Largest mismatch between stored y and its recomputation from nu.
    pub y_identity_error: f64,
    /// Largest hull-membership distance over classes with positive
    /// probability.
    pub hull_distance: f64,
}

pub fn check_proper_vector(
    tree: &TruncatedGameTree,
    cont: &ContinuationSystem,
    g: &[GWrapper],
    pv: &ProperVector,
) -> Result<ProperCheck> {
    let tables = tree.outcome_tables();
    let q = tree.common_knowledge();
    let dist = OutcomeDistribution::compute(&tables, &pv.profile);
    let rebuilt = proper_vector_from_nu(
        tree,
        &tables,
        &dist,
        g,
        pv.profile.clone(),
        pv.nu.clone(),
    )?;
    let y_identity_error = pv
        .y
        .iter()
        .zip(&rebuilt.y)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let conds = dist.conditionals(&q);
    let players = tree.players();
    let mut hull_distance: f64 = 0.0;
    for (c, members) in q.classes.iter().enumerate() {
        if let Some(cond) = &conds[c] {
            let mut block = Vec::with_capacity(members.len() * players);
            for &e in members {
                for n in 0..players {
                    block.push(pv.nu[e * players + n]);
                }
            }
            hull_distance = hull_distance.max(cont.hull_distance(c, cond, &block)?);
        }
    }
    Ok(ProperCheck {
        y_identity_error,
        hull_distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::continuation::{ClassContinuation, ConstantSelection, FnSelection};
    use crate::tree::TreeBuilder;
    use std::sync::Arc;

    /// Two players, one simultaneous move, endpoint classes per action pair.
    fn one_shot_tree() -> TruncatedGameTree {
        let mut b = TreeBuilder::new(2);
        let w1 = b.add_cell(0, "W1", &["a", "b"]);
        let w2 = b.add_cell(1, "W2", &["c", "d"]);
        b.add_decision("root", 0, w1, &["u", "v"]);
        b.add_decision("u", 1, w2, &["e00", "e01"]);
        b.add_decision("v", 1, w2, &["e10", "e11"]);
        for e in ["e00", "e01", "e10", "e11"] {
            b.add_endpoint(e);
        }
        b.set_endpoint_partition(0, &[vec!["e00"], vec!["e01"], vec!["e10"], vec!["e11"]]);
        b.set_endpoint_partition(1, &[vec!["e00"], vec!["e01"], vec!["e10"], vec!["e11"]]);
        b.build().unwrap()
    }

    fn constant_system(per_endpoint: &[(f64, f64)]) -> ContinuationSystem {
        ContinuationSystem::new(
            per_endpoint
                .iter()
                .map(|&(a, b)| ClassContinuation {
                    selections: vec![Arc::new(ConstantSelection {
                        values: vec![a, b],
                    })],
                    bound: 10.0,
                })
                .collect(),
        )
    }

    #[test]
    fn epsilon_family_limits() {
        // prisoner's-dilemma-like constants: second strategy dominates
        let tree = one_shot_tree();
        let q = tree.common_knowledge();
        let tables = tree.outcome_tables();
        let cont = constant_system(&[(3.0, 3.0), (0.0, 5.0), (5.0, 0.0), (1.0, 1.0)]);
        let g: Vec<GWrapper> = (0..8).map(|_| GWrapper::identity()).collect();
        let sel = Selector::First;

        // interior profile keeps every class above epsilon: unperturbed values
        let fam = epsilon_payoff_family(&tree, &tables, &q, &cont, &g, 0.125, &sel).unwrap();
        let x = MixedProfile::barycenter(&tree.strategy_layout().unwrap());
        let vals = fam.eval(&x).unwrap();
        // player 1 pure a: 0.5*3 + 0.5*0 = 1.5 ; pure b: 0.5*5 + 0.5*1 = 3
        assert!((vals[0] - 1.5).abs() < 1e-12);
        assert!((vals[1] - 3.0).abs() < 1e-12);

        // a pure profile zeroes three classes: those get g(2B)
        let x = MixedProfile::new(vec![
            crate::simplex::SimplexPoint::new(vec![1.0, 0.0]).unwrap(),
            crate::simplex::SimplexPoint::new(vec![1.0, 0.0]).unwrap(),
        ]);
        let vals = fam.eval(&x).unwrap();
        // player 1 deviating to b lands in class (b,c) with probability one:
        // the penalty value 2B = 20 dominates
        assert!((vals[1] - 20.0).abs() < 1e-12);

        // halfway case: class probability epsilon/2 blends the values
        let fam = epsilon_payoff_family(&tree, &tables, &q, &cont, &g, 0.5, &sel).unwrap();
        let x = MixedProfile::new(vec![
            crate::simplex::SimplexPoint::new(vec![0.75, 0.25]).unwrap(),
            crate::simplex::SimplexPoint::new(vec![1.0, 0.0]).unwrap(),
        ]);
        // class (b,c) has probability 0.25 = eps/2, lambda = 1/2; its value
        // for player 1 is 5, blended to 0.5*5 + 0.5*20 = 12.5
        let vals = fam.eval(&x).unwrap();
        assert!((vals[1] - 12.5).abs() < 1e-12, "got {}", vals[1]);

        assert!(epsilon_payoff_family(&tree, &tables, &q, &cont, &g, 0.0, &sel).is_err());
    }

    #[test]
    fn constant_correspondence_solves_to_nash() {
        // dominant-strategy constants: equilibrium must be (b, d)
        let tree = one_shot_tree();
        let cont = constant_system(&[(3.0, 3.0), (0.0, 5.0), (5.0, 0.0), (1.0, 1.0)]);
        let g: Vec<GWrapper> = (0..8).map(|_| GWrapper::identity()).collect();
        let cfg = CompositeConfig::default();
        let sol = solve_composite(&tree, &cont, &g, &cfg).unwrap();
        assert!(sol.certificate <= cfg.certificate_tol);
        assert!((sol.proper.profile.prob(0, 1) - 1.0).abs() < 1e-4);
        assert!((sol.proper.profile.prob(1, 1) - 1.0).abs() < 1e-4);
        // zero-probability classes carry their constant selection values
        let check = check_proper_vector(&tree, &cont, &g, &sol.proper).unwrap();
        assert!(check.y_identity_error < 1e-12);
        assert!(check.hull_distance < 1e-9);
    }

    #[test]
    fn single_class_identity_reduces_to_plain_myopic() {
        // both players pooled into one endpoint class, one selection that
        // depends on the conditional
        let mut b = TreeBuilder::new(2);
        let w1 = b.add_cell(0, "W1", &["a", "b"]);
        let w2 = b.add_cell(1, "W2", &["c", "d"]);
        b.add_decision("root", 0, w1, &["u", "v"]);
        b.add_decision("u", 1, w2, &["e00", "e01"]);
        b.add_decision("v", 1, w2, &["e10", "e11"]);
        for e in ["e00", "e01", "e10", "e11"] {
            b.add_endpoint(e);
        }
        let all = vec!["e00", "e01", "e10", "e11"];
        b.set_endpoint_partition(0, &[all.clone()]);
        b.set_endpoint_partition(1, &[all]);
        let tree = b.build().unwrap();
        let q = tree.common_knowledge();
        assert_eq!(q.classes.len(), 1);

        // selection paying each endpoint its own conditional mass
        let sel = FnSelection(|cond: &[f64]| {
            let mut out = Vec::with_capacity(cond.len() * 2);
            for &c in cond {
                out.push(c);
                out.push(1.0 - c);
            }
            Ok(out)
        });
        let cont = ContinuationSystem::new(vec![ClassContinuation {
            selections: vec![Arc::new(sel)],
            bound: 3.0,
        }]);
        let g: Vec<GWrapper> = (0..8).map(|_| GWrapper::identity()).collect();
        let cfg = CompositeConfig::default();
        let sol = solve_composite(&tree, &cont, &g, &cfg).unwrap();
        assert!(sol.certificate <= cfg.certificate_tol);

        // the composite family at the solution agrees with a direct myopic
        // residual on the induced family
        let tables = tree.outcome_tables();
        let selr = Selector::First;
        let fam =
            epsilon_payoff_family(&tree, &tables, &q, &cont, &g, 1e-9, &selr).unwrap();
        let r = crate::myopic::equilibrium_residual(&sol.proper.profile, &fam, 1e-6).unwrap();
        assert!(r <= 2.0 * cfg.certificate_tol, "residual {r}");
    }
}
