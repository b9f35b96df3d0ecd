//! Finitely many weighted stages of a two-player stochastic-state stage game
//! followed by an undiscounted repeated game with incomplete information on
//! one side. The state is drawn once, shown only to Player One, and the
//! truncated tree covers the weighted stages; continuation payoffs come from
//! joint-plan equilibria of the repeated game at the induced posterior.

pub mod plans;
pub mod solve;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::StateMatrices;
use crate::tree::continuation::GWrapper;
use crate::tree::{CommonKnowledge, TreeBuilder, TruncatedGameTree};

/// Specification of the weighted-stage game.
#[derive(Clone, Debug, Serialize)]
pub struct NeymanGameSpec {
    pub mats: StateMatrices,
    pub p0: Vec<f64>,
    /// Per-stage weights of Player One; the repeated game gets 1 - sum.
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
    pub stages: usize,
}

impl NeymanGameSpec {
    pub fn new(
        mats: StateMatrices,
        p0: Vec<f64>,
        lambda1: Vec<f64>,
        lambda2: Vec<f64>,
    ) -> Result<Self> {
        if p0.len() != mats.states() {
            return Err(Error::Dimension("prior length must match state count".into()));
        }
        if p0.iter().any(|p| *p < 0.0) || (p0.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput("prior must be a distribution".into()));
        }
        let stages = lambda1.len();
        if stages == 0 {
            return Err(Error::Config(
                "at least one weighted stage is required (zero stages reduce to the plain repeated game)".into(),
            ));
        }
        if lambda2.len() != stages {
            return Err(Error::Dimension(
                "both players need one weight per stage".into(),
            ));
        }
        for (name, l) in [("lambda1", &lambda1), ("lambda2", &lambda2)] {
            if l.iter().any(|v| *v < 0.0 || !v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} weights must be nonnegative")));
            }
            let total: f64 = l.iter().sum();
            if total >= 1.0 {
                return Err(Error::InvalidInput(format!(
                    "{name} weights sum to {total}, must stay below 1"
                )));
            }
        }
        Ok(NeymanGameSpec {
            mats,
            p0,
            lambda1,
            lambda2,
            stages,
        })
    }

    pub fn states(&self) -> usize {
        self.mats.states()
    }

    /// Total truncated weight of one player (0-indexed).
    pub fn lambda_total(&self, player: usize) -> f64 {
        match player {
            0 => self.lambda1.iter().sum(),
            _ => self.lambda2.iter().sum(),
        }
    }
}

/// The built truncated tree plus the endpoint bookkeeping the pipeline needs.
pub struct NeymanTree {
    pub tree: TruncatedGameTree,
    /// Wrapper per (endpoint, player), endpoint-major.
    pub g: Vec<GWrapper>,
    pub q: CommonKnowledge,
    /// State index of every endpoint.
    pub endpoint_state: Vec<usize>,
    /// Full action history (i_l, j_l) of every endpoint.
    pub endpoint_history: Vec<Vec<(usize, usize)>>,
    /// Local endpoint order within every class is ascending in the state, so
    /// class conditionals read directly as distributions over states.
    pub class_history: Vec<Vec<(usize, usize)>>,
}

/// Builds the alternating-level truncated tree: a chance root drawing the
/// state, then per stage one fully informed move of Player One followed by
/// one history-only-informed move of Player Two.
pub fn build_neyman_tree(spec: &NeymanGameSpec) -> Result<NeymanTree> {
    let k = spec.states();
    let rows = spec.mats.n_rows();
    let cols = spec.mats.n_cols();
    let n = spec.stages;

    let mut b = TreeBuilder::new(2);
    let row_actions: Vec<String> = (0..rows).map(|i| format!("i{i}")).collect();
    let col_actions: Vec<String> = (0..cols).map(|j| format!("j{j}")).collect();
    let row_refs: Vec<&str> = row_actions.iter().map(|s| s.as_str()).collect();
    let col_refs: Vec<&str> = col_actions.iter().map(|s| s.as_str()).collect();

    // histories of length m in lexicographic order
    let histories = |m: usize| -> Vec<Vec<(usize, usize)>> {
        let mut out: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
        for _ in 0..m {
            let mut next = Vec::new();
            for h in &out {
                for i in 0..rows {
                    for j in 0..cols {
                        let mut h2 = h.clone();
                        h2.push((i, j));
                        next.push(h2);
                    }
                }
            }
            out = next;
        }
        out
    };
    let hist_label = |h: &[(usize, usize)]| -> String {
        if h.is_empty() {
            "-".to_string()
        } else {
            h.iter()
                .map(|(i, j)| format!("i{i}j{j}"))
                .collect::<Vec<_>>()
                .join(".")
        }
    };

    // cells: Player One one singleton cell per (stage, state, history);
    // Player Two one cell per (stage, history)
    let mut p1_cell = std::collections::HashMap::new();
    let mut p2_cell = std::collections::HashMap::new();
    for m in 0..n {
        for h in histories(m) {
            let hl = hist_label(&h);
            for state in 0..k {
                let id = b.add_cell(0, &format!("p1:s{m}:k{state}:{hl}"), &row_refs);
                p1_cell.insert((m, state, hl.clone()), id);
            }
            let id = b.add_cell(1, &format!("p2:s{m}:{hl}"), &col_refs);
            p2_cell.insert((m, hl), id);
        }
    }

    let p1_label = |state: usize, h: &[(usize, usize)]| format!("v1:k{state}:{}", hist_label(h));
    let p2_label = |state: usize, h: &[(usize, usize)], i: usize| {
        format!("v2:k{state}:{}:i{i}", hist_label(h))
    };
    let e_label = |state: usize, h: &[(usize, usize)]| format!("e:k{state}:{}", hist_label(h));

    // root chance over states; with a single state the draw is degenerate
    // and Player One's first node is the root itself
    if k > 1 {
        let root_children: Vec<String> = (0..k).map(|s| p1_label(s, &[])).collect();
        let root_refs: Vec<&str> = root_children.iter().map(|s| s.as_str()).collect();
        b.add_chance("root", &root_refs, &spec.p0);
    }

    // decision levels
    for m in 0..n {
        for h in histories(m) {
            let hl = hist_label(&h);
            for state in 0..k {
                let kids: Vec<String> = (0..rows).map(|i| p2_label(state, &h, i)).collect();
                let kid_refs: Vec<&str> = kids.iter().map(|s| s.as_str()).collect();
                b.add_decision(
                    &p1_label(state, &h),
                    0,
                    p1_cell[&(m, state, hl.clone())],
                    &kid_refs,
                );
                for i in 0..rows {
                    let kids: Vec<String> = (0..cols)
                        .map(|j| {
                            let mut h2 = h.clone();
                            h2.push((i, j));
                            if m + 1 < n {
                                p1_label(state, &h2)
                            } else {
                                e_label(state, &h2)
                            }
                        })
                        .collect();
                    let kid_refs: Vec<&str> = kids.iter().map(|s| s.as_str()).collect();
                    b.add_decision(&p2_label(state, &h, i), 1, p2_cell[&(m, hl.clone())], &kid_refs);
                }
            }
        }
    }

    // endpoints: grouped per full history so each class lists its states in
    // ascending order
    let full = histories(n);
    let mut endpoint_state = Vec::new();
    let mut endpoint_history = Vec::new();
    let mut endpoint_labels: Vec<String> = Vec::new();
    for h in &full {
        for state in 0..k {
            let l = e_label(state, h);
            b.add_endpoint(&l);
            endpoint_labels.push(l);
            endpoint_state.push(state);
            endpoint_history.push(h.clone());
        }
    }
    // Player One distinguishes every endpoint; Player Two pools the states
    let p1_classes: Vec<Vec<&str>> = endpoint_labels.iter().map(|l| vec![l.as_str()]).collect();
    b.set_endpoint_partition(0, &p1_classes);
    let mut p2_classes: Vec<Vec<&str>> = Vec::new();
    for (hi, _h) in full.iter().enumerate() {
        p2_classes.push(
            (0..k)
                .map(|state| endpoint_labels[hi * k + state].as_str())
                .collect(),
        );
    }
    b.set_endpoint_partition(1, &p2_classes);

    let tree = b.build()?;
    let q = tree.common_knowledge();
    if q.classes.len() != full.len() {
        return Err(Error::Numeric(format!(
            "common-knowledge join produced {} classes, expected {}",
            q.classes.len(),
            full.len()
        )));
    }
    let class_history: Vec<Vec<(usize, usize)>> = q
        .classes
        .iter()
        .map(|members| endpoint_history[members[0]].clone())
        .collect();

    // wrappers: stage payoffs as offsets, continuation weight as slope
    let l1 = spec.lambda_total(0);
    let l2 = spec.lambda_total(1);
    let mut g = Vec::with_capacity(endpoint_state.len() * 2);
    for (e, h) in endpoint_history.iter().enumerate() {
        let state = endpoint_state[e];
        let f1: f64 = h
            .iter()
            .enumerate()
            .map(|(l, &(i, j))| spec.lambda1[l] * spec.mats.a[state].at(i, j))
            .sum();
        let f2: f64 = h
            .iter()
            .enumerate()
            .map(|(l, &(i, j))| spec.lambda2[l] * spec.mats.b[state].at(i, j))
            .sum();
        g.push(GWrapper::affine(f1, 1.0 - l1)?);
        g.push(GWrapper::affine(f2, 1.0 - l2)?);
    }

    Ok(NeymanTree {
        tree,
        g,
        q,
        endpoint_state,
        endpoint_history,
        class_history,
    })
}
