//! Truncated game trees: finite trees with chance and decision nodes whose
//! endpoints carry no terminal payoff. Endpoint partitions per player induce
//! the common-knowledge partition (their join), and continuation payoffs are
//! attached per common-knowledge class by the machinery in [`solve`].
//!
//! Profiles over a tree live on the product of per-player simplices of pure
//! decision strategies, one decision per information cell.

pub mod continuation;
pub mod solve;

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::profile::{Layout, MixedProfile};

pub type VertexId = usize;
pub type CellId = usize;

#[derive(Clone, Debug)]
pub enum VertexKind {
    /// Nature moves; probabilities aligned with the children list.
    Chance { probs: Vec<f64> },
    /// A player moves from an information cell.
    Decision { player: usize, cell: CellId },
    /// An endpoint of the truncated tree; `index` orders the endpoint set.
    Endpoint { index: usize },
}

/// One information cell: its owner, its action labels, and its member nodes.
#[derive(Clone, Debug, Serialize)]
pub struct InfoCell {
    pub player: usize,
    pub label: String,
    pub actions: Vec<String>,
    pub members: Vec<VertexId>,
}

#[derive(Clone, Debug)]
pub struct TruncatedGameTree {
    labels: Vec<String>,
    children: Vec<Vec<VertexId>>,
    parent: Vec<Option<(VertexId, usize)>>,
    kinds: Vec<VertexKind>,
    players: usize,
    cells: Vec<InfoCell>,
    endpoints: Vec<VertexId>,
    /// Per player, class index of every endpoint.
    endpoint_parts: Vec<Vec<usize>>,
}

/// Declarative construction; label resolution and tree-ness are enforced at
/// `build`, the remaining structural invariants are reported by `validate`.
pub struct TreeBuilder {
    players: usize,
    cells: Vec<(usize, String, Vec<String>)>,
    verts: Vec<(String, BuilderKind, Vec<String>)>,
    partitions: Vec<Option<Vec<Vec<String>>>>,
}

enum BuilderKind {
    Chance(Vec<f64>),
    Decision { player: usize, cell: CellId },
    Endpoint,
}

impl TreeBuilder {
    pub fn new(players: usize) -> Self {
        TreeBuilder {
            players,
            cells: Vec::new(),
            verts: Vec::new(),
            partitions: vec![None; players],
        }
    }

    pub fn add_cell(&mut self, player: usize, label: &str, actions: &[&str]) -> CellId {
        self.cells.push((
            player,
            label.to_string(),
            actions.iter().map(|s| s.to_string()).collect(),
        ));
        self.cells.len() - 1
    }

    pub fn add_chance(&mut self, label: &str, children: &[&str], probs: &[f64]) {
        self.verts.push((
            label.to_string(),
            BuilderKind::Chance(probs.to_vec()),
            children.iter().map(|s| s.to_string()).collect(),
        ));
    }

    pub fn add_decision(&mut self, label: &str, player: usize, cell: CellId, children: &[&str]) {
        self.verts.push((
            label.to_string(),
            BuilderKind::Decision { player, cell },
            children.iter().map(|s| s.to_string()).collect(),
        ));
    }

    pub fn add_endpoint(&mut self, label: &str) {
        self.verts
            .push((label.to_string(), BuilderKind::Endpoint, Vec::new()));
    }

    /// Endpoint partition of one player, classes given by endpoint labels.
    pub fn set_endpoint_partition(&mut self, player: usize, classes: &[Vec<&str>]) {
        self.partitions[player] = Some(
            classes
                .iter()
                .map(|c| c.iter().map(|s| s.to_string()).collect())
                .collect(),
        );
    }

    pub fn build(self) -> Result<TruncatedGameTree> {
        let n = self.verts.len();
        if n == 0 {
            return Err(Error::InvalidInput("tree needs at least one vertex".into()));
        }
        let mut index: HashMap<String, VertexId> = HashMap::new();
        for (i, (label, _, _)) in self.verts.iter().enumerate() {
            if index.insert(label.clone(), i).is_some() {
                return Err(Error::InvalidInput(format!("duplicate vertex label `{label}`")));
            }
        }
        let mut children = vec![Vec::new(); n];
        let mut parent: Vec<Option<(VertexId, usize)>> = vec![None; n];
        for (i, (label, _, kids)) in self.verts.iter().enumerate() {
            for (slot, kid) in kids.iter().enumerate() {
                let &j = index.get(kid).ok_or_else(|| {
                    Error::InvalidInput(format!("vertex `{label}` references unknown child `{kid}`"))
                })?;
                if parent[j].is_some() {
                    return Err(Error::InvalidInput(format!(
                        "vertex `{}` has more than one incoming arrow",
                        self.verts[j].0
                    )));
                }
                parent[j] = Some((i, slot));
                children[i].push(j);
            }
        }
        let roots: Vec<VertexId> = (0..n).filter(|&i| parent[i].is_none()).collect();
        if roots.len() != 1 {
            return Err(Error::InvalidInput(format!(
                "tree must have exactly one root, found {}",
                roots.len()
            )));
        }
        if roots[0] != 0 {
            return Err(Error::InvalidInput(
                "the first declared vertex must be the root".into(),
            ));
        }
        let mut endpoints = Vec::new();
        let mut kinds = Vec::with_capacity(n);
        for (i, (_, kind, _)) in self.verts.iter().enumerate() {
            kinds.push(match kind {
                BuilderKind::Chance(p) => VertexKind::Chance { probs: p.clone() },
                BuilderKind::Decision { player, cell } => {
                    if *player >= self.players {
                        return Err(Error::InvalidInput(format!(
                            "vertex `{}` names player {player} of {}",
                            self.verts[i].0, self.players
                        )));
                    }
                    if *cell >= self.cells.len() {
                        return Err(Error::InvalidInput(format!(
                            "vertex `{}` names an unknown cell",
                            self.verts[i].0
                        )));
                    }
                    VertexKind::Decision {
                        player: *player,
                        cell: *cell,
                    }
                }
                BuilderKind::Endpoint => {
                    endpoints.push(i);
                    VertexKind::Endpoint {
                        index: endpoints.len() - 1,
                    }
                }
            });
        }
        let mut cells: Vec<InfoCell> = self
            .cells
            .into_iter()
            .map(|(player, label, actions)| InfoCell {
                player,
                label,
                actions,
                members: Vec::new(),
            })
            .collect();
        for i in 0..n {
            if let VertexKind::Decision { cell, .. } = kinds[i] {
                cells[cell].members.push(i);
            }
        }
        let e_index: HashMap<VertexId, usize> = endpoints
            .iter()
            .enumerate()
            .map(|(k, &v)| (v, k))
            .collect();
        let mut endpoint_parts = Vec::with_capacity(self.players);
        for (player, part) in self.partitions.into_iter().enumerate() {
            let classes = part.ok_or_else(|| {
                Error::InvalidInput(format!("missing endpoint partition for player {}", player + 1))
            })?;
            let mut class_of = vec![usize::MAX; endpoints.len()];
            for (ci, class) in classes.iter().enumerate() {
                for label in class {
                    let &v = index.get(label).ok_or_else(|| {
                        Error::InvalidInput(format!("partition references unknown endpoint `{label}`"))
                    })?;
                    let &e = e_index.get(&v).ok_or_else(|| {
                        Error::InvalidInput(format!("partition member `{label}` is not an endpoint"))
                    })?;
                    class_of[e] = ci;
                }
            }
            endpoint_parts.push(class_of);
        }
        Ok(TruncatedGameTree {
            labels: self.verts.into_iter().map(|(l, _, _)| l).collect(),
            children,
            parent,
            kinds,
            players: self.players,
            cells,
            endpoints,
            endpoint_parts,
        })
    }
}

/// Structural findings of `validate`, listed per offending node.
#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

/// The join of the players' endpoint partitions: the finest partition
/// coarsening every one of them.
#[derive(Clone, Debug, Serialize)]
pub struct CommonKnowledge {
    pub class_of: Vec<usize>,
    /// Endpoint indices per class, ascending.
    pub classes: Vec<Vec<usize>>,
}

impl TruncatedGameTree {
    pub fn players(&self) -> usize {
        self.players
    }

    pub fn num_vertices(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, v: VertexId) -> &str {
        &self.labels[v]
    }

    pub fn endpoints(&self) -> &[VertexId] {
        &self.endpoints
    }

    pub fn endpoint_label(&self, e: usize) -> &str {
        &self.labels[self.endpoints[e]]
    }

    pub fn cells(&self) -> &[InfoCell] {
        &self.cells
    }

    pub fn endpoint_partition(&self, player: usize) -> &[usize] {
        &self.endpoint_parts[player]
    }

    /// Checks every structural invariant, listing failures with the node
    /// identities involved instead of failing fast.
    pub fn validate(&self) -> ValidationReport {
        let mut issues = Vec::new();
        let n = self.num_vertices();
        // reachability
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        while let Some(v) = stack.pop() {
            if !seen[v] {
                seen[v] = true;
                stack.extend(&self.children[v]);
            }
        }
        for v in 0..n {
            if !seen[v] {
                issues.push(format!("vertex `{}` is unreachable from the root", self.labels[v]));
            }
        }
        for v in 0..n {
            match &self.kinds[v] {
                VertexKind::Chance { probs } => {
                    if self.children[v].len() < 2 {
                        issues.push(format!(
                            "decision vertex `{}` must have at least two outgoing arrows",
                            self.labels[v]
                        ));
                    }
                    if probs.len() != self.children[v].len() {
                        issues.push(format!(
                            "chance vertex `{}` has {} probabilities for {} arrows",
                            self.labels[v],
                            probs.len(),
                            self.children[v].len()
                        ));
                    } else {
                        let s: f64 = probs.iter().sum();
                        if probs.iter().any(|p| *p < 0.0) || (s - 1.0).abs() > 1e-9 {
                            issues.push(format!(
                                "chance vertex `{}` carries an invalid distribution",
                                self.labels[v]
                            ));
                        }
                    }
                }
                VertexKind::Decision { player, cell } => {
                    if self.children[v].len() < 2 {
                        issues.push(format!(
                            "decision vertex `{}` must have at least two outgoing arrows",
                            self.labels[v]
                        ));
                    }
                    let c = &self.cells[*cell];
                    if c.player != *player {
                        issues.push(format!(
                            "vertex `{}` belongs to player {} but its cell `{}` belongs to player {}",
                            self.labels[v],
                            player + 1,
                            c.label,
                            c.player + 1
                        ));
                    }
                    if c.actions.len() != self.children[v].len() {
                        issues.push(format!(
                            "vertex `{}` has {} arrows but cell `{}` names {} actions",
                            self.labels[v],
                            self.children[v].len(),
                            c.label,
                            c.actions.len()
                        ));
                    }
                }
                VertexKind::Endpoint { .. } => {
                    if !self.children[v].is_empty() {
                        issues.push(format!(
                            "endpoint `{}` must not have outgoing arrows",
                            self.labels[v]
                        ));
                    }
                }
            }
        }
        for c in &self.cells {
            if c.members.is_empty() {
                issues.push(format!("cell `{}` has no member vertices", c.label));
            }
            if c.actions.len() < 2 {
                issues.push(format!("cell `{}` needs at least two actions", c.label));
            }
        }
        for (player, part) in self.endpoint_parts.iter().enumerate() {
            for (e, &class) in part.iter().enumerate() {
                if class == usize::MAX {
                    issues.push(format!(
                        "endpoint `{}` is missing from player {}'s partition",
                        self.endpoint_label(e),
                        player + 1
                    ));
                }
            }
        }
        ValidationReport { issues }
    }

    /// Union-find join of the endpoint partitions.
    pub fn common_knowledge(&self) -> CommonKnowledge {
        let ne = self.endpoints.len();
        let mut up: Vec<usize> = (0..ne).collect();
        fn find(up: &mut Vec<usize>, mut i: usize) -> usize {
            while up[i] != i {
                up[i] = up[up[i]];
                i = up[i];
            }
            i
        }
        for part in &self.endpoint_parts {
            let mut first_of: HashMap<usize, usize> = HashMap::new();
            for (e, &class) in part.iter().enumerate() {
                if let Some(&f) = first_of.get(&class) {
                    let (a, b) = (find(&mut up, f), find(&mut up, e));
                    up[a.max(b)] = a.min(b);
                } else {
                    first_of.insert(class, e);
                }
            }
        }
        let mut class_ids: Vec<usize> = Vec::new();
        let mut class_of = vec![0; ne];
        for e in 0..ne {
            let root = find(&mut up, e);
            match class_ids.iter().position(|&r| r == root) {
                Some(idx) => class_of[e] = idx,
                None => {
                    class_ids.push(root);
                    class_of[e] = class_ids.len() - 1;
                }
            }
        }
        let mut classes = vec![Vec::new(); class_ids.len()];
        for (e, &c) in class_of.iter().enumerate() {
            classes[c].push(e);
        }
        CommonKnowledge { class_of, classes }
    }

    /// Path from the root to a vertex as (vertex, arrow slot taken) pairs.
    fn path_to(&self, v: VertexId) -> Vec<(VertexId, usize)> {
        let mut rev = Vec::new();
        let mut at = v;
        while let Some((p, slot)) = self.parent[at] {
            rev.push((p, slot));
            at = p;
        }
        rev.reverse();
        rev
    }

    /// The ordered cells of `player` strictly before `v` on its path.
    fn experience(&self, player: usize, v: VertexId) -> Vec<CellId> {
        self.path_to(v)
            .iter()
            .filter_map(|&(u, _)| match self.kinds[u] {
                VertexKind::Decision { player: p, cell } if p == player => Some(cell),
                _ => None,
            })
            .collect()
    }

    /// Perfect recall for one player: all paths into any of the player's
    /// information cells or endpoint classes traverse the same prior cells of
    /// that player, in the same order, without repetition.
    pub fn check_perfect_recall(&self, player: usize) -> RecallReport {
        let mut groups: Vec<(String, Vec<VertexId>)> = Vec::new();
        for c in &self.cells {
            if c.player == player {
                groups.push((format!("cell `{}`", c.label), c.members.clone()));
            }
        }
        let part = &self.endpoint_parts[player];
        let nclasses = part.iter().filter(|&&c| c != usize::MAX).max().map_or(0, |m| m + 1);
        for class in 0..nclasses {
            let members: Vec<VertexId> = (0..self.endpoints.len())
                .filter(|&e| part[e] == class)
                .map(|e| self.endpoints[e])
                .collect();
            groups.push((format!("endpoint class {class}"), members));
        }
        for (what, members) in groups {
            let mut reference: Option<(VertexId, Vec<CellId>)> = None;
            for &v in &members {
                let exp = self.experience(player, v);
                let mut seen = HashSet::new();
                for &c in &exp {
                    if !seen.insert(c) {
                        return RecallReport {
                            ok: false,
                            counterexample: Some(format!(
                                "path to `{}` in {what} repeats cell `{}`",
                                self.labels[v], self.cells[c].label
                            )),
                        };
                    }
                }
                match &reference {
                    None => reference = Some((v, exp)),
                    Some((v0, exp0)) => {
                        if *exp0 != exp {
                            return RecallReport {
                                ok: false,
                                counterexample: Some(format!(
                                    "paths to `{}` and `{}` in {what} disagree on prior cells",
                                    self.labels[*v0], self.labels[v]
                                )),
                            };
                        }
                    }
                }
            }
        }
        RecallReport {
            ok: true,
            counterexample: None,
        }
    }

    /// Information cells of one player, in declaration order.
    pub fn player_cells(&self, player: usize) -> Vec<CellId> {
        (0..self.cells.len())
            .filter(|&c| self.cells[c].player == player)
            .collect()
    }

    /// Number of pure decision strategies of one player.
    pub fn num_pure_strategies(&self, player: usize) -> usize {
        self.player_cells(player)
            .iter()
            .map(|&c| self.cells[c].actions.len())
            .product()
    }

    /// Decodes a pure strategy index into the action chosen at each of the
    /// player's cells (aligned with `player_cells`).
    pub fn pure_strategy(&self, player: usize, index: usize) -> Vec<usize> {
        let cells = self.player_cells(player);
        let mut rem = index;
        let mut out = Vec::with_capacity(cells.len());
        for &c in &cells {
            let k = self.cells[c].actions.len();
            out.push(rem % k);
            rem /= k;
        }
        out
    }

    /// Strategy-space layout: one simplex of pure strategies per player.
    pub fn strategy_layout(&self) -> Result<Layout> {
        let sizes: Vec<usize> = (0..self.players)
            .map(|n| self.num_pure_strategies(n))
            .collect();
        Layout::new(&sizes)
    }

    /// Precomputes, per endpoint, the chance factor and per player the
    /// consistency of every pure strategy with the endpoint's path.
    pub fn outcome_tables(&self) -> OutcomeTables {
        let ne = self.endpoints.len();
        let mut chance = vec![1.0; ne];
        let mut constraints: Vec<Vec<Vec<(usize, usize)>>> =
            vec![vec![Vec::new(); ne]; self.players];
        for (e, &v) in self.endpoints.iter().enumerate() {
            for (u, slot) in self.path_to(v) {
                match &self.kinds[u] {
                    VertexKind::Chance { probs } => chance[e] *= probs[slot],
                    VertexKind::Decision { player, cell } => {
                        constraints[*player][e].push((*cell, slot));
                    }
                    VertexKind::Endpoint { .. } => {}
                }
            }
        }
        let mut consistent = Vec::with_capacity(self.players);
        for n in 0..self.players {
            let cells = self.player_cells(n);
            let slot_of: HashMap<CellId, usize> =
                cells.iter().enumerate().map(|(i, &c)| (c, i)).collect();
            let count = self.num_pure_strategies(n);
            let mut table = vec![vec![false; ne]; count];
            for (s, row) in table.iter_mut().enumerate() {
                let choices = self.pure_strategy(n, s);
                for (e, flag) in row.iter_mut().enumerate() {
                    *flag = constraints[n][e]
                        .iter()
                        .all(|&(cell, a)| choices[slot_of[&cell]] == a);
                }
            }
            consistent.push(table);
        }
        OutcomeTables { chance, consistent }
    }

    /// Behavioural view of a mixed strategy under perfect recall: the action
    /// distribution at each of the player's cells, conditional on the
    /// player's own play reaching the cell. Reporting aid only.
    pub fn behavioural_view(&self, x: &MixedProfile, player: usize) -> Vec<Vec<f64>> {
        let cells = self.player_cells(player);
        let slot_of: HashMap<CellId, usize> =
            cells.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let count = self.num_pure_strategies(player);
        let mut out = Vec::with_capacity(cells.len());
        for (ci, &c) in cells.iter().enumerate() {
            // own constraints along some path into the cell
            let mut weights = vec![0.0; self.cells[c].actions.len()];
            let mut total = 0.0;
            for s in 0..count {
                let choices = self.pure_strategy(player, s);
                let reaches = self.cells[c].members.iter().any(|&v| {
                    self.path_to(v).iter().all(|&(u, slot)| match self.kinds[u] {
                        VertexKind::Decision { player: p, cell } if p == player => {
                            choices[slot_of[&cell]] == slot
                        }
                        _ => true,
                    })
                });
                if reaches {
                    total += x.prob(player, s);
                    weights[choices[ci]] += x.prob(player, s);
                }
            }
            if total > 0.0 {
                for w in weights.iter_mut() {
                    *w /= total;
                }
            } else {
                let k = weights.len() as f64;
                weights.iter_mut().for_each(|w| *w = 1.0 / k);
            }
            out.push(weights);
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RecallReport {
    pub ok: bool,
    pub counterexample: Option<String>,
}

/// Chance factors and strategy/endpoint consistency tables.
pub struct OutcomeTables {
    /// Product of chance probabilities along each endpoint's path.
    pub chance: Vec<f64>,
    /// Per player, per pure strategy, per endpoint: does the strategy allow
    /// the endpoint's path?
    pub consistent: Vec<Vec<Vec<bool>>>,
}

/// Distribution on endpoints induced by a mixed profile, with the per-player
/// reach factors cached for strategy replacements.
pub struct OutcomeDistribution {
    pub p: Vec<f64>,
    reach: Vec<Vec<f64>>,
    chance: Vec<f64>,
}

impl OutcomeDistribution {
    /// p_x over endpoints.
    pub fn compute(tables: &OutcomeTables, x: &MixedProfile) -> OutcomeDistribution {
        let ne = tables.chance.len();
        let players = tables.consistent.len();
        let mut reach = vec![vec![0.0; ne]; players];
        for n in 0..players {
            for (s, row) in tables.consistent[n].iter().enumerate() {
                let w = x.prob(n, s);
                if w == 0.0 {
                    continue;
                }
                for (e, &flag) in row.iter().enumerate() {
                    if flag {
                        reach[n][e] += w;
                    }
                }
            }
        }
        let mut p = tables.chance.clone();
        for n in 0..players {
            for e in 0..ne {
                p[e] *= reach[n][e];
            }
        }
        OutcomeDistribution {
            p,
            reach,
            chance: tables.chance.clone(),
        }
    }

    /// p_{x^s}: the profile with player `n` replaced by pure strategy `s`.
    pub fn replaced(&self, tables: &OutcomeTables, player: usize, s: usize) -> Vec<f64> {
        let ne = self.p.len();
        let mut out = vec![0.0; ne];
        for e in 0..ne {
            if !tables.consistent[player][s][e] {
                continue;
            }
            let mut v = self.chance[e];
            for (n, r) in self.reach.iter().enumerate() {
                if n != player {
                    v *= r[e];
                }
            }
            out[e] = v;
        }
        out
    }

    /// Probability of each common-knowledge class.
    pub fn class_probs(&self, q: &CommonKnowledge) -> Vec<f64> {
        let mut out = vec![0.0; q.classes.len()];
        for (e, &c) in q.class_of.iter().enumerate() {
            out[c] += self.p[e];
        }
        out
    }

    /// Conditional over each class's endpoints (local order), when defined.
    pub fn conditionals(&self, q: &CommonKnowledge) -> Vec<Option<Vec<f64>>> {
        let probs = self.class_probs(q);
        q.classes
            .iter()
            .enumerate()
            .map(|(c, members)| {
                if probs[c] > 0.0 {
                    Some(members.iter().map(|&e| self.p[e] / probs[c]).collect())
                } else {
                    None
                }
            })
            .collect()
    }
}
