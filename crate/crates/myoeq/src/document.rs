//! Game document formats: TOML with an explicit schema version and a `kind`
//! discriminator. Four kinds are supported: `myopic` (players, actions, one
//! payoff expression per action), `tree` (vertices, cells, partitions,
//! continuation selections over conditional variables, affine wrappers),
//! `neyman` (states, prior, matrices, stage weights), and `plan` (a joint
//! plan bundled with its game, for independent verification).

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{parse_expression, EvalInput, PayoffExpression, Scope};
use crate::matrix::{Mat, StateMatrices};
use crate::neyman::plans::JointPlan;
use crate::neyman::NeymanGameSpec;
use crate::profile::Layout;
use crate::tree::continuation::{ClassContinuation, ContinuationSystem, GWrapper, Selection};
use crate::tree::{TreeBuilder, TruncatedGameTree};

pub const SCHEMA_VERSION: u32 = 1;

fn schema_err(path: impl Into<String>, msg: impl Into<String>) -> Error {
    Error::Schema {
        path: path.into(),
        msg: msg.into(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GameDocument {
    Myopic(MyopicDoc),
    Tree(TreeDoc),
    Neyman(NeymanDoc),
    Plan(PlanDoc),
}

impl GameDocument {
    pub fn kind(&self) -> &'static str {
        match self {
            GameDocument::Myopic(_) => "myopic",
            GameDocument::Tree(_) => "tree",
            GameDocument::Neyman(_) => "neyman",
            GameDocument::Plan(_) => "plan",
        }
    }
}

#[derive(Serialize, Deserialize)]
struct DocEnvelope {
    schema: u32,
    kind: String,
    #[serde(flatten)]
    body: toml::Table,
}

pub fn parse_document(text: &str) -> Result<GameDocument> {
    let env: DocEnvelope =
        toml::from_str(text).map_err(|e| schema_err("(document)", e.to_string()))?;
    if env.schema != SCHEMA_VERSION {
        return Err(schema_err(
            "schema",
            format!(
                "unsupported schema version {}, expected {SCHEMA_VERSION}",
                env.schema
            ),
        ));
    }
    let body = toml::Value::Table(env.body);
    let doc = match env.kind.as_str() {
        "myopic" => GameDocument::Myopic(
            body.try_into::<MyopicDoc>()
                .map_err(|e| schema_err("(myopic body)", e.to_string()))?,
        ),
        "tree" => GameDocument::Tree(
            body.try_into::<TreeDoc>()
                .map_err(|e| schema_err("(tree body)", e.to_string()))?,
        ),
        "neyman" => GameDocument::Neyman(
            body.try_into::<NeymanDoc>()
                .map_err(|e| schema_err("(neyman body)", e.to_string()))?,
        ),
        "plan" => GameDocument::Plan(
            body.try_into::<PlanDoc>()
                .map_err(|e| schema_err("(plan body)", e.to_string()))?,
        ),
        other => {
            return Err(schema_err(
                "kind",
                format!("unknown document kind `{other}`"),
            ))
        }
    };
    // structural validation beyond deserialization
    match &doc {
        GameDocument::Myopic(d) => {
            d.compile()?;
        }
        GameDocument::Tree(d) => {
            d.compile()?;
        }
        GameDocument::Neyman(d) => {
            d.spec()?;
        }
        GameDocument::Plan(d) => {
            d.spec()?;
            d.plan()?;
        }
    }
    Ok(doc)
}

pub fn load_document(path: impl AsRef<Path>) -> Result<GameDocument> {
    let text = std::fs::read_to_string(path.as_ref())?;
    parse_document(&text)
}

pub fn emit_document(doc: &GameDocument) -> Result<String> {
    let (kind, body) = match doc {
        GameDocument::Myopic(d) => ("myopic", toml::Table::try_from(d)),
        GameDocument::Tree(d) => ("tree", toml::Table::try_from(d)),
        GameDocument::Neyman(d) => ("neyman", toml::Table::try_from(d)),
        GameDocument::Plan(d) => ("plan", toml::Table::try_from(d)),
    };
    let env = DocEnvelope {
        schema: SCHEMA_VERSION,
        kind: kind.into(),
        body: body.map_err(|e| Error::Config(format!("serialization failed: {e}")))?,
    };
    toml::to_string_pretty(&env).map_err(|e| Error::Config(format!("serialization failed: {e}")))
}

// ---------------------------------------------------------------------------
// myopic documents
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MyopicDoc {
    #[serde(rename = "player")]
    pub players: Vec<PlayerDecl>,
    #[serde(rename = "payoff")]
    pub payoffs: Vec<PayoffDecl>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlayerDecl {
    pub name: String,
    pub actions: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PayoffDecl {
    pub player: String,
    pub action: String,
    pub expr: String,
}

/// A compiled myopic game: layout, scope, and the expression family.
pub struct MyopicGame {
    pub layout: Layout,
    pub scope: Scope,
    pub family: crate::expr::ExprFamily,
    pub player_names: Vec<String>,
    pub action_names: Vec<Vec<String>>,
}

impl MyopicDoc {
    pub fn compile(&self) -> Result<MyopicGame> {
        if self.players.is_empty() {
            return Err(schema_err("player", "at least one player required"));
        }
        for (i, p) in self.players.iter().enumerate() {
            if p.actions.is_empty() {
                return Err(schema_err(
                    format!("player[{i}].actions"),
                    "must not be empty",
                ));
            }
            for (j, q) in self.players.iter().enumerate().take(i) {
                if q.name == p.name {
                    return Err(schema_err(
                        format!("player[{i}].name"),
                        format!("duplicate player name `{}` (also player[{j}])", p.name),
                    ));
                }
            }
        }
        let sizes: Vec<usize> = self.players.iter().map(|p| p.actions.len()).collect();
        let layout = Layout::new(&sizes)?;
        let scope = Scope::for_players(
            self.players
                .iter()
                .map(|p| (p.name.clone(), p.actions.clone()))
                .collect(),
        );
        let mut exprs: Vec<Option<PayoffExpression>> = vec![None; layout.flat_len()];
        for (i, decl) in self.payoffs.iter().enumerate() {
            let player = resolve_name(&decl.player, self.players.iter().map(|p| &p.name))
                .ok_or_else(|| {
                    schema_err(
                        format!("payoff[{i}].player"),
                        format!("unknown player `{}`", decl.player),
                    )
                })?;
            let action = resolve_name(&decl.action, self.players[player].actions.iter())
                .ok_or_else(|| {
                    schema_err(
                        format!("payoff[{i}].action"),
                        format!("unknown action `{}`", decl.action),
                    )
                })?;
            let flat = layout.flat_index(player, action);
            if exprs[flat].is_some() {
                return Err(schema_err(
                    format!("payoff[{i}]"),
                    format!("duplicate payoff for {}.{}", decl.player, decl.action),
                ));
            }
            let parsed = parse_expression(&decl.expr, &scope)
                .map_err(|e| schema_err(format!("payoff[{i}].expr"), e.to_string()))?;
            exprs[flat] = Some(parsed);
        }
        let exprs: Vec<PayoffExpression> = exprs
            .into_iter()
            .enumerate()
            .map(|(c, e)| {
                e.ok_or_else(|| {
                    schema_err("payoff", format!("missing payoff for flat coordinate {c}"))
                })
            })
            .collect::<Result<_>>()?;
        let family = crate::expr::ExprFamily::new(layout.clone(), exprs)?;
        Ok(MyopicGame {
            layout,
            scope,
            family,
            player_names: self.players.iter().map(|p| p.name.clone()).collect(),
            action_names: self.players.iter().map(|p| p.actions.clone()).collect(),
        })
    }
}

fn resolve_name<'a>(key: &str, names: impl Iterator<Item = &'a String>) -> Option<usize> {
    let names: Vec<&String> = names.collect();
    if let Some(pos) = names.iter().position(|n| n.as_str() == key) {
        return Some(pos);
    }
    key.parse::<usize>()
        .ok()
        .filter(|i| *i >= 1 && *i <= names.len())
        .map(|i| i - 1)
}

// ---------------------------------------------------------------------------
// tree documents
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeDoc {
    pub players: usize,
    #[serde(rename = "vertex")]
    pub vertices: Vec<VertexDecl>,
    #[serde(rename = "cell")]
    pub cells: Vec<CellDecl>,
    #[serde(rename = "endpoint_partition")]
    pub partitions: Vec<PartitionDecl>,
    #[serde(rename = "continuation")]
    pub continuations: Vec<ContinuationDecl>,
    #[serde(rename = "gwrap", default, skip_serializing_if = "Vec::is_empty")]
    pub gwraps: Vec<GwrapDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gdefault: Option<GDefaultDecl>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexDecl {
    pub id: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub player: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probs: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellDecl {
    pub id: String,
    pub player: usize,
    pub actions: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionDecl {
    pub player: usize,
    pub classes: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuationDecl {
    pub class: Vec<String>,
    pub bound: f64,
    #[serde(rename = "selection")]
    pub selections: Vec<SelectionDecl>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionDecl {
    pub values: Vec<SelValue>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelValue {
    pub endpoint: String,
    pub player: usize,
    pub expr: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GwrapDecl {
    pub endpoint: String,
    pub player: usize,
    pub offset: f64,
    pub slope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GDefaultDecl {
    pub offset: f64,
    pub slope: f64,
}

/// Selection backed by one expression per (local endpoint, player),
/// evaluated against conditional-probability variables.
pub struct ExprSelection {
    exprs: Vec<PayoffExpression>,
}

impl Selection for ExprSelection {
    fn eval(&self, conditional: &[f64]) -> Result<Vec<f64>> {
        let input = EvalInput {
            profile: None,
            conditional: Some(conditional),
        };
        self.exprs.iter().map(|e| e.ast.eval(&input)).collect()
    }
}

impl TreeDoc {
    /// Builds the tree, the continuation system aligned with the computed
    /// common-knowledge partition, and the wrapper table.
    pub fn compile(&self) -> Result<(TruncatedGameTree, ContinuationSystem, Vec<GWrapper>)> {
        if self.players == 0 {
            return Err(schema_err("players", "at least one player required"));
        }
        let mut b = TreeBuilder::new(self.players);
        let mut cell_ids = std::collections::HashMap::new();
        for (i, c) in self.cells.iter().enumerate() {
            if c.player == 0 || c.player > self.players {
                return Err(schema_err(
                    format!("cell[{i}].player"),
                    format!("player {} out of range 1..={}", c.player, self.players),
                ));
            }
            let actions: Vec<&str> = c.actions.iter().map(|s| s.as_str()).collect();
            let id = b.add_cell(c.player - 1, &c.id, &actions);
            if cell_ids.insert(c.id.clone(), id).is_some() {
                return Err(schema_err(format!("cell[{i}].id"), "duplicate cell id"));
            }
        }
        for (i, v) in self.vertices.iter().enumerate() {
            let children: Vec<&str> = v.children.iter().map(|s| s.as_str()).collect();
            match v.kind.as_str() {
                "chance" => {
                    let probs = v.probs.as_ref().ok_or_else(|| {
                        schema_err(
                            format!("vertex[{i}].probs"),
                            "chance vertices need probabilities",
                        )
                    })?;
                    b.add_chance(&v.id, &children, probs);
                }
                "decision" => {
                    let player = v.player.ok_or_else(|| {
                        schema_err(
                            format!("vertex[{i}].player"),
                            "decision vertices name a player",
                        )
                    })?;
                    if player == 0 || player > self.players {
                        return Err(schema_err(
                            format!("vertex[{i}].player"),
                            format!("player {player} out of range 1..={}", self.players),
                        ));
                    }
                    let cell_name = v.cell.as_ref().ok_or_else(|| {
                        schema_err(format!("vertex[{i}].cell"), "decision vertices name a cell")
                    })?;
                    let &cell = cell_ids.get(cell_name).ok_or_else(|| {
                        schema_err(
                            format!("vertex[{i}].cell"),
                            format!("unknown cell `{cell_name}`"),
                        )
                    })?;
                    b.add_decision(&v.id, player - 1, cell, &children);
                }
                "endpoint" => b.add_endpoint(&v.id),
                other => {
                    return Err(schema_err(
                        format!("vertex[{i}].kind"),
                        format!("unknown vertex kind `{other}`"),
                    ))
                }
            }
        }
        for (i, p) in self.partitions.iter().enumerate() {
            if p.player == 0 || p.player > self.players {
                return Err(schema_err(
                    format!("endpoint_partition[{i}].player"),
                    "player out of range",
                ));
            }
            let classes: Vec<Vec<&str>> = p
                .classes
                .iter()
                .map(|c| c.iter().map(|s| s.as_str()).collect())
                .collect();
            b.set_endpoint_partition(p.player - 1, &classes);
        }
        let tree = b.build().map_err(|e| schema_err("(tree)", e.to_string()))?;
        let q = tree.common_knowledge();

        // wrappers: default plus per-(endpoint, player) overrides
        let default = self
            .gdefault
            .as_ref()
            .map(|d| (d.offset, d.slope))
            .unwrap_or((0.0, 1.0));
        let ne = tree.endpoints().len();
        let mut wrap_params = vec![default; ne * self.players];
        for (i, w) in self.gwraps.iter().enumerate() {
            let e = (0..ne)
                .find(|&e| tree.endpoint_label(e) == w.endpoint)
                .ok_or_else(|| {
                    schema_err(
                        format!("gwrap[{i}].endpoint"),
                        format!("unknown endpoint `{}`", w.endpoint),
                    )
                })?;
            if w.player == 0 || w.player > self.players {
                return Err(schema_err(format!("gwrap[{i}].player"), "player out of range"));
            }
            wrap_params[e * self.players + (w.player - 1)] = (w.offset, w.slope);
        }
        let mut g = Vec::with_capacity(wrap_params.len());
        for (idx, (offset, slope)) in wrap_params.iter().enumerate() {
            g.push(GWrapper::affine(*offset, *slope).map_err(|e| {
                schema_err(format!("gwrap (endpoint-player slot {idx})"), e.to_string())
            })?);
        }

        // match declared continuation classes to computed join classes
        let mut per_class: Vec<Option<ClassContinuation>> =
            (0..q.classes.len()).map(|_| None).collect();
        for (i, cdecl) in self.continuations.iter().enumerate() {
            let mut declared: Vec<usize> = Vec::new();
            for label in &cdecl.class {
                let e = (0..ne)
                    .find(|&e| tree.endpoint_label(e) == *label)
                    .ok_or_else(|| {
                        schema_err(
                            format!("continuation[{i}].class"),
                            format!("unknown endpoint `{label}`"),
                        )
                    })?;
                declared.push(e);
            }
            declared.sort_unstable();
            let class_idx = q
                .classes
                .iter()
                .position(|members| *members == declared)
                .ok_or_else(|| {
                    schema_err(
                        format!("continuation[{i}].class"),
                        "does not match any common-knowledge class of the tree",
                    )
                })?;
            if per_class[class_idx].is_some() {
                return Err(schema_err(
                    format!("continuation[{i}].class"),
                    "class already has a continuation",
                ));
            }
            let members = &q.classes[class_idx];
            let endpoint_names: Vec<String> = members
                .iter()
                .map(|&e| tree.endpoint_label(e).to_string())
                .collect();
            let scope = Scope::for_endpoints(endpoint_names.clone());
            let mut selections: Vec<Arc<dyn Selection>> = Vec::new();
            for (si, sdecl) in cdecl.selections.iter().enumerate() {
                let mut exprs: Vec<Option<PayoffExpression>> =
                    vec![None; members.len() * self.players];
                for (vi, val) in sdecl.values.iter().enumerate() {
                    let local = endpoint_names
                        .iter()
                        .position(|n| *n == val.endpoint)
                        .ok_or_else(|| {
                            schema_err(
                                format!("continuation[{i}].selection[{si}].values[{vi}].endpoint"),
                                format!("endpoint `{}` is not in this class", val.endpoint),
                            )
                        })?;
                    if val.player == 0 || val.player > self.players {
                        return Err(schema_err(
                            format!("continuation[{i}].selection[{si}].values[{vi}].player"),
                            "player out of range",
                        ));
                    }
                    let parsed = parse_expression(&val.expr, &scope).map_err(|e| {
                        schema_err(
                            format!("continuation[{i}].selection[{si}].values[{vi}].expr"),
                            e.to_string(),
                        )
                    })?;
                    exprs[local * self.players + (val.player - 1)] = Some(parsed);
                }
                let exprs: Vec<PayoffExpression> = exprs
                    .into_iter()
                    .enumerate()
                    .map(|(slot, e)| {
                        e.ok_or_else(|| {
                            schema_err(
                                format!("continuation[{i}].selection[{si}]"),
                                format!("missing value for endpoint-player slot {slot}"),
                            )
                        })
                    })
                    .collect::<Result<_>>()?;
                selections.push(Arc::new(ExprSelection { exprs }));
            }
            per_class[class_idx] = Some(ClassContinuation {
                selections,
                bound: cdecl.bound,
            });
        }
        let classes: Vec<ClassContinuation> = per_class
            .into_iter()
            .enumerate()
            .map(|(c, v)| {
                v.ok_or_else(|| {
                    let names: Vec<&str> = q.classes[c]
                        .iter()
                        .map(|&e| tree.endpoint_label(e))
                        .collect();
                    schema_err(
                        "continuation",
                        format!("no continuation declared for class {{{}}}", names.join(", ")),
                    )
                })
            })
            .collect::<Result<_>>()?;
        Ok((tree, ContinuationSystem::new(classes), g))
    }
}

// ---------------------------------------------------------------------------
// neyman documents
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeymanDoc {
    pub p0: Vec<f64>,
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
    #[serde(rename = "state")]
    pub states: Vec<StateDecl>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateDecl {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
}

impl NeymanDoc {
    pub fn spec(&self) -> Result<NeymanGameSpec> {
        if self.states.is_empty() {
            return Err(schema_err("state", "at least one state required"));
        }
        let sum: f64 = self.p0.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(schema_err("p0", format!("prior sums to {sum}, expected 1")));
        }
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (i, s) in self.states.iter().enumerate() {
            a.push(
                Mat::from_rows(&s.a)
                    .map_err(|e| schema_err(format!("state[{i}].a"), e.to_string()))?,
            );
            b.push(
                Mat::from_rows(&s.b)
                    .map_err(|e| schema_err(format!("state[{i}].b"), e.to_string()))?,
            );
        }
        let mats = StateMatrices::new(a, b).map_err(|e| schema_err("state", e.to_string()))?;
        NeymanGameSpec::new(
            mats,
            self.p0.clone(),
            self.lambda1.clone(),
            self.lambda2.clone(),
        )
    }

    pub fn from_spec(spec: &NeymanGameSpec) -> NeymanDoc {
        let to_rows = |m: &Mat| -> Vec<Vec<f64>> {
            (0..m.rows())
                .map(|i| (0..m.cols()).map(|j| m.at(i, j)).collect())
                .collect()
        };
        NeymanDoc {
            p0: spec.p0.clone(),
            lambda1: spec.lambda1.clone(),
            lambda2: spec.lambda2.clone(),
            states: spec
                .mats
                .a
                .iter()
                .zip(&spec.mats.b)
                .map(|(a, b)| StateDecl {
                    name: None,
                    a: to_rows(a),
                    b: to_rows(b),
                })
                .collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// plan documents
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanDoc {
    pub game: NeymanDoc,
    pub plan: PlanBody,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanBody {
    pub prior: Vec<f64>,
    pub y: Vec<f64>,
    #[serde(rename = "signal")]
    pub signals: Vec<SignalDecl>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalDecl {
    pub posterior: Vec<f64>,
    pub weight: f64,
    pub gamma: Vec<Vec<f64>>,
    #[serde(default)]
    pub actions: Vec<usize>,
}

impl PlanDoc {
    pub fn spec(&self) -> Result<NeymanGameSpec> {
        self.game.spec()
    }

    pub fn plan(&self) -> Result<JointPlan> {
        if self.plan.signals.is_empty() {
            return Err(schema_err("plan.signal", "at least one signal required"));
        }
        let mut gammas = Vec::new();
        for (i, s) in self.plan.signals.iter().enumerate() {
            let flat: Vec<f64> = s.gamma.concat();
            if flat.is_empty() {
                return Err(schema_err(
                    format!("plan.signal[{i}].gamma"),
                    "must not be empty",
                ));
            }
            gammas.push(flat);
        }
        Ok(JointPlan {
            prior: self.plan.prior.clone(),
            posteriors: self
                .plan
                .signals
                .iter()
                .map(|s| s.posterior.clone())
                .collect(),
            weights: self.plan.signals.iter().map(|s| s.weight).collect(),
            gammas,
            y: self.plan.y.clone(),
            signals: self.plan.signals.iter().map(|s| s.actions.clone()).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::myopic::PayoffFamily;
    use crate::profile::MixedProfile;
    use crate::simplex::SimplexPoint;

    pub(crate) const VOTING1: &str = r#"
schema = 1
kind = "myopic"

[[player]]
name = "piers"
actions = ["T", "C"]

[[payoff]]
player = "piers"
action = "T"
expr = "1 - 5*x[1,T]"

[[payoff]]
player = "piers"
action = "C"
expr = "-5*x[1,T]"
"#;

    #[test]
    fn myopic_document_round_trip() {
        let doc = parse_document(VOTING1).unwrap();
        let emitted = emit_document(&doc).unwrap();
        let doc2 = parse_document(&emitted).unwrap();
        assert_eq!(doc, doc2);
        let GameDocument::Myopic(m) = doc else { panic!() };
        let game = m.compile().unwrap();
        let x = MixedProfile::new(vec![SimplexPoint::new(vec![0.2, 0.8]).unwrap()]);
        let vals = game.family.eval(&x).unwrap();
        assert!((vals[0] - 0.0).abs() < 1e-12);
        assert!((vals[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn schema_violations_carry_paths() {
        let bad = VOTING1.replace("schema = 1", "schema = 9");
        match parse_document(&bad) {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "schema"),
            other => panic!("{other:?}"),
        }
        let bad = VOTING1.replace("action = \"C\"", "action = \"Z\"");
        match parse_document(&bad) {
            Err(Error::Schema { path, msg }) => {
                assert!(path.contains("payoff[1]"), "{path}");
                assert!(msg.contains("Z"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn neyman_document_prior_check() {
        let text = r#"
schema = 1
kind = "neyman"
p0 = [0.6, 0.6]
lambda1 = [0.3333333333333333]
lambda2 = [0.3333333333333333]

[[state]]
a = [[1.0, 0.0], [0.0, 0.0]]
b = [[3.0, 1.0], [1.0, 2.0]]

[[state]]
a = [[0.0, 0.0], [0.0, 1.0]]
b = [[3.0, 1.0], [1.0, 2.0]]
"#;
        match parse_document(text) {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "p0"),
            other => panic!("{other:?}"),
        }
        let good = text.replace("p0 = [0.6, 0.6]", "p0 = [0.5, 0.5]");
        let doc = parse_document(&good).unwrap();
        let GameDocument::Neyman(n) = &doc else { panic!() };
        let spec = n.spec().unwrap();
        assert!((spec.lambda_total(0) - 1.0 / 3.0).abs() < 1e-12);
        let emitted = emit_document(&doc).unwrap();
        assert_eq!(parse_document(&emitted).unwrap(), doc);
    }

    pub(crate) const SMALL_TREE: &str = r#"
schema = 1
kind = "tree"
players = 2

[[vertex]]
id = "root"
kind = "decision"
player = 1
cell = "W1"
children = ["u", "v"]

[[vertex]]
id = "u"
kind = "decision"
player = 2
cell = "W2"
children = ["e00", "e01"]

[[vertex]]
id = "v"
kind = "decision"
player = 2
cell = "W2"
children = ["e10", "e11"]

[[vertex]]
id = "e00"
kind = "endpoint"

[[vertex]]
id = "e01"
kind = "endpoint"

[[vertex]]
id = "e10"
kind = "endpoint"

[[vertex]]
id = "e11"
kind = "endpoint"

[[cell]]
id = "W1"
player = 1
actions = ["a", "b"]

[[cell]]
id = "W2"
player = 2
actions = ["c", "d"]

[[endpoint_partition]]
player = 1
classes = [["e00", "e10"], ["e01", "e11"]]

[[endpoint_partition]]
player = 2
classes = [["e00", "e10"], ["e01", "e11"]]

[gdefault]
offset = 0.0
slope = 1.0

[[continuation]]
class = ["e00", "e10"]
bound = 5.0

  [[continuation.selection]]
  values = [
    { endpoint = "e00", player = 1, expr = "q[e00]" },
    { endpoint = "e00", player = 2, expr = "1 - q[e00]" },
    { endpoint = "e10", player = 1, expr = "0.5" },
    { endpoint = "e10", player = 2, expr = "0.5" },
  ]

[[continuation]]
class = ["e01", "e11"]
bound = 5.0

  [[continuation.selection]]
  values = [
    { endpoint = "e01", player = 1, expr = "1" },
    { endpoint = "e01", player = 2, expr = "0" },
    { endpoint = "e11", player = 1, expr = "0" },
    { endpoint = "e11", player = 2, expr = "1" },
  ]
"#;

    #[test]
    fn tree_document_compiles_and_round_trips() {
        let doc = parse_document(SMALL_TREE).unwrap();
        let emitted = emit_document(&doc).unwrap();
        assert_eq!(parse_document(&emitted).unwrap(), doc);
        let GameDocument::Tree(t) = doc else { panic!() };
        let (tree, cont, g) = t.compile().unwrap();
        assert!(tree.validate().is_valid());
        let q = tree.common_knowledge();
        assert_eq!(q.classes.len(), 2);
        cont.validate(&q, 2).unwrap();
        assert_eq!(g.len(), 8);
        // selection evaluates its expressions at the conditional
        let vals = cont.classes[0].selections[0].eval(&[0.25, 0.75]).unwrap();
        assert!((vals[0] - 0.25).abs() < 1e-12);
        assert!((vals[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn tree_document_rejects_wrong_class() {
        let bad = SMALL_TREE.replace("class = [\"e01\", \"e11\"]", "class = [\"e01\"]");
        match parse_document(&bad) {
            Err(Error::Schema { path, msg }) => {
                assert!(path.contains("continuation"), "{path}");
                assert!(msg.contains("common-knowledge"), "{msg}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn plan_document_compiles() {
        let text = r#"
schema = 1
kind = "plan"

[game]
p0 = [0.5, 0.5]
lambda1 = [0.3333333333333333]
lambda2 = [0.3333333333333333]

[[game.state]]
a = [[1.0, 0.0], [0.0, 0.0]]
b = [[3.0, 1.0], [1.0, 2.0]]

[[game.state]]
a = [[0.0, 0.0], [0.0, 1.0]]
b = [[3.0, 1.0], [1.0, 2.0]]

[plan]
prior = [0.5, 0.5]
y = [0.5, 0.5]

[[plan.signal]]
posterior = [0.5, 0.5]
weight = 1.0
gamma = [[0.5, 0.0], [0.0, 0.5]]
actions = []
"#;
        let doc = parse_document(text).unwrap();
        let GameDocument::Plan(p) = &doc else { panic!() };
        let spec = p.spec().unwrap();
        let plan = p.plan().unwrap();
        assert_eq!(plan.gammas[0], vec![0.5, 0.0, 0.0, 0.5]);
        assert_eq!(spec.states(), 2);
        let emitted = emit_document(&doc).unwrap();
        assert_eq!(parse_document(&emitted).unwrap(), doc);
    }
}
