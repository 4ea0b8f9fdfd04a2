//! Mixed-integer encodings of STL synthesis problems.
//!
//! Two encodings share the dynamics block and the robustness variable:
//!
//! * [`Encoding::Proposed`]: continuous satisfaction variables on every tree
//!   node, big-M rows on leaves, `z <= z_child` on conjunctions, and a
//!   logarithmic SOS1 block on `[1 - z, z_1, .., z_N]` for every disjunction.
//!   Only the SOS1 selectors are binary.
//! * [`Encoding::Standard`]: one binary per leaf (predicate occurrence at a
//!   timestep), with `z <= sum z_child` on disjunctions.

mod model;
mod proposed;
mod sos1;
mod standard;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use model::{Constraint, LinExpr, MilpModel, Objective, Sense, VarId, VarKind, VarRole, Variable};
pub use proposed::encode_proposed;
pub use sos1::{encode_sos1_log, Sos1Block};
pub use standard::encode_standard;

use crate::formula::{Combination, Formula, Predicate, StlTree};
use crate::system::LinearSystem;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EncodeError {
    #[error("invalid encoder configuration: {0}")]
    Config(String),
    #[error("formula needs {needed} timesteps but the horizon is {horizon}")]
    HorizonOverflow { needed: usize, horizon: usize },
    #[error("output bounds must be finite to derive big-M")]
    UnboundedOutputs,
    #[error("SOS1 block needs at least one entry")]
    EmptySos1,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    Proposed,
    Standard,
}

impl std::fmt::Display for Encoding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Encoding::Proposed => "proposed",
            Encoding::Standard => "standard",
        })
    }
}

impl std::str::FromStr for Encoding {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "proposed" => Ok(Encoding::Proposed),
            "standard" => Ok(Encoding::Standard),
            other => Err(format!("unknown encoding `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderConfig {
    pub encoding: Encoding,
    pub flatten: bool,
    /// Big-M constant; derived from the output box when `None`.
    pub big_m: Option<f64>,
    /// Upper bound on the robustness variable; derived when `None`.
    pub rho_max: Option<f64>,
    /// Diagonal of the state cost `Q` (empty means zero).
    pub q_diag: Vec<f64>,
    /// Diagonal of the input cost `R` (empty means zero).
    pub r_diag: Vec<f64>,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self {
            encoding: Encoding::Proposed,
            flatten: false,
            big_m: None,
            rho_max: None,
            q_diag: Vec::new(),
            r_diag: Vec::new(),
        }
    }
}

impl EncoderConfig {
    pub fn new(encoding: Encoding) -> Self {
        Self {
            encoding,
            ..Self::default()
        }
    }

    pub fn flatten(mut self, on: bool) -> Self {
        self.flatten = on;
        self
    }
}

/// Configuration after big-M and `rho_max` have been fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub encoding: Encoding,
    pub flatten: bool,
    pub big_m: f64,
    pub rho_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrNodeStats {
    pub node: usize,
    pub children: usize,
    pub binaries: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingStats {
    pub encoding: Encoding,
    pub binary_count: usize,
    pub continuous_count: usize,
    pub constraint_count: usize,
    pub leaf_count: usize,
    pub or_nodes: Vec<OrNodeStats>,
}

impl EncodingStats {
    fn from_model(encoding: Encoding, model: &MilpModel, tree: &StlTree, or_nodes: Vec<OrNodeStats>) -> Self {
        Self {
            encoding,
            binary_count: model.binary_count(),
            continuous_count: model.continuous_count(),
            constraint_count: model.constraints.len(),
            leaf_count: tree.leaf_count(),
            or_nodes,
        }
    }
}

/// Variables of the dynamics block, indexed `[t][i]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DynamicsVars {
    pub x: Vec<Vec<VarId>>,
    pub u: Vec<Vec<VarId>>,
    pub y: Vec<Vec<VarId>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemVars {
    pub dynamics: DynamicsVars,
    pub rho: VarId,
    /// Satisfaction variable per tree node, by preorder id.
    pub sat: Vec<VarId>,
}

/// A fully encoded synthesis problem with everything needed to verify a solution.
#[derive(Debug, Clone)]
pub struct EncodedProblem {
    pub formula: Formula,
    pub tree: StlTree,
    pub system: LinearSystem,
    pub x0: Vec<f64>,
    pub horizon: usize,
    pub config: ResolvedConfig,
    pub model: MilpModel,
    pub vars: ProblemVars,
    pub stats: EncodingStats,
}

/// Adds `x`, `u`, `y` for `t = 0..=horizon` with box bounds, the state and
/// output equations, and `x_0 = x0`.
pub fn encode_dynamics(model: &mut MilpModel, sys: &LinearSystem, x0: &[f64], horizon: usize) -> DynamicsVars {
    let (n, m, p) = (sys.n(), sys.m(), sys.p());
    let mut vars = DynamicsVars::default();
    for t in 0..=horizon {
        vars.x.push(
            (0..n)
                .map(|i| {
                    let (lo, hi) = sys.x_bounds[i];
                    model.add_continuous(format!("x_{t}_{i}"), lo, hi, VarRole::State { t, i })
                })
                .collect(),
        );
        vars.u.push(
            (0..m)
                .map(|i| {
                    let (lo, hi) = sys.u_bounds[i];
                    model.add_continuous(format!("u_{t}_{i}"), lo, hi, VarRole::Input { t, i })
                })
                .collect(),
        );
        vars.y.push(
            (0..p)
                .map(|i| {
                    let (lo, hi) = sys.y_bounds[i];
                    model.add_continuous(format!("y_{t}_{i}"), lo, hi, VarRole::Output { t, i })
                })
                .collect(),
        );
    }
    for (i, &v) in x0.iter().enumerate() {
        model.add_constraint(format!("init_{i}"), vec![(vars.x[0][i], 1.0)], Sense::Eq, v);
    }
    for t in 0..horizon {
        for i in 0..n {
            let mut terms = vec![(vars.x[t + 1][i], 1.0)];
            terms.extend((0..n).map(|j| (vars.x[t][j], -sys.a[(i, j)])));
            terms.extend((0..m).map(|j| (vars.u[t][j], -sys.b[(i, j)])));
            model.add_constraint(format!("dyn_{t}_{i}"), terms, Sense::Eq, 0.0);
        }
    }
    for t in 0..=horizon {
        for i in 0..p {
            let mut terms = vec![(vars.y[t][i], 1.0)];
            terms.extend((0..n).map(|j| (vars.x[t][j], -sys.c[(i, j)])));
            terms.extend((0..m).map(|j| (vars.u[t][j], -sys.d[(i, j)])));
            model.add_constraint(format!("out_{t}_{i}"), terms, Sense::Eq, 0.0);
        }
    }
    vars
}

/// Range of `a·y - b` over the box, by interval arithmetic.
fn predicate_range(pred: &Predicate, y_bounds: &[(f64, f64)]) -> (f64, f64) {
    let (mut lo, mut hi) = (-pred.b, -pred.b);
    for (&a, &(l, h)) in pred.a.iter().zip(y_bounds) {
        lo += (a * l).min(a * h);
        hi += (a * l).max(a * h);
    }
    (lo, hi)
}

/// `rho_max + max_p max_{y in box} |a·y - b|`.
pub fn derive_big_m<'a>(
    sys: &LinearSystem,
    predicates: impl IntoIterator<Item = &'a Predicate>,
    rho_max: f64,
) -> Result<f64, EncodeError> {
    if sys.y_bounds.iter().any(|(l, h)| !l.is_finite() || !h.is_finite()) {
        return Err(EncodeError::UnboundedOutputs);
    }
    let worst = predicates
        .into_iter()
        .map(|p| {
            let (lo, hi) = predicate_range(p, &sys.y_bounds);
            lo.abs().max(hi.abs())
        })
        .fold(0.0, f64::max);
    Ok(rho_max + worst)
}

/// Upper bound on the robustness any output signal inside the box can reach.
///
/// Leaves use interval arithmetic; conjunctions of predicates sharing a
/// timestep are bounded jointly by `max_y min_i -g_i(y)`, which captures that
/// a point can only be deep inside a box up to its half-width.
pub fn robustness_upper_bound(tree: &StlTree, y_bounds: &[(f64, f64)]) -> f64 {
    let mut cache = HashMap::new();
    upper_bound(tree, y_bounds, &mut cache)
}

type GroupKey = Vec<(Vec<u64>, u64)>;

fn upper_bound(tree: &StlTree, y_bounds: &[(f64, f64)], cache: &mut HashMap<GroupKey, f64>) -> f64 {
    match tree {
        StlTree::Leaf { predicate, .. } => -predicate_range(predicate, y_bounds).0,
        StlTree::Node {
            combination: Combination::Or,
            children,
            ..
        } => children
            .iter()
            .map(|c| upper_bound(c, y_bounds, cache))
            .fold(f64::NEG_INFINITY, f64::max),
        StlTree::Node {
            combination: Combination::And,
            children,
            ..
        } => {
            let mut best = f64::INFINITY;
            let mut groups: Vec<(usize, Vec<&Predicate>)> = Vec::new();
            for c in children {
                match c {
                    StlTree::Leaf { predicate, time } => match groups.iter_mut().find(|(t, _)| t == time) {
                        Some((_, g)) => g.push(predicate),
                        None => groups.push((*time, vec![predicate])),
                    },
                    _ => best = best.min(upper_bound(c, y_bounds, cache)),
                }
            }
            for (_, g) in groups {
                best = best.min(joint_bound(&g, y_bounds, cache));
            }
            best
        }
    }
}

fn joint_bound(preds: &[&Predicate], y_bounds: &[(f64, f64)], cache: &mut HashMap<GroupKey, f64>) -> f64 {
    let single = preds
        .iter()
        .map(|p| -predicate_range(p, y_bounds).0)
        .fold(f64::INFINITY, f64::min);
    if preds.len() < 2 {
        return single;
    }
    let mut key: GroupKey = preds
        .iter()
        .map(|p| (p.a.iter().map(|v| v.to_bits()).collect(), p.b.to_bits()))
        .collect();
    key.sort();
    if let Some(&v) = cache.get(&key) {
        return v;
    }
    // max s  s.t.  s + a_i·y <= b_i,  y in box
    let mut m = MilpModel::new();
    let floor = preds
        .iter()
        .map(|p| -predicate_range(p, y_bounds).1)
        .fold(f64::INFINITY, f64::min);
    let s = m.add_continuous("s", floor.min(single), single, VarRole::Other);
    let ys: Vec<VarId> = y_bounds
        .iter()
        .enumerate()
        .map(|(i, &(lo, hi))| m.add_continuous(format!("y{i}"), lo, hi, VarRole::Other))
        .collect();
    for (k, p) in preds.iter().enumerate() {
        let mut terms = vec![(s, 1.0)];
        terms.extend(p.a.iter().zip(&ys).map(|(&a, &y)| (y, a)));
        m.add_constraint(format!("p{k}"), terms, Sense::Le, p.b);
    }
    m.objective.linear.push((s, -1.0));
    let value = match crate::solver::solve_lp(&m) {
        Ok(r) if r.status == crate::solver::LpStatus::Optimal => -r.objective,
        // infeasible means the predicates cannot hold together anywhere in the box
        Ok(_) => floor.min(single),
        Err(_) => single,
    };
    cache.insert(key, value);
    value
}

/// Fixes big-M and `rho_max` for `tree` under `cfg`.
pub fn resolve_config(tree: &StlTree, sys: &LinearSystem, cfg: &EncoderConfig) -> Result<ResolvedConfig, EncodeError> {
    let rho_max = match cfg.rho_max {
        Some(r) => r,
        None => robustness_upper_bound(tree, &sys.y_bounds).max(0.0),
    };
    if !(rho_max >= 0.0) || !rho_max.is_finite() {
        return Err(EncodeError::Config(format!("rho_max must be finite and >= 0, got {rho_max}")));
    }
    let leaves: Vec<&Predicate> = tree
        .preorder()
        .into_iter()
        .filter_map(|n| match n {
            StlTree::Leaf { predicate, .. } => Some(predicate),
            _ => None,
        })
        .collect();
    let big_m = match cfg.big_m {
        Some(m) => m,
        None => {
            let m = derive_big_m(sys, leaves, rho_max)?;
            if m > 0.0 {
                m
            } else {
                1.0
            }
        }
    };
    if !(big_m > 0.0) || !big_m.is_finite() {
        return Err(EncodeError::Config(format!("big-M must be positive, got {big_m}")));
    }
    if rho_max > big_m {
        return Err(EncodeError::Config(format!("rho_max {rho_max} exceeds big-M {big_m}")));
    }
    Ok(ResolvedConfig {
        encoding: cfg.encoding,
        flatten: cfg.flatten,
        big_m,
        rho_max,
    })
}

pub(crate) fn check_inputs(
    tree: &StlTree,
    sys: &LinearSystem,
    x0: &[f64],
    horizon: usize,
    cfg: &EncoderConfig,
) -> Result<(), EncodeError> {
    sys.validate().map_err(|e| EncodeError::Dimension(e.to_string()))?;
    if x0.len() != sys.n() {
        return Err(EncodeError::Dimension(format!("x0 has length {}, expected {}", x0.len(), sys.n())));
    }
    let needed = tree.max_time();
    if needed > horizon {
        return Err(EncodeError::HorizonOverflow { needed, horizon });
    }
    for n in tree.preorder() {
        if let StlTree::Leaf { predicate, .. } = n {
            if predicate.dim() != sys.p() {
                return Err(EncodeError::Dimension(format!(
                    "predicate {} has {} coefficients, system output has {}",
                    predicate.name,
                    predicate.dim(),
                    sys.p()
                )));
            }
        }
    }
    let bad_len = |v: &Vec<f64>, n: usize| !v.is_empty() && v.len() != n;
    if bad_len(&cfg.q_diag, sys.n()) || bad_len(&cfg.r_diag, sys.m()) {
        return Err(EncodeError::Config("Q/R diagonal length mismatch".into()));
    }
    if cfg.q_diag.iter().chain(&cfg.r_diag).any(|&q| !(q >= 0.0)) {
        return Err(EncodeError::Config("Q and R must be positive semidefinite".into()));
    }
    Ok(())
}

/// `-rho + sum_t x_t' Q x_t + u_t' R u_t` with diagonal `Q`, `R`.
pub(crate) fn set_objective(model: &mut MilpModel, dynamics: &DynamicsVars, rho: VarId, cfg: &EncoderConfig) {
    model.objective.linear = vec![(rho, -1.0)];
    let mut quad = Vec::new();
    for (xs, us) in dynamics.x.iter().zip(&dynamics.u) {
        quad.extend(xs.iter().zip(&cfg.q_diag).filter(|(_, &q)| q != 0.0).map(|(&v, &q)| (v, q)));
        quad.extend(us.iter().zip(&cfg.r_diag).filter(|(_, &r)| r != 0.0).map(|(&v, &r)| (v, r)));
    }
    model.objective.quadratic = quad;
}

/// Preorder ids of each node's children.
pub(crate) fn child_ids(tree: &StlTree) -> Vec<Vec<usize>> {
    fn walk(t: &StlTree, next: &mut usize, out: &mut Vec<Vec<usize>>) -> usize {
        let id = *next;
        *next += 1;
        out.push(Vec::new());
        let mut kids = Vec::with_capacity(t.children().len());
        for c in t.children() {
            kids.push(walk(c, next, out));
        }
        out[id] = kids;
        id
    }
    let mut out = Vec::with_capacity(tree.node_count());
    walk(tree, &mut 0, &mut out);
    out
}

/// Dynamics, robustness, one satisfaction variable per node, leaf big-M
/// rows, conjunction rows and the root row. Disjunctions are left to the
/// caller.
pub(crate) fn encode_skeleton(
    tree: &StlTree,
    sys: &LinearSystem,
    x0: &[f64],
    horizon: usize,
    cfg: &EncoderConfig,
    leaf_kind: VarKind,
) -> Result<(MilpModel, ProblemVars, ResolvedConfig, Vec<Vec<usize>>), EncodeError> {
    check_inputs(tree, sys, x0, horizon, cfg)?;
    let resolved = resolve_config(tree, sys, cfg)?;
    let mut model = MilpModel::new();
    let dynamics = encode_dynamics(&mut model, sys, x0, horizon);
    let rho = model.add_continuous("rho", 0.0, resolved.rho_max, VarRole::Robustness);
    let nodes = tree.preorder();
    let sat: Vec<VarId> = nodes
        .iter()
        .enumerate()
        .map(|(id, n)| {
            let kind = if n.is_leaf() { leaf_kind } else { VarKind::Continuous };
            model.add_var(format!("z_{id}"), kind, 0.0, 1.0, VarRole::Sat { node: id })
        })
        .collect();
    let kids = child_ids(tree);
    let big_m = resolved.big_m;
    for (id, n) in nodes.iter().enumerate() {
        match n {
            // rho + a·y_t + M z <= b + M
            StlTree::Leaf { predicate, time } => {
                let mut terms = vec![(rho, 1.0), (sat[id], big_m)];
                terms.extend(predicate.a.iter().zip(&dynamics.y[*time]).map(|(&a, &y)| (y, a)));
                model.add_constraint(format!("leaf_{id}"), terms, Sense::Le, predicate.b + big_m);
            }
            StlTree::Node {
                combination: Combination::And,
                ..
            } => {
                for &c in &kids[id] {
                    model.add_constraint(format!("and_{id}_{c}"), vec![(sat[id], 1.0), (sat[c], -1.0)], Sense::Le, 0.0);
                }
            }
            StlTree::Node { .. } => {}
        }
    }
    model.add_constraint("root", vec![(sat[0], 1.0)], Sense::Eq, 1.0);
    set_objective(&mut model, &dynamics, rho, cfg);
    Ok((model, ProblemVars { dynamics, rho, sat }, resolved, kids))
}

/// Encodes `formula` over `horizon` timesteps with the encoding chosen in `cfg`.
pub fn encode(
    formula: &Formula,
    sys: &LinearSystem,
    x0: &[f64],
    horizon: usize,
    cfg: &EncoderConfig,
) -> Result<EncodedProblem, EncodeError> {
    let tree = StlTree::build(formula, 0);
    let tree = if cfg.flatten { tree.flatten() } else { tree };
    let (model, vars, stats, config) = match cfg.encoding {
        Encoding::Proposed => encode_proposed(&tree, sys, x0, horizon, cfg)?,
        Encoding::Standard => encode_standard(&tree, sys, x0, horizon, cfg)?,
    };
    Ok(EncodedProblem {
        formula: formula.clone(),
        tree,
        system: sys.clone(),
        x0: x0.to_vec(),
        horizon,
        config,
        model,
        vars,
        stats,
    })
}

/// Everything the encoders return.
pub type Encoded = (MilpModel, ProblemVars, EncodingStats, ResolvedConfig);
