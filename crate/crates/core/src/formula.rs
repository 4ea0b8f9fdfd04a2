//! STL syntax, the expanded STL tree, and the exact robustness semantics.
//!
//! Formulas are kept in positive normal form structurally: there is no
//! negation constructor, negation is resolved on affine predicates.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormulaError {
    #[error("signal too short: formula needs samples up to t={needed}, signal ends at t={last}")]
    SignalTooShort { needed: usize, last: usize },
    #[error("malformed interval [{start},{end}]")]
    MalformedInterval { start: usize, end: usize },
    #[error("{0} requires at least one operand")]
    EmptyOperands(&'static str),
    #[error("predicate has {got} coefficients but the signal has dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Affine predicate `a·y - b <= 0`.
///
/// Equality ignores `name`: two predicates are the same constraint when their
/// coefficients agree.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Predicate {
    pub name: String,
    pub a: Vec<f64>,
    pub b: f64,
}

impl PartialEq for Predicate {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a && self.b == other.b
    }
}

impl Predicate {
    pub fn new(name: impl Into<String>, a: Vec<f64>, b: f64) -> Self {
        Self { name: name.into(), a, b }
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    /// `g(y) = a·y - b`.
    pub fn value(&self, y: &[f64]) -> f64 {
        self.a.iter().zip(y).map(|(a, y)| a * y).sum::<f64>() - self.b
    }

    /// `-g(y)`, the predicate's robustness at a single sample.
    pub fn robustness(&self, y: &[f64]) -> f64 {
        -self.value(y)
    }

    /// Complement with non-strict inequality: `-a·y + b <= 0`.
    pub fn negated(&self) -> Predicate {
        let name = match self.name.strip_prefix('!') {
            Some(inner) => inner.to_string(),
            None => format!("!{}", self.name),
        };
        Predicate {
            name,
            a: self.a.iter().map(|v| -v).collect(),
            b: -self.b,
        }
    }
}

/// Closed integer window `[start, end]` of timesteps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    start: usize,
    end: usize,
}

impl Interval {
    pub fn new(start: usize, end: usize) -> Result<Self, FormulaError> {
        if start > end {
            return Err(FormulaError::MalformedInterval { start, end });
        }
        Ok(Self { start, end })
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> {
        self.start..=self.end
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Formula {
    Pred(Predicate),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Always(Interval, Box<Formula>),
    Eventually(Interval, Box<Formula>),
    /// `lhs U[a,b] rhs`: `rhs` holds at some `t'` in the window and `lhs`
    /// holds at every step from the evaluation time up to `t' - 1`.
    Until(Interval, Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn pred(p: Predicate) -> Self {
        Formula::Pred(p)
    }

    pub fn and(children: Vec<Formula>) -> Result<Self, FormulaError> {
        if children.is_empty() {
            return Err(FormulaError::EmptyOperands("conjunction"));
        }
        Ok(Formula::And(children))
    }

    pub fn or(children: Vec<Formula>) -> Result<Self, FormulaError> {
        if children.is_empty() {
            return Err(FormulaError::EmptyOperands("disjunction"));
        }
        Ok(Formula::Or(children))
    }

    pub fn always(start: usize, end: usize, f: Formula) -> Result<Self, FormulaError> {
        Ok(Formula::Always(Interval::new(start, end)?, Box::new(f)))
    }

    pub fn eventually(start: usize, end: usize, f: Formula) -> Result<Self, FormulaError> {
        Ok(Formula::Eventually(Interval::new(start, end)?, Box::new(f)))
    }

    pub fn until(start: usize, end: usize, lhs: Formula, rhs: Formula) -> Result<Self, FormulaError> {
        Ok(Formula::Until(
            Interval::new(start, end)?,
            Box::new(lhs),
            Box::new(rhs),
        ))
    }

    /// Number of timesteps after which satisfaction is fixed.
    pub fn horizon(&self) -> usize {
        match self {
            Formula::Pred(_) => 0,
            Formula::And(cs) | Formula::Or(cs) => cs.iter().map(Formula::horizon).max().unwrap_or(0),
            Formula::Always(i, g) | Formula::Eventually(i, g) => i.end() + g.horizon(),
            Formula::Until(i, g, h) => i.end() + g.horizon().max(h.horizon()),
        }
    }

    /// Visits every predicate occurrence in syntax order.
    pub fn predicates(&self) -> Vec<&Predicate> {
        let mut out = Vec::new();
        self.collect_predicates(&mut out);
        out
    }

    fn collect_predicates<'a>(&'a self, out: &mut Vec<&'a Predicate>) {
        match self {
            Formula::Pred(p) => out.push(p),
            Formula::And(cs) | Formula::Or(cs) => cs.iter().for_each(|c| c.collect_predicates(out)),
            Formula::Always(_, g) | Formula::Eventually(_, g) => g.collect_predicates(out),
            Formula::Until(_, g, h) => {
                g.collect_predicates(out);
                h.collect_predicates(out);
            }
        }
    }

    /// Robustness of the formula on `signal` evaluated at time `t`.
    pub fn robustness(&self, signal: &Signal, t: usize) -> Result<f64, FormulaError> {
        let needed = t + self.horizon();
        if needed > signal.last_time() || signal.is_empty() {
            return Err(FormulaError::SignalTooShort {
                needed,
                last: signal.last_time(),
            });
        }
        for p in self.predicates() {
            if p.dim() != signal.dim() {
                return Err(FormulaError::DimensionMismatch {
                    expected: signal.dim(),
                    got: p.dim(),
                });
            }
        }
        Ok(self.rho(signal, t))
    }

    /// `robustness(signal, 0) >= 0`.
    pub fn is_satisfied(&self, signal: &Signal) -> Result<bool, FormulaError> {
        Ok(self.robustness(signal, 0)? >= 0.0)
    }

    fn rho(&self, y: &Signal, t: usize) -> f64 {
        match self {
            Formula::Pred(p) => p.robustness(y.at(t)),
            Formula::And(cs) => cs.iter().map(|c| c.rho(y, t)).fold(f64::INFINITY, f64::min),
            Formula::Or(cs) => cs.iter().map(|c| c.rho(y, t)).fold(f64::NEG_INFINITY, f64::max),
            Formula::Always(i, g) => i.iter().map(|k| g.rho(y, t + k)).fold(f64::INFINITY, f64::min),
            Formula::Eventually(i, g) => i
                .iter()
                .map(|k| g.rho(y, t + k))
                .fold(f64::NEG_INFINITY, f64::max),
            Formula::Until(i, g, h) => {
                let mut best = f64::NEG_INFINITY;
                for k in i.iter() {
                    let tp = t + k;
                    let prefix = (t..tp).map(|s| g.rho(y, s)).fold(f64::INFINITY, f64::min);
                    best = best.max(h.rho(y, tp).min(prefix));
                }
                best
            }
        }
    }
}

/// Sampled output signal `y_0 .. y_T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    samples: Vec<Vec<f64>>,
}

impl Signal {
    pub fn new(samples: Vec<Vec<f64>>) -> Result<Self, FormulaError> {
        if let Some(first) = samples.first() {
            let p = first.len();
            if let Some(bad) = samples.iter().find(|s| s.len() != p) {
                return Err(FormulaError::DimensionMismatch {
                    expected: p,
                    got: bad.len(),
                });
            }
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn at(&self, t: usize) -> &[f64] {
        &self.samples[t]
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last_time(&self) -> usize {
        self.samples.len().saturating_sub(1)
    }

    pub fn dim(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Combination {
    And,
    Or,
}

/// Formula expanded over absolute timesteps.
///
/// Nodes are addressed by their preorder index (`0` is the root); the encoder
/// attaches one satisfaction variable per index.
#[derive(Debug, Clone, PartialEq)]
pub enum StlTree {
    Leaf {
        predicate: Predicate,
        time: usize,
    },
    Node {
        combination: Combination,
        children: Vec<StlTree>,
        child_times: Vec<usize>,
    },
}

impl StlTree {
    /// Expands `f` evaluated at absolute time `t0`.
    pub fn build(f: &Formula, t0: usize) -> StlTree {
        match f {
            Formula::Pred(p) => StlTree::Leaf {
                predicate: p.clone(),
                time: t0,
            },
            Formula::And(cs) => Self::node(Combination::And, cs.iter().map(|c| (Self::build(c, t0), t0))),
            Formula::Or(cs) => Self::node(Combination::Or, cs.iter().map(|c| (Self::build(c, t0), t0))),
            Formula::Always(i, g) => Self::node(
                Combination::And,
                i.iter().map(|k| (Self::build(g, t0 + k), t0 + k)),
            ),
            Formula::Eventually(i, g) => Self::node(
                Combination::Or,
                i.iter().map(|k| (Self::build(g, t0 + k), t0 + k)),
            ),
            Formula::Until(i, g, h) => Self::node(
                Combination::Or,
                i.iter().map(|k| {
                    let tp = t0 + k;
                    let parts = std::iter::once((Self::build(h, tp), tp))
                        .chain((t0..tp).map(|s| (Self::build(g, s), s)));
                    (Self::node(Combination::And, parts), tp)
                }),
            ),
        }
    }

    fn node(combination: Combination, parts: impl Iterator<Item = (StlTree, usize)>) -> StlTree {
        let (children, child_times) = parts.unzip();
        StlTree::Node {
            combination,
            children,
            child_times,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, StlTree::Leaf { .. })
    }

    pub fn combination(&self) -> Option<Combination> {
        match self {
            StlTree::Leaf { .. } => None,
            StlTree::Node { combination, .. } => Some(*combination),
        }
    }

    pub fn children(&self) -> &[StlTree] {
        match self {
            StlTree::Leaf { .. } => &[],
            StlTree::Node { children, .. } => children,
        }
    }

    /// Splices every internal child that shares its parent's combination
    /// into the parent, until no such pair remains.
    pub fn flatten(&self) -> StlTree {
        match self {
            StlTree::Leaf { .. } => self.clone(),
            StlTree::Node {
                combination,
                children,
                child_times,
            } => {
                let mut out_children = Vec::with_capacity(children.len());
                let mut out_times = Vec::with_capacity(children.len());
                for (child, &t) in children.iter().zip(child_times) {
                    match child.flatten() {
                        StlTree::Node {
                            combination: c,
                            children: gc,
                            child_times: gt,
                        } if c == *combination => {
                            out_children.extend(gc);
                            out_times.extend(gt);
                        }
                        flat => {
                            out_children.push(flat);
                            out_times.push(t);
                        }
                    }
                }
                StlTree::Node {
                    combination: *combination,
                    children: out_children,
                    child_times: out_times,
                }
            }
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(StlTree::node_count).sum::<usize>()
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            StlTree::Leaf { .. } => 1,
            StlTree::Node { children, .. } => children.iter().map(StlTree::leaf_count).sum(),
        }
    }

    /// Largest timestep referenced by any leaf.
    pub fn max_time(&self) -> usize {
        match self {
            StlTree::Leaf { time, .. } => *time,
            StlTree::Node { children, .. } => children.iter().map(StlTree::max_time).max().unwrap_or(0),
        }
    }

    /// Preorder traversal with node ids.
    pub fn preorder(&self) -> Vec<&StlTree> {
        let mut out = Vec::with_capacity(self.node_count());
        let mut stack = vec![self];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(n.children().iter().rev());
        }
        out
    }

    /// Robustness of the tree on `signal`; leaves carry absolute times.
    pub fn robustness(&self, signal: &Signal) -> Result<f64, FormulaError> {
        let needed = self.max_time();
        if signal.is_empty() || needed > signal.last_time() {
            return Err(FormulaError::SignalTooShort {
                needed,
                last: signal.last_time(),
            });
        }
        Ok(self.rho(signal))
    }

    fn rho(&self, y: &Signal) -> f64 {
        match self {
            StlTree::Leaf { predicate, time } => predicate.robustness(y.at(*time)),
            StlTree::Node {
                combination: Combination::And,
                children,
                ..
            } => children.iter().map(|c| c.rho(y)).fold(f64::INFINITY, f64::min),
            StlTree::Node {
                combination: Combination::Or,
                children,
                ..
            } => children.iter().map(|c| c.rho(y)).fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Robustness of every node, indexed by preorder id.
    pub fn node_robustness(&self, signal: &Signal) -> Result<Vec<f64>, FormulaError> {
        self.robustness(signal)?;
        Ok(self.preorder().iter().map(|n| n.rho(signal)).collect())
    }

    pub fn count_disjunctions(&self) -> DisjunctionCounts {
        let per_or: Vec<usize> = self
            .preorder()
            .into_iter()
            .filter(|n| n.combination() == Some(Combination::Or))
            .map(|n| n.children().len())
            .collect();
        DisjunctionCounts {
            predicted_binaries: per_or.iter().map(|&n| log2_ceil(n + 1)).sum(),
            leaf_count: self.leaf_count(),
            per_or,
        }
    }
}

/// Or-node sizes of a tree and the binary count they imply.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DisjunctionCounts {
    /// `N_i` for every Or-node, in preorder.
    pub per_or: Vec<usize>,
    pub leaf_count: usize,
    /// `sum_i ceil(log2(N_i + 1))`.
    pub predicted_binaries: usize,
}

/// `ceil(log2(n))` for `n >= 1`.
pub fn log2_ceil(n: usize) -> usize {
    assert!(n >= 1, "log2_ceil of zero");
    (usize::BITS - (n - 1).leading_zeros()) as usize
}
