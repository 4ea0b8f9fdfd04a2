//! Solver-agnostic mixed-integer model.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VarId(pub usize);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    Continuous,
    Binary,
}

/// What a variable means to the STL problem; used for naming and extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarRole {
    State { t: usize, i: usize },
    Input { t: usize, i: usize },
    Output { t: usize, i: usize },
    /// Satisfaction variable of the tree node with this preorder id.
    Sat { node: usize },
    Robustness,
    /// Selector bit `k` of the log-encoded SOS1 block owned by an Or-node.
    Sos1Selector { node: usize, k: usize },
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
    pub role: VarRole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, c)| c * values[v.0]).sum()
    }

    /// Amount by which `values` violate the row (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// Affine expression `constant + sum coef * var`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinExpr {
    pub constant: f64,
    pub terms: Vec<(VarId, f64)>,
}

impl LinExpr {
    pub fn constant(c: f64) -> Self {
        Self {
            constant: c,
            terms: Vec::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.terms.is_empty()
    }
}

impl From<VarId> for LinExpr {
    fn from(v: VarId) -> Self {
        Self {
            constant: 0.0,
            terms: vec![(v, 1.0)],
        }
    }
}

/// `min  linear·x + sum_i quadratic_i x_i^2`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Objective {
    pub linear: Vec<(VarId, f64)>,
    /// Diagonal quadratic terms.
    pub quadratic: Vec<(VarId, f64)>,
}

impl Objective {
    pub fn is_linear(&self) -> bool {
        self.quadratic.iter().all(|&(_, q)| q == 0.0)
    }

    pub fn evaluate(&self, values: &[f64]) -> f64 {
        let lin: f64 = self.linear.iter().map(|&(v, c)| c * values[v.0]).sum();
        let quad: f64 = self
            .quadratic
            .iter()
            .map(|&(v, q)| q * values[v.0] * values[v.0])
            .sum();
        lin + quad
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MilpModel {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub objective: Objective,
}

impl MilpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind, lower: f64, upper: f64, role: VarRole) -> VarId {
        debug_assert!(lower <= upper, "empty domain [{lower}, {upper}]");
        let (lower, upper) = match kind {
            VarKind::Binary => (lower.max(0.0), upper.min(1.0)),
            VarKind::Continuous => (lower, upper),
        };
        self.variables.push(Variable {
            name: name.into(),
            kind,
            lower,
            upper,
            role,
        });
        VarId(self.variables.len() - 1)
    }

    pub fn add_continuous(&mut self, name: impl Into<String>, lower: f64, upper: f64, role: VarRole) -> VarId {
        self.add_var(name, VarKind::Continuous, lower, upper, role)
    }

    pub fn add_binary(&mut self, name: impl Into<String>, role: VarRole) -> VarId {
        self.add_var(name, VarKind::Binary, 0.0, 1.0, role)
    }

    /// Adds a row, merging repeated variables and dropping zero coefficients.
    pub fn add_constraint(&mut self, name: impl Into<String>, terms: Vec<(VarId, f64)>, sense: Sense, rhs: f64) {
        let mut merged: Vec<(VarId, f64)> = Vec::with_capacity(terms.len());
        for (v, c) in terms {
            debug_assert!(v.0 < self.variables.len(), "undeclared variable {v}");
            match merged.iter_mut().find(|(w, _)| *w == v) {
                Some(slot) => slot.1 += c,
                None => merged.push((v, c)),
            }
        }
        merged.retain(|&(_, c)| c != 0.0);
        self.constraints.push(Constraint {
            name: name.into(),
            terms: merged,
            sense,
            rhs,
        });
    }

    /// Adds `expr (sense) rhs` with the expression's constant moved to the right.
    pub fn add_expr_constraint(&mut self, name: impl Into<String>, expr: LinExpr, sense: Sense, rhs: f64) {
        self.add_constraint(name, expr.terms, sense, rhs - expr.constant);
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn binary_count(&self) -> usize {
        self.variables.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    pub fn continuous_count(&self) -> usize {
        self.num_vars() - self.binary_count()
    }

    pub fn binaries(&self) -> Vec<VarId> {
        self.variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.kind == VarKind::Binary)
            .map(|(i, _)| VarId(i))
            .collect()
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.variables[id.0]
    }

    pub fn find(&self, name: &str) -> Option<VarId> {
        self.variables.iter().position(|v| v.name == name).map(VarId)
    }

    /// Structural checks: known variables, ordered bounds, unique names.
    pub fn validate(&self) -> Result<(), String> {
        let mut names = std::collections::HashSet::new();
        for v in &self.variables {
            if !(v.lower <= v.upper) {
                return Err(format!("variable {} has bounds [{}, {}]", v.name, v.lower, v.upper));
            }
            if !names.insert(v.name.as_str()) {
                return Err(format!("duplicate variable name {}", v.name));
            }
        }
        for c in &self.constraints {
            if let Some((v, _)) = c.terms.iter().find(|(v, _)| v.0 >= self.variables.len()) {
                return Err(format!("constraint {} references undeclared {v}", c.name));
            }
        }
        for &(v, _) in self.objective.linear.iter().chain(&self.objective.quadratic) {
            if v.0 >= self.variables.len() {
                return Err(format!("objective references undeclared {v}"));
            }
        }
        Ok(())
    }

    /// Largest row or bound violation of `values`.
    pub fn max_violation(&self, values: &[f64]) -> (f64, Option<String>) {
        let mut worst = (0.0, None);
        for c in &self.constraints {
            let v = c.violation(values);
            if v > worst.0 {
                worst = (v, Some(c.name.clone()));
            }
        }
        for (var, &x) in self.variables.iter().zip(values) {
            let v = (var.lower - x).max(x - var.upper).max(0.0);
            if v > worst.0 {
                worst = (v, Some(format!("bounds of {}", var.name)));
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_terms_and_count() {
        let mut m = MilpModel::new();
        let x = m.add_continuous("x", 0.0, 1.0, VarRole::Other);
        let z = m.add_binary("z", VarRole::Other);
        m.add_constraint("c", vec![(x, 1.0), (z, 2.0), (x, -1.0)], Sense::Le, 1.0);
        assert_eq!(m.constraints[0].terms, vec![(z, 2.0)]);
        assert_eq!(m.binary_count(), 1);
        assert_eq!(m.continuous_count(), 1);
        m.validate().unwrap();
        assert_eq!(m.max_violation(&[0.5, 1.0]).0, 1.0);
    }

    #[test]
    fn expr_constant_moves_right() {
        let mut m = MilpModel::new();
        let z = m.add_continuous("z", 0.0, 1.0, VarRole::Other);
        let e = LinExpr {
            constant: 1.0,
            terms: vec![(z, -1.0)],
        };
        m.add_expr_constraint("c", e, Sense::Le, 0.25);
        assert_eq!(m.constraints[0].rhs, -0.75);
    }

    #[test]
    fn validate_catches_duplicates() {
        let mut m = MilpModel::new();
        m.add_continuous("x", 0.0, 1.0, VarRole::Other);
        m.add_continuous("x", 0.0, 1.0, VarRole::Other);
        assert!(m.validate().is_err());
    }
}
