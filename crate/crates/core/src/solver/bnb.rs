//! Best-bound branch-and-bound over the simplex relaxation.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::lp::{LpStatus, Simplex};
use super::SolverError;
use crate::encoder::{MilpModel, VarId};

pub const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchRule {
    MostFractional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchOrder {
    BestBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BnBOptions {
    pub abs_gap: f64,
    pub node_limit: usize,
    pub time_limit_ms: Option<u64>,
    pub branch_rule: BranchRule,
    pub search: SearchOrder,
}

impl Default for BnBOptions {
    fn default() -> Self {
        Self {
            abs_gap: 1e-6,
            node_limit: 1_000_000,
            time_limit_ms: None,
            branch_rule: BranchRule::MostFractional,
            search: SearchOrder::BestBound,
        }
    }
}

impl BnBOptions {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.abs_gap >= 0.0) || self.node_limit == 0 || self.time_limit_ms == Some(0) {
            return Err(SolverError::Options(format!("{self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MilpStatus {
    Optimal,
    Infeasible,
    NodeLimit,
    TimeLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BnBResult {
    pub status: MilpStatus,
    pub objective: Option<f64>,
    pub values: Option<Vec<f64>>,
    pub nodes: usize,
    /// Incumbent minus the best bound still unresolved.
    pub gap: f64,
    /// `(node count, objective)` each time the incumbent improved.
    pub incumbents: Vec<(usize, f64)>,
    pub lp_iterations: usize,
}

struct Node {
    id: usize,
    depth: usize,
    bound: f64,
    fixings: Vec<(usize, f64)>,
}

// BinaryHeap pops the greatest element: lowest bound, then deepest, then lowest id.
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.id.cmp(&self.id))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

/// Minimises the model's linear objective over its binaries.
pub fn branch_and_bound(model: &MilpModel, opts: &BnBOptions) -> Result<BnBResult, SolverError> {
    opts.validate()?;
    let start = Instant::now();
    let mut lp = Simplex::new(model)?;
    let binaries: Vec<usize> = model.binaries().into_iter().map(|v: VarId| v.0).collect();
    let base_lo: Vec<f64> = model.variables.iter().map(|v| v.lower).collect();
    let base_hi: Vec<f64> = model.variables.iter().map(|v| v.upper).collect();

    let mut heap = BinaryHeap::new();
    heap.push(Node {
        id: 0,
        depth: 0,
        bound: f64::NEG_INFINITY,
        fixings: Vec::new(),
    });
    let mut next_id = 1;
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut incumbents = Vec::new();
    let mut pruned_bound = f64::INFINITY;
    let mut nodes = 0;
    let mut status = MilpStatus::Optimal;

    let solve_with = |lp: &mut Simplex, fixings: &[(usize, f64)]| -> Result<LpStatus, SolverError> {
        let mut lo = base_lo.clone();
        let mut hi = base_hi.clone();
        for &(j, v) in fixings {
            lo[j] = v;
            hi[j] = v;
        }
        lp.set_bounds(&lo, &hi);
        lp.solve()
    };

    while let Some(node) = heap.pop() {
        if let Some((inc, _)) = &incumbent {
            if node.bound >= inc - opts.abs_gap {
                pruned_bound = pruned_bound.min(node.bound);
                continue;
            }
        }
        if nodes >= opts.node_limit {
            status = MilpStatus::NodeLimit;
            heap.push(node);
            break;
        }
        if opts.time_limit_ms.is_some_and(|ms| start.elapsed().as_millis() >= u128::from(ms)) {
            status = MilpStatus::TimeLimit;
            heap.push(node);
            break;
        }
        nodes += 1;

        match solve_with(&mut lp, &node.fixings)? {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => return Err(SolverError::Unbounded),
        }
        let obj = lp.objective();
        if let Some((inc, _)) = &incumbent {
            if obj >= inc - opts.abs_gap {
                pruned_bound = pruned_bound.min(obj);
                continue;
            }
        }
        let values = lp.values();

        let mut branch: Option<(usize, f64)> = None;
        let mut best = INTEGRALITY_TOL;
        for &j in &binaries {
            let v = values[j];
            let frac = (v - v.floor()).min(v.ceil() - v);
            if frac > best {
                best = frac;
                branch = Some((j, v));
            }
        }

        match branch {
            None => {
                let (obj, values) = polish(&mut lp, &solve_with, &binaries, obj, values)?;
                incumbents.push((nodes, obj));
                incumbent = Some((obj, values));
            }
            Some((j, v)) => {
                let up_first = v >= 0.5;
                for (k, fix) in [(0, if up_first { 1.0 } else { 0.0 }), (1, if up_first { 0.0 } else { 1.0 })] {
                    let mut fixings = node.fixings.clone();
                    fixings.push((j, fix));
                    heap.push(Node {
                        id: next_id + k,
                        depth: node.depth + 1,
                        bound: obj,
                        fixings,
                    });
                }
                next_id += 2;
            }
        }
    }

    let open_bound = heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    let (objective, values, gap) = match incumbent {
        Some((obj, vals)) => {
            let lower = pruned_bound.min(open_bound).min(obj);
            (Some(obj), Some(vals), obj - lower)
        }
        None => {
            if status == MilpStatus::Optimal {
                status = MilpStatus::Infeasible;
            }
            (None, None, f64::INFINITY)
        }
    };
    Ok(BnBResult {
        status,
        objective,
        values,
        nodes,
        gap,
        incumbents,
        lp_iterations: lp.iterations,
    })
}

/// Re-solves with every binary fixed at its rounded value so that the
/// continuous part is exact for the chosen assignment.
fn polish(
    lp: &mut Simplex,
    solve_with: &impl Fn(&mut Simplex, &[(usize, f64)]) -> Result<LpStatus, SolverError>,
    binaries: &[usize],
    obj: f64,
    values: Vec<f64>,
) -> Result<(f64, Vec<f64>), SolverError> {
    if binaries.is_empty() {
        return Ok((obj, values));
    }
    let fixings: Vec<(usize, f64)> = binaries.iter().map(|&j| (j, values[j].round())).collect();
    if solve_with(lp, &fixings)? == LpStatus::Optimal {
        let polished = lp.objective();
        if polished <= obj + 1e-9 {
            return Ok((polished.min(obj), lp.values()));
        }
    }
    Ok((obj, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::{Sense, VarRole};

    #[test]
    fn no_binaries_single_node() {
        let mut m = MilpModel::new();
        let x = m.add_continuous("x", 0.0, 2.0, VarRole::Other);
        m.add_constraint("c", vec![(x, 1.0)], Sense::Le, 1.5);
        m.objective.linear.push((x, -1.0));
        let r = branch_and_bound(&m, &BnBOptions::default()).unwrap();
        assert_eq!(r.status, MilpStatus::Optimal);
        assert_eq!(r.nodes, 1);
        assert!((r.objective.unwrap() + 1.5).abs() < 1e-9);
    }

    #[test]
    fn small_knapsack() {
        // max 5a + 4b + 3c  s.t.  2a + 3b + c <= 5, 4a + b + 2c <= 11
        let mut m = MilpModel::new();
        let v: Vec<_> = (0..3).map(|i| m.add_binary(format!("b{i}"), VarRole::Other)).collect();
        m.add_constraint("w1", vec![(v[0], 2.0), (v[1], 3.0), (v[2], 1.0)], Sense::Le, 5.0);
        m.add_constraint("w2", vec![(v[0], 4.0), (v[1], 1.0), (v[2], 2.0)], Sense::Le, 11.0);
        m.objective.linear = vec![(v[0], -5.0), (v[1], -4.0), (v[2], -3.0)];
        let r = branch_and_bound(&m, &BnBOptions::default()).unwrap();
        assert_eq!(r.status, MilpStatus::Optimal);
        assert!((r.objective.unwrap() + 9.0).abs() < 1e-9);
        assert!(r.gap <= 1e-6);
        assert!(r.incumbents.windows(2).all(|w| w[1].1 <= w[0].1));
    }

    #[test]
    fn infeasible_integer_program() {
        // b0 + b1 = 1.5 has fractional solutions only
        let mut m = MilpModel::new();
        let a = m.add_binary("a", VarRole::Other);
        let b = m.add_binary("b", VarRole::Other);
        m.add_constraint("c", vec![(a, 1.0), (b, 1.0)], Sense::Eq, 1.5);
        let r = branch_and_bound(&m, &BnBOptions::default()).unwrap();
        assert_eq!(r.status, MilpStatus::Infeasible);
    }

    #[test]
    fn node_limit_reported() {
        let mut m = MilpModel::new();
        let v: Vec<_> = (0..6).map(|i| m.add_binary(format!("b{i}"), VarRole::Other)).collect();
        m.add_constraint("c", v.iter().map(|&b| (b, 2.0)).collect(), Sense::Le, 5.0);
        m.objective.linear = v.iter().map(|&b| (b, -1.0)).collect();
        let opts = BnBOptions {
            node_limit: 1,
            ..BnBOptions::default()
        };
        let r = branch_and_bound(&m, &opts).unwrap();
        assert_eq!(r.status, MilpStatus::NodeLimit);
        assert_eq!(r.nodes, 1);
    }

    #[test]
    fn bad_options_rejected() {
        let m = MilpModel::new();
        let opts = BnBOptions {
            node_limit: 0,
            ..BnBOptions::default()
        };
        assert!(branch_and_bound(&m, &opts).is_err());
    }
}
