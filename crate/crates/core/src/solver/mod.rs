//! Internal MILP solving, LP-file interop and post-solve verification.
//!
//! Every solution handed back to the caller goes through [`verify`]: the
//! model rows, the trajectory invariants, and the robustness oracle on the
//! original formula. A solution that fails is an error, never a result.

mod bnb;
mod lp;
mod lpfile;

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bnb::{branch_and_bound, BnBOptions, BnBResult, BranchRule, MilpStatus, SearchOrder, INTEGRALITY_TOL};
pub use lp::{solve_lp, LpResult, LpStatus, Simplex};
pub use lpfile::{export_lp, read_solution, write_solution};

use crate::encoder::{EncodedProblem, EncodingStats};
use crate::formula::FormulaError;
use crate::system::{Trajectory, TrajectoryViolation};

/// Row tolerance when checking a finished solution.
pub const VERIFY_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("quadratic objectives are not supported by the internal solver; export an LP file instead")]
    QuadraticObjective,
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("malformed model: {0}")]
    Model(String),
    #[error("invalid solver options: {0}")]
    Options(String),
    #[error("LP relaxation is unbounded")]
    Unbounded,
    #[error("line {line}: unknown variable `{name}`")]
    UnknownVariable { name: String, line: usize },
    #[error("line {line}: expected `name value`, got `{text}`")]
    SolutionSyntax { line: usize, text: String },
    #[error("verification failed: {0}")]
    Verification(#[from] VerificationError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerificationError {
    #[error("expected {expected} values, got {got}")]
    Length { expected: usize, got: usize },
    #[error("row {name} violated by {violation:e}")]
    Row { name: String, violation: f64 },
    #[error(transparent)]
    Trajectory(#[from] TrajectoryViolation),
    #[error("formula evaluation failed: {0}")]
    Formula(#[from] FormulaError),
    #[error("trajectory violates the specification (robustness {oracle})")]
    Unsatisfied { oracle: f64 },
    #[error("solver robustness {rho} exceeds the true robustness {oracle}")]
    RhoAboveOracle { rho: f64, oracle: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    NodeLimit,
    TimeLimit,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::NodeLimit => "node_limit",
            SolveStatus::TimeLimit => "time_limit",
        }
    }
}

impl From<MilpStatus> for SolveStatus {
    fn from(s: MilpStatus) -> Self {
        match s {
            MilpStatus::Optimal => SolveStatus::Optimal,
            MilpStatus::Infeasible => SolveStatus::Infeasible,
            MilpStatus::NodeLimit => SolveStatus::NodeLimit,
            MilpStatus::TimeLimit => SolveStatus::TimeLimit,
        }
    }
}

/// A solution that passed [`verify`].
#[derive(Debug, Clone, PartialEq)]
pub struct Verified {
    pub rho: f64,
    pub oracle: f64,
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub objective: Option<f64>,
    /// Robustness variable of the solution.
    pub rho: Option<f64>,
    /// Robustness of the formula on the returned trajectory.
    pub oracle_robustness: Option<f64>,
    pub trajectory: Option<Trajectory>,
    pub values: Option<Vec<f64>>,
    pub stats: EncodingStats,
    pub nodes: usize,
    pub time_ms: f64,
    pub gap: f64,
    pub incumbents: Vec<(usize, f64)>,
}

/// Pulls the trajectory out of a full assignment.
pub fn extract_trajectory(problem: &EncodedProblem, values: &[f64]) -> Trajectory {
    let pick = |rows: &Vec<Vec<crate::encoder::VarId>>| -> Vec<Vec<f64>> {
        rows.iter().map(|r| r.iter().map(|v| values[v.0]).collect()).collect()
    };
    let d = &problem.vars.dynamics;
    Trajectory {
        x: pick(&d.x),
        u: pick(&d.u),
        y: pick(&d.y),
    }
}

/// Checks rows, bounds, dynamics and the robustness oracle for `values`.
pub fn verify(problem: &EncodedProblem, values: &[f64]) -> Result<Verified, VerificationError> {
    let expected = problem.model.num_vars();
    if values.len() != expected {
        return Err(VerificationError::Length {
            expected,
            got: values.len(),
        });
    }
    let (violation, name) = problem.model.max_violation(values);
    if violation > VERIFY_TOL {
        return Err(VerificationError::Row {
            name: name.unwrap_or_default(),
            violation,
        });
    }
    let trajectory = extract_trajectory(problem, values);
    trajectory.check(&problem.system, VERIFY_TOL, VERIFY_TOL)?;
    let oracle = problem.formula.robustness(&trajectory.signal(), 0)?;
    let rho = values[problem.vars.rho.0];
    if oracle < -VERIFY_TOL {
        return Err(VerificationError::Unsatisfied { oracle });
    }
    if rho > oracle + VERIFY_TOL {
        return Err(VerificationError::RhoAboveOracle { rho, oracle });
    }
    Ok(Verified { rho, oracle, trajectory })
}

fn result_from(
    problem: &EncodedProblem,
    status: SolveStatus,
    values: Option<Vec<f64>>,
    nodes: usize,
    time_ms: f64,
    gap: f64,
    incumbents: Vec<(usize, f64)>,
) -> Result<SolveResult, SolverError> {
    let mut result = SolveResult {
        status,
        objective: None,
        rho: None,
        oracle_robustness: None,
        trajectory: None,
        values: None,
        stats: problem.stats.clone(),
        nodes,
        time_ms,
        gap,
        incumbents,
    };
    if let Some(values) = values {
        let checked = verify(problem, &values)?;
        result.objective = Some(problem.model.objective.evaluate(&values));
        result.rho = Some(checked.rho);
        result.oracle_robustness = Some(checked.oracle);
        result.trajectory = Some(checked.trajectory);
        result.values = Some(values);
    }
    Ok(result)
}

/// Solves with the internal branch-and-bound and verifies the answer.
pub fn solve(problem: &EncodedProblem, opts: &BnBOptions) -> Result<SolveResult, SolverError> {
    if !problem.model.objective.is_linear() {
        return Err(SolverError::QuadraticObjective);
    }
    let start = Instant::now();
    let r = branch_and_bound(&problem.model, opts)?;
    let time_ms = start.elapsed().as_secs_f64() * 1e3;
    result_from(problem, r.status.into(), r.values, r.nodes, time_ms, r.gap, r.incumbents)
}

/// Summary of a solve as written by the CLI: status, objective, robustness,
/// encoding counts, timing and the trajectory.
pub fn report(problem: &EncodedProblem, r: &SolveResult) -> serde_json::Value {
    let traj = match &r.trajectory {
        Some(t) => serde_json::json!({ "x": t.x, "u": t.u, "y": t.y }),
        None => serde_json::json!({ "x": [], "u": [], "y": [] }),
    };
    serde_json::json!({
        "status": r.status.as_str(),
        "objective": r.objective,
        "rho": r.rho,
        "counts": {
            "binary": problem.stats.binary_count,
            "continuous": problem.stats.continuous_count,
            "constraints": problem.stats.constraint_count,
        },
        "time_ms": r.time_ms,
        "nodes": r.nodes,
        "trajectory": traj,
    })
}

/// Loads a solution file produced by any solver and verifies it.
pub fn import_solution(problem: &EncodedProblem, text: &str) -> Result<SolveResult, SolverError> {
    let values = read_solution(&problem.model, text)?;
    result_from(problem, SolveStatus::Optimal, Some(values), 0, 0.0, 0.0, Vec::new())
}
