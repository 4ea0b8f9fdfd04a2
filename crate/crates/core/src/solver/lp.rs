//! Bounded-variable simplex on a dense tableau.
//!
//! Columns are `[structural | slack | artificial]`. Every row gets a slack,
//! `[0, inf)` for `<=` rows and `[0, 0]` for equalities; artificials are only
//! added for rows the starting point violates. A cold solve runs phase 1
//! (minimise the artificials) and then primal phase 2. After an optimal solve
//! the tableau stays around so that bound changes can be repaired with the
//! dual simplex, which is what branch-and-bound relies on.

use serde::{Deserialize, Serialize};

use super::SolverError;
use crate::encoder::{MilpModel, Sense};

const PIVOT_TOL: f64 = 1e-9;
const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const DROP_TOL: f64 = 1e-12;
const RATIO_TIE: f64 = 1e-12;
/// Residual on an original row above which the tableau is rebuilt.
const DRIFT_TOL: f64 = 1e-7;
/// Size of the cost perturbation used by the warm dual simplex.
const PERTURB: f64 = 1e-6;
const PHASE1_TOL: f64 = 1e-7;
/// Consecutive degenerate pivots before switching to Bland's rule.
const STALL_LIMIT: usize = 50;
const NONBASIC: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    pub objective: f64,
    /// One value per model variable; meaningful when optimal.
    pub values: Vec<f64>,
}

/// Solves the LP relaxation of `model` (binaries relaxed to their bounds).
pub fn solve_lp(model: &MilpModel) -> Result<LpResult, SolverError> {
    let mut lp = Simplex::new(model)?;
    let status = lp.solve()?;
    Ok(LpResult {
        status,
        objective: if status == LpStatus::Optimal { lp.objective() } else { f64::NAN },
        values: lp.values(),
    })
}

struct Row {
    terms: Vec<(usize, f64)>,
    sense: Sense,
    rhs: f64,
}

enum Outcome {
    Done(LpStatus),
    IterationLimit,
}

pub struct Simplex {
    rows: Vec<Row>,
    cost: Vec<f64>,
    n: usize,
    m: usize,
    ncols: usize,
    /// Row `i` of the current tableau `B^-1 [A | I | art]` at `t[i * ncols..]`.
    t: Vec<f64>,
    x: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    d: Vec<f64>,
    basis: Vec<usize>,
    row_of: Vec<usize>,
    /// `(row, sign)` of each artificial, in column order.
    artificials: Vec<(usize, f64)>,
    /// Tableau is optimal for some bounds and dual feasible.
    warm: bool,
    pub iterations: usize,
    pub cold_solves: usize,
}

impl Simplex {
    pub fn new(model: &MilpModel) -> Result<Self, SolverError> {
        if !model.objective.is_linear() {
            return Err(SolverError::QuadraticObjective);
        }
        model.validate().map_err(SolverError::Model)?;
        let n = model.num_vars();
        let mut cost = vec![0.0; n];
        for &(v, c) in &model.objective.linear {
            cost[v.0] += c;
        }
        let rows = model
            .constraints
            .iter()
            .map(|c| Row {
                terms: c.terms.iter().map(|&(v, a)| (v.0, a)).collect(),
                sense: c.sense,
                rhs: c.rhs,
            })
            .collect::<Vec<_>>();
        let m = rows.len();
        Ok(Self {
            rows,
            cost,
            n,
            m,
            ncols: n + m,
            t: Vec::new(),
            x: Vec::new(),
            lo: model.variables.iter().map(|v| v.lower).collect(),
            hi: model.variables.iter().map(|v| v.upper).collect(),
            d: Vec::new(),
            basis: Vec::new(),
            row_of: Vec::new(),
            artificials: Vec::new(),
            warm: false,
            iterations: 0,
            cold_solves: 0,
        })
    }

    pub fn num_structural(&self) -> usize {
        self.n
    }

    /// Replaces the bounds of the structural variables. Nonbasic variables are
    /// moved to the bound that keeps the current basis dual feasible.
    pub fn set_bounds(&mut self, lower: &[f64], upper: &[f64]) {
        assert_eq!(lower.len(), self.n);
        assert_eq!(upper.len(), self.n);
        self.lo[..self.n].copy_from_slice(lower);
        self.hi[..self.n].copy_from_slice(upper);
        if !self.warm {
            return;
        }
        for j in 0..self.n {
            if self.row_of[j] != NONBASIC {
                continue;
            }
            let (lo, hi, dj) = (self.lo[j], self.hi[j], self.d[j]);
            let target = if lo == hi {
                lo
            } else if dj > DUAL_TOL && lo.is_finite() {
                lo
            } else if dj < -DUAL_TOL && hi.is_finite() {
                hi
            } else if self.x[j] <= lo || self.x[j] >= hi {
                self.x[j].clamp(lo, hi)
            } else {
                lo
            };
            if !target.is_finite() {
                self.warm = false;
                return;
            }
            let delta = target - self.x[j];
            if delta != 0.0 {
                self.x[j] = target;
                for i in 0..self.m {
                    let a = self.t[i * self.ncols + j];
                    if a != 0.0 {
                        self.x[self.basis[i]] -= a * delta;
                    }
                }
            }
        }
    }

    /// Solves for the current bounds, warm-starting from the last basis when possible.
    pub fn solve(&mut self) -> Result<LpStatus, SolverError> {
        if self.warm {
            if let Some(status) = self.warm_solve() {
                if self.max_residual() <= DRIFT_TOL {
                    return Ok(status);
                }
            }
        }
        self.cold()
    }

    pub fn values(&self) -> Vec<f64> {
        if self.x.is_empty() {
            return self.lo[..self.n].iter().map(|&l| if l.is_finite() { l } else { 0.0 }).collect();
        }
        (0..self.n)
            .map(|j| {
                let v = self.x[j];
                if v < self.lo[j] && v > self.lo[j] - 1e-9 {
                    self.lo[j]
                } else if v > self.hi[j] && v < self.hi[j] + 1e-9 {
                    self.hi[j]
                } else {
                    v
                }
            })
            .collect()
    }

    pub fn objective(&self) -> f64 {
        self.values().iter().zip(&self.cost).map(|(x, c)| x * c).sum()
    }

    fn cold(&mut self) -> Result<LpStatus, SolverError> {
        self.warm = false;
        self.cold_solves += 1;
        self.build();
        let limit = 50_000 + 20 * (self.m + self.ncols);

        if !self.artificials.is_empty() {
            let mut c1 = vec![0.0; self.ncols];
            for k in 0..self.artificials.len() {
                c1[self.n + self.m + k] = 1.0;
            }
            self.price(&c1);
            match self.primal(limit) {
                Outcome::Done(LpStatus::Optimal) => {}
                Outcome::Done(_) => return Err(SolverError::Numerical("phase 1 unbounded".into())),
                Outcome::IterationLimit => return Err(SolverError::Numerical("phase 1 iteration limit".into())),
            }
            let infeas: f64 = (0..self.artificials.len()).map(|k| self.x[self.n + self.m + k]).sum();
            if infeas > PHASE1_TOL {
                return Ok(LpStatus::Infeasible);
            }
            for k in 0..self.artificials.len() {
                let j = self.n + self.m + k;
                self.hi[j] = 0.0;
                if self.row_of[j] == NONBASIC {
                    self.x[j] = 0.0;
                }
            }
        }

        let mut c2 = vec![0.0; self.ncols];
        c2[..self.n].copy_from_slice(&self.cost);
        self.price(&c2);
        match self.primal(limit) {
            Outcome::Done(LpStatus::Optimal) => {
                if self.max_residual() > DRIFT_TOL {
                    return Err(SolverError::Numerical(format!(
                        "row residual {:e} after a fresh solve",
                        self.max_residual()
                    )));
                }
                self.warm = true;
                Ok(LpStatus::Optimal)
            }
            Outcome::Done(s) => Ok(s),
            Outcome::IterationLimit => Err(SolverError::Numerical("phase 2 iteration limit".into())),
        }
    }

    /// Fresh tableau with structurals at a finite bound and a slack or
    /// artificial basis.
    fn build(&mut self) {
        let (n, m) = (self.n, self.m);
        let mut x: Vec<f64> = (0..n)
            .map(|j| {
                if self.lo[j].is_finite() {
                    self.lo[j]
                } else if self.hi[j].is_finite() {
                    self.hi[j]
                } else {
                    0.0
                }
            })
            .collect();
        let mut residual = Vec::with_capacity(m);
        self.artificials.clear();
        for (i, row) in self.rows.iter().enumerate() {
            let r = row.rhs - row.terms.iter().map(|&(j, a)| a * x[j]).sum::<f64>();
            residual.push(r);
            let needs = match row.sense {
                Sense::Le => r < 0.0,
                Sense::Eq => r != 0.0,
            };
            if needs {
                self.artificials.push((i, if r < 0.0 { -1.0 } else { 1.0 }));
            }
        }
        let nart = self.artificials.len();
        let ncols = n + m + nart;
        self.ncols = ncols;
        self.lo.truncate(n);
        self.hi.truncate(n);
        for row in &self.rows {
            self.lo.push(0.0);
            self.hi.push(match row.sense {
                Sense::Le => f64::INFINITY,
                Sense::Eq => 0.0,
            });
        }
        self.lo.extend(std::iter::repeat(0.0).take(nart));
        self.hi.extend(std::iter::repeat(f64::INFINITY).take(nart));

        self.t = vec![0.0; m * ncols];
        x.resize(ncols, 0.0);
        self.basis = (n..n + m).collect();
        for (i, row) in self.rows.iter().enumerate() {
            let base = i * ncols;
            for &(j, a) in &row.terms {
                self.t[base + j] += a;
            }
            self.t[base + n + i] = 1.0;
        }
        for (k, &(i, sign)) in self.artificials.iter().enumerate() {
            let base = i * ncols;
            let col = n + m + k;
            self.t[base + col] = sign;
            if sign < 0.0 {
                for v in &mut self.t[base..base + ncols] {
                    *v = -*v;
                }
            }
            self.basis[i] = col;
            x[col] = residual[i].abs();
            x[n + i] = 0.0;
        }
        for (i, &b) in self.basis.iter().enumerate() {
            if b == n + i {
                x[b] = residual[i];
            }
        }
        self.x = x;
        self.row_of = vec![NONBASIC; ncols];
        for (i, &b) in self.basis.iter().enumerate() {
            self.row_of[b] = i;
        }
    }

    /// Reduced costs `c - c_B B^-1 A` for the current basis.
    fn price(&mut self, c: &[f64]) {
        self.d = c.to_vec();
        for i in 0..self.m {
            let cb = c[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * self.ncols..(i + 1) * self.ncols];
                for (dj, &a) in self.d.iter_mut().zip(row) {
                    *dj -= cb * a;
                }
            }
        }
        for &b in &self.basis {
            self.d[b] = 0.0;
        }
    }

    fn primal(&mut self, limit: usize) -> Outcome {
        let mut stall = 0usize;
        let mut iters = 0usize;
        loop {
            iters += 1;
            self.iterations += 1;
            if iters > limit {
                return Outcome::IterationLimit;
            }
            let bland = stall > STALL_LIMIT;
            let mut enter = None;
            let mut best = 0.0;
            for j in 0..self.ncols {
                if self.row_of[j] != NONBASIC || self.lo[j] == self.hi[j] {
                    continue;
                }
                let dj = self.d[j];
                let dir = if dj < -DUAL_TOL && self.x[j] < self.hi[j] {
                    1.0
                } else if dj > DUAL_TOL && self.x[j] > self.lo[j] {
                    -1.0
                } else {
                    continue;
                };
                if bland {
                    enter = Some((j, dir));
                    break;
                }
                if dj.abs() > best {
                    best = dj.abs();
                    enter = Some((j, dir));
                }
            }
            let Some((j, dir)) = enter else {
                return Outcome::Done(LpStatus::Optimal);
            };

            let mut leave: Option<(usize, f64, f64)> = None;
            for i in 0..self.m {
                let a = self.t[i * self.ncols + j];
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let b = self.basis[i];
                let rate = -dir * a;
                let lim = if rate < 0.0 {
                    if !self.lo[b].is_finite() {
                        continue;
                    }
                    ((self.x[b] - self.lo[b]) / -rate).max(0.0)
                } else {
                    if !self.hi[b].is_finite() {
                        continue;
                    }
                    ((self.hi[b] - self.x[b]) / rate).max(0.0)
                };
                let better = match leave {
                    None => true,
                    Some((r, l, alpha)) => {
                        if lim < l - RATIO_TIE {
                            true
                        } else if lim <= l + RATIO_TIE {
                            if bland {
                                b < self.basis[r]
                            } else {
                                a.abs() > alpha.abs()
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    leave = Some((i, lim, a));
                }
            }
            let span = self.hi[j] - self.lo[j];
            let theta = match leave {
                Some((_, lim, _)) if lim < span => lim,
                _ if span.is_finite() => span,
                _ => return Outcome::Done(LpStatus::Unbounded),
            };
            stall = if theta <= 1e-12 { stall + 1 } else { 0 };

            self.x[j] += dir * theta;
            if theta != 0.0 {
                for i in 0..self.m {
                    let a = self.t[i * self.ncols + j];
                    if a != 0.0 {
                        self.x[self.basis[i]] -= dir * theta * a;
                    }
                }
            }
            match leave {
                Some((r, lim, a)) if lim < span => {
                    let b = self.basis[r];
                    self.x[b] = if -dir * a < 0.0 { self.lo[b] } else { self.hi[b] };
                    self.pivot(r, j);
                }
                _ => {
                    self.x[j] = if dir > 0.0 { self.hi[j] } else { self.lo[j] };
                }
            }
        }
    }

    /// Dual simplex on slightly perturbed costs, then primal clean-up on the
    /// true costs. Without the perturbation the dual ratio test is almost
    /// always zero here, since only a handful of variables carry cost.
    fn warm_solve(&mut self) -> Option<LpStatus> {
        for j in 0..self.ncols {
            if self.row_of[j] != NONBASIC || self.lo[j] == self.hi[j] {
                continue;
            }
            let xi = PERTURB * (1.0 + ((j as u64).wrapping_mul(2_654_435_761) % 1024) as f64 / 1024.0);
            if self.x[j] <= self.lo[j] {
                self.d[j] = self.d[j].max(0.0) + xi;
            } else if self.x[j] >= self.hi[j] {
                self.d[j] = self.d[j].min(0.0) - xi;
            }
        }
        let outcome = self.dual();
        let mut c = vec![0.0; self.ncols];
        c[..self.n].copy_from_slice(&self.cost);
        self.price(&c);
        match outcome {
            Outcome::Done(LpStatus::Optimal) => {
                let limit = 50_000 + 20 * (self.m + self.ncols);
                match self.primal(limit) {
                    Outcome::Done(LpStatus::Optimal) => Some(LpStatus::Optimal),
                    _ => None,
                }
            }
            Outcome::Done(status) => Some(status),
            Outcome::IterationLimit => None,
        }
    }

    fn dual(&mut self) -> Outcome {
        let limit = 20_000 + 10 * (self.m + self.ncols);
        let mut stall = 0usize;
        let mut iters = 0usize;
        loop {
            iters += 1;
            self.iterations += 1;
            if iters > limit {
                return Outcome::IterationLimit;
            }
            let bland = stall > STALL_LIMIT;
            let mut leave = None;
            let mut worst = PRIMAL_TOL;
            for i in 0..self.m {
                let b = self.basis[i];
                let v = (self.lo[b] - self.x[b]).max(self.x[b] - self.hi[b]);
                if v > PRIMAL_TOL {
                    if bland {
                        if leave.map_or(true, |r: usize| b < self.basis[r]) {
                            leave = Some(i);
                        }
                    } else if v > worst {
                        worst = v;
                        leave = Some(i);
                    }
                }
            }
            let Some(r) = leave else {
                return Outcome::Done(LpStatus::Optimal);
            };
            let b = self.basis[r];
            let increase = self.x[b] < self.lo[b];
            let target = if increase { self.lo[b] } else { self.hi[b] };

            let base = r * self.ncols;
            let mut enter: Option<(usize, f64, f64)> = None;
            for j in 0..self.ncols {
                if self.row_of[j] != NONBASIC || self.lo[j] == self.hi[j] {
                    continue;
                }
                let a = self.t[base + j];
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let need_up = (increase && a < 0.0) || (!increase && a > 0.0);
                let ok = if need_up { self.x[j] < self.hi[j] } else { self.x[j] > self.lo[j] };
                if !ok {
                    continue;
                }
                let ratio = self.d[j].abs() / a.abs();
                let better = match enter {
                    None => true,
                    Some((k, best, alpha)) => {
                        if ratio < best - RATIO_TIE {
                            true
                        } else if ratio <= best + RATIO_TIE {
                            if bland {
                                j < k
                            } else {
                                a.abs() > alpha.abs()
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    enter = Some((j, ratio, a));
                }
            }
            let Some((j, ratio, a)) = enter else {
                return Outcome::Done(LpStatus::Infeasible);
            };
            stall = if ratio <= 1e-12 { stall + 1 } else { 0 };

            let delta = (self.x[b] - target) / a;
            self.x[j] += delta;
            for i in 0..self.m {
                let ai = self.t[i * self.ncols + j];
                if ai != 0.0 {
                    self.x[self.basis[i]] -= ai * delta;
                }
            }
            self.x[b] = target;
            self.pivot(r, j);
        }
    }

    /// Makes column `j` basic in row `r`.
    fn pivot(&mut self, r: usize, j: usize) {
        let nc = self.ncols;
        let base = r * nc;
        let piv = self.t[base + j];
        let mut prow: Vec<(usize, f64)> = Vec::new();
        for k in 0..nc {
            let v = self.t[base + k] / piv;
            if v.abs() > DROP_TOL {
                self.t[base + k] = v;
                prow.push((k, v));
            } else {
                self.t[base + k] = 0.0;
            }
        }
        self.t[base + j] = 1.0;
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let ib = i * nc;
            let f = self.t[ib + j];
            if f == 0.0 {
                continue;
            }
            for &(k, v) in &prow {
                let nv = self.t[ib + k] - f * v;
                self.t[ib + k] = if nv.abs() > DROP_TOL { nv } else { 0.0 };
            }
            self.t[ib + j] = 0.0;
        }
        let f = self.d[j];
        if f != 0.0 {
            for &(k, v) in &prow {
                self.d[k] -= f * v;
            }
        }
        self.d[j] = 0.0;
        let old = self.basis[r];
        self.row_of[old] = NONBASIC;
        self.basis[r] = j;
        self.row_of[j] = r;
    }

    /// Largest residual of the original rows at the current point.
    fn max_residual(&self) -> f64 {
        let mut art = vec![0.0; self.m];
        for (k, &(i, sign)) in self.artificials.iter().enumerate() {
            art[i] += sign * self.x[self.n + self.m + k];
        }
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let lhs: f64 = row.terms.iter().map(|&(j, a)| a * self.x[j]).sum();
                (lhs + self.x[self.n + i] + art[i] - row.rhs).abs()
            })
            .fold(0.0, f64::max)
    }
}
