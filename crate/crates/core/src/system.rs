//! Discrete-time linear systems `x+ = A x + B u`, `y = C x + D u` with box constraints.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::Signal;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SystemError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid bounds: {0}")]
    Bounds(String),
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, SystemError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(SystemError::Dimension("ragged matrix rows".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Per-coordinate closed interval constraints.
pub type BoxBounds = Vec<(f64, f64)>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSystem {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub d: Matrix,
    pub x_bounds: BoxBounds,
    pub u_bounds: BoxBounds,
    pub y_bounds: BoxBounds,
}

fn check_bounds(name: &str, bounds: &BoxBounds, dim: usize) -> Result<(), SystemError> {
    if bounds.len() != dim {
        return Err(SystemError::Dimension(format!(
            "{name} bounds have {} entries, expected {dim}",
            bounds.len()
        )));
    }
    for (i, &(lo, hi)) in bounds.iter().enumerate() {
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(SystemError::Bounds(format!("{name}[{i}] = [{lo}, {hi}]")));
        }
    }
    Ok(())
}

impl LinearSystem {
    pub fn new(
        a: Matrix,
        b: Matrix,
        c: Matrix,
        d: Matrix,
        x_bounds: BoxBounds,
        u_bounds: BoxBounds,
        y_bounds: BoxBounds,
    ) -> Result<Self, SystemError> {
        let sys = Self {
            a,
            b,
            c,
            d,
            x_bounds,
            u_bounds,
            y_bounds,
        };
        sys.validate()?;
        Ok(sys)
    }

    pub fn validate(&self) -> Result<(), SystemError> {
        let (n, m, p) = (self.n(), self.m(), self.p());
        let shape = |name: &str, mat: &Matrix, r: usize, c: usize| {
            if mat.rows() != r || mat.cols() != c {
                Err(SystemError::Dimension(format!(
                    "{name} is {}x{}, expected {r}x{c}",
                    mat.rows(),
                    mat.cols()
                )))
            } else {
                Ok(())
            }
        };
        shape("A", &self.a, n, n)?;
        shape("B", &self.b, n, m)?;
        shape("C", &self.c, p, n)?;
        shape("D", &self.d, p, m)?;
        check_bounds("x", &self.x_bounds, n)?;
        check_bounds("u", &self.u_bounds, m)?;
        check_bounds("y", &self.y_bounds, p)
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn m(&self) -> usize {
        self.b.cols()
    }

    pub fn p(&self) -> usize {
        self.c.rows()
    }

    /// Planar double integrator with unit timestep: state `(px, py, vx, vy)`,
    /// input `(ax, ay)`, output `(px, py)`.
    pub fn double_integrator() -> Self {
        let mut a = Matrix::identity(4);
        a[(0, 2)] = 1.0;
        a[(1, 3)] = 1.0;
        let mut b = Matrix::zeros(4, 2);
        b[(2, 0)] = 1.0;
        b[(3, 1)] = 1.0;
        let mut c = Matrix::zeros(2, 4);
        c[(0, 0)] = 1.0;
        c[(1, 1)] = 1.0;
        Self {
            a,
            b,
            c,
            d: Matrix::zeros(2, 2),
            x_bounds: vec![(0.0, 15.0), (0.0, 15.0), (-1.0, 1.0), (-1.0, 1.0)],
            u_bounds: vec![(-0.5, 0.5), (-0.5, 0.5)],
            y_bounds: vec![(0.0, 15.0), (0.0, 15.0)],
        }
    }

    pub fn output(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        let cx = self.c.mul_vec(x);
        let du = self.d.mul_vec(u);
        cx.iter().zip(du).map(|(a, b)| a + b).collect()
    }

    pub fn step(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        let ax = self.a.mul_vec(x);
        let bu = self.b.mul_vec(u);
        ax.iter().zip(bu).map(|(a, b)| a + b).collect()
    }

    /// Forward simulation; `inputs` holds `u_0 .. u_T`, giving `x_0 .. x_T`.
    pub fn rollout(&self, x0: &[f64], inputs: &[Vec<f64>]) -> Result<Trajectory, SystemError> {
        if x0.len() != self.n() {
            return Err(SystemError::Dimension(format!(
                "x0 has length {}, expected {}",
                x0.len(),
                self.n()
            )));
        }
        if let Some((t, u)) = inputs.iter().enumerate().find(|(_, u)| u.len() != self.m()) {
            return Err(SystemError::Dimension(format!(
                "u_{t} has length {}, expected {}",
                u.len(),
                self.m()
            )));
        }
        let mut x = Vec::with_capacity(inputs.len());
        let mut cur = x0.to_vec();
        for (t, u) in inputs.iter().enumerate() {
            let next = self.step(&cur, u);
            x.push(std::mem::replace(&mut cur, next));
            if t + 1 == inputs.len() {
                break;
            }
        }
        let y = x.iter().zip(inputs).map(|(x, u)| self.output(x, u)).collect();
        Ok(Trajectory {
            x,
            u: inputs.to_vec(),
            y,
        })
    }
}

/// States, inputs and outputs at `t = 0 .. T`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trajectory {
    pub x: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
}

/// First violated relation found by [`Trajectory::check`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrajectoryViolation {
    #[error("dynamics row x[{t}+1][{i}] off by {error:e}")]
    Dynamics { t: usize, i: usize, error: f64 },
    #[error("output row y[{t}][{i}] off by {error:e}")]
    Output { t: usize, i: usize, error: f64 },
    #[error("{what}[{t}][{i}] = {value} outside [{lo}, {hi}]")]
    Bounds {
        what: &'static str,
        t: usize,
        i: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("trajectory has inconsistent lengths")]
    Shape,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn signal(&self) -> Signal {
        Signal::new(self.y.clone()).expect("outputs share one dimension")
    }

    /// Checks dynamics and output equations within `tol`, and box bounds within `bound_tol`.
    pub fn check(&self, sys: &LinearSystem, tol: f64, bound_tol: f64) -> Result<(), TrajectoryViolation> {
        if self.u.len() != self.x.len() || self.y.len() != self.x.len() {
            return Err(TrajectoryViolation::Shape);
        }
        for t in 0..self.x.len() {
            if t + 1 < self.x.len() {
                let next = sys.step(&self.x[t], &self.u[t]);
                for (i, (want, got)) in next.iter().zip(&self.x[t + 1]).enumerate() {
                    let error = (want - got).abs();
                    if error > tol {
                        return Err(TrajectoryViolation::Dynamics { t, i, error });
                    }
                }
            }
            let out = sys.output(&self.x[t], &self.u[t]);
            for (i, (want, got)) in out.iter().zip(&self.y[t]).enumerate() {
                let error = (want - got).abs();
                if error > tol {
                    return Err(TrajectoryViolation::Output { t, i, error });
                }
            }
            for (what, vals, bounds) in [
                ("x", &self.x[t], &sys.x_bounds),
                ("u", &self.u[t], &sys.u_bounds),
                ("y", &self.y[t], &sys.y_bounds),
            ] {
                for (i, (&v, &(lo, hi))) in vals.iter().zip(bounds).enumerate() {
                    if v < lo - bound_tol || v > hi + bound_tol {
                        return Err(TrajectoryViolation::Bounds {
                            what,
                            t,
                            i,
                            value: v,
                            lo,
                            hi,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}
