//! Standard-form conic programs and a first-order solver for them.
//!
//! Problems have the form
//!
//! ```text
//! minimize    c'x
//! subject to  A x + s = b,  s in K
//! ```
//!
//! where `K` is a product of zero, nonnegative, PSD (`svec` storage) and
//! exponential cones. The dual is `maximize -b'y` subject to `A'y + c = 0`,
//! `y in K*`.

mod admm;
pub mod cones;
pub mod io;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_input, Result};

pub use admm::{solve, solve_warm};
pub use cones::{
    cone_dim, in_expcone, in_expcone_dual, project_dual, project_expcone, project_expcone_dual, project_primal,
    project_psd, Cone, ConeSpec,
};

#[derive(Clone, Debug, PartialEq)]
pub struct ConicProgram {
    pub n: usize,
    /// Sparse `A` as `(row, col, value)` triplets; duplicates are summed.
    pub a: Vec<(usize, usize, f64)>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub cones: ConeSpec,
    /// One label per variable, used to map solutions back to model entities.
    pub var_names: Vec<String>,
}

impl ConicProgram {
    pub fn m(&self) -> usize {
        self.b.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.c.len() != self.n {
            return Err(invalid_input(format!("c has length {}, expected {}", self.c.len(), self.n)));
        }
        if !self.var_names.is_empty() && self.var_names.len() != self.n {
            return Err(invalid_input("variable name map does not cover every variable"));
        }
        for cone in &self.cones {
            cone.validate()?;
        }
        let m = cone_dim(&self.cones);
        if m != self.b.len() {
            return Err(invalid_input(format!("cones cover {m} rows but b has {}", self.b.len())));
        }
        if self.n == 0 {
            return Err(invalid_input("program has no variables"));
        }
        for &(r, c, v) in &self.a {
            if r >= m || c >= self.n {
                return Err(invalid_input(format!("entry ({r}, {c}) outside {m}x{}", self.n)));
            }
            if !v.is_finite() {
                return Err(invalid_input("non-finite entry in A"));
            }
        }
        if self.b.iter().chain(&self.c).any(|v| !v.is_finite()) {
            return Err(invalid_input("non-finite entry in b or c"));
        }
        Ok(())
    }

    pub fn dense_a(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.m(), self.n);
        for &(r, c, v) in &self.a {
            a[(r, c)] += v;
        }
        a
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.c.iter().zip(x).map(|(c, x)| c * x).sum()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.var_names.iter().position(|v| v == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverState {
    Optimal,
    MaxIters,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverStatus {
    pub state: SolverState,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub tol: f64,
    pub max_iters: usize,
    /// Over-relaxation factor in `(0, 2)`.
    pub alpha: f64,
    pub rho_x: f64,
    /// Initial dual-block weight, adapted during the run when `adaptive`.
    pub rho_y: f64,
    pub adaptive: bool,
    pub check_every: usize,
    pub eps_infeasible: f64,
    pub ruiz_iters: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iters: 50_000,
            alpha: 1.5,
            rho_x: 1e-6,
            rho_y: 1.0,
            adaptive: true,
            check_every: 10,
            eps_infeasible: 1e-7,
            ruiz_iters: 25,
        }
    }
}

/// Primal-dual point, also used to warm-start a related program.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub s: Vec<f64>,
    pub status: SolverStatus,
}

impl Solution {
    pub fn is_optimal(&self) -> bool {
        self.status.state == SolverState::Optimal
    }
}
