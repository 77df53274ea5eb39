//! Douglas-Rachford splitting on the homogeneous self-dual embedding.
//!
//! With `u = (x, y, tau)` and the skew matrix
//!
//! ```text
//!     [  0   A'  c ]
//! M = [ -A   0   b ]
//!     [ -c' -b'  0 ]
//! ```
//!
//! the embedding asks for `u in C = R^n x K* x R+` with `M u in C*`. Each
//! iteration solves one linear system with `R + M`, `R = diag(rho_x, rho_y, 1)`,
//! and projects onto `C`. The `(x, y)` part of the linear system reduces to a
//! Cholesky solve with `rho_x rho_y I + A'A`, factored once per weight.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::cones::{project_dual, project_primal, Cone};
use super::{ConicProgram, Settings, Solution, SolverState, SolverStatus};
use crate::error::{invalid_input, Result};

const RHO_MIN: f64 = 1e-6;
const RHO_MAX: f64 = 1e6;
const ADAPT_EVERY: usize = 100;

pub fn solve(prog: &ConicProgram, settings: &Settings) -> Result<Solution> {
    solve_warm(prog, settings, None)
}

/// Solves `prog`, starting from `warm` when given (dimensions must match).
pub fn solve_warm(prog: &ConicProgram, settings: &Settings, warm: Option<&Solution>) -> Result<Solution> {
    prog.validate()?;
    if let Some(w) = warm {
        if w.x.len() != prog.n || w.y.len() != prog.m() || w.x.iter().chain(&w.y).any(|v| !v.is_finite()) {
            return Err(invalid_input("warm start has the wrong dimensions or non-finite entries"));
        }
    }
    if !(settings.alpha > 0.0 && settings.alpha < 2.0) || settings.tol <= 0.0 {
        return Err(invalid_input("solver settings out of range"));
    }
    let mut work = Workspace::new(prog, settings);
    work.run(warm)
}

struct Workspace<'a> {
    prog: &'a ConicProgram,
    settings: &'a Settings,
    a: DMatrix<f64>,
    /// Scaled data.
    ah: DMatrix<f64>,
    bh: DVector<f64>,
    ch: DVector<f64>,
    d: DVector<f64>,
    e: DVector<f64>,
    sb: f64,
    sc: f64,
    rho_y: f64,
    chol: Cholesky<f64, Dyn>,
    g_x: DVector<f64>,
    g_y: DVector<f64>,
    denom: f64,
}

impl<'a> Workspace<'a> {
    fn new(prog: &'a ConicProgram, settings: &'a Settings) -> Self {
        let a = prog.dense_a();
        let (d, e) = ruiz(&a, &prog.cones, settings.ruiz_iters);
        let mut ah = a.clone();
        for i in 0..ah.nrows() {
            for j in 0..ah.ncols() {
                ah[(i, j)] *= d[i] * e[j];
            }
        }
        let b = DVector::from_column_slice(&prog.b);
        let c = DVector::from_column_slice(&prog.c);
        let bh0 = b.component_mul(&d);
        let ch0 = c.component_mul(&e);
        let sb = positive_norm(bh0.norm());
        let sc = positive_norm(ch0.norm());
        let bh = bh0 / sb;
        let ch = ch0 / sc;
        let rho_y = settings.rho_y;
        let (chol, g_x, g_y, denom) = factor(&ah, &bh, &ch, settings.rho_x, rho_y);
        Self { prog, settings, a, ah, bh, ch, d, e, sb, sc, rho_y, chol, g_x, g_y, denom }
    }

    fn refactor(&mut self) {
        let (chol, g_x, g_y, denom) = factor(&self.ah, &self.bh, &self.ch, self.settings.rho_x, self.rho_y);
        self.chol = chol;
        self.g_x = g_x;
        self.g_y = g_y;
        self.denom = denom;
    }

    fn solve_xy(&self, r1: &DVector<f64>, r2: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        solve_xy(&self.chol, &self.ah, self.rho_y, r1, r2)
    }

    fn unscale(&self, ux: &DVector<f64>, uy: &DVector<f64>, vy: &DVector<f64>, tau: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let x = ux.component_mul(&self.e) * (self.sb / tau);
        let y = uy.component_mul(&self.d) * (self.sc / tau);
        let s = vy.component_div(&self.d) * (self.sb / tau);
        (x.data.into(), y.data.into(), s.data.into())
    }

    fn residuals(&self, x: &[f64], y: &[f64], s: &[f64]) -> (f64, f64, f64) {
        let p = self.prog;
        let xv = DVector::from_column_slice(x);
        let yv = DVector::from_column_slice(y);
        let ax = &self.a * &xv;
        let aty = self.a.tr_mul(&yv);
        let inf = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let bn = inf(&p.b);
        let cn = inf(&p.c);
        let pri = (0..p.m()).map(|i| (ax[i] + s[i] - p.b[i]).abs()).fold(0.0, f64::max) / (1.0 + bn);
        let dua = (0..p.n).map(|j| (aty[j] + p.c[j]).abs()).fold(0.0, f64::max) / (1.0 + cn);
        let cx = p.objective(x);
        let by: f64 = p.b.iter().zip(y).map(|(b, y)| b * y).sum();
        let gap = (cx + by).abs() / (1.0 + cx.abs() + by.abs());
        (pri, dua, gap)
    }

    fn run(&mut self, warm: Option<&Solution>) -> Result<Solution> {
        let n = self.prog.n;
        let m = self.prog.m();
        let st = self.settings;
        let rho_x = st.rho_x;

        // w = u + R^{-1} v
        let (mut wx, mut wy, mut wt) = match warm {
            Some(ws) => {
                // the warm point may come from a neighbouring program: rebuild
                // a consistent slack and keep y dual-feasible
                let x0 = DVector::from_column_slice(&ws.x);
                let mut s0: Vec<f64> = (DVector::from_column_slice(&self.prog.b) - &self.a * &x0).data.into();
                project_primal(&self.prog.cones, &mut s0);
                let mut y0 = ws.y.clone();
                project_dual(&self.prog.cones, &mut y0);
                let x = x0.component_div(&self.e) / self.sb;
                let y = DVector::from_vec(y0).component_div(&self.d) / self.sc;
                let s = DVector::from_vec(s0).component_mul(&self.d) / self.sb;
                (x, y + s / self.rho_y, 1.0)
            }
            None => (DVector::zeros(n), DVector::zeros(m), 1.0),
        };
        let mut ux = DVector::zeros(n);
        let mut uy = DVector::zeros(m);
        let mut ut;
        let mut vy = DVector::zeros(m);
        let mut vt;
        let mut last = SolverStatus {
            state: SolverState::MaxIters,
            primal_residual: f64::INFINITY,
            dual_residual: f64::INFINITY,
            gap: f64::INFINITY,
            iterations: 0,
        };
        let mut best: Option<(Vec<f64>, Vec<f64>, Vec<f64>)> = None;
        let mut adapt_gap = ADAPT_EVERY;
        let mut next_adapt = ADAPT_EVERY;
        let mut log_ratio = 0.0;
        let mut checks = 0usize;

        for it in 1..=st.max_iters {
            // (R + M) z = R w
            let (px, py) = self.solve_xy(&(&wx * rho_x), &(&wy * self.rho_y));
            let zt = (wt + self.ch.dot(&px) + self.bh.dot(&py)) / self.denom;
            let zx = px - &self.g_x * zt;
            let zy = py - &self.g_y * zt;

            // u = P_C(2z - w), v = R (u - (2z - w))
            let qx = &zx * 2.0 - &wx;
            let qy = &zy * 2.0 - &wy;
            let qt = 2.0 * zt - wt;
            ux.copy_from(&qx);
            uy.copy_from(&qy);
            project_dual(&self.prog.cones, uy.as_mut_slice());
            ut = qt.max(0.0);
            vy.copy_from(&((&uy - &qy) * self.rho_y));
            vt = ut - qt;

            let a = st.alpha;
            wx += (&ux - &zx) * a;
            wy += (&uy - &zy) * a;
            wt += a * (ut - zt);

            if it % st.check_every != 0 && it != st.max_iters {
                continue;
            }

            let tau = ut;
            let kappa = vt;
            if tau > 1e-12 * (1.0 + kappa) {
                let (x, y, s) = self.unscale(&ux, &uy, &vy, tau);
                let (pri, dua, gap) = self.residuals(&x, &y, &s);
                last = SolverStatus {
                    state: SolverState::MaxIters,
                    primal_residual: pri,
                    dual_residual: dua,
                    gap,
                    iterations: it,
                };
                log::trace!("iter {it}: pri {pri:.3e} dual {dua:.3e} gap {gap:.3e} rho_y {:.3e}", self.rho_y);
                if pri <= st.tol && dua <= st.tol && gap <= st.tol {
                    last.state = SolverState::Optimal;
                    return Ok(Solution { x, y, s, status: last });
                }
                best = Some((x, y, s));

                if st.adaptive {
                    log_ratio += (pri.max(1e-300) / dua.max(1e-300)).ln();
                    checks += 1;
                    if it >= next_adapt {
                        // geometric mean of the residual ratio since the last change
                        let ratio = (log_ratio / checks as f64).exp();
                        if !(0.2..=5.0).contains(&ratio) {
                            let new_rho = (self.rho_y / ratio.sqrt()).clamp(RHO_MIN, RHO_MAX);
                            if new_rho != self.rho_y {
                                // keep (u, v), move w to the matching fixed-point form
                                self.rho_y = new_rho;
                                self.refactor();
                                wx.copy_from(&ux);
                                wy = &uy + &vy / self.rho_y;
                                wt = ut + vt;
                                adapt_gap = adapt_gap * 3 / 2;
                            }
                        }
                        next_adapt = it + adapt_gap;
                        log_ratio = 0.0;
                        checks = 0;
                    }
                }
            }

            if let Some(state) = self.certificate(&ux, &uy, &vy) {
                last.state = state;
                last.iterations = it;
                let (x, y, s) = match state {
                    SolverState::Infeasible => {
                        let scale = -self.bh.dot(&uy);
                        (vec![f64::NAN; n], (uy.component_mul(&self.d) / scale).data.into(), vec![f64::NAN; m])
                    }
                    _ => {
                        let scale = -self.ch.dot(&ux);
                        (
                            (ux.component_mul(&self.e) / scale).data.into(),
                            vec![f64::NAN; m],
                            (vy.component_div(&self.d) / scale).data.into(),
                        )
                    }
                };
                return Ok(Solution { x, y, s, status: last });
            }
        }

        last.iterations = st.max_iters;
        let (x, y, s) = best.unwrap_or_else(|| (vec![f64::NAN; n], vec![f64::NAN; m], vec![f64::NAN; m]));
        Ok(Solution { x, y, s, status: last })
    }

    fn certificate(&self, ux: &DVector<f64>, uy: &DVector<f64>, vy: &DVector<f64>) -> Option<SolverState> {
        let eps = self.settings.eps_infeasible;
        let by = self.bh.dot(uy);
        if by < 0.0 {
            let aty = self.ah.tr_mul(uy) / -by;
            if aty.amax() < eps {
                return Some(SolverState::Infeasible);
            }
        }
        let cx = self.ch.dot(ux);
        if cx < 0.0 {
            let r = (&self.ah * ux + vy) / -cx;
            if r.amax() < eps {
                return Some(SolverState::Unbounded);
            }
        }
        None
    }
}

fn positive_norm(v: f64) -> f64 {
    if v > 1e-12 {
        v
    } else {
        1.0
    }
}

fn factor(
    ah: &DMatrix<f64>,
    bh: &DVector<f64>,
    ch: &DVector<f64>,
    rho_x: f64,
    rho_y: f64,
) -> (Cholesky<f64, Dyn>, DVector<f64>, DVector<f64>, f64) {
    let n = ah.ncols();
    let mut k = ah.tr_mul(ah);
    for j in 0..n {
        k[(j, j)] += rho_x * rho_y;
    }
    let chol = Cholesky::new(k).expect("rho_x rho_y I + A'A is positive definite");
    let (g_x, g_y) = solve_xy(&chol, ah, rho_y, ch, bh);
    let denom = 1.0 + ch.dot(&g_x) + bh.dot(&g_y);
    (chol, g_x, g_y, denom)
}

/// Solves `[rho_x I, A'; -A, rho_y I] (zx, zy) = (r1, r2)`.
fn solve_xy(
    chol: &Cholesky<f64, Dyn>,
    ah: &DMatrix<f64>,
    rho_y: f64,
    r1: &DVector<f64>,
    r2: &DVector<f64>,
) -> (DVector<f64>, DVector<f64>) {
    let rhs = r1 * rho_y - ah.tr_mul(r2);
    let zx = chol.solve(&rhs);
    let zy = (r2 + ah * &zx) / rho_y;
    (zx, zy)
}

/// Ruiz equilibration `D A E` with one factor per PSD block and per exponential
/// triple so that scaled slacks stay in the cone.
fn ruiz(a: &DMatrix<f64>, cones: &[Cone], iters: usize) -> (DVector<f64>, DVector<f64>) {
    let (m, n) = a.shape();
    let mut d = DVector::from_element(m, 1.0);
    let mut e = DVector::from_element(n, 1.0);
    let mut work = a.clone();
    let guard = |v: f64| if v < 1e-8 { 1.0 } else { v };
    for _ in 0..iters {
        let mut rn: Vec<f64> = (0..m).map(|i| work.row(i).amax()).collect();
        let mut off = 0;
        for cone in cones {
            let dim = cone.dim();
            let group = match cone {
                Cone::Psd(_) => dim,
                Cone::Exp(_) => 3,
                _ => 1,
            };
            for chunk in rn[off..off + dim].chunks_mut(group) {
                let mx = chunk.iter().cloned().fold(0.0, f64::max);
                chunk.iter_mut().for_each(|r| *r = mx);
            }
            off += dim;
        }
        let cn: Vec<f64> = (0..n).map(|j| work.column(j).amax()).collect();
        let dr: Vec<f64> = rn.iter().map(|&r| 1.0 / guard(r).sqrt()).collect();
        let dc: Vec<f64> = cn.iter().map(|&c| 1.0 / guard(c).sqrt()).collect();
        for i in 0..m {
            for j in 0..n {
                work[(i, j)] *= dr[i] * dc[j];
            }
        }
        for i in 0..m {
            d[i] *= dr[i];
        }
        for j in 0..n {
            e[j] *= dc[j];
        }
    }
    (d, e)
}
