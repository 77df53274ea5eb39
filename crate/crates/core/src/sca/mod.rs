//! Successive convex approximation for joint satellite/BS beamforming.
//!
//! Each iteration solves one conic subproblem built at the current anchors
//! (the points where the concave log terms are linearized), then moves the
//! anchors to the subproblem optimum. The relaxed matrices are reduced to
//! beamforming vectors through their principal eigenpair.

pub mod model;
mod serial;

use std::f64::consts::LOG2_E;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::chanmodel::ChannelSet;
use crate::conic::{solve_warm, Settings, Solution, SolverState, SolverStatus};
use crate::error::{invalid_input, invalid_param, Error, Result};
use crate::linalg::{gram, C64, herm_to_params, params_to_herm, principal_eigen, project_psd_herm, trace_re, CMat, CVec};
use crate::ratemodel::{AnBenchmarkParams, PowerBudget};

pub use model::{Affine, BsMode, Model, Objective, PaConstants};
use model::{ALPHA, ETA, MU, Q, S, TAU, V};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaConfig {
    /// Exit once the objective moves by less than this (bit/s/Hz).
    pub epsilon: f64,
    pub max_sca_iters: usize,
    /// Per-beam TU secrecy thresholds in bit/s/Hz.
    pub q_tu: Vec<f64>,
    pub rank_tol: f64,
    /// Cost (nats) per `P_B` of total transmit power added to the secrecy
    /// subproblem, so that ties resolve to the lowest-power optimum.
    #[serde(default = "default_power_weight")]
    pub power_weight: f64,
    pub solver: Settings,
}


fn default_power_weight() -> f64 {
    1e-3
}

impl ScaConfig {
    pub fn new(n_beams: usize, q_tu: f64) -> Self {
        Self { epsilon: 1e-3, max_sca_iters: 50, q_tu: vec![q_tu; n_beams], rank_tol: 1e-3, power_weight: default_power_weight(), solver: Settings::default() }
    }

    pub fn validate(&self, n_beams: usize) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(invalid_param("epsilon must be positive"));
        }
        if self.max_sca_iters == 0 {
            return Err(invalid_param("max_sca_iters must be at least 1"));
        }
        if self.q_tu.len() != n_beams {
            return Err(invalid_param(format!("need {n_beams} TU thresholds, got {}", self.q_tu.len())));
        }
        if self.q_tu.iter().any(|q| !(*q >= 0.0) || !q.is_finite()) {
            return Err(invalid_param("TU thresholds must be finite and nonnegative"));
        }
        if !(self.power_weight >= 0.0) || !self.power_weight.is_finite() {
            return Err(invalid_param("power_weight must be finite and nonnegative"));
        }
        if !(0.0..1.0).contains(&self.rank_tol) {
            return Err(invalid_param("rank_tol must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Log-domain scalars of one beam, in the order
/// `s, mu, q, v, tau, eta, alpha`.
pub type BeamScalars = [f64; 7];

/// Linearization anchors `(mu~, q~, eta~)` of one beam.
pub type Anchors = [f64; 3];

/// Current iterate of the SCA: matrices, scalars and anchors.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaPoint {
    pub scalars: Vec<BeamScalars>,
    pub anchors: Vec<Anchors>,
    pub w: Vec<CMat>,
    pub f: Vec<CMat>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub iteration: usize,
    /// `sum_k (s - mu - q + v)` in bit/s/Hz.
    pub objective: f64,
    pub status: SolverStatus,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScaTrace {
    /// Objective at the starting point, before any solve.
    pub initial_objective: f64,
    /// Accepted iterations.
    pub records: Vec<IterRecord>,
    /// Solves whose objective fell below the previous iterate; the previous
    /// iterate is kept and the loop stops.
    pub rejected: usize,
    pub converged: bool,
}

impl ScaTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn is_nondecreasing(&self, slack: f64) -> bool {
        self.records.windows(2).all(|p| p[1].objective >= p[0].objective - slack)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Proposed,
    PaAn,
    Zf,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::PaAn => "pa_an",
            Method::Zf => "zf",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "proposed" => Ok(Method::Proposed),
            "pa_an" => Ok(Method::PaAn),
            "zf" => Ok(Method::Zf),
            other => Err(invalid_input(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BeamformingSolution {
    pub method: Method,
    pub w_mats: Vec<CMat>,
    /// Effective BS signal covariances (the MRT part for `pa_an`).
    pub f_mats: Vec<CMat>,
    pub w_vecs: Vec<CVec>,
    pub f_vecs: Vec<CVec>,
    pub w_rank: Vec<f64>,
    pub f_rank: Vec<f64>,
    /// Log-domain objective in bit/s/Hz.
    pub objective: f64,
    pub scalars: Vec<BeamScalars>,
    /// Anchors of the subproblem that produced this point.
    pub anchors: Vec<Anchors>,
    /// Power-allocation description for `pa_an`.
    pub an: Option<AnBenchmarkParams>,
    pub trace: ScaTrace,
    pub status: SolverStatus,
}

impl BeamformingSolution {
    pub fn satellite_power(&self) -> f64 {
        self.w_mats.iter().map(trace_re).sum()
    }

    /// Total transmitted power of each BS.
    pub fn bs_powers(&self, budget: &PowerBudget) -> Vec<f64> {
        match &self.an {
            Some(_) => vec![budget.p_b; self.f_mats.len()],
            None => self.f_mats.iter().map(trace_re).collect(),
        }
    }

    pub fn total_power(&self, budget: &PowerBudget) -> f64 {
        self.satellite_power() + self.bs_powers(budget).iter().sum::<f64>()
    }

    pub fn min_rank_metric(&self) -> f64 {
        self.w_rank.iter().chain(&self.f_rank).copied().fold(1.0, f64::min)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&serial::SolutionDoc::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<serial::SolutionDoc>(text)?.try_into()
    }
}

/// Uniform-power starting point with anchors and scalars at the logs of
/// their expressions.
pub fn init_linearization(channels: &ChannelSet, budget: &PowerBudget, config: &ScaConfig) -> Result<ScaPoint> {
    let model = Model::new(channels, *budget, BsMode::Optimized, config.q_tu.clone());
    let (w, f) = uniform_matrices(channels, budget);
    let x = model.pack(&w, &f, &[]);
    Ok(point_from_x(&model, &x, w, f))
}

pub(crate) fn uniform_matrices(channels: &ChannelSet, budget: &PowerBudget) -> (Vec<CMat>, Vec<CMat>) {
    let n = channels.n_beams();
    let m = channels.n_bs_antennas();
    let w = vec![CMat::identity(n, n).scale(budget.p_s / (n * n) as f64); n];
    let f = vec![CMat::identity(m, m).scale(budget.p_b / m as f64); n];
    (w, f)
}

pub(crate) fn scaled(mats: &[CMat], factor: f64) -> Vec<CMat> {
    mats.iter().map(|m| m.scale(factor)).collect()
}

fn point_from_x(model: &Model, x: &[f64], w: Vec<CMat>, f: Vec<CMat>) -> ScaPoint {
    let n = model.n_beams();
    let scalars: Vec<BeamScalars> = (0..n).map(|k| std::array::from_fn(|j| x[model.scalar(k, j)])).collect();
    let anchors = scalars.iter().map(|s| [s[MU], s[Q], s[ETA]]).collect();
    ScaPoint { scalars, anchors, w, f }
}

/// Tangent of `e^x` at `anchor`: returns `(slope, intercept)` so the bound is
/// `slope * x + intercept = e^anchor (x - anchor + 1)`.
pub fn taylor_lower_bound(anchor: f64) -> (f64, f64) {
    let e = anchor.exp();
    (e, e * (1.0 - anchor))
}

/// Convex subproblem at the anchors of `point`.
pub fn build_p2(
    channels: &ChannelSet,
    point: &ScaPoint,
    budget: &PowerBudget,
    config: &ScaConfig,
) -> Result<crate::conic::ConicProgram> {
    let n = channels.n_beams();
    config.validate(n)?;
    if point.anchors.len() != n || point.w.len() != n || point.f.len() != n {
        return Err(invalid_input("point does not match the number of beams"));
    }
    if point.anchors.iter().flatten().any(|a| !a.is_finite()) {
        return Err(invalid_input("anchors must be finite"));
    }
    let model = Model::new(channels, *budget, BsMode::Optimized, config.q_tu.clone());
    let x = model.pack(&point.w, &point.f, &[]);
    Ok(model.build(&point.anchors, &model.logs_at(&x), Objective::MaxSecrecy { power_weight: config.power_weight }))
}

/// Raw outcome of the SCA loop on one model.
pub(crate) struct LoopOutput {
    pub solution: Solution,
    pub anchors: Vec<Anchors>,
    pub trace: ScaTrace,
}

/// Tolerance factor of the final re-solve of the SCA loop.
const REFINE_FACTOR: f64 = 1e-2;

/// Fractions of the uniform satellite power tried as starting points. The
/// first subproblem is an inner approximation around the start, so it can be
/// empty at full satellite power although the thresholds are attainable with
/// less satellite interference at the TUs.
const START_BACKOFF: [f64; 5] = [1.0, 1e-1, 1e-2, 1e-3, 1e-4];

/// Runs the loop from `start(fraction)` for each backoff fraction until the
/// first subproblem solves. A first subproblem that stalls is treated like an
/// infeasible one: it is nearly empty around that start.
pub(crate) fn run_from_starts(
    model: &Model,
    config: &ScaConfig,
    start: impl Fn(f64) -> Vec<f64>,
) -> Result<LoopOutput> {
    let mut last = None;
    for frac in START_BACKOFF {
        match run_loop(model, &start(frac), config) {
            Err(LoopError::First(e)) => {
                log::debug!("first subproblem failed at satellite power fraction {frac:e}: {e}");
                last = Some(e);
            }
            Err(LoopError::Later(e)) => return Err(e),
            Ok(out) => return Ok(out),
        }
    }
    Err(last.expect("at least one start"))
}

pub(crate) enum LoopError {
    /// The subproblem at the starting point failed.
    First(Error),
    Later(Error),
}

impl From<LoopError> for Error {
    fn from(e: LoopError) -> Self {
        match e {
            LoopError::First(e) | LoopError::Later(e) => e,
        }
    }
}

pub(crate) fn run_loop(model: &Model, x0: &[f64], config: &ScaConfig) -> std::result::Result<LoopOutput, LoopError> {
    let n = model.n_beams();
    let mut anchors: Vec<Anchors> =
        (0..n).map(|k| [x0[model.scalar(k, MU)], x0[model.scalar(k, Q)], x0[model.scalar(k, ETA)]]).collect();
    let mut shifts = model.logs_at(x0);
    let mut trace = ScaTrace { initial_objective: model.surrogate(x0) * LOG2_E, ..Default::default() };
    let mut prev = trace.initial_objective;
    let mut accepted: Option<(Solution, Vec<Anchors>, Vec<model::BeamLogs>)> = None;

    for t in 1..=config.max_sca_iters {
        let started = Instant::now();
        let prog = model.build(&anchors, &shifts, Objective::MaxSecrecy { power_weight: config.power_weight });
        let warm = accepted.as_ref().map(|(s, _, _)| s);
        let wrap = if t == 1 { LoopError::First } else { LoopError::Later };
        let mut sol = solve_warm(&prog, &config.solver, warm).map_err(wrap)?;
        if t > 1 && sol.status.state != SolverState::Optimal {
            log::debug!("sca iteration {t}: warm solve stopped ({:?}), retrying cold", sol.status.state);
            sol = solve_warm(&prog, &config.solver, None).map_err(wrap)?;
        }
        match sol.status.state {
            SolverState::Optimal => {}
            SolverState::Infeasible if t == 1 => return Err(wrap(Error::InfeasibleQ(sol.status))),
            _ if t == 1 => return Err(wrap(Error::SolverFailure(sol.status))),
            // the last accepted iterate stays valid; stop there unconverged
            _ => {
                log::warn!("sca iteration {t}: subproblem stalled ({:?}), keeping iteration {}", sol.status, t - 1);
                break;
            }
        }
        let objective = model.surrogate(&sol.x) * LOG2_E;
        log::debug!("sca iteration {t}: objective {objective:.6} ({} admm iterations)", sol.status.iterations);
        if t > 1 && objective < prev {
            trace.rejected += 1;
            trace.converged = true;
            break;
        }
        trace.records.push(IterRecord {
            iteration: t,
            objective,
            status: sol.status,
            wall_time_s: started.elapsed().as_secs_f64(),
        });
        let done = (objective - prev).abs() < config.epsilon;
        prev = objective;
        let next: Vec<Anchors> = (0..n)
            .map(|k| [sol.x[model.scalar(k, MU)], sol.x[model.scalar(k, Q)], sol.x[model.scalar(k, ETA)]])
            .collect();
        let next_shifts = model.logs_at(&polish(model, &sol.x));
        accepted = Some((sol, std::mem::replace(&mut anchors, next), std::mem::replace(&mut shifts, next_shifts)));
        if done {
            trace.converged = true;
            break;
        }
    }
    let (mut solution, anchors, used_shifts) = accepted.expect("at least one accepted iteration");
    // re-solve the last accepted subproblem to a tighter tolerance
    let prog = model.build(&anchors, &used_shifts, Objective::MaxSecrecy { power_weight: config.power_weight });
    let tight = Settings { tol: config.solver.tol * REFINE_FACTOR, ..config.solver };
    match solve_warm(&prog, &tight, Some(&solution)) {
        Ok(refined) if refined.is_optimal() => solution = refined,
        Ok(other) => log::debug!("refinement stopped early: {:?}", other.status),
        Err(e) => log::debug!("refinement failed: {e}"),
    }
    Ok(LoopOutput { solution, anchors, trace })
}

/// Normalized trace below which a polished matrix is treated as zero. It sits
/// an order of magnitude above the solver tolerance.
const ZERO_TRACE: f64 = 1e-5;

/// Copy of `x` with each matrix projected onto the PSD cone, cleared when
/// numerically zero and scaled back into the power budget; `ell` is clipped
/// to `[0, 1]`. Scalars are kept.
pub(crate) fn polish(model: &Model, x: &[f64]) -> Vec<f64> {
    let n = model.n_beams();
    let mut out = x.to_vec();
    let project = |off: usize, side: usize, out: &mut Vec<f64>| -> f64 {
        let len = side * side;
        let mut m = project_psd_herm(&params_to_herm(&out[off..off + len], side));
        if trace_re(&m) < ZERO_TRACE {
            m.fill(C64::new(0.0, 0.0));
        }
        out[off..off + len].copy_from_slice(&herm_to_params(&m));
        trace_re(&m)
    };
    let total: f64 = (0..n).map(|k| project(model.w_off(k), n, &mut out)).sum();
    if total > 1.0 {
        for k in 0..n {
            for v in &mut out[model.w_off(k)..model.w_off(k) + n * n] {
                *v /= total;
            }
        }
    }
    match model.bs {
        BsMode::Optimized => {
            let m = model.channels.n_bs_antennas();
            for k in 0..n {
                let tr = project(model.bs_off(k), m, &mut out);
                if tr > 1.0 {
                    for v in &mut out[model.bs_off(k)..model.bs_off(k) + m * m] {
                        *v /= tr;
                    }
                }
            }
        }
        BsMode::Fixed(_) => {}
        BsMode::PowerAllocation(_) => {
            for k in 0..n {
                let i = model.bs_off(k);
                out[i] = out[i].clamp(0.0, 1.0);
            }
        }
    }
    out
}

/// Assembles the returned solution from the final subproblem point.
///
/// `tau` and `alpha` appear only in the TU secrecy row, where raising them
/// never hurts, so they are reported at their upper bounds. This selects the
/// optimal point on which every exponential-cone row is active.
pub(crate) fn finish(
    model: &Model,
    out: LoopOutput,
    method: Method,
    an: Option<AnBenchmarkParams>,
    f_override: Option<Vec<CMat>>,
) -> BeamformingSolution {
    let n = model.n_beams();
    let x = polish(model, &out.solution.x);
    let logs = model.logs_at(&x);
    let scalars: Vec<BeamScalars> = (0..n)
        .map(|k| {
            let mut s: BeamScalars = std::array::from_fn(|j| out.solution.x[model.scalar(k, j)]);
            s[TAU] = s[TAU].max(logs[k][TAU]);
            s[ALPHA] = s[ALPHA].max(logs[k][ALPHA]);
            s
        })
        .collect();
    let objective = scalars.iter().map(|s| s[S] - s[MU] - s[Q] + s[V]).sum::<f64>() * LOG2_E;
    let w_mats = model.w_mats(&x);
    let f_mats = f_override.unwrap_or_else(|| model.f_mats(&x));
    let (w_vecs, w_rank) = w_mats.iter().map(extract_rank_one).unzip();
    let (f_vecs, f_rank): (Vec<CVec>, Vec<f64>) = f_mats.iter().map(extract_rank_one).unzip();
    let sol = BeamformingSolution {
        method,
        w_mats,
        f_mats,
        w_vecs,
        f_vecs,
        w_rank,
        f_rank,
        objective,
        scalars,
        anchors: out.anchors,
        an,
        trace: out.trace,
        status: out.solution.status,
    };
    if sol.min_rank_metric() < 1.0 - 1e-3 {
        log::warn!("{} solution is not rank one (metric {:.6})", method.as_str(), sol.min_rank_metric());
    }
    sol
}

/// Runs the SCA on the joint satellite/BS problem.
pub fn sca_solve(channels: &ChannelSet, budget: &PowerBudget, config: &ScaConfig) -> Result<BeamformingSolution> {
    budget.validate()?;
    config.validate(channels.n_beams())?;
    let model = Model::new(channels, *budget, BsMode::Optimized, config.q_tu.clone());
    let (w, f) = uniform_matrices(channels, budget);
    let out = run_from_starts(&model, config, |frac| model.pack(&scaled(&w, frac), &f, &[]))?;
    Ok(finish(&model, out, Method::Proposed, None, None))
}

/// Runs the SCA from an earlier solution of a related instance, falling back
/// to [`sca_solve`] when that start fails. BS covariances are zero-padded when
/// the instance has more antennas. A start that is feasible for this instance
/// bounds the result from below.
pub fn sca_solve_from(
    channels: &ChannelSet,
    budget: &PowerBudget,
    config: &ScaConfig,
    start: &BeamformingSolution,
) -> Result<BeamformingSolution> {
    budget.validate()?;
    config.validate(channels.n_beams())?;
    let n = channels.n_beams();
    let m = channels.n_bs_antennas();
    let fits = start.an.is_none()
        && start.w_mats.len() == n
        && start.f_mats.len() == n
        && start.w_mats.iter().all(|w| w.nrows() == n)
        && start.f_mats.iter().all(|f| f.nrows() <= m);
    if !fits {
        return sca_solve(channels, budget, config);
    }
    let f: Vec<CMat> = start
        .f_mats
        .iter()
        .map(|f| {
            let mut padded = CMat::zeros(m, m);
            padded.view_mut((0, 0), (f.nrows(), f.ncols())).copy_from(f);
            padded
        })
        .collect();
    let model = Model::new(channels, *budget, BsMode::Optimized, config.q_tu.clone());
    match run_loop(&model, &model.pack(&start.w_mats, &f, &[]), config) {
        Ok(out) => Ok(finish(&model, out, Method::Proposed, None, None)),
        Err(e) => {
            log::debug!("warm start failed: {}", Error::from(e));
            sca_solve(channels, budget, config)
        }
    }
}

/// Principal eigenvector scaled by `sqrt(lambda_max)`, and
/// `lambda_max / trace`.
pub fn extract_rank_one(m: &CMat) -> (CVec, f64) {
    let tr = trace_re(m);
    if tr <= 1e-12 {
        return (CVec::zeros(m.nrows()), 1.0);
    }
    let (lmax, u, _) = principal_eigen(m);
    let v = u.scale(lmax.max(0.0).sqrt());
    (v, (lmax / tr).clamp(0.0, 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeamTightness {
    /// `e^x - side` for `s`, `v`, `tau`, `alpha`.
    pub residuals: [f64; 4],
    /// Residual divided by `1 + side`.
    pub relative: [f64; 4],
    pub flagged: [bool; 4],
    /// Slack of the TU secrecy row at the reported scalars (nats, >= 0 when met).
    pub tu_slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TightnessReport {
    pub beams: Vec<BeamTightness>,
}

impl TightnessReport {
    pub fn max_relative(&self) -> f64 {
        self.beams.iter().flat_map(|b| b.relative).map(f64::abs).fold(0.0, f64::max)
    }

    pub fn all_tight(&self) -> bool {
        self.beams.iter().all(|b| b.flagged.iter().all(|f| !f))
    }
}

pub(crate) fn model_for_solution<'a>(
    sol: &BeamformingSolution,
    channels: &'a ChannelSet,
    budget: &PowerBudget,
    q_tu: Vec<f64>,
) -> (Model<'a>, Vec<f64>) {
    let n = channels.n_beams();
    let (bs, ell) = match (&sol.method, &sol.an) {
        (Method::PaAn, Some(an)) => (BsMode::PowerAllocation(crate::benchmarks::pa_constants(channels, budget, an)), an.ell.clone()),
        (Method::Zf, _) => (BsMode::Fixed(sol.f_mats.clone()), Vec::new()),
        _ => (BsMode::Optimized, Vec::new()),
    };
    let model = Model::new(channels, *budget, bs, q_tu);
    let mut x = model.pack(&sol.w_mats, &sol.f_mats, &ell);
    for k in 0..n {
        for j in 0..7 {
            x[model.scalar(k, j)] = sol.scalars[k][j];
        }
    }
    (model, x)
}

/// Residuals of the exponential-cone rows at the returned point.
pub fn verify_tightness(solution: &BeamformingSolution, channels: &ChannelSet, budget: &PowerBudget) -> TightnessReport {
    let n = channels.n_beams();
    let (model, x) = model_for_solution(solution, channels, budget, vec![0.0; n]);
    let beams = (0..n)
        .map(|k| {
            let sc = &solution.scalars[k];
            let mut residuals = [0.0; 4];
            let mut relative = [0.0; 4];
            let mut flagged = [false; 4];
            for (slot, which) in [S, V, TAU, ALPHA].into_iter().enumerate() {
                let side = model.side(k, which).eval(&x);
                residuals[slot] = sc[which].exp() - side;
                relative[slot] = residuals[slot] / (1.0 + side);
                flagged[slot] = residuals[slot].abs() > 1e-4 * (1.0 + side);
            }
            let tu_slack = sc[TAU] + sc[ALPHA] - sc[ETA] - sc[Q];
            BeamTightness { residuals, relative, flagged, tu_slack }
        })
        .collect();
    TightnessReport { beams }
}

/// Minimum-power counterpart of the last subproblem: same constraints and
/// anchors as the one that produced `reference`, plus
/// `sum_k (s - mu - q + v) >= phi_star` (nats).
///
/// Solved through its Lagrangian: for a multiplier `w` the secrecy
/// subproblem with power cost `w / P_B` returns a point of least power for
/// the secrecy it reaches, and that secrecy falls as `w` grows. `w` is
/// bisected (on a log scale) until the secrecy meets `phi_star` from above.
pub fn solve_power_min(
    channels: &ChannelSet,
    budget: &PowerBudget,
    config: &ScaConfig,
    reference: &BeamformingSolution,
    phi_star: f64,
) -> Result<BeamformingSolution> {
    budget.validate()?;
    config.validate(channels.n_beams())?;
    if reference.method != Method::Proposed {
        return Err(invalid_input("power minimization applies to the proposed scheme"));
    }
    if !phi_star.is_finite() {
        return Err(invalid_input("secrecy target must be finite"));
    }
    let (model, x_ref) = model_for_solution(reference, channels, budget, config.q_tu.clone());
    let shifts = model.logs_at(&x_ref);
    let settings = Settings { tol: config.solver.tol * REFINE_FACTOR, ..config.solver };
    let started = Instant::now();
    let mut warm = Solution {
        x: x_ref,
        y: Vec::new(),
        s: Vec::new(),
        status: reference.status,
    };
    let mut solves = 0usize;
    let mut solve_at = |w: f64, warm: &mut Solution| -> Result<(Solution, f64)> {
        let prog = model.build(&reference.anchors, &shifts, Objective::MaxSecrecy { power_weight: w });
        if warm.y.len() != prog.m() {
            warm.y = vec![0.0; prog.m()];
        }
        let sol = solve_warm(&prog, &settings, Some(warm))?;
        solves += 1;
        if !sol.is_optimal() {
            return Err(Error::SolverFailure(sol.status));
        }
        let secrecy = model.surrogate(&sol.x);
        *warm = sol.clone();
        Ok((sol, secrecy))
    };

    // bracket: secrecy(lo) >= phi_star > secrecy(hi)
    let mut lo = config.power_weight.max(W_MIN);
    let (mut best, mut lo_secrecy) = solve_at(lo, &mut warm)?;
    while lo_secrecy < phi_star && lo > W_MIN {
        lo = (lo * 1e-2).max(W_MIN);
        (best, lo_secrecy) = solve_at(lo, &mut warm)?;
    }
    if lo_secrecy < phi_star - PHI_TOL {
        return Err(invalid_input(format!(
            "secrecy target {phi_star:.6} exceeds the attainable {lo_secrecy:.6} nats"
        )));
    }
    let mut hi = lo;
    loop {
        if hi >= W_MAX {
            // the target does not bind: least power overall
            break;
        }
        hi = (hi * 10.0).min(W_MAX);
        let (sol, secrecy) = solve_at(hi, &mut warm)?;
        if secrecy < phi_star {
            break;
        }
        lo = hi;
        lo_secrecy = secrecy;
        best = sol;
    }
    if hi > lo {
        for _ in 0..BISECTION_STEPS {
            if lo_secrecy - phi_star <= PHI_TOL || hi / lo < 1.0 + 1e-12 {
                break;
            }
            let mid = (lo * hi).sqrt();
            let (sol, secrecy) = solve_at(mid, &mut warm)?;
            if secrecy >= phi_star {
                lo = mid;
                lo_secrecy = secrecy;
                best = sol;
            } else {
                hi = mid;
            }
        }
    }
    log::debug!("power minimization: {solves} solves, multiplier {lo:.4e}, secrecy {lo_secrecy:.9} nats");
    let record = IterRecord {
        iteration: 1,
        objective: lo_secrecy * LOG2_E,
        status: best.status,
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    let trace = ScaTrace { initial_objective: reference.objective, records: vec![record], rejected: 0, converged: true };
    let out = LoopOutput { solution: best, anchors: reference.anchors.clone(), trace };
    Ok(finish(&model, out, Method::Proposed, None, None))
}

/// Multiplier range and stopping rule of the power-minimization bisection.
const W_MIN: f64 = 1e-9;
const W_MAX: f64 = 1e6;
const BISECTION_STEPS: usize = 80;
/// Secrecy slack (nats) above the target at which bisection stops.
const PHI_TOL: f64 = 1e-7;

/// Effective BS covariance of the MRT stream, `ell P_B f f^H`.
pub(crate) fn mrt_covariances(an: &AnBenchmarkParams, budget: &PowerBudget) -> Vec<CMat> {
    an.f_mrt.iter().zip(&an.ell).map(|(f, l)| gram(f).scale(l * budget.p_b)).collect()
}

#[cfg(test)]
mod tests;
