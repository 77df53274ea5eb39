//! Seeded Monte-Carlo sweeps over one system parameter.
//!
//! Realization `r` of master seed `s` draws its satellite links from ChaCha
//! stream `3r`, its terrestrial links from stream `3r + 1` and the AN
//! coefficients of the power-allocation benchmark from stream `3r + 2`. The
//! same channels are reused at every grid point and for every method. An
//! antenna sweep draws the terrestrial vectors once with the largest antenna
//! count and keeps the leading entries, so the channels stay nested.
//!
//! Along the P_B, P_S and M grids (ascending) and the Q grid (descending) the
//! proposed method starts each point from its solution at the previous one,
//! which remains feasible there.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmarks::{an_basis, draw_an_coefficients, solve_pa, zf_baseline};
use crate::chanmodel::{draw_channel_set, stream_rng, ChannelSet};
use crate::config::{ExperimentSpec, SweepVar};
use crate::error::{Error, Result};
use crate::linalg::CVec;
use crate::ratemodel::{
    compute_sinrs, compute_sinrs_an, secrecy_rates, secrecy_rates_an, BeamformerSet, EveCsi, PowerBudget,
    SecrecyReport,
};
use crate::sca::{sca_solve, sca_solve_from, solve_power_min, verify_tightness, BeamformingSolution, Method, ScaConfig};

pub const CSV_HEADER: &str = "sweep_var,method,value,mean_sum_R_su,stderr,mean_tu_margin,infeasible,mean_iters";

/// Aggregate of one (grid point, method) cell over the feasible realizations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointStats {
    pub method: Method,
    pub value: f64,
    /// Sum SU secrecy rate with the true eavesdropper channels (bit/s/Hz).
    pub mean_sum_r_su: f64,
    pub stderr: f64,
    /// Smallest per-beam TU secrecy margin under the estimated eavesdropper
    /// channels, averaged (bit/s/Hz).
    pub mean_tu_margin: f64,
    pub infeasible: usize,
    pub mean_iters: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub sweep: SweepVar,
    /// Grid-major, in the order of the spec's methods.
    pub points: Vec<PointStats>,
}

impl SweepResult {
    pub fn infeasible(&self) -> usize {
        self.points.iter().map(|p| p.infeasible).sum()
    }

    /// Curve of one method over the grid.
    pub fn series(&self, method: Method) -> Vec<&PointStats> {
        self.points.iter().filter(|p| p.method == method).collect()
    }
}

/// Measurements of one solved instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub sum_r_su: f64,
    pub tu_margin: f64,
    pub iterations: usize,
}

/// Channels of realization `r` with `m` BS antennas out of `m_max` drawn.
pub fn realization_channels(
    spec: &ExperimentSpec,
    r: usize,
    m: usize,
    delta: f64,
) -> Result<ChannelSet> {
    let mut cfg = spec.channel.clone();
    cfg.csi.delta_bound = delta;
    let r = r as u64;
    let m_max = spec.max_antennas().max(m);
    let full = draw_channel_set(
        &mut stream_rng(spec.master_seed, 3 * r),
        &mut stream_rng(spec.master_seed, 3 * r + 1),
        &cfg,
        m_max,
    )?;
    if m == m_max {
        Ok(full)
    } else {
        full.truncate_bs_antennas(m)
    }
}

/// Unit AN coefficients of realization `r`, one per beam, sized to each
/// beam's null-space basis.
pub fn realization_an_coefficients(channels: &ChannelSet, master_seed: u64, r: usize) -> Result<Vec<CVec>> {
    let mut rng = stream_rng(master_seed, 3 * r as u64 + 2);
    channels
        .beams()
        .iter()
        .map(|c| {
            let dim = an_basis(&c.g_tu, &c.g_su)?.ncols();
            Ok(draw_an_coefficients(&mut rng, 1, dim).remove(0))
        })
        .collect()
}

/// Runs one method on one instance.
pub fn solve_method(
    method: Method,
    channels: &ChannelSet,
    budget: &PowerBudget,
    config: &ScaConfig,
    master_seed: u64,
    realization: usize,
) -> Result<BeamformingSolution> {
    match method {
        Method::Proposed => sca_solve(channels, budget, config),
        Method::PaAn => {
            let v = realization_an_coefficients(channels, master_seed, realization)?;
            solve_pa(channels, budget, config, &v)
        }
        Method::Zf => zf_baseline(channels, budget, config),
    }
}

/// Rates achieved by the extracted beamformers.
pub fn realized_report(
    solution: &BeamformingSolution,
    channels: &ChannelSet,
    budget: &PowerBudget,
    eve: EveCsi,
) -> Result<SecrecyReport> {
    match &solution.an {
        Some(an) => Ok(secrecy_rates_an(&compute_sinrs_an(channels, &solution.w_vecs, an, budget, eve)?)),
        None => {
            let bf = BeamformerSet { w: solution.w_vecs.clone(), f: solution.f_vecs.clone() };
            Ok(secrecy_rates(&compute_sinrs(channels, &bf, budget, eve)?))
        }
    }
}

pub fn evaluate(
    solution: &BeamformingSolution,
    channels: &ChannelSet,
    budget: &PowerBudget,
    config: &ScaConfig,
) -> Result<RunOutcome> {
    let realized = realized_report(solution, channels, budget, EveCsi::True)?;
    let estimated = realized_report(solution, channels, budget, EveCsi::Estimated)?;
    let tu_margin = estimated.tu_margins(&config.q_tu).into_iter().fold(f64::INFINITY, f64::min);
    Ok(RunOutcome { sum_r_su: realized.sum_r_su, tu_margin, iterations: solution.trace.iterations() })
}

/// Grid point `value` applied to the spec: budget, SCA config, antenna
/// count and CSI error bound.
fn grid_setting(spec: &ExperimentSpec, value: f64) -> (PowerBudget, ScaConfig, usize, f64) {
    let mut p_s = spec.p_s_db;
    let mut p_b = spec.p_b_db;
    let mut q = spec.q_tu;
    let mut m = spec.m_antennas;
    let mut delta = spec.channel.csi.delta_bound;
    match spec.sweep {
        SweepVar::PB => p_b = value,
        SweepVar::PS => p_s = value,
        SweepVar::M => m = value as usize,
        SweepVar::Q => q = value,
        SweepVar::Delta => delta = value,
    }
    (spec.budget(p_s, p_b), spec.sca_config(q), m, delta)
}

type Cell = std::result::Result<RunOutcome, String>;

/// Grid indices in the order along which the proposed method warm-starts from
/// the previous point: the direction in which a solution stays feasible.
/// `None` when no direction preserves feasibility.
fn continuation_order(spec: &ExperimentSpec) -> Option<Vec<usize>> {
    let mut order: Vec<usize> = (0..spec.grid.len()).collect();
    let key = |i: &usize| spec.grid[*i];
    match spec.sweep {
        SweepVar::PB | SweepVar::PS | SweepVar::M => order.sort_by(|a, b| key(a).total_cmp(&key(b))),
        SweepVar::Q => order.sort_by(|a, b| key(b).total_cmp(&key(a))),
        SweepVar::Delta => return None,
    }
    Some(order)
}

fn run_realization(spec: &ExperimentSpec, r: usize) -> Vec<Cell> {
    let n_methods = spec.methods.len();
    let mut cells: Vec<Option<Cell>> = vec![None; spec.grid.len() * n_methods];
    let continuation = continuation_order(spec);
    let order = continuation.clone().unwrap_or_else(|| (0..spec.grid.len()).collect());
    let mut previous: Option<BeamformingSolution> = None;
    for g in order {
        let value = spec.grid[g];
        let (budget, config, m, delta) = grid_setting(spec, value);
        let channels = realization_channels(spec, r, m, delta);
        for (mi, &method) in spec.methods.iter().enumerate() {
            let cell = channels
                .as_ref()
                .map_err(|e| e.to_string())
                .and_then(|ch| {
                    let solved = match (method, &previous) {
                        (Method::Proposed, Some(start)) if continuation.is_some() => {
                            sca_solve_from(ch, &budget, &config, start)
                        }
                        _ => solve_method(method, ch, &budget, &config, spec.master_seed, r),
                    };
                    if method == Method::Proposed && continuation.is_some() {
                        previous = solved.as_ref().ok().cloned();
                    }
                    solved.and_then(|sol| evaluate(&sol, ch, &budget, &config)).map_err(|e| e.to_string())
                });
            if let Err(e) = &cell {
                log::warn!("realization {r}, {} = {value}, {}: {e}", spec.sweep.as_str(), method.as_str());
            }
            cells[g * n_methods + mi] = Some(cell);
        }
    }
    cells.into_iter().map(|c| c.expect("every grid point visited")).collect()
}

/// Runs every realization in parallel and aggregates in realization order.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<SweepResult> {
    spec.validate()?;
    let per_realization: Vec<Vec<Cell>> =
        (0..spec.realizations).into_par_iter().map(|r| run_realization(spec, r)).collect();
    let n_methods = spec.methods.len();
    let mut points = Vec::with_capacity(spec.grid.len() * n_methods);
    for (g, &value) in spec.grid.iter().enumerate() {
        for (mi, &method) in spec.methods.iter().enumerate() {
            let idx = g * n_methods + mi;
            let ok: Vec<&RunOutcome> = per_realization.iter().filter_map(|cells| cells[idx].as_ref().ok()).collect();
            let infeasible = spec.realizations - ok.len();
            let rates: Vec<f64> = ok.iter().map(|o| o.sum_r_su).collect();
            let (mean, stderr) = mean_stderr(&rates);
            let margins: Vec<f64> = ok.iter().map(|o| o.tu_margin).collect();
            let iters: Vec<f64> = ok.iter().map(|o| o.iterations as f64).collect();
            points.push(PointStats {
                method,
                value,
                mean_sum_r_su: mean,
                stderr,
                mean_tu_margin: mean_stderr(&margins).0,
                infeasible,
                mean_iters: mean_stderr(&iters).0,
            });
        }
    }
    Ok(SweepResult { sweep: spec.sweep, points })
}

/// Acceptance thresholds used by [`verify_instance`].
pub const RANK_MIN: f64 = 0.999;
pub const TIGHTNESS_MAX: f64 = 1e-4;
pub const TU_MARGIN_MIN: f64 = -1e-4;
pub const POWER_REL_TOL: f64 = 1e-6;
/// Allowed secrecy shortfall (bit/s/Hz) and power excess of the
/// power-minimization cross-check.
pub const P3_TOL: f64 = 1e-6;
/// The power-minimization target sits this far (nats) below the reference
/// secrecy so that solver noise cannot make it unattainable.
pub const P3_TARGET_BACKOFF: f64 = 5e-7;

/// Checks run on one solution of the proposed scheme.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceCheck {
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub monotone: bool,
    pub min_rank: f64,
    pub max_tightness: f64,
    pub tu_margin: f64,
    /// Largest power over budget, relative to the budget (<= 0 when met).
    pub power_excess: f64,
    /// Secrecy of the power-minimizing point minus the reference secrecy.
    pub p3_secrecy_gap: Option<f64>,
    /// Power of the power-minimizing point minus the reference power.
    pub p3_power_gap: Option<f64>,
    pub p3_error: Option<String>,
}

impl InstanceCheck {
    pub fn failures(&self) -> Vec<&'static str> {
        let mut f = Vec::new();
        if !self.monotone {
            f.push("objective trace decreased");
        }
        if self.min_rank < RANK_MIN {
            f.push("rank-one metric below threshold");
        }
        if self.converged && self.max_tightness > TIGHTNESS_MAX {
            f.push("exponential rows not tight");
        }
        if self.tu_margin < TU_MARGIN_MIN {
            f.push("TU secrecy threshold violated");
        }
        if self.power_excess > POWER_REL_TOL {
            f.push("power budget exceeded");
        }
        match (self.p3_secrecy_gap, self.p3_power_gap) {
            (Some(ds), Some(dp)) if ds >= -P3_TOL && dp <= P3_TOL => {}
            _ => f.push("power-minimization cross-check"),
        }
        f
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }
}

/// Solution checks for one instance solved by the proposed scheme.
pub fn verify_instance(
    solution: &BeamformingSolution,
    channels: &ChannelSet,
    budget: &PowerBudget,
    config: &ScaConfig,
) -> Result<InstanceCheck> {
    let outcome = evaluate(solution, channels, budget, config)?;
    let sat_excess = solution.satellite_power() / budget.p_s - 1.0;
    let power_excess = solution.bs_powers(budget).iter().map(|p| p / budget.p_b - 1.0).fold(sat_excess, f64::max);
    let target = solution.objective * std::f64::consts::LN_2 - P3_TARGET_BACKOFF;
    let (p3_secrecy_gap, p3_power_gap, p3_error) = match solve_power_min(channels, budget, config, solution, target) {
        Ok(p3) => (
            Some(p3.objective - solution.objective),
            Some(p3.total_power(budget) - solution.total_power(budget)),
            None,
        ),
        Err(e) => (None, None, Some(e.to_string())),
    };
    Ok(InstanceCheck {
        objective: solution.objective,
        iterations: solution.trace.iterations(),
        converged: solution.trace.converged,
        monotone: solution.trace.is_nondecreasing(1e-7),
        min_rank: solution.min_rank_metric(),
        max_tightness: verify_tightness(solution, channels, budget).max_relative(),
        tu_margin: outcome.tu_margin,
        power_excess,
        p3_secrecy_gap,
        p3_power_gap,
        p3_error,
    })
}

/// Sample mean and standard error; NaN mean for an empty sample.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// `x` with 6 significant digits, trailing zeros removed.
pub fn fmt_sig6(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp) as usize;
        let s = format!("{:.*}", decimals, mant.parse::<f64>().expect("mantissa") * 10f64.powi(exp));
        trim_zeros(&s)
    } else {
        format!("{}e{}", trim_zeros(mant), exp)
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

pub fn csv_string(result: &SweepResult) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for p in &result.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            result.sweep.as_str(),
            p.method.as_str(),
            fmt_sig6(p.value),
            fmt_sig6(p.mean_sum_r_su),
            fmt_sig6(p.stderr),
            fmt_sig6(p.mean_tu_margin),
            p.infeasible,
            fmt_sig6(p.mean_iters)
        );
    }
    out
}

/// Parses a CSV written by [`emit_csv`].
pub fn parse_csv(text: &str) -> Result<SweepResult> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::Parse("missing or unexpected CSV header".into()));
    }
    let mut sweep = None;
    let mut points = Vec::new();
    for (i, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(Error::Parse(format!("row {} has {} fields", i + 1, f.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("row {}: {e}", i + 1)));
        let var = SweepVar::parse(f[0])?;
        if sweep.is_some_and(|s| s != var) {
            return Err(Error::Parse("mixed sweep variables".into()));
        }
        sweep = Some(var);
        points.push(PointStats {
            method: Method::parse(f[1])?,
            value: num(f[2])?,
            mean_sum_r_su: num(f[3])?,
            stderr: num(f[4])?,
            mean_tu_margin: num(f[5])?,
            infeasible: f[6].parse().map_err(|e| Error::Parse(format!("row {}: {e}", i + 1)))?,
            mean_iters: num(f[7])?,
        });
    }
    Ok(SweepResult { sweep: sweep.unwrap_or(SweepVar::PB), points })
}

/// Writes `contents` next to `path` and renames it into place.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let name = path.file_name().ok_or_else(|| Error::InvalidInput(format!("{} is not a file path", path.display())))?;
    let mut tmp_name = name.to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    write_atomic(path, &csv_string(result))
}

/// gnuplot script plotting one curve per method from the CSV at
/// `csv_name`, relative to the script's directory.
pub fn plot_script(result: &SweepResult, csv_name: &str) -> String {
    let mut methods: Vec<Method> = Vec::new();
    for p in &result.points {
        if !methods.contains(&p.method) {
            methods.push(p.method);
        }
    }
    let stem = csv_name.strip_suffix(".csv").unwrap_or(csv_name);
    let mut s = String::new();
    let _ = writeln!(s, "# sum secrecy rate vs {}", result.sweep.as_str());
    s.push_str("set datafile separator ','\n");
    s.push_str("set terminal pngcairo size 800,600\n");
    let _ = writeln!(s, "set output '{stem}.png'");
    let _ = writeln!(s, "set xlabel '{}'", result.sweep.label());
    s.push_str("set ylabel 'sum secrecy rate (bit/s/Hz)'\n");
    s.push_str("set key left top\n");
    s.push_str("set grid\n");
    let clauses: Vec<String> = methods
        .iter()
        .map(|m| format!("'{csv_name}' every ::1 using 3:(strcol(2) eq '{0}' ? $4 : 1/0):5 with yerrorlines title '{0}'", m.as_str()))
        .collect();
    if !clauses.is_empty() {
        let _ = writeln!(s, "plot {}", clauses.join(", \\\n     "));
    }
    s
}

pub fn emit_plot_script(result: &SweepResult, path: &Path, csv_name: &str) -> Result<()> {
    write_atomic(path, &plot_script(result, csv_name))
}
