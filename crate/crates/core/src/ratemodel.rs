//! SINR and secrecy-rate evaluation.
//!
//! Beam `k` carries one satellite stream `w_k` and one BS stream `f_k`. Every
//! receiver in beam `k` hears all satellite streams through its own satellite
//! channel, and the beam-`k` BS stream through its own terrestrial channel.

use serde::{Deserialize, Serialize};

use crate::chanmodel::ChannelSet;
use crate::error::{invalid_input, invalid_param, Result};
use crate::linalg::{abs2_inner, gram, trace_prod, CMat, CVec};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerBudget {
    /// Satellite total power (linear).
    pub p_s: f64,
    /// Per-BS power (linear).
    pub p_b: f64,
    pub noise_su: f64,
    pub noise_tu: f64,
    pub noise_e: f64,
}

impl PowerBudget {
    pub fn new(p_s: f64, p_b: f64) -> Self {
        Self { p_s, p_b, noise_su: 1.0, noise_tu: 1.0, noise_e: 1.0 }
    }

    pub fn from_db(p_s_db: f64, p_b_db: f64) -> Self {
        Self::new(crate::chanmodel::db_to_linear(p_s_db), crate::chanmodel::db_to_linear(p_b_db))
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.p_s, self.p_b, self.noise_su, self.noise_tu, self.noise_e]
            .iter()
            .all(|x| *x > 0.0 && x.is_finite());
        if ok {
            Ok(())
        } else {
            Err(invalid_param("powers and noise levels must be positive and finite"))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BeamformerSet {
    pub w: Vec<CVec>,
    pub f: Vec<CVec>,
}

impl BeamformerSet {
    pub fn satellite_power(&self) -> f64 {
        self.w.iter().map(|w| w.norm_squared()).sum()
    }

    pub fn within_budget(&self, budget: &PowerBudget, tol: f64) -> bool {
        self.satellite_power() <= budget.p_s + tol && self.f.iter().all(|f| f.norm_squared() <= budget.p_b + tol)
    }
}

/// Which eavesdropper channel to evaluate against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EveCsi {
    /// The realized channel (evaluation).
    True,
    /// The transmitter's estimate (optimization).
    Estimated,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeamSinr {
    pub su: f64,
    pub tu: f64,
    pub se: f64,
    pub te: f64,
}

impl BeamSinr {
    pub fn su_secrecy_unclamped(&self) -> f64 {
        (1.0 + self.su).log2() - (1.0 + self.se).log2()
    }

    pub fn tu_secrecy_unclamped(&self) -> f64 {
        (1.0 + self.tu).log2() - (1.0 + self.te).log2()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SinrReport {
    pub beams: Vec<BeamSinr>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeamSecrecy {
    pub sinr: BeamSinr,
    pub r_su: f64,
    pub r_tu: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecrecyReport {
    pub beams: Vec<BeamSecrecy>,
    pub sum_r_su: f64,
}

impl SecrecyReport {
    pub const CSV_HEADER: &'static str = "beam,gamma_su,gamma_tu,gamma_se,gamma_te,r_su,r_tu";

    /// One flat record per beam in the column order of [`Self::CSV_HEADER`].
    pub fn csv_rows(&self) -> Vec<String> {
        self.beams
            .iter()
            .enumerate()
            .map(|(k, b)| {
                format!(
                    "{},{},{},{},{},{},{}",
                    k, b.sinr.su, b.sinr.tu, b.sinr.se, b.sinr.te, b.r_su, b.r_tu
                )
            })
            .collect()
    }

    /// Unclamped TU secrecy minus `q[k]`, per beam.
    pub fn tu_margins(&self, q: &[f64]) -> Vec<f64> {
        self.beams.iter().zip(q).map(|(b, q)| b.sinr.tu_secrecy_unclamped() - q).collect()
    }
}

fn eve_vectors(channels: &ChannelSet, k: usize, eve: EveCsi) -> (&CVec, &CVec) {
    let b = channels.beam(k);
    match eve {
        EveCsi::True => (&b.h_e_true, &b.g_e_true),
        EveCsi::Estimated => (&b.h_e_est, &b.g_e_est),
    }
}

fn check_dims(channels: &ChannelSet, w: &[CVec], f_len: Option<(usize, usize)>) -> Result<()> {
    let n = channels.n_beams();
    if w.len() != n || w.iter().any(|v| v.len() != channels.n_sat_antennas()) {
        return Err(invalid_input("satellite beamformers must be N vectors of length N"));
    }
    if let Some((count, len)) = f_len {
        if count != n || len != channels.n_bs_antennas() {
            return Err(invalid_input("BS beamformers must be N vectors of length M"));
        }
    }
    Ok(())
}

/// SINRs of SU, TU and of the eavesdropper targeting each of them.
pub fn compute_sinrs(
    channels: &ChannelSet,
    bf: &BeamformerSet,
    budget: &PowerBudget,
    eve: EveCsi,
) -> Result<SinrReport> {
    let f_len = bf.f.iter().map(|f| f.len()).max().unwrap_or(0);
    if bf.f.iter().any(|f| f.len() != f_len) {
        return Err(invalid_input("BS beamformers have mixed lengths"));
    }
    check_dims(channels, &bf.w, Some((bf.f.len(), f_len)))?;
    let n = channels.n_beams();
    let beams = (0..n)
        .map(|k| {
            let c = channels.beam(k);
            let (h_e, g_e) = eve_vectors(channels, k, eve);
            let sat = |h: &CVec| -> Vec<f64> { bf.w.iter().map(|w| abs2_inner(h, w)).collect() };
            let su = sat(&c.h_su);
            let tu = sat(&c.h_tu);
            let ee = sat(h_e);
            let others = |v: &[f64]| v.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, x)| x).sum::<f64>();
            let f = &bf.f[k];
            let bs_su = abs2_inner(&c.g_su, f);
            let bs_tu = abs2_inner(&c.g_tu, f);
            let bs_e = abs2_inner(g_e, f);
            BeamSinr {
                su: su[k] / (others(&su) + bs_su + budget.noise_su),
                tu: bs_tu / (tu.iter().sum::<f64>() + budget.noise_tu),
                se: ee[k] / (others(&ee) + bs_e + budget.noise_e),
                te: bs_e / (ee.iter().sum::<f64>() + budget.noise_e),
            }
        })
        .collect();
    Ok(SinrReport { beams })
}

/// Same quantities from the relaxed matrices `W_k`, `F_k` via traces with the
/// Gram matrices.
pub fn compute_sinrs_gram(
    channels: &ChannelSet,
    w: &[CMat],
    f: &[CMat],
    budget: &PowerBudget,
    eve: EveCsi,
) -> Result<SinrReport> {
    let n = channels.n_beams();
    if w.len() != n || f.len() != n {
        return Err(invalid_input("need one W and one F per beam"));
    }
    let beams = (0..n)
        .map(|k| {
            let g = channels.grams(k);
            let (he, ge) = match eve {
                EveCsi::Estimated => (g.h_e.clone(), g.g_e.clone()),
                EveCsi::True => (gram(&channels.beam(k).h_e_true), gram(&channels.beam(k).g_e_true)),
            };
            let sat = |h: &CMat| -> Vec<f64> { w.iter().map(|wi| trace_prod(h, wi)).collect() };
            let su = sat(&g.h_su);
            let tu = sat(&g.h_tu);
            let ee = sat(&he);
            let others = |v: &[f64]| v.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, x)| x).sum::<f64>();
            let bs_su = trace_prod(&g.g_su, &f[k]);
            let bs_tu = trace_prod(&g.g_tu, &f[k]);
            let bs_e = trace_prod(&ge, &f[k]);
            BeamSinr {
                su: su[k] / (others(&su) + bs_su + budget.noise_su),
                tu: bs_tu / (tu.iter().sum::<f64>() + budget.noise_tu),
                se: ee[k] / (others(&ee) + bs_e + budget.noise_e),
                te: bs_e / (ee.iter().sum::<f64>() + budget.noise_e),
            }
        })
        .collect();
    Ok(SinrReport { beams })
}

/// Clamped secrecy rates in bit/s/Hz.
pub fn secrecy_rates(sinrs: &SinrReport) -> SecrecyReport {
    let beams: Vec<BeamSecrecy> = sinrs
        .beams
        .iter()
        .map(|s| BeamSecrecy {
            sinr: *s,
            r_su: s.su_secrecy_unclamped().max(0.0),
            r_tu: s.tu_secrecy_unclamped().max(0.0),
        })
        .collect();
    let sum_r_su = beams.iter().map(|b| b.r_su).sum();
    SecrecyReport { beams, sum_r_su }
}

/// Unclamped sum SU secrecy written as the log of a product of ratios of
/// total received power to interference-plus-noise power.
pub fn sum_secrecy_product_form(channels: &ChannelSet, w: &[CMat], f: &[CMat], budget: &PowerBudget) -> f64 {
    let n = channels.n_beams();
    let mut legit = 1.0;
    let mut eve = 1.0;
    for k in 0..n {
        let g = channels.grams(k);
        let tot = |h: &CMat, gm: &CMat, noise: f64, skip: Option<usize>| -> f64 {
            w.iter()
                .enumerate()
                .filter(|(i, _)| Some(*i) != skip)
                .map(|(_, wi)| trace_prod(h, wi))
                .sum::<f64>()
                + trace_prod(gm, &f[k])
                + noise
        };
        legit *= tot(&g.h_su, &g.g_su, budget.noise_su, None) / tot(&g.h_su, &g.g_su, budget.noise_su, Some(k));
        eve *= tot(&g.h_e, &g.g_e, budget.noise_e, None) / tot(&g.h_e, &g.g_e, budget.noise_e, Some(k));
    }
    legit.log2() - eve.log2()
}

/// Parameters of the MRT + artificial-noise BS transmission.
#[derive(Clone, Debug, PartialEq)]
pub struct AnBenchmarkParams {
    /// Fraction of BS power on the TU signal, per beam.
    pub ell: Vec<f64>,
    /// Unit MRT direction toward the TU.
    pub f_mrt: Vec<CVec>,
    /// Orthonormal basis of the null space of the legitimate BS channels.
    pub an_basis: Vec<CMat>,
    /// AN coefficients in basis coordinates (unit norm by default).
    pub v: Vec<CVec>,
}

impl AnBenchmarkParams {
    pub fn an_vector(&self, k: usize) -> CVec {
        &self.an_basis[k] * &self.v[k]
    }
}

/// SINRs when the BS splits its power between an MRT stream (`ell`) and
/// artificial noise (`1 - ell`) confined to the legitimate null space.
pub fn compute_sinrs_an(
    channels: &ChannelSet,
    w: &[CVec],
    params: &AnBenchmarkParams,
    budget: &PowerBudget,
    eve: EveCsi,
) -> Result<SinrReport> {
    check_dims(channels, w, None)?;
    let n = channels.n_beams();
    if params.ell.len() != n || params.f_mrt.len() != n || params.an_basis.len() != n || params.v.len() != n {
        return Err(invalid_input("AN parameters need one entry per beam"));
    }
    if params.ell.iter().any(|l| !(0.0..=1.0).contains(l)) {
        return Err(invalid_input("power-allocation coefficient outside [0, 1]"));
    }
    let pb = budget.p_b;
    let beams = (0..n)
        .map(|k| {
            let c = channels.beam(k);
            let (h_e, g_e) = eve_vectors(channels, k, eve);
            let l = params.ell[k];
            let fm = &params.f_mrt[k];
            let an = params.an_vector(k);
            let sat = |h: &CVec| -> Vec<f64> { w.iter().map(|wi| abs2_inner(h, wi)).collect() };
            let su = sat(&c.h_su);
            let tu = sat(&c.h_tu);
            let ee = sat(h_e);
            let others = |v: &[f64]| v.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, x)| x).sum::<f64>();
            let mrt_su = l * pb * abs2_inner(&c.g_su, fm);
            let mrt_tu = l * pb * abs2_inner(&c.g_tu, fm);
            let mrt_e = l * pb * abs2_inner(g_e, fm);
            let an_e = (1.0 - l) * pb * abs2_inner(g_e, &an);
            BeamSinr {
                su: su[k] / (others(&su) + mrt_su + budget.noise_su),
                tu: mrt_tu / (tu.iter().sum::<f64>() + budget.noise_tu),
                se: ee[k] / (others(&ee) + mrt_e + an_e + budget.noise_e),
                te: mrt_e / (ee.iter().sum::<f64>() + an_e + budget.noise_e),
            }
        })
        .collect();
    Ok(SinrReport { beams })
}

pub fn secrecy_rates_an(sinrs: &SinrReport) -> SecrecyReport {
    secrecy_rates(sinrs)
}
