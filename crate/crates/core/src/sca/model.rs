//! Variable layout and conic assembly of the convexified subproblems.
//!
//! Per beam `k` the seven log-domain scalars are
//! `s, mu, q, v, tau, eta, alpha`; each bounds the log of one affine power
//! expression:
//!
//! | scalar | expression | bound |
//! |---|---|---|
//! | `s` | SU total received power + 1 | `e^s <= .` (exp cone) |
//! | `mu` | SU interference + 1 | `. <= taylor(mu)` |
//! | `q` | Eve total received power + 1 | `. <= taylor(q)` |
//! | `v` | Eve interference w.r.t. the SU stream + 1 | `e^v <= .` |
//! | `tau` | TU total received power + 1 | `e^tau <= .` |
//! | `eta` | TU interference + 1 | `. <= taylor(eta)` |
//! | `alpha` | Eve interference w.r.t. the TU stream + 1 | `e^alpha <= .` |
//!
//! Satellite matrices are stored normalized, `W = P_S * What`, and BS
//! matrices as `F = P_B * Fhat`, so every variable is O(1).

use crate::chanmodel::ChannelSet;
use crate::conic::{Cone, ConicProgram};
use crate::linalg::{embedding_svec_map, herm_param_count, params_to_herm, svec_len, trace_coeffs, trace_prod, CMat};
use crate::ratemodel::PowerBudget;

pub const SCALARS: [&str; 7] = ["s", "mu", "q", "v", "tau", "eta", "alpha"];
pub const S: usize = 0;
pub const MU: usize = 1;
pub const Q: usize = 2;
pub const V: usize = 3;
pub const TAU: usize = 4;
pub const ETA: usize = 5;
pub const ALPHA: usize = 6;

/// Channel constants of the MRT + AN transmission, already multiplied by `P_B`.
#[derive(Clone, Debug, PartialEq)]
pub struct PaConstants {
    /// MRT leakage at the SU.
    pub su: Vec<f64>,
    /// MRT power at the TU.
    pub tu: Vec<f64>,
    /// MRT power at Eve (estimated channel).
    pub e: Vec<f64>,
    /// Full-power AN at Eve (estimated channel).
    pub an: Vec<f64>,
}

/// How the BS side enters the subproblem.
#[derive(Clone, Debug, PartialEq)]
pub enum BsMode {
    /// `F_k` are PSD decision variables.
    Optimized,
    /// `F_k` are given matrices (unnormalized).
    Fixed(Vec<CMat>),
    /// Only the split `ell_k` between MRT and AN is optimized.
    PowerAllocation(PaConstants),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Link {
    Su,
    Tu,
    Eve,
}

/// Sparse affine expression over the decision vector.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Affine {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl Affine {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(j, c)| c * x[j]).sum::<f64>()
    }
}

/// Everything needed to build and read back one family of subproblems.
#[derive(Clone, Debug)]
pub struct Model<'a> {
    pub channels: &'a ChannelSet,
    pub budget: PowerBudget,
    pub bs: BsMode,
    pub q_tu: Vec<f64>,
    n: usize,
    m: usize,
    w_len: usize,
    bs_len: usize,
}

/// Log-domain values of the seven expressions for one beam.
pub type BeamLogs = [f64; 7];

impl<'a> Model<'a> {
    pub fn new(channels: &'a ChannelSet, budget: PowerBudget, bs: BsMode, q_tu: Vec<f64>) -> Self {
        let n = channels.n_beams();
        let m = channels.n_bs_antennas();
        let w_len = n * herm_param_count(n);
        let bs_len = match &bs {
            BsMode::Optimized => n * herm_param_count(m),
            BsMode::Fixed(_) => 0,
            BsMode::PowerAllocation(_) => n,
        };
        Self { channels, budget, bs, q_tu, n, m, w_len, bs_len }
    }

    pub fn n_beams(&self) -> usize {
        self.n
    }

    pub fn n_vars(&self) -> usize {
        self.w_len + self.bs_len + 7 * self.n
    }

    pub fn w_off(&self, k: usize) -> usize {
        k * herm_param_count(self.n)
    }

    /// First index of the BS variables of beam `k` (`Fhat_k` or `ell_k`).
    pub fn bs_off(&self, k: usize) -> usize {
        match self.bs {
            BsMode::Optimized => self.w_len + k * herm_param_count(self.m),
            _ => self.w_len + k,
        }
    }

    pub fn scalar(&self, k: usize, which: usize) -> usize {
        self.w_len + self.bs_len + 7 * k + which
    }

    pub fn var_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.n_vars());
        for k in 0..self.n {
            for p in 0..herm_param_count(self.n) {
                names.push(format!("W{k}[{p}]"));
            }
        }
        match self.bs {
            BsMode::Optimized => {
                for k in 0..self.n {
                    for p in 0..herm_param_count(self.m) {
                        names.push(format!("F{k}[{p}]"));
                    }
                }
            }
            BsMode::Fixed(_) => {}
            BsMode::PowerAllocation(_) => names.extend((0..self.n).map(|k| format!("ell{k}"))),
        }
        for k in 0..self.n {
            names.extend(SCALARS.iter().map(|s| format!("{s}{k}")));
        }
        names
    }

    fn sat_terms(&self, aff: &mut Affine, h: &CMat, skip: Option<usize>) {
        let coeffs = trace_coeffs(h);
        for i in 0..self.n {
            if Some(i) == skip {
                continue;
            }
            let off = self.w_off(i);
            for (p, c) in coeffs.iter().enumerate() {
                if *c != 0.0 {
                    aff.terms.push((off + p, self.budget.p_s * c));
                }
            }
        }
    }

    fn bs_terms(&self, aff: &mut Affine, k: usize, link: Link) {
        let g = self.channels.grams(k);
        let gram = match link {
            Link::Su => &g.g_su,
            Link::Tu => &g.g_tu,
            Link::Eve => &g.g_e,
        };
        match &self.bs {
            BsMode::Optimized => {
                let off = self.bs_off(k);
                for (p, c) in trace_coeffs(gram).iter().enumerate() {
                    if *c != 0.0 {
                        aff.terms.push((off + p, self.budget.p_b * c));
                    }
                }
            }
            BsMode::Fixed(f) => aff.constant += trace_prod(gram, &f[k]),
            BsMode::PowerAllocation(pa) => {
                let c = match link {
                    Link::Su => pa.su[k],
                    Link::Tu => pa.tu[k],
                    Link::Eve => pa.e[k],
                };
                aff.terms.push((self.bs_off(k), c));
            }
        }
    }

    /// AN power at Eve, `(1 - ell_k) * an_k`.
    fn an_terms(&self, aff: &mut Affine, k: usize) {
        if let BsMode::PowerAllocation(pa) = &self.bs {
            aff.constant += pa.an[k];
            aff.terms.push((self.bs_off(k), -pa.an[k]));
        }
    }

    /// Affine expression bounded by scalar `which` of beam `k`.
    pub fn side(&self, k: usize, which: usize) -> Affine {
        let g = self.channels.grams(k);
        let mut a = Affine { terms: Vec::new(), constant: 1.0 };
        match which {
            S | MU => {
                self.sat_terms(&mut a, &g.h_su, if which == MU { Some(k) } else { None });
                self.bs_terms(&mut a, k, Link::Su);
            }
            Q | V => {
                self.sat_terms(&mut a, &g.h_e, if which == V { Some(k) } else { None });
                self.bs_terms(&mut a, k, Link::Eve);
                self.an_terms(&mut a, k);
            }
            TAU => {
                self.sat_terms(&mut a, &g.h_tu, None);
                self.bs_terms(&mut a, k, Link::Tu);
            }
            ETA => self.sat_terms(&mut a, &g.h_tu, None),
            ALPHA => {
                self.sat_terms(&mut a, &g.h_e, None);
                self.an_terms(&mut a, k);
            }
            _ => unreachable!("scalar index out of range"),
        }
        merge(a)
    }

    /// Logs of all seven expressions at a decision vector (scalars ignored).
    pub fn logs_at(&self, x: &[f64]) -> Vec<BeamLogs> {
        (0..self.n)
            .map(|k| std::array::from_fn(|which| self.side(k, which).eval(x).ln()))
            .collect()
    }

    /// Decision vector holding the given matrices (unnormalized) and BS
    /// variables, with scalars set to the logs of their expressions.
    pub fn pack(&self, w: &[CMat], f: &[CMat], ell: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n_vars()];
        for k in 0..self.n {
            let p = crate::linalg::herm_to_params(&w[k].scale(1.0 / self.budget.p_s));
            x[self.w_off(k)..self.w_off(k) + p.len()].copy_from_slice(&p);
            match self.bs {
                BsMode::Optimized => {
                    let p = crate::linalg::herm_to_params(&f[k].scale(1.0 / self.budget.p_b));
                    x[self.bs_off(k)..self.bs_off(k) + p.len()].copy_from_slice(&p);
                }
                BsMode::Fixed(_) => {}
                BsMode::PowerAllocation(_) => x[self.bs_off(k)] = ell[k],
            }
        }
        let logs = self.logs_at(&x);
        for k in 0..self.n {
            for which in 0..7 {
                x[self.scalar(k, which)] = logs[k][which];
            }
        }
        x
    }

    pub fn w_mats(&self, x: &[f64]) -> Vec<CMat> {
        let len = herm_param_count(self.n);
        (0..self.n)
            .map(|k| params_to_herm(&x[self.w_off(k)..self.w_off(k) + len], self.n).scale(self.budget.p_s))
            .collect()
    }

    /// BS matrices (unnormalized). For power allocation this is the MRT part
    /// `ell_k P_B f f^H` and needs the MRT directions, so it is left to the caller.
    pub fn f_mats(&self, x: &[f64]) -> Vec<CMat> {
        match &self.bs {
            BsMode::Optimized => {
                let len = herm_param_count(self.m);
                (0..self.n)
                    .map(|k| params_to_herm(&x[self.bs_off(k)..self.bs_off(k) + len], self.m).scale(self.budget.p_b))
                    .collect()
            }
            BsMode::Fixed(f) => f.clone(),
            BsMode::PowerAllocation(_) => vec![CMat::zeros(self.m, self.m); self.n],
        }
    }

    pub fn ell(&self, x: &[f64]) -> Vec<f64> {
        match self.bs {
            BsMode::PowerAllocation(_) => (0..self.n).map(|k| x[self.bs_off(k)]).collect(),
            _ => Vec::new(),
        }
    }

    /// Surrogate objective `sum_k (s - mu - q + v)` in nats.
    pub fn surrogate(&self, x: &[f64]) -> f64 {
        (0..self.n)
            .map(|k| x[self.scalar(k, S)] - x[self.scalar(k, MU)] - x[self.scalar(k, Q)] + x[self.scalar(k, V)])
            .sum()
    }

    /// Assembles the subproblem at the given anchors.
    ///
    /// `anchors[k] = (mu~, q~, eta~)`; `exp_shift[k][which]` recenters the
    /// exponential-cone rows (any finite value is valid; the log of the
    /// expression at the current point keeps the rows well scaled).
    pub fn build(&self, anchors: &[[f64; 3]], exp_shift: &[BeamLogs], objective: Objective) -> ConicProgram {
        let n = self.n;
        let nv = self.n_vars();
        let mut a: Vec<(usize, usize, f64)> = Vec::new();
        let mut b: Vec<f64> = Vec::new();
        let mut row = 0usize;
        let mut push_row = |a: &mut Vec<(usize, usize, f64)>, b: &mut Vec<f64>, terms: &[(usize, f64)], rhs: f64| {
            for &(j, v) in terms {
                a.push((row, j, v));
            }
            b.push(rhs);
            row += 1;
        };

        // nonnegative block
        let mut nonneg = 0;
        let trace_terms = |off: usize, side: usize| -> Vec<(usize, f64)> { (0..side).map(|i| (off + i, 1.0)).collect() };
        let mut power: Vec<(usize, f64)> = Vec::new();
        for k in 0..n {
            power.extend(trace_terms(self.w_off(k), n));
        }
        push_row(&mut a, &mut b, &power, 1.0);
        nonneg += 1;
        match self.bs {
            BsMode::Optimized => {
                for k in 0..n {
                    push_row(&mut a, &mut b, &trace_terms(self.bs_off(k), self.m), 1.0);
                    nonneg += 1;
                }
            }
            BsMode::Fixed(_) => {}
            BsMode::PowerAllocation(_) => {
                for k in 0..n {
                    push_row(&mut a, &mut b, &[(self.bs_off(k), -1.0)], 0.0);
                    push_row(&mut a, &mut b, &[(self.bs_off(k), 1.0)], 1.0);
                    nonneg += 2;
                }
            }
        }
        for k in 0..n {
            for (slot, which) in [MU, Q, ETA].into_iter().enumerate() {
                // side <= e^a (y - a + 1), divided by e^a
                let anchor = anchors[k][slot];
                let scale = (-anchor).exp();
                let side = self.side(k, which);
                let mut terms: Vec<(usize, f64)> = side.terms.iter().map(|&(j, c)| (j, c * scale)).collect();
                terms.push((self.scalar(k, which), -1.0));
                push_row(&mut a, &mut b, &terms, 1.0 - anchor - side.constant * scale);
                nonneg += 1;
            }
        }
        for k in 0..n {
            // eta + q - tau - alpha <= -Q ln 2
            let terms = [
                (self.scalar(k, ETA), 1.0),
                (self.scalar(k, Q), 1.0),
                (self.scalar(k, TAU), -1.0),
                (self.scalar(k, ALPHA), -1.0),
            ];
            push_row(&mut a, &mut b, &terms, -self.q_tu[k] * std::f64::consts::LN_2);
            nonneg += 1;
        }
        if let Objective::MinPower { phi } = objective {
            // sum (s - mu - q + v) >= phi
            let mut terms = Vec::new();
            for k in 0..n {
                terms.push((self.scalar(k, S), -1.0));
                terms.push((self.scalar(k, MU), 1.0));
                terms.push((self.scalar(k, Q), 1.0));
                terms.push((self.scalar(k, V), -1.0));
            }
            push_row(&mut a, &mut b, &terms, -phi);
            nonneg += 1;
        }

        // exponential block: (x - c, 1, e^{-c} side)
        let mut triples = 0;
        for k in 0..n {
            for which in [S, V, TAU, ALPHA] {
                let c = exp_shift[k][which];
                let scale = (-c).exp();
                let side = self.side(k, which);
                push_row(&mut a, &mut b, &[(self.scalar(k, which), -1.0)], -c);
                push_row(&mut a, &mut b, &[], 1.0);
                let terms: Vec<(usize, f64)> = side.terms.iter().map(|&(j, v)| (j, -v * scale)).collect();
                push_row(&mut a, &mut b, &terms, side.constant * scale);
                triples += 1;
            }
        }

        // PSD blocks through the real embedding
        let mut cones = vec![Cone::NonNeg(nonneg), Cone::Exp(triples)];
        let psd = |side: usize, off: usize, a: &mut Vec<(usize, usize, f64)>, b: &mut Vec<f64>, cones: &mut Vec<Cone>| {
            let base = b.len();
            b.extend(std::iter::repeat_n(0.0, svec_len(2 * side)));
            for (r, p, v) in embedding_svec_map(side) {
                a.push((base + r, off + p, -v));
            }
            cones.push(Cone::Psd(2 * side));
        };
        for k in 0..n {
            psd(n, self.w_off(k), &mut a, &mut b, &mut cones);
        }
        if let BsMode::Optimized = self.bs {
            for k in 0..n {
                psd(self.m, self.bs_off(k), &mut a, &mut b, &mut cones);
            }
        }

        let mut c = vec![0.0; nv];
        match objective {
            Objective::MaxSecrecy { power_weight } => {
                for k in 0..n {
                    c[self.scalar(k, S)] = -1.0;
                    c[self.scalar(k, MU)] = 1.0;
                    c[self.scalar(k, Q)] = 1.0;
                    c[self.scalar(k, V)] = -1.0;
                    for i in 0..n {
                        c[self.w_off(k) + i] = power_weight * self.budget.p_s / self.budget.p_b;
                    }
                    if let BsMode::Optimized = self.bs {
                        for i in 0..self.m {
                            c[self.bs_off(k) + i] = power_weight;
                        }
                    }
                }
            }
            Objective::MinPower { .. } => {
                for k in 0..n {
                    for i in 0..n {
                        c[self.w_off(k) + i] = self.budget.p_s;
                    }
                    if let BsMode::Optimized = self.bs {
                        for i in 0..self.m {
                            c[self.bs_off(k) + i] = self.budget.p_b;
                        }
                    }
                }
            }
        }

        ConicProgram { n: nv, a, b, c, cones, var_names: self.var_names() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Objective {
    /// Maximize the secrecy surrogate minus `power_weight` times the total
    /// transmit power over `P_B`. A small weight breaks ties between optimal
    /// points in favor of lower power.
    MaxSecrecy { power_weight: f64 },
    MinPower { phi: f64 },
}

fn merge(mut a: Affine) -> Affine {
    a.terms.sort_by_key(|t| t.0);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(a.terms.len());
    for (j, v) in a.terms {
        match out.last_mut() {
            Some(last) if last.0 == j => last.1 += v,
            _ => out.push((j, v)),
        }
    }
    Affine { terms: out, constant: a.constant }
}
