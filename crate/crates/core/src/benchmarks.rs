//! Comparison schemes: satellite beamforming with BS power allocation
//! between an MRT stream and artificial noise, and satellite beamforming with
//! a fixed zero-forcing BS beam.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::chanmodel::ChannelSet;
use crate::conic::ConicProgram;
use crate::error::{invalid_input, Error, Result};
use crate::linalg::{abs2_inner, gram, orthogonal_complement, CMat, CVec, C64};
use crate::ratemodel::{AnBenchmarkParams, PowerBudget};
use crate::sca::model::{BsMode, Model, Objective, PaConstants};
use crate::sca::{
    finish, mrt_covariances, polish, run_from_starts, scaled, uniform_matrices, Anchors, BeamScalars, BeamformingSolution, Method,
    ScaConfig,
};

/// Starting split between the MRT stream and AN.
const ELL_INIT: f64 = 0.5;

/// Iterate of the power-allocation SCA.
#[derive(Clone, Debug, PartialEq)]
pub struct PaPoint {
    pub scalars: Vec<BeamScalars>,
    pub anchors: Vec<Anchors>,
    pub w: Vec<CMat>,
    pub ell: Vec<f64>,
}

pub fn mrt_vector(g_tu: &CVec) -> Result<CVec> {
    let n = g_tu.norm();
    if !(n > 0.0) {
        return Err(invalid_input("MRT needs a nonzero channel"));
    }
    Ok(g_tu.unscale(n))
}

/// Orthonormal basis of the complement of `span{g_tu, g_su}`.
pub fn an_basis(g_tu: &CVec, g_su: &CVec) -> Result<CMat> {
    let m = g_tu.len();
    if m < 3 {
        return Err(Error::Unsupported(format!("artificial noise needs at least 3 BS antennas, got {m}")));
    }
    if g_su.len() != m {
        return Err(invalid_input("channels have different lengths"));
    }
    let t = g_tu.norm();
    let s = g_su.norm();
    if !(t > 0.0) {
        return Err(invalid_input("TU channel is zero"));
    }
    // sine of the angle between the two channels
    let sin = if s > 0.0 { (1.0 - (g_tu.dotc(g_su).norm() / (t * s)).powi(2)).max(0.0).sqrt() } else { 0.0 };
    if sin < 1e-6 {
        log::warn!("legitimate BS channels are nearly parallel; AN confined to the complement of the TU channel only");
        return Ok(orthogonal_complement(&[g_tu], m, 1e-12));
    }
    Ok(orthogonal_complement(&[g_tu, g_su], m, 1e-12))
}

/// Unit-norm complex Gaussian AN coefficients, one vector per beam.
pub fn draw_an_coefficients<R: Rng + ?Sized>(rng: &mut R, n_beams: usize, dim: usize) -> Vec<CVec> {
    (0..n_beams)
        .map(|_| {
            let v = CVec::from_fn(dim, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
            let nv = v.norm();
            v.unscale(nv)
        })
        .collect()
}

/// MRT directions and AN bases for every beam, with the given coefficients
/// and split.
pub fn an_params(channels: &ChannelSet, v: &[CVec], ell: Vec<f64>) -> Result<AnBenchmarkParams> {
    let n = channels.n_beams();
    if v.len() != n || ell.len() != n {
        return Err(invalid_input("need one AN vector and one split per beam"));
    }
    let mut f_mrt = Vec::with_capacity(n);
    let mut basis = Vec::with_capacity(n);
    for (k, vk) in v.iter().enumerate() {
        let c = channels.beam(k);
        let b = an_basis(&c.g_tu, &c.g_su)?;
        if b.ncols() != vk.len() {
            return Err(invalid_input(format!("AN vector of beam {k} has length {}, basis has {}", vk.len(), b.ncols())));
        }
        f_mrt.push(mrt_vector(&c.g_tu)?);
        basis.push(b);
    }
    Ok(AnBenchmarkParams { ell, f_mrt, an_basis: basis, v: v.to_vec() })
}

/// Channel constants of the power-allocation subproblem, scaled by `P_B`.
pub fn pa_constants(channels: &ChannelSet, budget: &PowerBudget, an: &AnBenchmarkParams) -> PaConstants {
    let n = channels.n_beams();
    let pb = budget.p_b;
    let mut out = PaConstants { su: vec![0.0; n], tu: vec![0.0; n], e: vec![0.0; n], an: vec![0.0; n] };
    for k in 0..n {
        let c = channels.beam(k);
        let f = &an.f_mrt[k];
        out.su[k] = pb * abs2_inner(&c.g_su, f);
        out.tu[k] = pb * abs2_inner(&c.g_tu, f);
        out.e[k] = pb * abs2_inner(&c.g_e_est, f);
        out.an[k] = pb * abs2_inner(&c.g_e_est, &an.an_vector(k));
    }
    out
}

fn pa_model<'a>(channels: &'a ChannelSet, budget: &PowerBudget, config: &ScaConfig, an: &AnBenchmarkParams) -> Model<'a> {
    Model::new(channels, *budget, BsMode::PowerAllocation(pa_constants(channels, budget, an)), config.q_tu.clone())
}

/// Uniform satellite power and an even MRT/AN split.
pub fn init_pa_point(channels: &ChannelSet, budget: &PowerBudget, config: &ScaConfig, an: &AnBenchmarkParams) -> PaPoint {
    let model = pa_model(channels, budget, config, an);
    let (w, _) = uniform_matrices(channels, budget);
    let ell = vec![ELL_INIT; channels.n_beams()];
    let x = model.pack(&w, &[], &ell);
    let scalars: Vec<BeamScalars> =
        (0..channels.n_beams()).map(|k| std::array::from_fn(|j| x[model.scalar(k, j)])).collect();
    let anchors = scalars.iter().map(|s| [s[1], s[2], s[5]]).collect();
    PaPoint { scalars, anchors, w, ell }
}

/// Power-allocation subproblem at the anchors of `point`.
pub fn build_p5(
    channels: &ChannelSet,
    point: &PaPoint,
    budget: &PowerBudget,
    config: &ScaConfig,
    an: &AnBenchmarkParams,
) -> Result<ConicProgram> {
    let n = channels.n_beams();
    config.validate(n)?;
    if point.anchors.len() != n || point.w.len() != n || point.ell.len() != n {
        return Err(invalid_input("point does not match the number of beams"));
    }
    if point.anchors.iter().flatten().any(|a| !a.is_finite()) {
        return Err(invalid_input("anchors must be finite"));
    }
    let model = pa_model(channels, budget, config, an);
    let x = model.pack(&point.w, &[], &point.ell);
    Ok(model.build(&point.anchors, &model.logs_at(&x), Objective::MaxSecrecy { power_weight: config.power_weight }))
}

/// SCA over the satellite beams and the per-beam MRT/AN split, with the AN
/// coefficients `v` held fixed.
pub fn solve_pa(channels: &ChannelSet, budget: &PowerBudget, config: &ScaConfig, v: &[CVec]) -> Result<BeamformingSolution> {
    budget.validate()?;
    config.validate(channels.n_beams())?;
    let mut an = an_params(channels, v, vec![ELL_INIT; channels.n_beams()])?;
    let model = pa_model(channels, budget, config, &an);
    let (w, _) = uniform_matrices(channels, budget);
    let out = run_from_starts(&model, config, |frac| model.pack(&scaled(&w, frac), &[], &an.ell))?;
    an.ell = model.ell(&polish(&model, &out.solution.x));
    let f = mrt_covariances(&an, budget);
    Ok(finish(&model, out, Method::PaAn, Some(an), Some(f)))
}

/// Unit TU direction with the estimated Eve channel projected out.
pub fn zf_vector(g_tu: &CVec, g_e_est: &CVec) -> Result<CVec> {
    let ne = g_e_est.norm_squared();
    let p = if ne > 0.0 { g_tu - g_e_est * (g_e_est.dotc(g_tu) / C64::new(ne, 0.0)) } else { g_tu.clone() };
    let np = p.norm();
    if !(np > 1e-12 * g_tu.norm()) || !(np > 0.0) {
        return Err(invalid_input("TU channel is parallel to the estimated Eve channel"));
    }
    Ok(p.unscale(np))
}

/// Satellite beamforming by SCA with each BS fixed to a full-power ZF beam.
pub fn zf_baseline(channels: &ChannelSet, budget: &PowerBudget, config: &ScaConfig) -> Result<BeamformingSolution> {
    budget.validate()?;
    config.validate(channels.n_beams())?;
    let m = channels.n_bs_antennas();
    if m < 3 {
        return Err(Error::Unsupported(format!("ZF baseline needs at least 3 BS antennas, got {m}")));
    }
    let f: Vec<CMat> = channels
        .beams()
        .iter()
        .map(|c| zf_vector(&c.g_tu, &c.g_e_est).map(|z| gram(&z).scale(budget.p_b)))
        .collect::<Result<_>>()?;
    let model = Model::new(channels, *budget, BsMode::Fixed(f.clone()), config.q_tu.clone());
    let (w, _) = uniform_matrices(channels, budget);
    let out = run_from_starts(&model, config, |frac| model.pack(&scaled(&w, frac), &f, &[]))?;
    Ok(finish(&model, out, Method::Zf, None, Some(f)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;

    fn e(m: usize, i: usize) -> CVec {
        let mut v = CVec::zeros(m);
        v[i] = C64::new(1.0, 0.0);
        v
    }

    #[test]
    fn mrt_of_scaled_axis() {
        let mut g = CVec::zeros(4);
        g[0] = C64::new(2.0, 0.0);
        assert!((mrt_vector(&g).unwrap() - e(4, 0)).norm() < 1e-15);
        assert!(mrt_vector(&CVec::zeros(3)).is_err());
    }

    #[test]
    fn an_basis_of_axes() {
        let b = an_basis(&e(4, 0), &e(4, 1)).unwrap();
        assert_eq!(b.ncols(), 2);
        assert!((b.adjoint() * &b - CMat::identity(2, 2)).norm() < 1e-12);
        for i in 0..2 {
            assert!(b[(i, 0)].norm() < 1e-15 && b[(i, 1)].norm() < 1e-15);
        }
        assert!(matches!(an_basis(&e(2, 0), &e(2, 1)), Err(Error::Unsupported(_))));
        // parallel channels fall back to the TU complement
        assert_eq!(an_basis(&e(4, 0), &e(4, 0).scale(3.0)).unwrap().ncols(), 3);
    }

    #[test]
    fn zf_nulls_eve() {
        let g_tu = CVec::from_vec(vec![C64::new(1.0, 0.5), C64::new(-0.3, 0.2), C64::new(0.7, -1.0)]);
        let g_e = CVec::from_vec(vec![C64::new(0.2, 0.1), C64::new(1.0, 0.0), C64::new(-0.4, 0.3)]);
        let f = zf_vector(&g_tu, &g_e).unwrap();
        assert!(g_e.dotc(&f).norm() < 1e-12);
        assert!(abs2_inner(&g_tu, &f) <= g_tu.norm_squared() + 1e-12);
        assert!((f.norm() - 1.0).abs() < 1e-14);
    }
}
