//! Satellite and terrestrial channel realizations.
//!
//! Satellite links combine free-space path loss, the per-feed beam gain and
//! a log-normal rain attenuation with uniform random phases. Terrestrial
//! links use a `C0 r^-4` large-scale term with Nakagami-m small-scale
//! fading. Eavesdropper channels are observed through a norm-bounded
//! estimation error.
//!
//! All vectors stored in a [`ChannelSet`] are divided by the square root of
//! the receiver noise floor, so the optimization works with unit noise.

mod bessel;

pub use bessel::bessel_j;

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_param, Result};
use crate::linalg::{gram, CMat, CVec, C64};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UserKind {
    Su,
    Tu,
    Eve,
}

/// One value per receiver type in a beam.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerUser<T> {
    pub su: T,
    pub tu: T,
    pub eve: T,
}

impl<T: Copy> PerUser<T> {
    pub fn get(&self, user: UserKind) -> T {
        match user {
            UserKind::Su => self.su,
            UserKind::Tu => self.tu,
            UserKind::Eve => self.eve,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryConfig {
    pub satellite_height_m: f64,
    pub carrier_freq_hz: f64,
    /// Ground distance from each beam center to the coverage center.
    pub beam_center_offsets_m: Vec<f64>,
    /// Angle between each user and the center of its own beam.
    pub elevation_angles_rad: Vec<PerUser<f64>>,
    /// Angular spacing between adjacent beam centers.
    pub beam_spacing_rad: f64,
    pub bs_user_distances_m: Vec<PerUser<f64>>,
}

impl GeometryConfig {
    /// Linear beam layout centered on the coverage center.
    pub fn default_for(n_beams: usize) -> Self {
        let h = 600e3;
        let spacing = 0.8f64.to_radians();
        let ground = h * spacing.tan();
        let mid = (n_beams as f64 - 1.0) / 2.0;
        Self {
            satellite_height_m: h,
            carrier_freq_hz: 2e9,
            beam_center_offsets_m: (0..n_beams).map(|k| (k as f64 - mid).abs() * ground).collect(),
            elevation_angles_rad: vec![
                PerUser {
                    su: 0.2f64.to_radians(),
                    tu: 0.25f64.to_radians(),
                    eve: 0.3f64.to_radians(),
                };
                n_beams
            ],
            beam_spacing_rad: spacing,
            bs_user_distances_m: vec![PerUser { su: 100.0, tu: 100.0, eve: 120.0 }; n_beams],
        }
    }

    pub fn n_beams(&self) -> usize {
        self.beam_center_offsets_m.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_beams();
        if n == 0 {
            return Err(invalid_param("at least one beam is required"));
        }
        if !(self.satellite_height_m > 0.0) || !(self.carrier_freq_hz > 0.0) {
            return Err(invalid_param("satellite height and carrier frequency must be positive"));
        }
        if self.elevation_angles_rad.len() != n || self.bs_user_distances_m.len() != n {
            return Err(invalid_param("per-beam geometry lists must all have one entry per beam"));
        }
        if self.beam_center_offsets_m.iter().any(|d| !(*d >= 0.0)) {
            return Err(invalid_param("beam center offsets must be nonnegative"));
        }
        for a in &self.elevation_angles_rad {
            for v in [a.su, a.tu, a.eve] {
                if !(0.0..PI / 2.0).contains(&v) {
                    return Err(invalid_param(format!("angle {v} outside [0, pi/2)")));
                }
            }
        }
        for r in &self.bs_user_distances_m {
            if !(r.su > 0.0 && r.tu > 0.0 && r.eve > 0.0) {
                return Err(invalid_param("BS-user distances must be positive"));
            }
        }
        if !(self.beam_spacing_rad >= 0.0) {
            return Err(invalid_param("beam spacing must be nonnegative"));
        }
        Ok(())
    }

    /// Angle between `user` of beam `beam` and the center of beam `feed`.
    pub fn off_axis_angle(&self, beam: usize, user: UserKind, feed: usize) -> f64 {
        let own = self.elevation_angles_rad[beam].get(user);
        ((beam as f64 - feed as f64) * self.beam_spacing_rad + own).abs()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SatChannelParams {
    /// Linear maximum antenna gain.
    pub max_beam_gain: f64,
    pub angle_3db_rad: f64,
    /// Mean of `ln(beta_dB)`.
    pub rain_mu: f64,
    /// Variance of `ln(beta_dB)`.
    pub rain_delta_sq: f64,
}

impl Default for SatChannelParams {
    fn default() -> Self {
        Self {
            max_beam_gain: db_to_linear(46.6),
            angle_3db_rad: 0.4f64.to_radians(),
            rain_mu: -3.152,
            rain_delta_sq: 1.6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TerrChannelParams {
    /// Linear channel power gain at 1 m.
    pub ref_power_gain: f64,
    pub nakagami_m: f64,
    pub nakagami_omega: f64,
}

impl Default for TerrChannelParams {
    fn default() -> Self {
        Self { ref_power_gain: db_to_linear(-38.46), nakagami_m: 2.0, nakagami_omega: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CsiErrorModel {
    /// Radius of the eavesdropper-channel error ball, in noise-normalized
    /// channel units.
    pub delta_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub geometry: GeometryConfig,
    pub satellite: SatChannelParams,
    pub terrestrial: TerrChannelParams,
    pub csi: CsiErrorModel,
    /// Receiver noise floor in dB, same reference as the transmit powers.
    /// Channels are divided by its square root.
    pub noise_floor_db: f64,
}

pub const DEFAULT_NOISE_FLOOR_DB: f64 = -110.0;

impl ChannelConfig {
    pub fn default_for(n_beams: usize) -> Self {
        Self {
            geometry: GeometryConfig::default_for(n_beams),
            satellite: SatChannelParams::default(),
            terrestrial: TerrChannelParams::default(),
            csi: CsiErrorModel::default(),
            noise_floor_db: DEFAULT_NOISE_FLOOR_DB,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        let s = &self.satellite;
        if !(s.max_beam_gain > 0.0 && s.angle_3db_rad > 0.0 && s.rain_delta_sq >= 0.0) {
            return Err(invalid_param("satellite channel parameters out of range"));
        }
        let t = &self.terrestrial;
        if !(t.ref_power_gain > 0.0 && t.nakagami_m >= 0.5 && t.nakagami_omega > 0.0) {
            return Err(invalid_param("terrestrial channel parameters out of range"));
        }
        if !(self.csi.delta_bound >= 0.0) {
            return Err(invalid_param("CSI error bound must be nonnegative"));
        }
        if !self.noise_floor_db.is_finite() {
            return Err(invalid_param("noise floor must be finite"));
        }
        Ok(())
    }
}

/// Free-space path loss `(lambda / 4 pi)^2 / (d^2 + h^2)`.
pub fn fspl(freq_hz: f64, d: f64, h: f64) -> Result<f64> {
    if !(freq_hz > 0.0) || !(h > 0.0) {
        return Err(invalid_param("frequency and height must be positive"));
    }
    if !(d >= 0.0) {
        return Err(invalid_param("distance must be nonnegative"));
    }
    let lambda = SPEED_OF_LIGHT / freq_hz;
    Ok((lambda / (4.0 * PI)).powi(2) / (d * d + h * h))
}

/// Beam gain `G (J1(u)/(2u) - 36 J3(u)/u^2)^2` with
/// `u = 2.07123 sin(alpha) / sin(alpha_3dB)`. At `alpha = 0` the limit is
/// `G / 16`.
pub fn beam_gain(max_gain: f64, alpha: f64, alpha_3db: f64) -> f64 {
    let u = 2.07123 * alpha.sin() / alpha_3db.sin();
    if u == 0.0 {
        return max_gain / 16.0;
    }
    let t = bessel_j(1, u) / (2.0 * u) - 36.0 * bessel_j(3, u) / (u * u);
    max_gain * t * t
}

/// Draws `x ~ N(mu, delta_sq)`, sets `beta_dB = exp(x)` and returns
/// `10^(-beta_dB / 10)`.
pub fn draw_rain_attenuation<R: Rng + ?Sized>(rng: &mut R, mu: f64, delta_sq: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    let beta_db = (mu + delta_sq.sqrt() * z).exp();
    10f64.powf(-beta_db / 10.0)
}

/// `sqrt(path_loss * gain_i * beta) * exp(-j theta_i)`.
pub fn satellite_channel_from_parts(path_loss: f64, gains: &[f64], beta: f64, phases: &[f64]) -> CVec {
    CVec::from_iterator(
        gains.len(),
        gains
            .iter()
            .zip(phases)
            .map(|(&b, &th)| C64::from_polar((path_loss * b * beta).sqrt(), -th)),
    )
}

/// Channel from the satellite's `N` feeds to `user` of beam `beam`.
pub fn draw_satellite_channel<R: Rng + ?Sized>(
    rng: &mut R,
    geometry: &GeometryConfig,
    params: &SatChannelParams,
    beam: usize,
    user: UserKind,
) -> Result<CVec> {
    geometry.validate()?;
    let n = geometry.n_beams();
    if beam >= n {
        return Err(invalid_param(format!("beam {beam} out of range for {n} beams")));
    }
    let path_loss = fspl(
        geometry.carrier_freq_hz,
        geometry.beam_center_offsets_m[beam],
        geometry.satellite_height_m,
    )?;
    let beta = draw_rain_attenuation(rng, params.rain_mu, params.rain_delta_sq);
    let gains: Vec<f64> = (0..n)
        .map(|i| beam_gain(params.max_beam_gain, geometry.off_axis_angle(beam, user, i), params.angle_3db_rad))
        .collect();
    let phases: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 * PI).collect();
    Ok(satellite_channel_from_parts(path_loss, &gains, beta, &phases))
}

/// `sqrt(C0 r^-4) g0` with Nakagami-m envelope and uniform phase.
pub fn draw_terrestrial_channel<R: Rng + ?Sized>(
    rng: &mut R,
    r: f64,
    params: &TerrChannelParams,
    m_antennas: usize,
) -> Result<CVec> {
    if !(r > 0.0) || m_antennas == 0 {
        return Err(invalid_param("distance must be positive and M >= 1"));
    }
    let large = (params.ref_power_gain * r.powi(-4)).sqrt();
    let gamma = Gamma::new(params.nakagami_m, params.nakagami_omega / params.nakagami_m)
        .map_err(|e| invalid_param(format!("nakagami parameters: {e}")))?;
    Ok(CVec::from_iterator(
        m_antennas,
        (0..m_antennas).map(|_| {
            let power: f64 = gamma.sample(rng);
            let phase = rng.random::<f64>() * 2.0 * PI;
            C64::from_polar(large * power.sqrt(), phase)
        }),
    ))
}

/// Draws an error uniformly from the complex ball of radius `delta` and
/// returns `(true - error, error)`. The generator advances by the same amount
/// for every `delta`, so realizations stay paired across error bounds.
pub fn apply_csi_error<R: Rng + ?Sized>(rng: &mut R, true_channel: &CVec, delta: f64) -> (CVec, CVec) {
    let len = true_channel.len();
    if len == 0 {
        return (true_channel.clone(), CVec::zeros(0));
    }
    let mut dir: Vec<f64> = (0..2 * len).map(|_| StandardNormal.sample(rng)).collect();
    let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        dir.iter_mut().for_each(|x| *x /= norm);
    }
    let u: f64 = rng.random();
    let radius = delta * u.powf(1.0 / (2.0 * len as f64));
    let err = CVec::from_iterator(len, (0..len).map(|i| C64::new(dir[2 * i], dir[2 * i + 1]) * radius));
    (true_channel - &err, err)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BeamChannels {
    pub h_su: CVec,
    pub h_tu: CVec,
    pub h_e_true: CVec,
    pub h_e_est: CVec,
    pub g_su: CVec,
    pub g_tu: CVec,
    pub g_e_true: CVec,
    pub g_e_est: CVec,
}

/// Rank-one Gram matrices; the eavesdropper ones come from the estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct BeamGrams {
    pub h_su: CMat,
    pub h_tu: CMat,
    pub h_e: CMat,
    pub g_su: CMat,
    pub g_tu: CMat,
    pub g_e: CMat,
}

impl BeamGrams {
    fn from_channels(c: &BeamChannels) -> Self {
        Self {
            h_su: gram(&c.h_su),
            h_tu: gram(&c.h_tu),
            h_e: gram(&c.h_e_est),
            g_su: gram(&c.g_su),
            g_tu: gram(&c.g_tu),
            g_e: gram(&c.g_e_est),
        }
    }
}

/// All channels of one realization. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSet {
    beams: Vec<BeamChannels>,
    grams: Vec<BeamGrams>,
}

impl ChannelSet {
    pub fn from_beams(beams: Vec<BeamChannels>) -> Result<Self> {
        let n = beams.len();
        if n == 0 {
            return Err(invalid_param("channel set needs at least one beam"));
        }
        let m = beams[0].g_su.len();
        for b in &beams {
            let sat_ok = [&b.h_su, &b.h_tu, &b.h_e_true, &b.h_e_est].iter().all(|v| v.len() == n);
            let bs_ok = [&b.g_su, &b.g_tu, &b.g_e_true, &b.g_e_est].iter().all(|v| v.len() == m);
            if !sat_ok || !bs_ok || m == 0 {
                return Err(invalid_param("inconsistent channel dimensions"));
            }
        }
        let grams = beams.iter().map(BeamGrams::from_channels).collect();
        Ok(Self { beams, grams })
    }

    pub fn n_beams(&self) -> usize {
        self.beams.len()
    }

    /// Satellite feed count `N`.
    pub fn n_sat_antennas(&self) -> usize {
        self.beams.len()
    }

    /// BS antenna count `M`.
    pub fn n_bs_antennas(&self) -> usize {
        self.beams[0].g_su.len()
    }

    pub fn beam(&self, k: usize) -> &BeamChannels {
        &self.beams[k]
    }

    pub fn beams(&self) -> &[BeamChannels] {
        &self.beams
    }

    pub fn grams(&self, k: usize) -> &BeamGrams {
        &self.grams[k]
    }

    /// Keeps the first `m` BS antennas of every terrestrial vector.
    pub fn truncate_bs_antennas(&self, m: usize) -> Result<Self> {
        if m == 0 || m > self.n_bs_antennas() {
            return Err(invalid_param(format!("cannot keep {m} of {} BS antennas", self.n_bs_antennas())));
        }
        let cut = |v: &CVec| v.rows(0, m).into_owned();
        let beams = self
            .beams
            .iter()
            .map(|b| BeamChannels {
                g_su: cut(&b.g_su),
                g_tu: cut(&b.g_tu),
                g_e_true: cut(&b.g_e_true),
                g_e_est: cut(&b.g_e_est),
                ..b.clone()
            })
            .collect();
        Self::from_beams(beams)
    }

    /// Little-endian dump of every channel coefficient, for determinism checks.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for b in &self.beams {
            for v in [&b.h_su, &b.h_tu, &b.h_e_true, &b.h_e_est, &b.g_su, &b.g_tu, &b.g_e_true, &b.g_e_est] {
                for z in v.iter() {
                    out.extend_from_slice(&z.re.to_le_bytes());
                    out.extend_from_slice(&z.im.to_le_bytes());
                }
            }
        }
        out
    }
}

/// Generator for substream `stream` of `master_seed`.
pub fn stream_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// Draws one realization. Satellite links (and the satellite-side CSI
/// error) consume `sat_rng`; terrestrial links (and the BS-side CSI error)
/// consume `terr_rng`, so the BS antenna count can change without touching
/// the satellite draws.
pub fn draw_channel_set<R: Rng + ?Sized>(
    sat_rng: &mut R,
    terr_rng: &mut R,
    config: &ChannelConfig,
    m_antennas: usize,
) -> Result<ChannelSet> {
    config.validate()?;
    let geo = &config.geometry;
    let n = geo.n_beams();
    let scale = 10f64.powf(-config.noise_floor_db / 20.0);
    let delta = config.csi.delta_bound;
    let mut beams = Vec::with_capacity(n);
    for k in 0..n {
        let mut sat = |u| draw_satellite_channel(sat_rng, geo, &config.satellite, k, u).map(|v| v * C64::new(scale, 0.0));
        let h_su = sat(UserKind::Su)?;
        let h_tu = sat(UserKind::Tu)?;
        let h_e_true = sat(UserKind::Eve)?;
        let (h_e_est, _) = apply_csi_error(sat_rng, &h_e_true, delta);

        let dist = geo.bs_user_distances_m[k];
        let mut terr = |r| {
            draw_terrestrial_channel(terr_rng, r, &config.terrestrial, m_antennas).map(|v| v * C64::new(scale, 0.0))
        };
        let g_su = terr(dist.su)?;
        let g_tu = terr(dist.tu)?;
        let g_e_true = terr(dist.eve)?;
        let (g_e_est, _) = apply_csi_error(terr_rng, &g_e_true, delta);
        beams.push(BeamChannels { h_su, h_tu, h_e_true, h_e_est, g_su, g_tu, g_e_true, g_e_est });
    }
    ChannelSet::from_beams(beams)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{principal_eigen, trace_re};

    #[test]
    fn fspl_reference_value() {
        // lambda = c / 2e9; (lambda / 4 pi)^2 / h^2 evaluated by hand
        let lambda = 299_792_458.0 / 2e9;
        let expected = (lambda / (4.0 * PI)).powi(2) / (600e3f64).powi(2);
        let got = fspl(2e9, 0.0, 600e3).unwrap();
        assert!((got - expected).abs() < 1e-30);
        assert!((got - 3.95e-16).abs() / 3.95e-16 < 5e-3);
        assert!((linear_to_db(got) + 154.0).abs() < 0.05);
    }

    #[test]
    fn fspl_symmetry_and_inverse_square() {
        let h = 600e3;
        let a = fspl(2e9, 3e5, 4e5).unwrap();
        let b = fspl(2e9, 4e5, 3e5).unwrap();
        assert!((a - b).abs() < 1e-30);
        let g1 = fspl(2e9, 0.0, h).unwrap();
        let g2 = fspl(2e9, 0.0, 2.0 * h).unwrap();
        assert!((g1 / g2 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn fspl_rejects_bad_input() {
        assert!(fspl(0.0, 0.0, 1.0).is_err());
        assert!(fspl(1e9, 0.0, 0.0).is_err());
        assert!(fspl(-1e9, 0.0, 1.0).is_err());
    }

    #[test]
    fn beam_gain_limits_and_scaling() {
        let a3 = 0.4f64.to_radians();
        assert_eq!(beam_gain(16.0, 0.0, a3), 1.0);
        // tiny angle approaches the boresight limit
        assert!((beam_gain(16.0, 1e-12, a3) - 1.0).abs() < 1e-6);
        let g1 = beam_gain(1.0, 0.3f64.to_radians(), a3);
        let g7 = beam_gain(7.0, 0.3f64.to_radians(), a3);
        assert!((g7 - 7.0 * g1).abs() < 1e-12);
    }

    #[test]
    fn beam_gain_at_3db_angle() {
        // u = 2.07123; J1, J3 from the integral representation
        let u: f64 = 2.07123;
        let quad = |n: f64| {
            let steps = 20000;
            let h = PI / steps as f64;
            let f = |t: f64| (n * t - u * t.sin()).cos();
            let mut acc = 0.5 * (f(0.0) + f(PI));
            for k in 1..steps {
                acc += f(k as f64 * h);
            }
            acc * h / PI
        };
        let t = quad(1.0) / (2.0 * u) - 36.0 * quad(3.0) / (u * u);
        let a3 = 0.4f64.to_radians();
        let got = beam_gain(1.0, a3, a3);
        assert!((got - t * t).abs() < 1e-12, "{got} vs {}", t * t);
    }

    #[test]
    fn rain_degenerate_and_moments() {
        let mut rng = stream_rng(1, 0);
        let q: f64 = 0.7;
        let beta = draw_rain_attenuation(&mut rng, q.ln(), 0.0);
        assert!((beta - 10f64.powf(-q / 10.0)).abs() < 1e-15);

        let (mu, d2) = (-3.152, 1.6);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let b = draw_rain_attenuation(&mut rng, mu, d2);
            assert!(b > 0.0 && b <= 1.0);
            sum += -10.0 * b.log10();
        }
        let mean = sum / n as f64;
        let expected = (mu + d2 / 2.0).exp();
        // log-normal: sd = mean * sqrt(exp(d2) - 1)
        let se = expected * ((d2 as f64).exp() - 1.0).sqrt() / (n as f64).sqrt();
        assert!((mean - expected).abs() < 4.0 * se, "{mean} vs {expected}");
    }

    #[test]
    fn satellite_channel_power_budget_and_determinism() {
        let geo = GeometryConfig::default_for(3);
        let p = SatChannelParams::default();
        let mut r1 = stream_rng(9, 3);
        let mut r2 = stream_rng(9, 3);
        let a = draw_satellite_channel(&mut r1, &geo, &p, 1, UserKind::Tu).unwrap();
        let b = draw_satellite_channel(&mut r2, &geo, &p, 1, UserKind::Tu).unwrap();
        assert_eq!(a, b);
        // recompute the deterministic part and check |h_i|^2 = C_L b_i beta
        let mut r3 = stream_rng(9, 3);
        let beta = draw_rain_attenuation(&mut r3, p.rain_mu, p.rain_delta_sq);
        let cl = fspl(geo.carrier_freq_hz, geo.beam_center_offsets_m[1], geo.satellite_height_m).unwrap();
        for i in 0..3 {
            let b_i = beam_gain(p.max_beam_gain, geo.off_axis_angle(1, UserKind::Tu, i), p.angle_3db_rad);
            let want = cl * b_i * beta;
            assert!((a[i].norm_sqr() - want).abs() <= 1e-12 * want);
        }
    }

    #[test]
    fn boresight_channel_with_unit_rain() {
        let g = 1000.0;
        let cl = fspl(2e9, 0.0, 600e3).unwrap();
        let gains = vec![beam_gain(g, 0.0, 0.01); 4];
        let h = satellite_channel_from_parts(cl, &gains, 1.0, &[0.1, 1.0, 2.0, 3.0]);
        for z in h.iter() {
            assert!((z.norm_sqr() - cl * g / 16.0).abs() <= 1e-12 * cl * g);
        }
    }

    #[test]
    fn terrestrial_moments() {
        let p = TerrChannelParams { ref_power_gain: 1.0, nakagami_m: 2.0, nakagami_omega: 1.0 };
        let mut rng = stream_rng(5, 0);
        let n = 100_000;
        let v = draw_terrestrial_channel(&mut rng, 1.0, &p, n).unwrap();
        let pw: Vec<f64> = v.iter().map(|z| z.norm_sqr()).collect();
        let mean = pw.iter().sum::<f64>() / n as f64;
        let var = pw.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 1.0).abs() < 3.0 * (var / n as f64).sqrt());

        // r^-4 law on the mean
        let mut rng = stream_rng(5, 1);
        let far = draw_terrestrial_channel(&mut rng, 2.0, &p, n).unwrap();
        let mean_far = far.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
        assert!((mean / mean_far - 16.0).abs() < 0.5);
    }

    #[test]
    fn nakagami_spread_shrinks_with_m() {
        let sample_var = |m: f64, seed: u64| {
            let p = TerrChannelParams { ref_power_gain: 1.0, nakagami_m: m, nakagami_omega: 1.0 };
            let mut rng = stream_rng(seed, 0);
            let v = draw_terrestrial_channel(&mut rng, 1.0, &p, 50_000).unwrap();
            let pw: Vec<f64> = v.iter().map(|z| z.norm_sqr()).collect();
            let mean = pw.iter().sum::<f64>() / pw.len() as f64;
            pw.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (pw.len() - 1) as f64
        };
        let v_low = sample_var(0.5, 1);
        let v_high = sample_var(4.0, 2);
        // Gamma variance Omega^2 / m: 2.0 vs 0.25
        assert!(v_low > v_high);
        assert!((v_low - 2.0).abs() < 0.15 && (v_high - 0.25).abs() < 0.02);
    }

    #[test]
    fn csi_error_ball() {
        let mut rng = stream_rng(11, 0);
        let h = CVec::from_vec(vec![C64::new(1.0, 0.5), C64::new(-0.2, 0.1), C64::new(0.0, 2.0)]);
        let (est, err) = apply_csi_error(&mut rng, &h, 0.0);
        assert_eq!(est, h);
        assert_eq!(err.norm(), 0.0);

        let delta = 0.3;
        let len = h.len();
        let n = 10_000;
        let mut radii = Vec::with_capacity(n);
        for _ in 0..n {
            let (est, err) = apply_csi_error(&mut rng, &h, delta);
            assert!((&h - &est).norm() <= delta * (1.0 + 1e-12));
            assert!((&h - &est - &err).norm() < 1e-14);
            radii.push(err.norm());
        }
        radii.sort_by(f64::total_cmp);
        // Kolmogorov-Smirnov distance to F(r) = (r / delta)^(2 len)
        let ks = radii
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let f = (r / delta).powi(2 * len as i32);
                ((i + 1) as f64 / n as f64 - f).abs().max((f - i as f64 / n as f64).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 1.63 / (n as f64).sqrt(), "ks = {ks}");
    }

    #[test]
    fn channel_set_invariants_and_determinism() {
        let mut cfg = ChannelConfig::default_for(3);
        cfg.csi.delta_bound = 0.05;
        let draw = || {
            let mut s = stream_rng(42, 0);
            let mut t = stream_rng(42, 1);
            draw_channel_set(&mut s, &mut t, &cfg, 4).unwrap()
        };
        let a = draw();
        let b = draw();
        assert_eq!(a.to_le_bytes(), b.to_le_bytes());
        assert_eq!(a.n_beams(), 3);
        assert_eq!(a.n_bs_antennas(), 4);
        for k in 0..3 {
            let c = a.beam(k);
            assert!((&c.h_e_true - &c.h_e_est).norm() <= 0.05 + 1e-12);
            assert!((&c.g_e_true - &c.g_e_est).norm() <= 0.05 + 1e-12);
            let g = a.grams(k);
            for m in [&g.h_su, &g.h_tu, &g.h_e, &g.g_su, &g.g_tu, &g.g_e] {
                assert!(crate::linalg::is_hermitian(m, 1e-12));
                let (_, _, l2) = principal_eigen(m);
                assert!(l2 <= 1e-10 * trace_re(m));
            }
            assert!((&g.h_su - gram(&c.h_su)).norm() == 0.0);
        }
        let cut = a.truncate_bs_antennas(2).unwrap();
        assert_eq!(cut.n_bs_antennas(), 2);
        assert_eq!(cut.beam(1).g_tu[1], a.beam(1).g_tu[1]);
    }
}
