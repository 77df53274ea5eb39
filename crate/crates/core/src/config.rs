//! Experiment description read from and written to JSON.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::chanmodel::ChannelConfig;
use crate::conic::Settings;
use crate::error::{invalid_param, Result};
use crate::ratemodel::PowerBudget;
use crate::sca::{Method, ScaConfig};

/// Parameter varied along the x axis of a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVar {
    /// BS power in dB.
    PB,
    /// Satellite power in dB.
    PS,
    /// BS antenna count.
    M,
    /// TU secrecy threshold in bit/s/Hz.
    Q,
    /// Eavesdropper CSI error bound.
    Delta,
}

impl SweepVar {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepVar::PB => "p_b",
            SweepVar::PS => "p_s",
            SweepVar::M => "m",
            SweepVar::Q => "q",
            SweepVar::Delta => "delta",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "p_b" => Ok(SweepVar::PB),
            "p_s" => Ok(SweepVar::PS),
            "m" => Ok(SweepVar::M),
            "q" => Ok(SweepVar::Q),
            "delta" => Ok(SweepVar::Delta),
            other => Err(invalid_param(format!("unknown sweep variable '{other}'"))),
        }
    }

    /// Axis label with units.
    pub fn label(&self) -> &'static str {
        match self {
            SweepVar::PB => "BS transmit power P_B (dB)",
            SweepVar::PS => "satellite transmit power P_S (dB)",
            SweepVar::M => "BS antennas M",
            SweepVar::Q => "TU secrecy threshold Q (bit/s/Hz)",
            SweepVar::Delta => "CSI error bound",
        }
    }
}

/// SCA settings shared by every run of an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScaOptions {
    pub epsilon: f64,
    pub max_sca_iters: usize,
    pub rank_tol: f64,
    pub power_weight: f64,
    pub solver: Settings,
}

impl Default for ScaOptions {
    fn default() -> Self {
        let c = ScaConfig::new(1, 0.0);
        Self {
            epsilon: c.epsilon,
            max_sca_iters: c.max_sca_iters,
            rank_tol: c.rank_tol,
            power_weight: c.power_weight,
            solver: c.solver,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub channel: ChannelConfig,
    pub m_antennas: usize,
    pub p_s_db: f64,
    pub p_b_db: f64,
    /// TU secrecy threshold, the same for every beam (bit/s/Hz).
    pub q_tu: f64,
    pub sweep: SweepVar,
    pub grid: Vec<f64>,
    pub methods: Vec<Method>,
    pub realizations: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub sca: ScaOptions,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self::preset(SweepVar::PB)
    }
}

impl ExperimentSpec {
    /// Desk-scale default for each sweep: N = 3, M = 4, P_S = 20 dB,
    /// P_B = 30 dB, Q = 0.5, 20 realizations.
    pub fn preset(sweep: SweepVar) -> Self {
        let grid = match sweep {
            SweepVar::PB => vec![20.0, 22.0, 24.0, 26.0, 28.0, 30.0],
            SweepVar::PS => vec![10.0, 12.0, 14.0, 16.0, 18.0, 20.0],
            SweepVar::M => vec![3.0, 4.0, 5.0, 6.0],
            SweepVar::Q => (1..=10).map(|i| i as f64 / 10.0).collect(),
            SweepVar::Delta => vec![0.0, 0.05, 0.1, 0.2, 0.3],
        };
        Self {
            channel: ChannelConfig::default_for(3),
            m_antennas: 4,
            p_s_db: 20.0,
            p_b_db: 30.0,
            q_tu: 0.5,
            sweep,
            grid,
            methods: vec![Method::Proposed, Method::PaAn, Method::Zf],
            realizations: 20,
            master_seed: 0,
            sca: ScaOptions::default(),
        }
    }

    pub fn n_beams(&self) -> usize {
        self.channel.geometry.n_beams()
    }

    pub fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        if self.grid.is_empty() {
            return Err(invalid_param("sweep grid is empty"));
        }
        if self.grid.iter().any(|v| !v.is_finite()) || self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid_param("sweep grid must be finite and strictly increasing"));
        }
        if self.realizations == 0 {
            return Err(invalid_param("need at least one realization"));
        }
        if self.m_antennas == 0 {
            return Err(invalid_param("need at least one BS antenna"));
        }
        let needs_three = self.methods.iter().any(|m| *m != Method::Proposed);
        let antenna_counts: Vec<f64> = match self.sweep {
            SweepVar::M => self.grid.clone(),
            _ => vec![self.m_antennas as f64],
        };
        for m in antenna_counts {
            if m.fract() != 0.0 || m < 1.0 {
                return Err(invalid_param(format!("antenna count {m} is not a positive integer")));
            }
            if needs_three && m < 3.0 {
                return Err(invalid_param("pa_an and zf need at least 3 BS antennas"));
            }
        }
        match self.sweep {
            SweepVar::Q | SweepVar::Delta if self.grid[0] < 0.0 => {
                return Err(invalid_param(format!("{} must be nonnegative", self.sweep.as_str())))
            }
            _ => {}
        }
        self.sca_config(self.q_tu).validate(self.n_beams())?;
        self.budget(self.p_s_db, self.p_b_db).validate()
    }

    pub fn budget(&self, p_s_db: f64, p_b_db: f64) -> PowerBudget {
        PowerBudget::from_db(p_s_db, p_b_db)
    }

    pub fn sca_config(&self, q_tu: f64) -> ScaConfig {
        let o = &self.sca;
        ScaConfig {
            epsilon: o.epsilon,
            max_sca_iters: o.max_sca_iters,
            q_tu: vec![q_tu; self.n_beams()],
            rank_tol: o.rank_tol,
            power_weight: o.power_weight,
            solver: o.solver,
        }
    }

    /// Largest BS antenna count used anywhere in the sweep.
    pub fn max_antennas(&self) -> usize {
        match self.sweep {
            SweepVar::M => self.grid.iter().fold(0.0f64, |a, b| a.max(*b)) as usize,
            _ => self.m_antennas,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_round_trip() {
        for v in [SweepVar::PB, SweepVar::PS, SweepVar::M, SweepVar::Q, SweepVar::Delta] {
            let s = ExperimentSpec::preset(v);
            s.validate().unwrap();
            assert_eq!(ExperimentSpec::from_json(&s.to_json().unwrap()).unwrap(), s);
            assert_eq!(SweepVar::parse(v.as_str()).unwrap(), v);
        }
    }

    #[test]
    fn rejects_bad_grids() {
        let mut s = ExperimentSpec::default();
        s.grid = vec![20.0, 20.0];
        assert!(s.validate().is_err());
        s.grid.clear();
        assert!(s.validate().is_err());
        let mut s = ExperimentSpec::preset(SweepVar::M);
        s.grid = vec![2.0, 3.0];
        assert!(s.validate().is_err());
        s.methods = vec![Method::Proposed];
        s.validate().unwrap();
        s.grid = vec![2.5, 3.0];
        assert!(s.validate().is_err());
    }

    #[test]
    fn missing_solver_section_uses_defaults() {
        let mut v: serde_json::Value = serde_json::from_str(&ExperimentSpec::default().to_json().unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("sca");
        let s: ExperimentSpec = serde_json::from_value(v).unwrap();
        assert_eq!(s.sca, ScaOptions::default());
    }
}
