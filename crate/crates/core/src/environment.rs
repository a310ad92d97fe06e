//! Benchmark environments: tool catalogs, congestion and resource dynamics.
//!
//! A query with tool `a` advances the world by
//!
//! ```text
//! t'        = t + τ(a)
//! C'        = C·exp(-κ·τ(a)) + Ω(a)        (then any scheduled shock multiplier)
//! resource' = resource·exp(-β·τ(a)/100)
//! ```
//!
//! so after any query sequence `resource = resource_0·exp(-β·t/100)`.

use std::path::Path;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::belief::{Observation, ObservationModel};
use crate::calibration::{Calibration, GainCurve};
use crate::error::{Result, TcaError};

pub const HEMATOLOGY_LAB: &str = "Hematology_Lab";
pub const MRI_NETWORK: &str = "MRI_Network";
pub const QUICK_SCAN: &str = "QuickScan";
pub const FULL_FORENSICS: &str = "FullForensics";

/// Latencies a randomized tool can draw.
pub const SCALED_LATENCIES: [f64; 8] = [3.0, 5.0, 8.0, 10.0, 15.0, 20.0, 30.0, 45.0];
/// Range of target expected gains for randomized tools.
pub const SCALED_GAIN_RANGE: (f64, f64) = (0.2, 1.5);
/// Inclusive range of integer load increments for randomized tools.
pub const SCALED_OMEGA_RANGE: (u32, u32) = (2, 70);

pub const DEFAULT_HORIZON_CAP: u32 = 50;
pub const DEFAULT_RESOURCE: f64 = 100.0;

/// One queryable information source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolSpec {
    pub name: String,
    /// Latency in time-steps.
    pub tau: f64,
    /// Load added to network congestion per query.
    pub omega: f64,
    /// Concentration boost of the tool's Dirichlet channel.
    pub sharpness: f64,
    /// Mean one-step entropy reduction from a uniform prior, in nats.
    /// Greedy baselines rank tools by this figure.
    pub expected_gain: f64,
}

impl ToolSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(TcaError::InvalidEnvConfig(format!("tool `{}`: {msg}", self.name)));
        if self.name.is_empty() {
            return Err(TcaError::InvalidEnvConfig("tool name is empty".into()));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return bad(format!("tau must be positive, got {}", self.tau));
        }
        if !(self.omega.is_finite() && self.omega >= 0.0) {
            return bad(format!("omega must be nonnegative, got {}", self.omega));
        }
        if !(self.sharpness.is_finite() && self.sharpness > 0.0) {
            return bad(format!("sharpness must be positive, got {}", self.sharpness));
        }
        if !(self.expected_gain.is_finite() && self.expected_gain >= 0.0) {
            return bad(format!("expected_gain must be nonnegative, got {}", self.expected_gain));
        }
        Ok(())
    }

    /// The channel the agent reasons with.
    pub fn model(&self, base: f64) -> Result<ObservationModel> {
        ObservationModel::new(self.sharpness, base)
    }
}

/// Congestion multiplier applied once, right after the query that brings the
/// query count to `step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Shock {
    pub step: u32,
    pub multiplier: f64,
}

fn default_resource() -> f64 {
    DEFAULT_RESOURCE
}

fn default_horizon() -> u32 {
    DEFAULT_HORIZON_CAP
}

fn default_base() -> f64 {
    1.0
}

fn default_fidelity() -> f64 {
    1.0
}

/// Complete description of an environment. Serialized as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvConfig {
    pub name: String,
    pub hypothesis_count: usize,
    pub tools: Vec<ToolSpec>,
    /// Physical decay rate of the resource metric per time-step (scaled by 1/100).
    pub beta: f64,
    /// Congestion drain rate between queries.
    #[serde(default)]
    pub kappa: f64,
    #[serde(default)]
    pub shock_schedule: Vec<Shock>,
    #[serde(default = "default_resource")]
    pub resource_initial: f64,
    #[serde(default = "default_horizon")]
    pub horizon_cap: u32,
    /// Symmetric Dirichlet concentration shared by every tool channel.
    #[serde(default = "default_base")]
    pub observation_base: f64,
    /// Ratio between the sharpness that generates realized observations and
    /// the sharpness the agent's likelihood assumes. 1 is a well-specified
    /// channel; larger values make real evidence more decisive than the
    /// agent's model predicts.
    #[serde(default = "default_fidelity")]
    pub evidence_fidelity: f64,
}

impl EnvConfig {
    /// Emergency diagnosis grid with the shipped calibration.
    pub fn emdg_default() -> Self {
        Self::emdg(&Calibration::shipped())
    }

    /// Network security triage grid with the shipped calibration.
    pub fn nstg_default() -> Self {
        Self::nstg(&Calibration::shipped())
    }

    pub fn emdg(cal: &Calibration) -> Self {
        let e = &cal.emdg;
        Self {
            name: "emdg".into(),
            hypothesis_count: 5,
            tools: vec![
                ToolSpec {
                    name: HEMATOLOGY_LAB.into(),
                    tau: 5.0,
                    omega: e.fast.omega,
                    sharpness: e.fast.sharpness,
                    expected_gain: e.fast.expected_gain,
                },
                ToolSpec {
                    name: MRI_NETWORK.into(),
                    tau: 45.0,
                    omega: e.slow.omega,
                    sharpness: e.slow.sharpness,
                    expected_gain: e.slow.expected_gain,
                },
            ],
            beta: 0.5,
            kappa: 0.0,
            shock_schedule: Vec::new(),
            resource_initial: DEFAULT_RESOURCE,
            horizon_cap: DEFAULT_HORIZON_CAP,
            observation_base: cal.base,
            evidence_fidelity: e.evidence_fidelity,
        }
    }

    pub fn nstg(cal: &Calibration) -> Self {
        let e = &cal.nstg;
        Self {
            name: "nstg".into(),
            hypothesis_count: 5,
            tools: vec![
                ToolSpec {
                    name: QUICK_SCAN.into(),
                    tau: 4.0,
                    omega: 3.0,
                    sharpness: e.fast.sharpness,
                    expected_gain: 0.40,
                },
                ToolSpec {
                    name: FULL_FORENSICS.into(),
                    tau: 60.0,
                    omega: 70.0,
                    sharpness: e.slow.sharpness,
                    expected_gain: 1.30,
                },
            ],
            beta: 0.30,
            kappa: 0.0,
            shock_schedule: vec![Shock {
                step: 2,
                multiplier: 3.0,
            }],
            resource_initial: DEFAULT_RESOURCE,
            horizon_cap: DEFAULT_HORIZON_CAP,
            observation_base: cal.base,
            evidence_fidelity: e.evidence_fidelity,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(TcaError::InvalidEnvConfig(msg));
        if self.hypothesis_count < 2 {
            return bad(format!("hypothesis_count must be at least 2, got {}", self.hypothesis_count));
        }
        if self.tools.is_empty() {
            return bad("tool catalog is empty".into());
        }
        for (i, tool) in self.tools.iter().enumerate() {
            tool.validate()?;
            if self.tools[..i].iter().any(|t| t.name == tool.name) {
                return bad(format!("duplicate tool name `{}`", tool.name));
            }
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return bad(format!("beta must be positive, got {}", self.beta));
        }
        if !(self.kappa.is_finite() && self.kappa >= 0.0) {
            return bad(format!("kappa must be nonnegative, got {}", self.kappa));
        }
        if let Some(s) = self
            .shock_schedule
            .iter()
            .find(|s| !(s.multiplier.is_finite() && s.multiplier > 0.0))
        {
            return bad(format!("shock multiplier must be positive, got {}", s.multiplier));
        }
        if !(self.resource_initial.is_finite() && self.resource_initial > 0.0) {
            return bad(format!("resource_initial must be positive, got {}", self.resource_initial));
        }
        if self.horizon_cap == 0 {
            return bad("horizon_cap must be at least 1".into());
        }
        if !(self.observation_base.is_finite() && self.observation_base >= 1.0) {
            return bad(format!("observation_base must be at least 1, got {}", self.observation_base));
        }
        if !(self.evidence_fidelity.is_finite() && self.evidence_fidelity > 0.0) {
            return bad(format!("evidence_fidelity must be positive, got {}", self.evidence_fidelity));
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_pretty()? + "\n")?;
        Ok(())
    }

    pub fn tool_index(&self, name: &str) -> Option<usize> {
        self.tools.iter().position(|t| t.name == name)
    }

    pub fn tool(&self, name: &str) -> Option<&ToolSpec> {
        self.tools.iter().find(|t| t.name == name)
    }

    pub fn min_tau(&self) -> f64 {
        self.tools.iter().map(|t| t.tau).fold(f64::INFINITY, f64::min)
    }

    /// Closed-form resource after `t` elapsed time-steps.
    pub fn resource_at(&self, t: f64) -> f64 {
        self.resource_initial * (-self.beta * t / 100.0).exp()
    }
}

/// Builds a randomized catalog of `action_count` tools on top of `template`.
///
/// Latency is drawn uniformly from [`SCALED_LATENCIES`], target gain from
/// `U[0.2, 1.5]` and load from the integers in [`SCALED_OMEGA_RANGE`], all
/// independently; sharpness is read off `curve`.
pub fn random_scaled_config<R: Rng + ?Sized>(
    action_count: usize,
    template: &EnvConfig,
    curve: &GainCurve,
    rng: &mut R,
) -> Result<EnvConfig> {
    if action_count < 2 {
        return Err(TcaError::InvalidEnvConfig(format!(
            "a scaled catalog needs at least 2 tools, got {action_count}"
        )));
    }
    let tools = (0..action_count)
        .map(|i| {
            let tau = *SCALED_LATENCIES.choose(rng).expect("latency set is nonempty");
            let gain = rng.random_range(SCALED_GAIN_RANGE.0..=SCALED_GAIN_RANGE.1);
            let omega = rng.random_range(SCALED_OMEGA_RANGE.0..=SCALED_OMEGA_RANGE.1) as f64;
            Ok(ToolSpec {
                name: format!("tool_{i:02}"),
                tau,
                omega,
                sharpness: curve.sharpness_for(gain)?,
                expected_gain: gain,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let cfg = EnvConfig {
        name: format!("scaled{action_count}"),
        tools,
        ..template.clone()
    };
    cfg.validate()?;
    Ok(cfg)
}

/// World state. `true_hypothesis` is hidden from every agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvState {
    pub true_hypothesis: usize,
    pub t: f64,
    pub congestion: f64,
    pub resource: f64,
    pub query_count: u32,
}

/// Starts an episode: uniform ground truth, zero time and load, full resource.
pub fn reset<R: Rng + ?Sized>(cfg: &EnvConfig, env_rng: &mut R) -> EnvState {
    EnvState {
        true_hypothesis: env_rng.random_range(0..cfg.hypothesis_count),
        t: 0.0,
        congestion: 0.0,
        resource: cfg.resource_initial,
        query_count: 0,
    }
}

/// Advances time, congestion and resource for one query with `tool`.
pub fn apply_query(state: &EnvState, tool: &ToolSpec, cfg: &EnvConfig) -> EnvState {
    let query_count = state.query_count + 1;
    let mut congestion = state.congestion * (-cfg.kappa * tool.tau).exp() + tool.omega;
    for shock in cfg.shock_schedule.iter().filter(|s| s.step == query_count) {
        congestion *= shock.multiplier;
    }
    EnvState {
        true_hypothesis: state.true_hypothesis,
        t: state.t + tool.tau,
        congestion,
        resource: state.resource * (-cfg.beta * tool.tau / 100.0).exp(),
        query_count,
    }
}

/// Draws the realized observation for a query with `tool`.
///
/// The generating channel has sharpness `tool.sharpness · evidence_fidelity`.
pub fn observe<R: Rng + ?Sized>(
    state: &EnvState,
    tool: &ToolSpec,
    cfg: &EnvConfig,
    env_rng: &mut R,
) -> Result<Observation> {
    let model = ObservationModel::new(tool.sharpness * cfg.evidence_fidelity, cfg.observation_base)?;
    model.sample(cfg.hypothesis_count, state.true_hypothesis, env_rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn state(c: f64) -> EnvState {
        EnvState {
            true_hypothesis: 0,
            t: 0.0,
            congestion: c,
            resource: 100.0,
            query_count: 0,
        }
    }

    fn tool(tau: f64, omega: f64) -> ToolSpec {
        ToolSpec {
            name: "probe".into(),
            tau,
            omega,
            sharpness: 1.0,
            expected_gain: 0.3,
        }
    }

    #[test]
    fn emdg_catalog() {
        let cfg = EnvConfig::emdg_default();
        cfg.validate().unwrap();
        assert_eq!(cfg.hypothesis_count, 5);
        assert_eq!(cfg.tool(MRI_NETWORK).unwrap().tau, 45.0);
        assert_eq!(cfg.tool(HEMATOLOGY_LAB).unwrap().tau, 5.0);
        assert_eq!(cfg.kappa, 0.0);
        assert_eq!(cfg.beta, 0.5);
        assert!(cfg.shock_schedule.is_empty());
    }

    #[test]
    fn nstg_catalog() {
        let cfg = EnvConfig::nstg_default();
        cfg.validate().unwrap();
        let quick = cfg.tool(QUICK_SCAN).unwrap();
        let full = cfg.tool(FULL_FORENSICS).unwrap();
        assert_eq!((quick.tau, quick.omega, quick.expected_gain), (4.0, 3.0, 0.40));
        assert_eq!((full.tau, full.omega, full.expected_gain), (60.0, 70.0, 1.30));
        assert_eq!(cfg.beta, 0.30);
        assert_eq!(cfg.shock_schedule, vec![Shock { step: 2, multiplier: 3.0 }]);
    }

    #[test]
    fn additive_congestion_without_drain() {
        let cfg = EnvConfig::emdg_default();
        let next = apply_query(&state(10.0), &tool(5.0, 3.0), &cfg);
        assert_eq!(next.congestion, 13.0);
        assert_eq!(next.t, 5.0);
        assert_eq!(next.query_count, 1);
    }

    #[test]
    fn congestion_drains_with_kappa() {
        let cfg = EnvConfig {
            kappa: 0.1,
            ..EnvConfig::emdg_default()
        };
        let next = apply_query(&state(10.0), &tool(5.0, 3.0), &cfg);
        assert!((next.congestion - (10.0 * (-0.5f64).exp() + 3.0)).abs() < 1e-12);
        assert!((next.congestion - 9.0653).abs() < 1e-4);
    }

    #[test]
    fn three_slow_queries_leave_fifty_point_nine_two() {
        let cfg = EnvConfig::emdg_default();
        let mri = cfg.tool(MRI_NETWORK).unwrap();
        let mut s = state(0.0);
        for _ in 0..3 {
            s = apply_query(&s, mri, &cfg);
        }
        assert_eq!(s.t, 135.0);
        assert!((s.resource - 100.0 * (-0.675f64).exp()).abs() < 1e-9);
        assert!((s.resource - 50.92).abs() < 0.005);
    }

    #[test]
    fn shock_fires_once_at_its_step() {
        let cfg = EnvConfig::nstg_default();
        let quick = cfg.tool(QUICK_SCAN).unwrap();
        let s1 = apply_query(&state(0.0), quick, &cfg);
        assert_eq!(s1.congestion, 3.0);
        let s2 = apply_query(&s1, quick, &cfg);
        assert_eq!(s2.congestion, 18.0);
        let s3 = apply_query(&s2, quick, &cfg);
        assert_eq!(s3.congestion, 21.0);
    }

    #[test]
    fn reset_state() {
        let cfg = EnvConfig::emdg_default();
        let a = reset(&cfg, &mut ChaCha8Rng::seed_from_u64(4));
        let b = reset(&cfg, &mut ChaCha8Rng::seed_from_u64(4));
        assert_eq!(a, b);
        assert_eq!((a.t, a.congestion, a.resource, a.query_count), (0.0, 0.0, 100.0, 0));
        assert!(a.true_hypothesis < 5);
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let good = EnvConfig::emdg_default();
        let mut cfg = good.clone();
        cfg.hypothesis_count = 1;
        assert!(cfg.validate().is_err());
        let mut cfg = good.clone();
        cfg.beta = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = good.clone();
        cfg.kappa = -0.1;
        assert!(cfg.validate().is_err());
        let mut cfg = good.clone();
        cfg.shock_schedule.push(Shock { step: 1, multiplier: 0.0 });
        assert!(cfg.validate().is_err());
        let mut cfg = good.clone();
        cfg.tools[1].name = cfg.tools[0].name.clone();
        assert!(cfg.validate().is_err());
        let mut cfg = good;
        cfg.tools[0].tau = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn json_round_trip_and_unknown_fields() {
        let cfg = EnvConfig::nstg_default();
        let text = cfg.to_json_pretty().unwrap();
        assert_eq!(EnvConfig::from_json_str(&text).unwrap(), cfg);
        let tampered = text.replacen("\"kappa\"", "\"kappa_typo\"", 1);
        assert!(EnvConfig::from_json_str(&tampered).is_err());
    }

    #[test]
    fn scaled_configs_respect_their_ranges() {
        let template = EnvConfig::emdg_default();
        let curve = GainCurve::shipped();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for count in [5, 10, 20] {
            let cfg = random_scaled_config(count, &template, curve, &mut rng).unwrap();
            assert_eq!(cfg.tools.len(), count);
            for t in &cfg.tools {
                assert!(SCALED_LATENCIES.contains(&t.tau));
                assert!((0.2..=1.5).contains(&t.expected_gain));
                assert!((2.0..=70.0).contains(&t.omega) && t.omega.fract() == 0.0);
            }
        }
        let a = random_scaled_config(10, &template, curve, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let b = random_scaled_config(10, &template, curve, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert_eq!(a, b);
        assert!(random_scaled_config(1, &template, curve, &mut rng).is_err());
    }
}
