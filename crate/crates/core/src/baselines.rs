//! Comparison agents: cost-blind greedy (ReAct), entropy threshold, fixed
//! query budget, and the four controller ablations.
//!
//! Greedy selection ranks tools by their catalog `expected_gain` and never
//! looks at latency, load, congestion or elapsed time. Rollout VOI is still
//! estimated for every tool; ReAct uses it for its stopping floor and every
//! agent logs it.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::belief::Belief;
use crate::controller::{
    best_index, decide, rollout_estimate, Action, ActionScore, ControllerConfig, Decision, StateView,
};
use crate::environment::EnvConfig;
use crate::error::{Result, TcaError};

/// Entropy below which a controller without a stop rule halts.
pub const NO_STOP_ENTROPY_FLOOR: f64 = 1e-3;
pub const DEFAULT_ENTROPY_THRESHOLD: f64 = 0.17;
pub const DEFAULT_FIXED_K: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ablation {
    NoStop,
    NoSpace,
    NoTime,
    NoCongestion,
}

impl Ablation {
    pub const ALL: [Ablation; 4] = [
        Ablation::NoCongestion,
        Ablation::NoSpace,
        Ablation::NoStop,
        Ablation::NoTime,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Ablation::NoStop => "nostop",
            Ablation::NoSpace => "nospace",
            Ablation::NoTime => "notime",
            Ablation::NoCongestion => "nocongestion",
        }
    }
}

impl FromStr for Ablation {
    type Err = TcaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "nostop" => Ok(Ablation::NoStop),
            "nospace" => Ok(Ablation::NoSpace),
            "notime" => Ok(Ablation::NoTime),
            "nocongestion" | "nocong" => Ok(Ablation::NoCongestion),
            _ => Err(TcaError::InvalidAgent(format!("unknown ablation `{s}`"))),
        }
    }
}

/// Clears the controller flag matching `which`.
pub fn ablation_variant(base: &ControllerConfig, which: Ablation) -> ControllerConfig {
    let mut cfg = base.clone();
    match which {
        Ablation::NoStop => cfg.terms.use_stop = false,
        Ablation::NoSpace => cfg.terms.use_space = false,
        Ablation::NoTime => cfg.terms.use_time = false,
        Ablation::NoCongestion => cfg.terms.use_live_congestion = false,
    }
    cfg
}

/// Which policy drives an episode.
///
/// Text form: `tca`, `react`, `ent[:TAU_H]`, `fixedk[:K]`, `ablation:FLAG`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum AgentSpec {
    Tca,
    ReAct,
    EntropyThreshold { tau_h: f64 },
    FixedK { k: u32 },
    Ablation(Ablation),
}

impl AgentSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            AgentSpec::EntropyThreshold { tau_h } if !(tau_h.is_finite() && tau_h > 0.0) => Err(
                TcaError::InvalidAgent(format!("entropy threshold must be positive, got {tau_h}")),
            ),
            AgentSpec::FixedK { k: 0 } => {
                Err(TcaError::InvalidAgent("fixed budget must be at least 1".into()))
            }
            _ => Ok(()),
        }
    }

    /// Controller configuration this agent actually runs with.
    pub fn effective_config(&self, base: &ControllerConfig) -> ControllerConfig {
        match *self {
            AgentSpec::Ablation(which) => ablation_variant(base, which),
            _ => base.clone(),
        }
    }
}

impl fmt::Display for AgentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentSpec::Tca => f.write_str("tca"),
            AgentSpec::ReAct => f.write_str("react"),
            AgentSpec::EntropyThreshold { tau_h } => write!(f, "ent:{tau_h}"),
            AgentSpec::FixedK { k } => write!(f, "fixedk:{k}"),
            AgentSpec::Ablation(a) => write!(f, "ablation:{}", a.as_str()),
        }
    }
}

impl FromStr for AgentSpec {
    type Err = TcaError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a.trim())),
            None => (s, None),
        };
        let number = |a: &str| -> Result<f64> {
            a.parse::<f64>()
                .map_err(|_| TcaError::InvalidAgent(format!("bad numeric argument `{a}` in `{s}`")))
        };
        let spec = match (kind.to_ascii_lowercase().as_str(), arg) {
            ("tca", None) => AgentSpec::Tca,
            ("react", None) => AgentSpec::ReAct,
            ("ent", None) => AgentSpec::EntropyThreshold {
                tau_h: DEFAULT_ENTROPY_THRESHOLD,
            },
            ("ent", Some(a)) => AgentSpec::EntropyThreshold { tau_h: number(a)? },
            ("fixedk", None) => AgentSpec::FixedK { k: DEFAULT_FIXED_K },
            ("fixedk", Some(a)) => AgentSpec::FixedK {
                k: a.parse()
                    .map_err(|_| TcaError::InvalidAgent(format!("bad budget `{a}` in `{s}`")))?,
            },
            ("ablation", Some(a)) => AgentSpec::Ablation(a.parse()?),
            _ => return Err(TcaError::InvalidAgent(format!("unrecognized agent `{s}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl TryFrom<String> for AgentSpec {
    type Error = TcaError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<AgentSpec> for String {
    fn from(a: AgentSpec) -> String {
        a.to_string()
    }
}

/// Greedy choice and cost-free scores for every tool.
///
/// The returned scores carry rollout VOI with zero cost, so
/// `utility == voi`.
pub fn greedy_choice<R: Rng + ?Sized>(
    b: &Belief,
    env: &EnvConfig,
    cfg: &ControllerConfig,
    rollout_rng: &mut R,
) -> Result<(usize, Vec<ActionScore>)> {
    if env.tools.is_empty() {
        return Err(TcaError::InvalidEnvConfig("tool catalog is empty".into()));
    }
    let mut scores = Vec::with_capacity(env.tools.len());
    for tool in &env.tools {
        let est = rollout_estimate(b, &tool.model(env.observation_base)?, cfg.rollout_count, rollout_rng)?;
        scores.push(ActionScore {
            tool: tool.name.clone(),
            voi: est.voi,
            cost: 0.0,
            continuation: 0.0,
            utility: est.voi,
        });
    }
    let pick = best_index(&env.tools, |i| env.tools[i].expected_gain);
    Ok((pick, scores))
}

/// Greedy query, or stop once the chosen tool's VOI falls below `cfg.voi_floor`.
pub fn react_decide<R: Rng + ?Sized>(
    b: &Belief,
    env: &EnvConfig,
    cfg: &ControllerConfig,
    rollout_rng: &mut R,
) -> Result<Decision> {
    let (pick, scores) = greedy_choice(b, env, cfg, rollout_rng)?;
    if scores[pick].voi < cfg.voi_floor {
        return Ok(Decision::stop(scores));
    }
    Ok(Decision {
        action: Action::Query(pick),
        scores,
    })
}

/// Stop while `H(b) < tau_h`, otherwise greedy with no floor.
pub fn entropy_threshold_decide<R: Rng + ?Sized>(
    b: &Belief,
    env: &EnvConfig,
    cfg: &ControllerConfig,
    tau_h: f64,
    rollout_rng: &mut R,
) -> Result<Decision> {
    if b.entropy() < tau_h {
        return Ok(Decision::stop(Vec::new()));
    }
    let (pick, scores) = greedy_choice(b, env, cfg, rollout_rng)?;
    Ok(Decision {
        action: Action::Query(pick),
        scores,
    })
}

/// Greedy while fewer than `k` queries have been made.
pub fn fixed_k_decide<R: Rng + ?Sized>(
    b: &Belief,
    query_count: u32,
    env: &EnvConfig,
    cfg: &ControllerConfig,
    k: u32,
    rollout_rng: &mut R,
) -> Result<Decision> {
    if query_count >= k {
        return Ok(Decision::stop(Vec::new()));
    }
    let (pick, scores) = greedy_choice(b, env, cfg, rollout_rng)?;
    Ok(Decision {
        action: Action::Query(pick),
        scores,
    })
}

/// One decision of `agent`. `cfg` is the base controller configuration;
/// ablations are applied here.
pub fn agent_decide<R: Rng + ?Sized>(
    agent: &AgentSpec,
    b: &Belief,
    view: StateView,
    query_count: u32,
    env: &EnvConfig,
    cfg: &ControllerConfig,
    rollout_rng: &mut R,
) -> Result<Decision> {
    match *agent {
        AgentSpec::Tca => decide(b, view, env, cfg, rollout_rng),
        AgentSpec::Ablation(which) => {
            let cfg = ablation_variant(cfg, which);
            if !cfg.terms.use_stop && b.entropy() < NO_STOP_ENTROPY_FLOOR {
                return Ok(Decision::stop(Vec::new()));
            }
            decide(b, view, env, &cfg, rollout_rng)
        }
        AgentSpec::ReAct => react_decide(b, env, cfg, rollout_rng),
        AgentSpec::EntropyThreshold { tau_h } => entropy_threshold_decide(b, env, cfg, tau_h, rollout_rng),
        AgentSpec::FixedK { k } => fixed_k_decide(b, query_count, env, cfg, k, rollout_rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{FULL_FORENSICS, MRI_NETWORK};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn agent_text_round_trip() {
        for text in ["tca", "react", "ent:0.17", "fixedk:3", "ablation:nostop", "ablation:nocongestion"] {
            let spec: AgentSpec = text.parse().unwrap();
            assert_eq!(spec.to_string(), text);
        }
        assert_eq!("ent".parse::<AgentSpec>().unwrap(), AgentSpec::EntropyThreshold { tau_h: 0.17 });
        assert_eq!("FixedK".parse::<AgentSpec>().unwrap(), AgentSpec::FixedK { k: 3 });
        assert_eq!(
            "ablation:no_space".parse::<AgentSpec>().unwrap(),
            AgentSpec::Ablation(Ablation::NoSpace)
        );
    }

    #[test]
    fn bad_agent_text() {
        for text in ["", "tca:1", "ent:-1", "ent:x", "fixedk:0", "fixedk:-2", "ablation", "ablation:foo", "mcts"] {
            assert!(text.parse::<AgentSpec>().is_err(), "{text}");
        }
    }

    #[test]
    fn ablations_clear_one_flag() {
        let base = ControllerConfig::emdg_default();
        assert!(!ablation_variant(&base, Ablation::NoStop).terms.use_stop);
        assert!(!ablation_variant(&base, Ablation::NoSpace).terms.use_space);
        assert!(!ablation_variant(&base, Ablation::NoTime).terms.use_time);
        assert!(!ablation_variant(&base, Ablation::NoCongestion).terms.use_live_congestion);
        assert_eq!(AgentSpec::Tca.effective_config(&base), base);
    }

    #[test]
    fn greedy_ignores_costs() {
        let env = EnvConfig::emdg_default();
        let cfg = ControllerConfig::emdg_default();
        let (pick, scores) = greedy_choice(&Belief::uniform(5), &env, &cfg, &mut rng(1)).unwrap();
        assert_eq!(env.tools[pick].name, MRI_NETWORK);
        assert!(scores.iter().all(|s| s.cost == 0.0 && s.utility == s.voi));

        let nstg = EnvConfig::nstg_default();
        let (pick, _) = greedy_choice(&Belief::uniform(5), &nstg, &cfg, &mut rng(1)).unwrap();
        assert_eq!(nstg.tools[pick].name, FULL_FORENSICS);
    }

    #[test]
    fn react_stops_on_uninformative_catalog() {
        let mut env = EnvConfig::emdg_default();
        env.tools.iter_mut().for_each(|t| t.sharpness = 0.0);
        let cfg = ControllerConfig::emdg_default();
        let d = react_decide(&Belief::uniform(5), &env, &cfg, &mut rng(2)).unwrap();
        assert!(d.is_stop());
    }

    #[test]
    fn entropy_threshold_rule() {
        let env = EnvConfig::emdg_default();
        let cfg = ControllerConfig::emdg_default();
        let sharp = Belief::new(vec![0.985, 0.005, 0.005, 0.005, 0.0]).unwrap();
        assert!(sharp.entropy() < 0.17);
        assert!(entropy_threshold_decide(&sharp, &env, &cfg, 0.17, &mut rng(3)).unwrap().is_stop());
        let d = entropy_threshold_decide(&Belief::uniform(5), &env, &cfg, 0.17, &mut rng(3)).unwrap();
        assert_eq!(d.action, Action::Query(env.tool_index(MRI_NETWORK).unwrap()));
    }

    #[test]
    fn fixed_budget() {
        let env = EnvConfig::emdg_default();
        let cfg = ControllerConfig::emdg_default();
        let b = Belief::uniform(5);
        assert!(!fixed_k_decide(&b, 0, &env, &cfg, 1, &mut rng(4)).unwrap().is_stop());
        assert!(fixed_k_decide(&b, 1, &env, &cfg, 1, &mut rng(4)).unwrap().is_stop());
        let point = Belief::point_mass(5, 0).unwrap();
        assert!(!fixed_k_decide(&point, 2, &env, &cfg, 3, &mut rng(4)).unwrap().is_stop());
    }

    #[test]
    fn no_stop_halts_on_entropy_floor() {
        let env = EnvConfig::emdg_default();
        let cfg = ControllerConfig::emdg_default();
        let point = Belief::point_mass(5, 1).unwrap();
        let view = StateView { t: 0.0, congestion: 0.0 };
        let agent = AgentSpec::Ablation(Ablation::NoStop);
        let d = agent_decide(&agent, &point, view, 0, &env, &cfg, &mut rng(5)).unwrap();
        assert!(d.is_stop());
    }
}
