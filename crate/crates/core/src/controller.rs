//! The cost-aware controller: rollout value of information, net utility,
//! and the net-utility stopping rule.
//!
//! For each tool `a` the controller estimates
//!
//! ```text
//! VOI(a | b)  = (1/K) Σ_k [ H(b) - H(b'_k(a)) ]
//! U(a; b,t,C) = VOI(a | b) - α·( λ_S·(C + Ω(a)) + β·(t + τ(a)) ) + η·V⁺(a)
//! ```
//!
//! where each `b'_k(a)` is a clone of `b` updated with an observation
//! simulated under a hypothesis drawn from `b` itself, and `V⁺(a)` is the
//! best one-step net utility (floored at zero) at the time and load reached
//! after `a`, under the expected posterior. The controller stops when
//! `max_a U ≤ 0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::belief::{entropy_of, posterior_from_point, Belief, ObservationModel, DEFAULT_EPS};
use crate::calibration::Calibration;
use crate::environment::{EnvConfig, EnvState, ToolSpec};
use crate::error::{Result, TcaError};

pub const DEFAULT_ROLLOUTS: usize = 32;

/// Which friction terms and which stop rule are active. All on by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostTerms {
    pub use_stop: bool,
    pub use_space: bool,
    pub use_time: bool,
    pub use_live_congestion: bool,
}

impl Default for CostTerms {
    fn default() -> Self {
        Self {
            use_stop: true,
            use_space: true,
            use_time: true,
            use_live_congestion: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerConfig {
    /// Cost-to-utility scale.
    pub alpha: f64,
    /// Temporal friction weight.
    pub beta: f64,
    /// Spatial friction weight.
    pub lambda_s: f64,
    /// Rollouts per VOI estimate.
    pub rollout_count: usize,
    /// Continuation weight in `[0, 1]`; zero gives the myopic rule.
    #[serde(default)]
    pub eta: f64,
    /// VOI below which the greedy baseline stops.
    pub voi_floor: f64,
    #[serde(default)]
    pub terms: CostTerms,
}

impl ControllerConfig {
    pub fn emdg_default() -> Self {
        Self {
            alpha: 0.01,
            beta: 0.5,
            lambda_s: 0.8,
            rollout_count: DEFAULT_ROLLOUTS,
            eta: 0.0,
            voi_floor: Calibration::shipped().emdg.react_voi_floor,
            terms: CostTerms::default(),
        }
    }

    pub fn nstg_default() -> Self {
        Self {
            alpha: 0.015,
            beta: 0.30,
            lambda_s: 0.90,
            voi_floor: Calibration::shipped().nstg.react_voi_floor,
            ..Self::emdg_default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(TcaError::InvalidControllerConfig(msg));
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("lambda_s", self.lambda_s)] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be finite and nonnegative, got {v}"));
            }
        }
        if self.rollout_count == 0 {
            return bad("rollout_count must be at least 1".into());
        }
        if !(self.voi_floor.is_finite() && self.voi_floor >= 0.0) {
            return bad(format!("voi_floor must be finite and nonnegative, got {}", self.voi_floor));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return bad(format!("eta must lie in [0, 1], got {}", self.eta));
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

/// The part of the world state an agent may condition on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateView {
    pub t: f64,
    pub congestion: f64,
}

impl From<&EnvState> for StateView {
    fn from(s: &EnvState) -> Self {
        Self {
            t: s.t,
            congestion: s.congestion,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionScore {
    pub tool: String,
    /// Estimated entropy reduction in nats.
    pub voi: f64,
    /// α-scaled spatio-temporal friction.
    pub cost: f64,
    /// η-weighted continuation term.
    pub continuation: f64,
    pub utility: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Action {
    /// Query the tool at this catalog index.
    Query(usize),
    Stop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub action: Action,
    pub scores: Vec<ActionScore>,
}

impl Decision {
    pub fn stop(scores: Vec<ActionScore>) -> Self {
        Self {
            action: Action::Stop,
            scores,
        }
    }

    pub fn is_stop(&self) -> bool {
        self.action == Action::Stop
    }

    pub fn best_utility(&self) -> Option<f64> {
        self.scores.iter().map(|s| s.utility).reduce(f64::max)
    }
}

/// Result of one batch of belief-cloning rollouts.
#[derive(Debug, Clone, PartialEq)]
pub struct RolloutEstimate {
    pub voi: f64,
    /// Average of the K simulated posteriors.
    pub mean_posterior: Belief,
}

/// Runs `rollouts` cloned-belief updates for one tool channel.
///
/// Simulated hypotheses are drawn from `b` by systematic sampling, so each
/// hypothesis appears in the batch within one draw of its expected count.
pub fn rollout_estimate<R: Rng + ?Sized>(
    b: &Belief,
    model: &ObservationModel,
    rollouts: usize,
    rng: &mut R,
) -> Result<RolloutEstimate> {
    if rollouts == 0 {
        return Err(TcaError::InvalidControllerConfig(
            "rollout_count must be at least 1".into(),
        ));
    }
    let n = b.len();
    let prior_entropy = b.entropy();
    let mut total_drop = 0.0;
    let mut mean = vec![0.0; n];
    // Systematic sampling: one uniform offset, K evenly spaced quantiles.
    let offset: f64 = rng.random();
    for k in 0..rollouts {
        let hypothesis = b.quantile((k as f64 + offset) / rollouts as f64);
        let point = model.sample_point(n, hypothesis, rng);
        let post = posterior_from_point(b.probs(), &point, model)?;
        total_drop += prior_entropy - entropy_of(post.probs(), DEFAULT_EPS);
        for (m, p) in mean.iter_mut().zip(post.probs()) {
            *m += p;
        }
    }
    let k = rollouts as f64;
    mean.iter_mut().for_each(|m| *m /= k);
    Ok(RolloutEstimate {
        voi: total_drop / k,
        mean_posterior: Belief::from_weights(mean)?,
    })
}

/// Monte Carlo estimate of the expected entropy reduction of one query.
///
/// Not clipped: a single unlucky batch may come out slightly negative.
pub fn estimate_voi<R: Rng + ?Sized>(
    b: &Belief,
    model: &ObservationModel,
    rollouts: usize,
    rng: &mut R,
) -> Result<f64> {
    rollout_estimate(b, model, rollouts, rng).map(|e| e.voi)
}

/// `α·(λ_S·(C + Ω) + β·(t + τ))` with ablated terms removed.
pub fn friction(view: StateView, tool: &ToolSpec, cfg: &ControllerConfig) -> f64 {
    let live = if cfg.terms.use_live_congestion {
        view.congestion
    } else {
        0.0
    };
    let spatial = if cfg.terms.use_space {
        cfg.lambda_s * (live + tool.omega)
    } else {
        0.0
    };
    let temporal = if cfg.terms.use_time {
        cfg.beta * (view.t + tool.tau)
    } else {
        0.0
    };
    cfg.alpha * (spatial + temporal)
}

/// Myopic net utility of querying `tool` from `view`.
pub fn net_utility(voi: f64, view: StateView, tool: &ToolSpec, cfg: &ControllerConfig) -> f64 {
    voi - friction(view, tool, cfg)
}

/// State the controller expects after querying `tool` from `view`.
pub fn advance_view(view: StateView, tool: &ToolSpec) -> StateView {
    StateView {
        t: view.t + tool.tau,
        congestion: view.congestion + tool.omega,
    }
}

/// Per-tool rollout seeds for one decision.
///
/// Each tool's VOI batch runs on its own generator seeded from this list, so
/// an estimate can be replayed exactly.
pub fn draw_tool_seeds<R: Rng + ?Sized>(tool_count: usize, rng: &mut R) -> Vec<u64> {
    (0..tool_count).map(|_| rng.random()).collect()
}

fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `max(0, max_a U(a; b_post, view))`: stopping is always worth zero.
///
/// `tool_seeds[i]` seeds the VOI rollouts of `env.tools[i]`.
pub fn continuation_value(
    b_post: &Belief,
    view: StateView,
    env: &EnvConfig,
    cfg: &ControllerConfig,
    tool_seeds: &[u64],
) -> Result<f64> {
    if tool_seeds.len() != env.tools.len() {
        return Err(TcaError::DimensionMismatch {
            expected: env.tools.len(),
            actual: tool_seeds.len(),
        });
    }
    let vois = env
        .tools
        .iter()
        .zip(tool_seeds)
        .map(|(tool, seed)| {
            estimate_voi(b_post, &tool.model(env.observation_base)?, cfg.rollout_count, &mut seeded(*seed))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(best_net_utility(&vois, view, env, cfg))
}

fn best_net_utility(vois: &[f64], view: StateView, env: &EnvConfig, cfg: &ControllerConfig) -> f64 {
    env.tools
        .iter()
        .zip(vois)
        .map(|(tool, voi)| net_utility(*voi, view, tool, cfg))
        .fold(0.0, f64::max)
}

/// Index of the best-scoring tool. Ties go to the lower latency, then to the
/// lexicographically smaller name.
pub(crate) fn best_index(tools: &[ToolSpec], score: impl Fn(usize) -> f64) -> usize {
    let mut best = 0;
    for i in 1..tools.len() {
        let (si, sb) = (score(i), score(best));
        let better = si > sb
            || (si == sb
                && (tools[i].tau < tools[best].tau
                    || (tools[i].tau == tools[best].tau && tools[i].name < tools[best].name)));
        if better {
            best = i;
        }
    }
    best
}

/// One controller step.
///
/// With `eta > 0` each tool's score gains `eta · continuation_value` at the
/// state reached after querying it. The lookahead belief is the expected
/// posterior, which equals `b`, and its VOI estimates replay this step's
/// seeded rollouts; `rollout_rng` is therefore consumed identically for
/// every `eta`.
pub fn decide<R: Rng + ?Sized>(
    b: &Belief,
    view: StateView,
    env: &EnvConfig,
    cfg: &ControllerConfig,
    rollout_rng: &mut R,
) -> Result<Decision> {
    if env.tools.is_empty() {
        return Err(TcaError::InvalidEnvConfig("tool catalog is empty".into()));
    }
    let seeds = draw_tool_seeds(env.tools.len(), rollout_rng);
    let vois = env
        .tools
        .iter()
        .zip(&seeds)
        .map(|(tool, seed)| {
            estimate_voi(b, &tool.model(env.observation_base)?, cfg.rollout_count, &mut seeded(*seed))
        })
        .collect::<Result<Vec<_>>>()?;
    let scores: Vec<ActionScore> = env
        .tools
        .iter()
        .zip(&vois)
        .map(|(tool, &voi)| {
            let cost = friction(view, tool, cfg);
            let continuation = if cfg.eta > 0.0 {
                cfg.eta * best_net_utility(&vois, advance_view(view, tool), env, cfg)
            } else {
                0.0
            };
            ActionScore {
                tool: tool.name.clone(),
                voi,
                cost,
                continuation,
                utility: voi - cost + continuation,
            }
        })
        .collect();
    let best = best_index(&env.tools, |i| scores[i].utility);
    let action = if cfg.terms.use_stop && scores[best].utility <= 0.0 {
        Action::Stop
    } else {
        Action::Query(best)
    };
    Ok(Decision { action, scores })
}
