//! Cost-aware information acquisition under latency and congestion.
//!
//! An agent holds a categorical belief over hypotheses and may query tools
//! that each cost time (resource decays while waiting) and add network load.
//! The controller scores each tool by rollout value of information minus
//! priced friction and stops when no query pays for itself.
//!
//! | module          | contents                                              |
//! |-----------------|-------------------------------------------------------|
//! | [`belief`]      | beliefs, entropy, Dirichlet channel, Bayes update     |
//! | [`environment`] | tool catalogs, congestion and resource dynamics       |
//! | [`controller`]  | VOI rollouts, net utility, stop rule, continuation    |
//! | [`baselines`]   | greedy, entropy threshold, fixed budget, ablations    |
//! | [`harness`]     | episode loop, summaries, sweeps, action scaling       |
//! | [`reproduce`]   | reference experiments with tolerance-checked reports  |
//! | [`calibration`] | sharpness and floor oracles, shipped constants        |
//! | [`params`]      | `key=value` overrides                                  |
//! | [`rng`]         | seed schedule and independent streams                 |

pub mod baselines;
pub mod belief;
pub mod calibration;
pub mod controller;
pub mod environment;
pub mod error;
pub mod harness;
pub mod params;
pub mod reproduce;
pub mod rng;

pub use baselines::{Ablation, AgentSpec};
pub use belief::{bayes_update, entropy, Belief, Observation, ObservationModel};
pub use calibration::Calibration;
pub use controller::{decide, Action, ActionScore, ControllerConfig, CostTerms, Decision, StateView};
pub use environment::{EnvConfig, EnvState, ToolSpec};
pub use error::{Result, TcaError};
pub use harness::{run_episode, summarize, Episode, RunSummary, StepRecord};
pub use reproduce::{reproduce, Report, Setup, TableId};
