//! Seeded Monte Carlo experiments: the episode loop, per-seed terminal
//! statistics, sweeps and the action-scaling study.
//!
//! Episode `i` of an experiment with master seed `m` draws every random
//! number from `stream_rng(m, i, ·)`, so cells of a sweep that share `m`
//! run on identical ground truths and identical observation noise.
//! Parallel results are gathered in index order, which keeps every output
//! byte-stable regardless of scheduling.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::statistics::Statistics;

use crate::baselines::{agent_decide, Ablation, AgentSpec};
use crate::belief::{bayes_update, Belief};
use crate::calibration::{Calibration, GainCurve, DEFAULT_MASTER_SEED};
use crate::controller::{Action, ControllerConfig, StateView};
use crate::environment::{apply_query, observe, random_scaled_config, reset, EnvConfig};
use crate::error::{Result, TcaError};
use crate::rng::{stream_rng, Stream};

pub const STOP_LABEL: &str = "STOP";
/// Rows in a padded plotting trajectory.
pub const PLOT_STEPS: usize = 5;
pub const DEFAULT_SEEDS: usize = 200;

pub const ALPHA_GRID: [f64; 3] = [0.005, 0.01, 0.02];
pub const BETA_GRID: [f64; 3] = [0.25, 0.5, 1.0];
pub const LAMBDA_GRID: [f64; 3] = [0.4, 0.8, 1.2];
pub const ETA_GRID: [f64; 4] = [0.0, 0.1, 0.3, 0.5];
pub const KAPPA_GRID: [f64; 3] = [0.0, 0.05, 0.10];
pub const ACTION_COUNTS: [usize; 3] = [5, 10, 20];
pub const SCALING_CONFIGS: usize = 30;
pub const SCALING_SEEDS: usize = 10;

/// One logged decision.
///
/// Query rows hold the state after the query and the belief after the
/// update. The closing `STOP` row repeats the final state with zero gain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u32,
    pub t: f64,
    /// Entropy before this step's observation.
    pub entropy_prior: f64,
    pub entropy: f64,
    pub resource: f64,
    pub congestion: f64,
    pub action: String,
    pub info_gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub index: u64,
    pub true_hypothesis: usize,
    pub records: Vec<StepRecord>,
    pub final_belief: Belief,
    /// The query budget ran out before the agent stopped.
    pub horizon_reached: bool,
}

impl Episode {
    pub fn terminal(&self) -> &StepRecord {
        self.records.last().expect("every episode ends with a stop row")
    }

    pub fn query_count(&self) -> u32 {
        self.terminal().step
    }

    pub fn diagnosis(&self) -> usize {
        self.final_belief.argmax()
    }

    pub fn accuracy(&self) -> f64 {
        if self.diagnosis() == self.true_hypothesis {
            1.0
        } else {
            0.0
        }
    }

    pub fn p_true(&self) -> f64 {
        self.final_belief.probs()[self.true_hypothesis]
    }

    pub fn total_info_gain(&self) -> f64 {
        self.records.iter().map(|r| r.info_gain).sum()
    }

    pub fn step0_action(&self) -> &str {
        &self.records[0].action
    }

    /// Tool names in query order.
    pub fn actions(&self) -> Vec<&str> {
        self.records
            .iter()
            .filter(|r| r.action != STOP_LABEL)
            .map(|r| r.action.as_str())
            .collect()
    }
}

/// Runs one episode of `agent` on `env`.
pub fn run_episode(
    env: &EnvConfig,
    agent: &AgentSpec,
    cfg: &ControllerConfig,
    master_seed: u64,
    index: u64,
) -> Result<Episode> {
    let mut env_rng = stream_rng(master_seed, index, Stream::Environment);
    let mut rollout_rng = stream_rng(master_seed, index, Stream::Rollout);

    let mut state = reset(env, &mut env_rng);
    let mut belief = Belief::uniform(env.hypothesis_count);
    let mut records = Vec::new();
    let mut horizon_reached = false;

    loop {
        let action = if state.query_count >= env.horizon_cap {
            horizon_reached = true;
            Action::Stop
        } else {
            agent_decide(
                agent,
                &belief,
                StateView::from(&state),
                state.query_count,
                env,
                cfg,
                &mut rollout_rng,
            )?
            .action
        };
        let h = belief.entropy();
        let Action::Query(i) = action else {
            records.push(StepRecord {
                step: state.query_count,
                t: state.t,
                entropy_prior: h,
                entropy: h,
                resource: state.resource,
                congestion: state.congestion,
                action: STOP_LABEL.into(),
                info_gain: 0.0,
            });
            break;
        };
        let tool = &env.tools[i];
        state = apply_query(&state, tool, env);
        let obs = observe(&state, tool, env, &mut env_rng)?;
        belief = bayes_update(&belief, &obs, &tool.model(env.observation_base)?)?;
        let h_next = belief.entropy();
        records.push(StepRecord {
            step: state.query_count - 1,
            t: state.t,
            entropy_prior: h,
            entropy: h_next,
            resource: state.resource,
            congestion: state.congestion,
            action: tool.name.clone(),
            info_gain: h - h_next,
        });
    }

    Ok(Episode {
        index,
        true_hypothesis: state.true_hypothesis,
        records,
        final_belief: belief,
        horizon_reached,
    })
}

/// Episodes `0..seeds` in index order.
pub fn run_many(
    env: &EnvConfig,
    agent: &AgentSpec,
    cfg: &ControllerConfig,
    master_seed: u64,
    seeds: usize,
) -> Result<Vec<Episode>> {
    (0..seeds as u64)
        .into_par_iter()
        .map(|i| run_episode(env, agent, cfg, master_seed, i))
        .collect()
}

/// Extends `records` to at least `len` rows by repeating the last row.
pub fn pad_trajectory(records: &[StepRecord], len: usize) -> Vec<StepRecord> {
    let mut out = records.to_vec();
    if let Some(last) = records.last() {
        while out.len() < len {
            out.push(last.clone());
        }
    }
    out
}

/// Terminal values of one seed, read from its last logged row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminalStats {
    pub index: u64,
    pub true_hypothesis: usize,
    pub time: f64,
    pub resource: f64,
    pub entropy: f64,
    pub accuracy: f64,
    pub p_true: f64,
    pub info_gain: f64,
    pub queries: u32,
    pub step0_action: String,
}

impl From<&Episode> for TerminalStats {
    fn from(e: &Episode) -> Self {
        let last = e.terminal();
        Self {
            index: e.index,
            true_hypothesis: e.true_hypothesis,
            time: last.t,
            resource: last.resource,
            entropy: last.entropy,
            accuracy: e.accuracy(),
            p_true: e.p_true(),
            info_gain: e.total_info_gain(),
            queries: e.query_count(),
            step0_action: e.step0_action().to_string(),
        }
    }
}

/// Mean with a normal-approximation 95% interval `1.96·s/√N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub std: f64,
    pub ci95: f64,
}

impl MetricSummary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        let mean = values.mean();
        // Constant samples get an exact zero rather than rounding residue.
        let constant = values.iter().all(|v| *v == values[0]);
        let std = if n < 2 || constant { 0.0 } else { values.std_dev() };
        Self {
            mean,
            std,
            ci95: 1.96 * std / (n as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Time,
    Resource,
    Entropy,
    Accuracy,
    PTrue,
    InfoGain,
    Queries,
}

impl Metric {
    pub const ALL: [Metric; 7] = [
        Metric::Time,
        Metric::Resource,
        Metric::Entropy,
        Metric::Accuracy,
        Metric::PTrue,
        Metric::InfoGain,
        Metric::Queries,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Time => "time",
            Metric::Resource => "resource",
            Metric::Entropy => "entropy",
            Metric::Accuracy => "accuracy",
            Metric::PTrue => "p_true",
            Metric::InfoGain => "info_gain",
            Metric::Queries => "queries",
        }
    }

    fn read(self, s: &TerminalStats) -> f64 {
        match self {
            Metric::Time => s.time,
            Metric::Resource => s.resource,
            Metric::Entropy => s.entropy,
            Metric::Accuracy => s.accuracy,
            Metric::PTrue => s.p_true,
            Metric::InfoGain => s.info_gain,
            Metric::Queries => s.queries as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub label: String,
    pub n: usize,
    pub metrics: BTreeMap<Metric, MetricSummary>,
    pub step0_histogram: BTreeMap<String, usize>,
    pub terminals: Vec<TerminalStats>,
}

impl RunSummary {
    pub fn metric(&self, m: Metric) -> MetricSummary {
        self.metrics[&m]
    }

    pub fn mean(&self, m: Metric) -> f64 {
        self.metrics[&m].mean
    }

    /// Fraction of seeds whose first action was `name`.
    pub fn step0_fraction(&self, name: &str) -> f64 {
        *self.step0_histogram.get(name).unwrap_or(&0) as f64 / self.n as f64
    }
}

pub fn summarize(label: &str, episodes: &[Episode]) -> Result<RunSummary> {
    if episodes.is_empty() {
        return Err(TcaError::EmptyRuns);
    }
    let terminals: Vec<TerminalStats> = episodes.iter().map(TerminalStats::from).collect();
    let metrics = Metric::ALL
        .iter()
        .map(|m| {
            let values: Vec<f64> = terminals.iter().map(|s| m.read(s)).collect();
            (*m, MetricSummary::of(&values))
        })
        .collect();
    let mut step0_histogram = BTreeMap::new();
    for s in &terminals {
        *step0_histogram.entry(s.step0_action.clone()).or_insert(0) += 1;
    }
    Ok(RunSummary {
        label: label.to_string(),
        n: terminals.len(),
        metrics,
        step0_histogram,
        terminals,
    })
}

/// One experimental condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub label: String,
    pub env: EnvConfig,
    pub agent: AgentSpec,
    pub cfg: ControllerConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub cell: Cell,
    pub summary: RunSummary,
    pub episodes: Vec<Episode>,
}

/// Runs every cell on the same seed list.
pub fn run_cells(cells: &[Cell], master_seed: u64, seeds: usize) -> Result<Vec<CellResult>> {
    if seeds == 0 {
        return Err(TcaError::EmptyRuns);
    }
    for c in cells {
        c.env.validate()?;
        c.cfg.validate()?;
        c.agent.validate()?;
    }
    let jobs: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| (0..seeds as u64).map(move |i| (c, i)))
        .collect();
    let mut flat: Vec<Episode> = jobs
        .par_iter()
        .map(|&(c, i)| run_episode(&cells[c].env, &cells[c].agent, &cells[c].cfg, master_seed, i))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(cells.len());
    for cell in cells {
        let episodes: Vec<Episode> = flat.drain(..seeds).collect();
        let summary = summarize(&cell.label, &episodes)?;
        out.push(CellResult {
            cell: cell.clone(),
            summary,
            episodes,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    Alpha,
    Beta,
    LambdaS,
    /// Alpha, beta and lambda_s grids in one table.
    Sensitivity,
    Eta,
    Kappa,
    Ablation,
    /// TCA against every baseline.
    Baselines,
}

impl SweepKind {
    pub const ALL: [SweepKind; 8] = [
        SweepKind::Alpha,
        SweepKind::Beta,
        SweepKind::LambdaS,
        SweepKind::Sensitivity,
        SweepKind::Eta,
        SweepKind::Kappa,
        SweepKind::Ablation,
        SweepKind::Baselines,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SweepKind::Alpha => "alpha",
            SweepKind::Beta => "beta",
            SweepKind::LambdaS => "lambda_s",
            SweepKind::Sensitivity => "sensitivity",
            SweepKind::Eta => "eta",
            SweepKind::Kappa => "kappa",
            SweepKind::Ablation => "ablation",
            SweepKind::Baselines => "baselines",
        }
    }

    pub fn default_grid(self) -> Vec<f64> {
        match self {
            SweepKind::Alpha => ALPHA_GRID.to_vec(),
            SweepKind::Beta => BETA_GRID.to_vec(),
            SweepKind::LambdaS => LAMBDA_GRID.to_vec(),
            SweepKind::Eta => ETA_GRID.to_vec(),
            SweepKind::Kappa => KAPPA_GRID.to_vec(),
            SweepKind::Sensitivity | SweepKind::Ablation | SweepKind::Baselines => Vec::new(),
        }
    }
}

impl std::str::FromStr for SweepKind {
    type Err = TcaError;

    fn from_str(s: &str) -> Result<Self> {
        SweepKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| TcaError::InvalidParameter {
                key: "sweep".into(),
                reason: format!("unknown sweep kind `{s}`"),
            })
    }
}

/// A sweep over one base condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub env: EnvConfig,
    pub cfg: ControllerConfig,
    pub seeds: usize,
    pub master_seed: u64,
    /// Replaces the default grid of single-parameter sweeps.
    #[serde(default)]
    pub grid: Option<Vec<f64>>,
}

impl SweepSpec {
    pub fn new(kind: SweepKind, env: EnvConfig, cfg: ControllerConfig) -> Self {
        Self {
            kind,
            env,
            cfg,
            seeds: DEFAULT_SEEDS,
            master_seed: DEFAULT_MASTER_SEED,
            grid: None,
        }
    }

    fn grid(&self) -> Vec<f64> {
        self.grid.clone().unwrap_or_else(|| self.kind.default_grid())
    }

    pub fn cells(&self) -> Result<Vec<Cell>> {
        let tca = |label: String, env: EnvConfig, cfg: ControllerConfig| Cell {
            label,
            env,
            agent: AgentSpec::Tca,
            cfg,
        };
        let base = (self.env.clone(), self.cfg.clone());
        let param_cells = |kind: SweepKind, grid: &[f64]| -> Vec<Cell> {
            grid.iter()
                .map(|&v| {
                    let (mut env, mut cfg) = base.clone();
                    match kind {
                        SweepKind::Alpha => cfg.alpha = v,
                        // One urgency rate drives both the decay and its price.
                        SweepKind::Beta => {
                            cfg.beta = v;
                            env.beta = v;
                        }
                        SweepKind::LambdaS => cfg.lambda_s = v,
                        SweepKind::Eta => cfg.eta = v,
                        _ => unreachable!("not a single-parameter sweep"),
                    }
                    tca(format!("{}={v}", kind.as_str()), env, cfg)
                })
                .collect()
        };
        let cells = match self.kind {
            SweepKind::Alpha | SweepKind::Beta | SweepKind::LambdaS | SweepKind::Eta => {
                param_cells(self.kind, &self.grid())
            }
            SweepKind::Sensitivity => [SweepKind::Alpha, SweepKind::Beta, SweepKind::LambdaS]
                .into_iter()
                .flat_map(|k| param_cells(k, &k.default_grid()))
                .collect(),
            SweepKind::Kappa => self
                .grid()
                .into_iter()
                .flat_map(|k| {
                    let env = EnvConfig {
                        kappa: k,
                        ..self.env.clone()
                    };
                    [AgentSpec::Tca, AgentSpec::ReAct].map(|agent| Cell {
                        label: format!("kappa={k}/{agent}"),
                        env: env.clone(),
                        agent,
                        cfg: self.cfg.clone(),
                    })
                })
                .collect(),
            SweepKind::Ablation => std::iter::once(AgentSpec::Tca)
                .chain(Ablation::ALL.map(AgentSpec::Ablation))
                .map(|agent| Cell {
                    label: match agent {
                        AgentSpec::Ablation(a) => a.as_str().to_string(),
                        _ => "full".into(),
                    },
                    env: self.env.clone(),
                    agent,
                    cfg: self.cfg.clone(),
                })
                .collect(),
            SweepKind::Baselines => [
                AgentSpec::Tca,
                AgentSpec::ReAct,
                "ent".parse()?,
                "fixedk".parse()?,
            ]
            .map(|agent| Cell {
                label: agent.to_string(),
                env: self.env.clone(),
                agent,
                cfg: self.cfg.clone(),
            })
            .to_vec(),
        };
        if cells.is_empty() {
            return Err(TcaError::InvalidParameter {
                key: "grid".into(),
                reason: "sweep has no cells".into(),
            });
        }
        Ok(cells)
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<CellResult>> {
    run_cells(&spec.cells()?, spec.master_seed, spec.seeds)
}

/// One row of the action-scaling study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub action_count: usize,
    pub configs: usize,
    pub seeds_per_config: usize,
    /// Share of episodes whose first TCA query is not the fastest tool.
    pub nontrivial_fraction: f64,
    pub tca: MetricSummary,
    pub react: MetricSummary,
    pub gap: f64,
    pub tca_accuracy: f64,
    pub react_accuracy: f64,
}

/// The sharpness-to-gain table matching `template`'s channel.
pub fn gain_curve_for(template: &EnvConfig, master_seed: u64) -> Result<Cow<'static, GainCurve>> {
    if template.observation_base == Calibration::shipped().base && template.hypothesis_count == 5 {
        return Ok(Cow::Borrowed(GainCurve::shipped()));
    }
    GainCurve::build(template.observation_base, template.hypothesis_count, 4_000, master_seed).map(Cow::Owned)
}

/// Randomized catalog `j` of size `count`, drawn from
/// `stream_rng(master, count·10⁶ + j, Config)`.
pub fn scaled_config(template: &EnvConfig, curve: &GainCurve, count: usize, j: u64, master_seed: u64) -> Result<EnvConfig> {
    let mut rng = stream_rng(master_seed, count as u64 * 1_000_000 + j, Stream::Config);
    random_scaled_config(count, template, curve, &mut rng)
}

/// TCA against ReAct on randomized catalogs of each size in `counts`.
///
/// Catalogs come from [`scaled_config`]; each one's episodes use indices
/// `0..n_seed`.
pub fn run_action_scaling(
    template: &EnvConfig,
    cfg: &ControllerConfig,
    counts: &[usize],
    n_cfg: usize,
    n_seed: usize,
    master_seed: u64,
) -> Result<Vec<ScalingRow>> {
    if n_cfg == 0 || n_seed == 0 {
        return Err(TcaError::EmptyRuns);
    }
    let curve = gain_curve_for(template, master_seed)?;
    let mut rows = Vec::with_capacity(counts.len());
    for &count in counts {
        let envs: Vec<EnvConfig> = (0..n_cfg as u64)
            .map(|j| scaled_config(template, &curve, count, j, master_seed))
            .collect::<Result<_>>()?;
        let jobs: Vec<(usize, u64)> = (0..n_cfg)
            .flat_map(|j| (0..n_seed as u64).map(move |i| (j, i)))
            .collect();
        let pairs: Vec<(Episode, Episode)> = jobs
            .par_iter()
            .map(|&(j, i)| {
                let tca = run_episode(&envs[j], &AgentSpec::Tca, cfg, master_seed, i)?;
                let react = run_episode(&envs[j], &AgentSpec::ReAct, cfg, master_seed, i)?;
                Ok((tca, react))
            })
            .collect::<Result<_>>()?;
        let nontrivial = jobs
            .iter()
            .zip(&pairs)
            .filter(|((j, _), (tca, _))| {
                let env = &envs[*j];
                env.tool(tca.step0_action())
                    .is_some_and(|t| t.tau > env.min_tau())
            })
            .count();
        let tca_res: Vec<f64> = pairs.iter().map(|(t, _)| t.terminal().resource).collect();
        let react_res: Vec<f64> = pairs.iter().map(|(_, r)| r.terminal().resource).collect();
        let total = pairs.len() as f64;
        let tca = MetricSummary::of(&tca_res);
        let react = MetricSummary::of(&react_res);
        rows.push(ScalingRow {
            action_count: count,
            configs: n_cfg,
            seeds_per_config: n_seed,
            nontrivial_fraction: nontrivial as f64 / total,
            gap: tca.mean - react.mean,
            tca,
            react,
            tca_accuracy: pairs.iter().map(|(t, _)| t.accuracy()).sum::<f64>() / total,
            react_accuracy: pairs.iter().map(|(_, r)| r.accuracy()).sum::<f64>() / total,
        });
    }
    Ok(rows)
}

#[derive(Serialize)]
struct TrajectoryRow<'a> {
    episode: u64,
    true_hypothesis: usize,
    step: u32,
    t: f64,
    entropy_prior: f64,
    entropy: f64,
    resource: f64,
    congestion: f64,
    action: &'a str,
    info_gain: f64,
}

/// Per-step rows of every episode, padded to `pad_to` rows each.
pub fn write_trajectories_csv(path: impl AsRef<Path>, episodes: &[Episode], pad_to: usize) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for e in episodes {
        for r in pad_trajectory(&e.records, pad_to) {
            w.serialize(TrajectoryRow {
                episode: e.index,
                true_hypothesis: e.true_hypothesis,
                step: r.step,
                t: r.t,
                entropy_prior: r.entropy_prior,
                entropy: r.entropy,
                resource: r.resource,
                congestion: r.congestion,
                action: &r.action,
                info_gain: r.info_gain,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One row per seed with its terminal values.
pub fn write_terminals_csv(path: impl AsRef<Path>, summary: &RunSummary) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for s in &summary.terminals {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(())
}

/// One row per summary: mean and ci95 of every metric, then step-0 shares.
pub fn write_summaries_csv(path: impl AsRef<Path>, summaries: &[RunSummary]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["label".to_string(), "n".to_string()];
    for m in Metric::ALL {
        header.push(format!("{}_mean", m.as_str()));
        header.push(format!("{}_ci95", m.as_str()));
    }
    header.push("step0".into());
    w.write_record(&header)?;
    for s in summaries {
        let mut row = vec![s.label.clone(), s.n.to_string()];
        for m in Metric::ALL {
            let v = s.metric(m);
            row.push(v.mean.to_string());
            row.push(v.ci95.to_string());
        }
        let step0: Vec<String> = s
            .step0_histogram
            .iter()
            .map(|(k, v)| format!("{k}:{v}"))
            .collect();
        row.push(step0.join(";"));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_scaling_csv(path: impl AsRef<Path>, rows: &[ScalingRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "action_count",
        "configs",
        "seeds_per_config",
        "nontrivial_fraction",
        "tca_resource_mean",
        "tca_resource_ci95",
        "react_resource_mean",
        "react_resource_ci95",
        "gap",
        "tca_accuracy",
        "react_accuracy",
    ])?;
    for r in rows {
        w.write_record([
            r.action_count.to_string(),
            r.configs.to_string(),
            r.seeds_per_config.to_string(),
            r.nontrivial_fraction.to_string(),
            r.tca.mean.to_string(),
            r.tca.ci95.to_string(),
            r.react.mean.to_string(),
            r.react.ci95.to_string(),
            r.gap.to_string(),
            r.tca_accuracy.to_string(),
            r.react_accuracy.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

/// Fixed-width text table of summaries for terminal output.
pub fn format_summaries(summaries: &[RunSummary]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<28} {:>5} {:>16} {:>16} {:>16} {:>14} {:>8} {:>8}  step0",
        "label", "n", "time", "resource", "entropy", "accuracy", "p_true", "queries"
    );
    for s in summaries {
        let pm = |m: Metric, prec: usize| {
            let v = s.metric(m);
            format!("{:.p$} ± {:.p$}", v.mean, v.ci95, p = prec)
        };
        let step0: Vec<String> = s
            .step0_histogram
            .iter()
            .map(|(k, v)| format!("{k}:{v}"))
            .collect();
        let _ = writeln!(
            out,
            "{:<28} {:>5} {:>16} {:>16} {:>16} {:>14} {:>8.4} {:>8.2}  {}",
            s.label,
            s.n,
            pm(Metric::Time, 2),
            pm(Metric::Resource, 2),
            pm(Metric::Entropy, 4),
            pm(Metric::Accuracy, 2),
            s.mean(Metric::PTrue),
            s.mean(Metric::Queries),
            step0.join(" ")
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{HEMATOLOGY_LAB, MRI_NETWORK};

    #[test]
    fn ci95_formula() {
        // Sample std exactly 1: values ±1 around zero in equal numbers, N even,
        // give std = sqrt(N/(N-1)); compare against the closed form instead.
        let values: Vec<f64> = (0..200).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let m = MetricSummary::of(&values);
        let s = (200.0f64 / 199.0).sqrt();
        assert!((m.std - s).abs() < 1e-12);
        assert!((m.ci95 - 1.96 * s / 200f64.sqrt()).abs() < 1e-12);
        assert!((1.96 / 200f64.sqrt() - 0.1386).abs() < 1e-4);
        assert_eq!(MetricSummary::of(&[2.0, 2.0, 2.0]).ci95, 0.0);
    }

    #[test]
    fn empty_summary_is_an_error() {
        assert!(matches!(summarize("x", &[]), Err(TcaError::EmptyRuns)));
    }

    #[test]
    fn episode_is_deterministic() {
        let env = EnvConfig::emdg_default();
        let cfg = ControllerConfig::emdg_default();
        let a = run_episode(&env, &AgentSpec::Tca, &cfg, 9, 4).unwrap();
        let b = run_episode(&env, &AgentSpec::Tca, &cfg, 9, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn episode_bookkeeping() {
        let env = EnvConfig::emdg_default();
        let cfg = ControllerConfig::emdg_default();
        for agent in [AgentSpec::Tca, AgentSpec::ReAct] {
            let e = run_episode(&env, &agent, &cfg, 1, 0).unwrap();
            let last = e.terminal();
            assert_eq!(last.action, STOP_LABEL);
            assert_eq!(last.step as usize, e.records.len() - 1);
            let h0 = (5f64).ln();
            assert!((e.total_info_gain() - (h0 - last.entropy)).abs() < 1e-9);
            assert!((last.resource - env.resource_at(last.t)).abs() < 1e-9);
            for w in e.records.windows(2) {
                assert!(w[1].t >= w[0].t);
                assert_eq!(w[1].entropy_prior, w[0].entropy);
            }
        }
    }

    #[test]
    fn padding_repeats_terminal_row() {
        let env = EnvConfig::emdg_default();
        let e = run_episode(&env, &AgentSpec::FixedK { k: 1 }, &ControllerConfig::emdg_default(), 2, 0)
            .unwrap();
        let padded = pad_trajectory(&e.records, PLOT_STEPS);
        assert_eq!(padded.len(), PLOT_STEPS);
        for r in &padded[e.records.len()..] {
            assert_eq!(r, e.terminal());
        }
        assert_eq!(pad_trajectory(&e.records, 1), e.records);
    }

    #[test]
    fn fixed_k_is_deterministic_in_time() {
        let env = EnvConfig::emdg_default();
        let runs = run_many(&env, &AgentSpec::FixedK { k: 3 }, &ControllerConfig::emdg_default(), 3, 20)
            .unwrap();
        let s = summarize("fixedk", &runs).unwrap();
        assert_eq!(s.metric(Metric::Time).mean, 135.0);
        assert_eq!(s.metric(Metric::Time).ci95, 0.0);
        assert_eq!(s.metric(Metric::Resource).ci95, 0.0);
        assert_eq!(s.step0_fraction(MRI_NETWORK), 1.0);
        assert_eq!(s.step0_fraction(HEMATOLOGY_LAB), 0.0);
    }

    #[test]
    fn horizon_cap_closes_episode() {
        let mut env = EnvConfig::emdg_default();
        env.horizon_cap = 2;
        let e = run_episode(&env, &AgentSpec::FixedK { k: 10 }, &ControllerConfig::emdg_default(), 4, 0)
            .unwrap();
        assert!(e.horizon_reached);
        assert_eq!(e.query_count(), 2);
        assert_eq!(e.terminal().action, STOP_LABEL);
    }

    #[test]
    fn sweep_cells() {
        let env = EnvConfig::emdg_default();
        let cfg = ControllerConfig::emdg_default();
        let count = |k| SweepSpec::new(k, env.clone(), cfg.clone()).cells().unwrap().len();
        assert_eq!(count(SweepKind::Sensitivity), 9);
        assert_eq!(count(SweepKind::Eta), 4);
        assert_eq!(count(SweepKind::Kappa), 6);
        assert_eq!(count(SweepKind::Ablation), 5);
        assert_eq!(count(SweepKind::Baselines), 4);
        let beta = SweepSpec::new(SweepKind::Beta, env.clone(), cfg.clone()).cells().unwrap();
        assert!(beta.iter().all(|c| c.env.beta == c.cfg.beta));
        let mut empty = SweepSpec::new(SweepKind::Alpha, env, cfg);
        empty.grid = Some(Vec::new());
        assert!(empty.cells().is_err());
    }

    #[test]
    fn kind_names_parse() {
        for k in SweepKind::ALL {
            assert_eq!(k.as_str().parse::<SweepKind>().unwrap(), k);
        }
        assert!("nope".parse::<SweepKind>().is_err());
    }
}
