//! Calibration constants and the Monte Carlo oracles that produce them.
//!
//! Tool sharpness is set so that the mean one-step entropy reduction from a
//! uniform prior hits a target expected gain. The ReAct VOI floor is set so
//! that cost-blind greedy querying on EMDG runs for a target mean time.

use std::path::Path;
use std::sync::OnceLock;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::AgentSpec;
use crate::belief::{entropy_of, posterior_from_point, ObservationModel, DEFAULT_EPS};
use crate::controller::ControllerConfig;
use crate::environment::EnvConfig;
use crate::error::{Result, TcaError};
use crate::harness::run_episode;
use crate::rng::{stream_rng, Stream};

pub const DEFAULT_MASTER_SEED: u64 = 2025;
pub const GAIN_SAMPLES: usize = 20_000;
pub const FLOOR_SEEDS: usize = 200;
/// Target mean EMDG ReAct time the VOI floor is tuned to.
pub const REACT_TARGET_TIME: f64 = 114.5;
/// Target terminal NSTG ReAct integrity the VOI floor is tuned to.
pub const NSTG_REACT_TARGET_RESOURCE: f64 = 64.08;
/// Floor-tuning episodes start here, clear of evaluation indices.
pub const FLOOR_INDEX_OFFSET: u64 = 1_000_000;
pub const FLOOR_RANGE: (f64, f64) = (1e-6, 1.0);
const FLOOR_BISECTION_STEPS: usize = 24;

const SHARPNESS_CEILING: f64 = 64.0;
const BISECTION_STEPS: usize = 48;
const CURVE_STEP: f64 = 0.05;
const CURVE_MAX: f64 = 12.0;
const CURVE_SAMPLES: usize = 4_000;

// Output of `calibrate(&Calibration::shipped(), DEFAULT_MASTER_SEED)`.
const EMDG_FAST_SHARPNESS: f64 = 1.3628056139963292;
const EMDG_SLOW_SHARPNESS: f64 = 1.9296524591280786;
const EMDG_REACT_FLOOR: f64 = 0.03354749966315482;
const NSTG_FAST_SHARPNESS: f64 = 1.1526930683795626;
const NSTG_SLOW_SHARPNESS: f64 = 3.8064163655989205;
const NSTG_REACT_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolCalibration {
    pub omega: f64,
    pub sharpness: f64,
    pub expected_gain: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvCalibration {
    /// The low-latency tool.
    pub fast: ToolCalibration,
    /// The high-latency tool.
    pub slow: ToolCalibration,
    pub evidence_fidelity: f64,
    pub react_voi_floor: f64,
}

/// Everything the shipped environments read from calibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Calibration {
    pub master_seed: u64,
    pub base: f64,
    pub gain_samples: usize,
    pub floor_seeds: usize,
    pub emdg: EnvCalibration,
    pub nstg: EnvCalibration,
}

impl Calibration {
    /// Constants produced by `calibrate(DEFAULT_MASTER_SEED)`.
    pub fn shipped() -> Self {
        Self {
            master_seed: DEFAULT_MASTER_SEED,
            base: 1.0,
            gain_samples: GAIN_SAMPLES,
            floor_seeds: FLOOR_SEEDS,
            emdg: EnvCalibration {
                fast: ToolCalibration {
                    omega: 1.0,
                    sharpness: EMDG_FAST_SHARPNESS,
                    expected_gain: 0.50,
                },
                slow: ToolCalibration {
                    omega: 80.0,
                    sharpness: EMDG_SLOW_SHARPNESS,
                    expected_gain: 0.75,
                },
                evidence_fidelity: 2.0,
                react_voi_floor: EMDG_REACT_FLOOR,
            },
            nstg: EnvCalibration {
                fast: ToolCalibration {
                    omega: 3.0,
                    sharpness: NSTG_FAST_SHARPNESS,
                    expected_gain: 0.40,
                },
                slow: ToolCalibration {
                    omega: 70.0,
                    sharpness: NSTG_SLOW_SHARPNESS,
                    expected_gain: 1.30,
                },
                evidence_fidelity: 6.0,
                react_voi_floor: NSTG_REACT_FLOOR,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.base.is_finite() && self.base >= 1.0) {
            return Err(TcaError::Calibration(format!("base must be at least 1, got {}", self.base)));
        }
        for (name, env) in [("emdg", &self.emdg), ("nstg", &self.nstg)] {
            for tool in [&env.fast, &env.slow] {
                let ok = tool.omega.is_finite()
                    && tool.omega >= 0.0
                    && tool.sharpness.is_finite()
                    && tool.sharpness >= 0.0
                    && tool.expected_gain.is_finite()
                    && tool.expected_gain >= 0.0;
                if !ok {
                    return Err(TcaError::Calibration(format!("{name}: invalid tool entry {tool:?}")));
                }
            }
            if !(env.evidence_fidelity.is_finite() && env.evidence_fidelity > 0.0) {
                return Err(TcaError::Calibration(format!("{name}: evidence_fidelity must be positive")));
            }
            if !(env.react_voi_floor.is_finite() && env.react_voi_floor >= 0.0) {
                return Err(TcaError::Calibration(format!("{name}: react_voi_floor must be nonnegative")));
            }
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let cal: Self = serde_json::from_str(text)?;
        cal.validate()?;
        Ok(cal)
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
}

/// How closely a tuned ReAct floor reproduces its target time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloorFit {
    pub env: String,
    pub floor: f64,
    pub target_time: f64,
    pub achieved_time: f64,
    /// The target lies outside what the floor range can reach.
    pub clamped: bool,
}

/// Recomputes every sharpness and ReAct floor from `template`.
///
/// Ω, expected gains and fidelities are taken as given.
pub fn calibrate(template: &Calibration, master_seed: u64) -> Result<(Calibration, Vec<FloorFit>)> {
    template.validate()?;
    let mut cal = template.clone();
    cal.master_seed = master_seed;
    for env in [&mut cal.emdg, &mut cal.nstg] {
        for tool in [&mut env.fast, &mut env.slow] {
            tool.sharpness = sharpness_for_gain(tool.expected_gain, cal.base, 5, cal.gain_samples, master_seed)?;
        }
    }
    let nstg_beta = EnvConfig::nstg(&cal).beta;
    let nstg_time = -100.0 * (NSTG_REACT_TARGET_RESOURCE / 100.0).ln() / nstg_beta;
    let emdg = fit_floor(&EnvConfig::emdg(&cal), &ControllerConfig::emdg_default(), REACT_TARGET_TIME, master_seed, cal.floor_seeds)?;
    let nstg = fit_floor(&EnvConfig::nstg(&cal), &ControllerConfig::nstg_default(), nstg_time, master_seed, cal.floor_seeds)?;
    cal.emdg.react_voi_floor = emdg.floor;
    cal.nstg.react_voi_floor = nstg.floor;
    Ok((cal, vec![emdg, nstg]))
}

/// Mean ReAct episode time under `floor` on the floor-tuning indices.
pub fn react_mean_time(env: &EnvConfig, cfg: &ControllerConfig, floor: f64, master_seed: u64, seeds: usize) -> Result<f64> {
    let cfg = ControllerConfig { voi_floor: floor, ..cfg.clone() };
    let times = (0..seeds as u64)
        .into_par_iter()
        .map(|i| run_episode(env, &AgentSpec::ReAct, &cfg, master_seed, FLOOR_INDEX_OFFSET + i).map(|e| e.terminal().t))
        .collect::<Result<Vec<f64>>>()?;
    Ok(times.iter().sum::<f64>() / seeds.max(1) as f64)
}

/// Bisects `log10(floor)`; a higher floor halts ReAct sooner.
fn fit_floor(env: &EnvConfig, cfg: &ControllerConfig, target: f64, master_seed: u64, seeds: usize) -> Result<FloorFit> {
    let time = |log_floor: f64| react_mean_time(env, cfg, 10f64.powf(log_floor), master_seed, seeds);
    let (mut lo, mut hi) = (FLOOR_RANGE.0.log10(), FLOOR_RANGE.1.log10());
    let fit = |floor: f64, achieved: f64, clamped: bool| FloorFit {
        env: env.name.clone(),
        floor,
        target_time: target,
        achieved_time: achieved,
        clamped,
    };
    let longest = time(lo)?;
    if longest <= target {
        return Ok(fit(10f64.powf(lo), longest, true));
    }
    let shortest = time(hi)?;
    if shortest >= target {
        return Ok(fit(10f64.powf(hi), shortest, true));
    }
    for _ in 0..FLOOR_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if time(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (t_lo, t_hi) = (time(lo)?, time(hi)?);
    let (floor, achieved) = if (t_lo - target).abs() <= (t_hi - target).abs() { (lo, t_lo) } else { (hi, t_hi) };
    Ok(fit(10f64.powf(floor), achieved, false))
}

/// Mean of `H(u) - H(u')` over `samples` one-step updates of the uniform
/// prior `u` on `n` hypotheses.
///
/// By symmetry the generating hypothesis can be fixed at index 0.
pub fn mean_one_step_gain<R: Rng + ?Sized>(
    model: &ObservationModel,
    n: usize,
    samples: usize,
    rng: &mut R,
) -> Result<f64> {
    if n < 2 || samples == 0 {
        return Err(TcaError::Calibration(format!(
            "need at least 2 hypotheses and 1 sample, got {n} and {samples}"
        )));
    }
    let prior = vec![1.0 / n as f64; n];
    let h0 = entropy_of(&prior, DEFAULT_EPS);
    let mut total = 0.0;
    for _ in 0..samples {
        let point = model.sample_point(n, 0, rng);
        let post = posterior_from_point(&prior, &point, model)?;
        total += h0 - entropy_of(post.probs(), DEFAULT_EPS);
    }
    Ok(total / samples as f64)
}

/// Bisects the sharpness whose mean one-step gain equals `target`.
///
/// Every evaluation replays the same random stream, so the gain curve seen
/// by the bisection is a fixed function of sharpness.
pub fn sharpness_for_gain(target: f64, base: f64, n: usize, samples: usize, seed: u64) -> Result<f64> {
    let gain = |c: f64| -> Result<f64> {
        let model = ObservationModel::new(c, base)?;
        mean_one_step_gain(&model, n, samples, &mut stream_rng(seed, 0, Stream::Calibration))
    };
    let (mut lo, mut hi) = (0.0, SHARPNESS_CEILING);
    let top = gain(hi)?;
    if !(target > 0.0 && target < top) {
        return Err(TcaError::Calibration(format!(
            "target gain {target} not bracketed by [0, {top:.4}] over sharpness [0, {hi}]"
        )));
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if gain(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Tabulated sharpness-to-gain map, inverted by linear interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct GainCurve {
    sharpness: Vec<f64>,
    gain: Vec<f64>,
}

impl GainCurve {
    pub fn build(base: f64, n: usize, samples: usize, seed: u64) -> Result<Self> {
        let steps = (CURVE_MAX / CURVE_STEP).round() as usize;
        let mut sharpness = Vec::with_capacity(steps + 1);
        let mut gain = Vec::with_capacity(steps + 1);
        let mut running = 0.0f64;
        for i in 0..=steps {
            let c = i as f64 * CURVE_STEP;
            let model = ObservationModel::new(c, base)?;
            let g = mean_one_step_gain(&model, n, samples, &mut stream_rng(seed, 0, Stream::Calibration))?;
            // Keep the table monotone so the inverse is well defined.
            running = running.max(g);
            sharpness.push(c);
            gain.push(running);
        }
        Ok(Self { sharpness, gain })
    }

    /// Curve for the shipped base and five hypotheses, built once.
    pub fn shipped() -> &'static GainCurve {
        static CURVE: OnceLock<GainCurve> = OnceLock::new();
        CURVE.get_or_init(|| {
            GainCurve::build(Calibration::shipped().base, 5, CURVE_SAMPLES, DEFAULT_MASTER_SEED)
                .expect("shipped curve parameters are valid")
        })
    }

    pub fn max_gain(&self) -> f64 {
        *self.gain.last().expect("curve is nonempty")
    }

    pub fn gain_at(&self, sharpness: f64) -> f64 {
        interpolate(&self.sharpness, &self.gain, sharpness)
    }

    pub fn sharpness_for(&self, gain: f64) -> Result<f64> {
        if !(gain >= 0.0 && gain <= self.max_gain()) {
            return Err(TcaError::Calibration(format!(
                "gain {gain} outside tabulated range [0, {:.4}]",
                self.max_gain()
            )));
        }
        let i = self.gain.partition_point(|g| *g < gain);
        if i == 0 {
            return Ok(self.sharpness[0]);
        }
        let (g0, g1) = (self.gain[i - 1], self.gain[i]);
        let (c0, c1) = (self.sharpness[i - 1], self.sharpness[i]);
        Ok(c0 + (c1 - c0) * (gain - g0) / (g1 - g0))
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let i = xs.partition_point(|v| *v < x);
    if i >= xs.len() {
        return ys[ys.len() - 1];
    }
    let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    ys[i - 1] + t * (ys[i] - ys[i - 1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_sharpness_has_zero_gain() {
        let model = ObservationModel::new(0.0, 1.0).unwrap();
        let g = mean_one_step_gain(&model, 5, 100, &mut stream_rng(1, 0, Stream::Calibration)).unwrap();
        assert!(g.abs() < 1e-12);
    }

    #[test]
    fn bisection_hits_target() {
        let c = sharpness_for_gain(0.4, 1.0, 5, 4_000, 3).unwrap();
        let model = ObservationModel::new(c, 1.0).unwrap();
        let g = mean_one_step_gain(&model, 5, 4_000, &mut stream_rng(3, 0, Stream::Calibration)).unwrap();
        assert!((g - 0.4).abs() < 1e-6);
    }

    #[test]
    fn unbracketed_target_is_an_error() {
        assert!(sharpness_for_gain(1.7, 1.0, 5, 200, 3).is_err());
        assert!(sharpness_for_gain(0.0, 1.0, 5, 200, 3).is_err());
    }

    #[test]
    fn curve_round_trips() {
        let curve = GainCurve::shipped();
        for g in [0.2, 0.5, 0.9, 1.3, 1.5] {
            let c = curve.sharpness_for(g).unwrap();
            assert!((curve.gain_at(c) - g).abs() < 1e-9, "{g}");
        }
        assert!(curve.sharpness_for(2.0).is_err());
    }

    #[test]
    fn shipped_constants_are_reproducible() {
        let shipped = Calibration::shipped();
        let (cal, fits) = calibrate(&shipped, DEFAULT_MASTER_SEED).unwrap();
        assert_eq!(cal, shipped);
        assert!(!fits[0].clamped);
        assert!((fits[0].achieved_time - REACT_TARGET_TIME).abs() < 1.0);
    }

    #[test]
    fn json_round_trip() {
        let cal = Calibration::shipped();
        let back = Calibration::from_json_str(&cal.to_json_pretty().unwrap()).unwrap();
        assert_eq!(back, cal);
        assert!(Calibration::from_json_str("{\"base\": 1.0}").is_err());
    }
}
