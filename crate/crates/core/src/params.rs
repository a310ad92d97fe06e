//! `key=value` overrides applied on top of an environment and controller.
//!
//! | key                      | target                                  |
//! |--------------------------|-----------------------------------------|
//! | `alpha`                  | controller α                            |
//! | `beta`                   | environment decay and controller β      |
//! | `env_beta`               | environment decay only                  |
//! | `controller_beta`        | controller β only                       |
//! | `lambda_s`               | controller λ_S                          |
//! | `rollout_count`          | VOI rollouts K                          |
//! | `eta`                    | continuation weight                     |
//! | `voi_floor`              | greedy baseline VOI floor               |
//! | `use_stop` .. `use_live_congestion` | cost-term switches (`true`/`false`) |
//! | `kappa`                  | congestion drain rate                   |
//! | `horizon_cap`            | query cap per episode                   |
//! | `resource_initial`       | starting resource                       |
//! | `evidence_fidelity`      | realized-to-modelled sharpness ratio    |
//! | `observation_base`       | Dirichlet base concentration            |
//! | `tool.<name>.<field>`    | `tau`, `omega`, `sharpness`, `expected_gain` |

use std::str::FromStr;

use crate::controller::ControllerConfig;
use crate::environment::EnvConfig;
use crate::error::{Result, TcaError};

pub const KEYS: [&str; 17] = [
    "alpha",
    "beta",
    "env_beta",
    "controller_beta",
    "lambda_s",
    "rollout_count",
    "eta",
    "voi_floor",
    "use_stop",
    "use_space",
    "use_time",
    "use_live_congestion",
    "kappa",
    "horizon_cap",
    "resource_initial",
    "evidence_fidelity",
    "observation_base",
];

pub const TOOL_FIELDS: [&str; 4] = ["tau", "omega", "sharpness", "expected_gain"];

/// Splits `key=value`, trimming whitespace around both halves.
pub fn parse_override(text: &str) -> Result<(String, String)> {
    let Some((key, value)) = text.split_once('=') else {
        return Err(TcaError::InvalidParameter {
            key: text.trim().into(),
            reason: "expected key=value".into(),
        });
    };
    let key = key.trim();
    if key.is_empty() {
        return Err(TcaError::InvalidParameter {
            key: text.trim().into(),
            reason: "empty key".into(),
        });
    }
    Ok((key.into(), value.trim().into()))
}

fn value<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse().map_err(|_| TcaError::InvalidParameter {
        key: key.into(),
        reason: format!("cannot parse `{raw}` as {}", std::any::type_name::<T>()),
    })
}

/// Applies one override without validating the result.
pub fn apply_override(env: &mut EnvConfig, cfg: &mut ControllerConfig, key: &str, raw: &str) -> Result<()> {
    match key {
        "alpha" => cfg.alpha = value(key, raw)?,
        "beta" => {
            let beta: f64 = value(key, raw)?;
            env.beta = beta;
            cfg.beta = beta;
        }
        "env_beta" => env.beta = value(key, raw)?,
        "controller_beta" => cfg.beta = value(key, raw)?,
        "lambda_s" => cfg.lambda_s = value(key, raw)?,
        "rollout_count" => cfg.rollout_count = value(key, raw)?,
        "eta" => cfg.eta = value(key, raw)?,
        "voi_floor" => cfg.voi_floor = value(key, raw)?,
        "use_stop" => cfg.terms.use_stop = value(key, raw)?,
        "use_space" => cfg.terms.use_space = value(key, raw)?,
        "use_time" => cfg.terms.use_time = value(key, raw)?,
        "use_live_congestion" => cfg.terms.use_live_congestion = value(key, raw)?,
        "kappa" => env.kappa = value(key, raw)?,
        "horizon_cap" => env.horizon_cap = value(key, raw)?,
        "resource_initial" => env.resource_initial = value(key, raw)?,
        "evidence_fidelity" => env.evidence_fidelity = value(key, raw)?,
        "observation_base" => env.observation_base = value(key, raw)?,
        _ => return apply_tool_override(env, key, raw),
    }
    Ok(())
}

fn apply_tool_override(env: &mut EnvConfig, key: &str, raw: &str) -> Result<()> {
    let unknown = || TcaError::UnknownParameter(key.into());
    let rest = key.strip_prefix("tool.").ok_or_else(unknown)?;
    let (name, field) = rest.rsplit_once('.').ok_or_else(unknown)?;
    let i = env.tool_index(name).ok_or_else(unknown)?;
    let tool = &mut env.tools[i];
    match field {
        "tau" => tool.tau = value(key, raw)?,
        "omega" => tool.omega = value(key, raw)?,
        "sharpness" => tool.sharpness = value(key, raw)?,
        "expected_gain" => tool.expected_gain = value(key, raw)?,
        _ => return Err(unknown()),
    }
    Ok(())
}

/// Applies every `key=value` item in order, then validates both configs.
pub fn apply_overrides<S: AsRef<str>>(env: &mut EnvConfig, cfg: &mut ControllerConfig, items: &[S]) -> Result<()> {
    for item in items {
        let (key, raw) = parse_override(item.as_ref())?;
        apply_override(env, cfg, &key, &raw)?;
    }
    env.validate()?;
    cfg.validate()
}
