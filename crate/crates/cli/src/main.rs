//! `tca`: run episodes, sweeps, reference reproductions and calibration.
//!
//! Exit codes: 0 success, 1 internal error, 2 usage error. `TCA_WORKERS`
//! sets the worker count.

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use tca_core::calibration::{calibrate, DEFAULT_MASTER_SEED};
use tca_core::harness::{
    format_summaries, gain_curve_for, run_cells, scaled_config, write_json, write_summaries_csv,
    write_terminals_csv, write_trajectories_csv, Cell, CellResult, SweepKind, SweepSpec, DEFAULT_SEEDS, PLOT_STEPS,
};
use tca_core::params::apply_overrides;
use tca_core::reproduce::{file_label, reproduce, Setup, TableId};
use tca_core::{AgentSpec, Calibration, ControllerConfig, EnvConfig, TcaError};

const WORKERS_VAR: &str = "TCA_WORKERS";

#[derive(Parser)]
#[command(name = "tca", version, about = "Cost-aware information acquisition experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one agent on one environment.
    Run(RunArgs),
    /// Run a parameter sweep, an ablation set or the baseline grid.
    Sweep(SweepArgs),
    /// Run a reference experiment and report computed against reference values.
    Reproduce(ReproduceArgs),
    /// Recompute tool sharpness and ReAct floors and write a calibration file.
    Calibrate(CalibrateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum EnvKind {
    Emdg,
    Nstg,
    /// A randomized catalog from the action-scaling study.
    Scaled,
}

#[derive(Args)]
struct Common {
    /// Episodes per cell.
    #[arg(long, default_value_t = DEFAULT_SEEDS)]
    seeds: usize,
    #[arg(long, default_value_t = DEFAULT_MASTER_SEED)]
    master_seed: u64,
    /// Calibration file replacing the shipped constants.
    #[arg(long)]
    calibration: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "emdg")]
    env: EnvKind,
    /// tca, react, ent[:tau_h], fixedk[:k] or ablation:<nostop|nospace|notime|nocongestion>.
    #[arg(long, default_value = "tca")]
    agent: String,
    /// Environment JSON replacing the named environment.
    #[arg(long)]
    env_config: Option<PathBuf>,
    /// Controller JSON replacing the environment's default controller.
    #[arg(long)]
    controller_config: Option<PathBuf>,
    /// Catalog size for `--env scaled`.
    #[arg(long, default_value_t = 5)]
    actions: usize,
    /// Catalog index for `--env scaled`.
    #[arg(long, default_value_t = 0)]
    catalog: u64,
    /// Parameter override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Replay a manifest written by an earlier run; other options are ignored.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// alpha, beta, lambda_s, sensitivity, eta, kappa, ablation or baselines.
    #[arg(long, default_value = "sensitivity")]
    kind: String,
    #[arg(long, value_enum, default_value = "emdg")]
    env: EnvKind,
    /// Comma-separated grid replacing the default one.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    /// Sweep JSON; replaces every other sweep option.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Parameter override applied to every grid point, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Replay a manifest written by an earlier sweep.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct ReproduceArgs {
    #[command(flatten)]
    common: Common,
    /// table1, table2, table3, table5, table6, fig2, sensitivity, eta or all.
    table: String,
    /// Replay a manifest written by an earlier reproduce run.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long, default_value_t = DEFAULT_MASTER_SEED)]
    master_seed: u64,
    /// Calibration whose Ω, gains and fidelities are kept.
    #[arg(long)]
    template: Option<PathBuf>,
    #[arg(long, default_value = "calibration.json")]
    out: PathBuf,
}

/// Resolved inputs of one invocation; enough to replay it exactly.
#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
enum Manifest {
    Run {
        version: String,
        calibration: Calibration,
        overrides: Vec<String>,
        master_seed: u64,
        seeds: usize,
        agent: AgentSpec,
        env: EnvConfig,
        controller: ControllerConfig,
    },
    Sweep {
        version: String,
        calibration: Calibration,
        overrides: Vec<String>,
        spec: SweepSpec,
    },
    Reproduce {
        version: String,
        calibration: Calibration,
        tables: Vec<TableId>,
        setup: Setup,
    },
}

/// An invalid invocation, reported with exit code 2.
#[derive(Debug)]
struct Usage(String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<Usage>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<TcaError>() {
            return match e {
                TcaError::UnknownParameter(_)
                | TcaError::InvalidParameter { .. }
                | TcaError::InvalidAgent(_)
                | TcaError::InvalidEnvConfig(_)
                | TcaError::InvalidControllerConfig(_)
                | TcaError::EmptyRuns
                | TcaError::Json(_) => 2,
                _ => 1,
            };
        }
    }
    1
}

fn version() -> String {
    format!("tca {}", env!("CARGO_PKG_VERSION"))
}

fn read_user_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn load_calibration(path: Option<&Path>) -> Result<Calibration> {
    match path {
        None => Ok(Calibration::shipped()),
        Some(p) => Calibration::from_json_str(&read_user_file(p)?)
            .map_err(|e| usage(format!("{}: {e}", p.display()))),
    }
}

fn check_seeds(seeds: usize) -> Result<()> {
    if seeds == 0 {
        return Err(usage("--seeds must be at least 1"));
    }
    Ok(())
}

fn named_env(kind: EnvKind, cal: &Calibration) -> (EnvConfig, ControllerConfig) {
    match kind {
        EnvKind::Emdg | EnvKind::Scaled => (
            EnvConfig::emdg(cal),
            ControllerConfig {
                voi_floor: cal.emdg.react_voi_floor,
                ..ControllerConfig::emdg_default()
            },
        ),
        EnvKind::Nstg => (
            EnvConfig::nstg(cal),
            ControllerConfig {
                voi_floor: cal.nstg.react_voi_floor,
                ..ControllerConfig::nstg_default()
            },
        ),
    }
}

fn read_manifest(path: &Path) -> Result<Manifest> {
    serde_json::from_str(&read_user_file(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write_cells(out_dir: &Path, experiment: &str, results: &[CellResult]) -> Result<()> {
    let summaries: Vec<_> = results.iter().map(|r| r.summary.clone()).collect();
    write_summaries_csv(out_dir.join(format!("{experiment}_summary.csv")), &summaries)?;
    write_json(out_dir.join(format!("{experiment}_summary.json")), &summaries)?;
    for r in results {
        let cell = file_label(&r.cell.label);
        write_terminals_csv(out_dir.join(format!("{experiment}_{cell}.csv")), &r.summary)?;
        write_trajectories_csv(
            out_dir.join(format!("{experiment}_{cell}_trajectories.csv")),
            &r.episodes,
            PLOT_STEPS,
        )?;
    }
    print!("{}", format_summaries(&summaries));
    Ok(())
}

fn create_out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let manifest = match &args.manifest {
        Some(path) => match read_manifest(path)? {
            m @ Manifest::Run { .. } => m,
            _ => return Err(usage(format!("{} is not a run manifest", path.display()))),
        },
        None => {
            let c = &args.common;
            check_seeds(c.seeds)?;
            let calibration = load_calibration(c.calibration.as_deref())?;
            let agent: AgentSpec = args.agent.parse()?;
            agent.validate()?;
            let (mut env, mut controller) = named_env(args.env, &calibration);
            if let EnvKind::Scaled = args.env {
                if args.actions < 2 {
                    return Err(usage("--actions must be at least 2"));
                }
                let curve = gain_curve_for(&env, c.master_seed)?;
                env = scaled_config(&env, &curve, args.actions, args.catalog, c.master_seed)?;
            }
            if let Some(p) = &args.env_config {
                env = EnvConfig::from_json_str(&read_user_file(p)?)?;
            }
            if let Some(p) = &args.controller_config {
                controller = ControllerConfig::from_json_str(&read_user_file(p)?)?;
            }
            apply_overrides(&mut env, &mut controller, &args.overrides)?;
            Manifest::Run {
                version: version(),
                calibration,
                overrides: args.overrides.clone(),
                master_seed: c.master_seed,
                seeds: c.seeds,
                agent,
                env,
                controller,
            }
        }
    };
    let Manifest::Run {
        master_seed,
        seeds,
        agent,
        env,
        controller,
        ..
    } = &manifest
    else {
        unreachable!("resolved as a run manifest");
    };
    check_seeds(*seeds)?;
    let out_dir = &args.common.out_dir;
    create_out_dir(out_dir)?;
    let experiment = env.name.clone();
    write_json(out_dir.join(format!("{experiment}_manifest.json")), &manifest)?;
    let cell = Cell {
        label: agent.to_string(),
        env: env.clone(),
        agent: *agent,
        cfg: controller.clone(),
    };
    let results = run_cells(&[cell], *master_seed, *seeds)?;
    write_cells(out_dir, &experiment, &results)
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let manifest = match &args.manifest {
        Some(path) => match read_manifest(path)? {
            m @ Manifest::Sweep { .. } => m,
            _ => return Err(usage(format!("{} is not a sweep manifest", path.display()))),
        },
        None => {
            let c = &args.common;
            let calibration = load_calibration(c.calibration.as_deref())?;
            let mut spec = match &args.spec {
                Some(p) => serde_json::from_str::<SweepSpec>(&read_user_file(p)?)
                    .map_err(|e| usage(format!("{}: {e}", p.display())))?,
                None => {
                    let kind: SweepKind = args.kind.parse()?;
                    let (env, cfg) = named_env(args.env, &calibration);
                    SweepSpec {
                        seeds: c.seeds,
                        master_seed: c.master_seed,
                        grid: args.grid.clone(),
                        ..SweepSpec::new(kind, env, cfg)
                    }
                }
            };
            apply_overrides(&mut spec.env, &mut spec.cfg, &args.overrides)?;
            Manifest::Sweep {
                version: version(),
                calibration,
                overrides: args.overrides.clone(),
                spec,
            }
        }
    };
    let Manifest::Sweep { spec, .. } = &manifest else {
        unreachable!("resolved as a sweep manifest");
    };
    check_seeds(spec.seeds)?;
    let cells = spec.cells()?;
    let out_dir = &args.common.out_dir;
    create_out_dir(out_dir)?;
    let experiment = format!("sweep-{}", spec.kind.as_str());
    write_json(out_dir.join(format!("{experiment}_manifest.json")), &manifest)?;
    let results = run_cells(&cells, spec.master_seed, spec.seeds)?;
    write_cells(out_dir, &experiment, &results)
}

fn cmd_reproduce(args: ReproduceArgs) -> Result<()> {
    let manifest = match &args.manifest {
        Some(path) => match read_manifest(path)? {
            m @ Manifest::Reproduce { .. } => m,
            _ => return Err(usage(format!("{} is not a reproduce manifest", path.display()))),
        },
        None => {
            let c = &args.common;
            let calibration = load_calibration(c.calibration.as_deref())?;
            let tables = if args.table == "all" {
                TableId::ALL.to_vec()
            } else {
                vec![args.table.parse()?]
            };
            let (emdg, emdg_cfg) = named_env(EnvKind::Emdg, &calibration);
            let (nstg, nstg_cfg) = named_env(EnvKind::Nstg, &calibration);
            Manifest::Reproduce {
                version: version(),
                calibration,
                tables,
                setup: Setup {
                    emdg,
                    emdg_cfg,
                    nstg,
                    nstg_cfg,
                    master_seed: c.master_seed,
                    seeds: c.seeds,
                    ..Setup::default()
                },
            }
        }
    };
    let Manifest::Reproduce { tables, setup, .. } = &manifest else {
        unreachable!("resolved as a reproduce manifest");
    };
    check_seeds(setup.seeds)?;
    let out_dir = &args.common.out_dir;
    create_out_dir(out_dir)?;
    let name = match tables.as_slice() {
        [one] => one.as_str().to_string(),
        _ => "all".into(),
    };
    write_json(out_dir.join(format!("{name}_manifest.json")), &manifest)?;
    for &table in tables {
        let report = reproduce(table, setup)?;
        report.write(out_dir)?;
        println!("{}", report.format());
    }
    Ok(())
}

fn cmd_calibrate(args: CalibrateArgs) -> Result<()> {
    let template = load_calibration(args.template.as_deref())?;
    let (cal, fits) = calibrate(&template, args.master_seed)?;
    for f in &fits {
        println!(
            "{}: react_voi_floor {:.6e}, mean time {:.3} against target {:.3}{}",
            f.env,
            f.floor,
            f.achieved_time,
            f.target_time,
            if f.clamped { " (target out of reach, floor clamped)" } else { "" }
        );
    }
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_out_dir(parent)?;
    }
    cal.save(&args.out)?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn configure_workers() -> Result<()> {
    let Ok(raw) = std::env::var(WORKERS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| usage(format!("{WORKERS_VAR} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring the worker pool")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_workers().and_then(|()| match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Reproduce(a) => cmd_reproduce(a),
        Command::Calibrate(a) => cmd_calibrate(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
