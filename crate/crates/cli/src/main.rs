//! `p2a`: batch front end for the scheduling engine.
//!
//! Exit codes: 0 on success, 1 when a solve (or verification) fails, 2 on
//! usage errors such as unknown flags, unreadable inputs or bad values.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod check;
mod manifest;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use manifest::{Manifest, UsageError};
use p2a_core::harness::{self, ProfileSpec, RollingMode, SweepAxis};
use p2a_core::igdt::{self, IgdtKind};
use p2a_core::milp::{SolveStatus, SolverConfig, DEFAULT_BINARY_LIMIT};
use p2a_core::params::{self, PlantParams};
use p2a_core::sched::{effective_params, verify_schedule, BuildOptions, ScenarioProfile, Schedule, SolverChoice, StorageScheme};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "p2a", version, about = "Flexible power-to-ammonia scheduling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one scenario under one storage scheme.
    Solve(SolveArgs),
    /// Re-check a schedule CSV against the plant model.
    Verify(VerifyArgs),
    /// Solve one scenario under several schemes.
    Compare(CompareArgs),
    /// Two-axis storage sizing sweep.
    Sweep(SweepArgs),
    /// Robust and opportunistic renewable-uncertainty programs.
    Igdt(IgdtArgs),
    /// Solve a long profile as consecutive windows.
    Rolling(RollingArgs),
    /// Reactor capacitance and loss resistances from a geometry file.
    EstimateParams(EstimateArgs),
    /// Write a synthetic wind/PV scenario.
    GenProfile(GenArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Plant configuration (TOML); defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Solver command template with {lp} and {sol} placeholders; $P2A_SOLVER
    /// or the bundled HiGHS adapter when omitted.
    #[arg(long)]
    solver: Option<String>,
    /// Force the bundled solver.
    #[arg(long)]
    tiny: bool,
    /// Solver time limit, s.
    #[arg(long, default_value_t = 600.0)]
    time_limit: f64,
    /// Relative MIP gap for the external solver.
    #[arg(long, default_value_t = 1e-6)]
    gap: f64,
    /// Validate every written file against its schema.
    #[arg(long)]
    self_check: bool,
}

#[derive(Args, Debug, Clone)]
struct ScenarioArgs {
    /// Scenario CSV (step,wind_W,pv_W) with optional TOML sidecar.
    #[arg(long)]
    scenario: PathBuf,
    /// Override the step length, s.
    #[arg(long)]
    dt: Option<f64>,
    /// Use only the first N steps.
    #[arg(long)]
    horizon: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// Penalise squared temperature deviation (external solver must accept QP).
    #[arg(long)]
    quadratic: bool,
    /// Drop the cyclic closure of HS and BES levels.
    #[arg(long)]
    no_cyclic: bool,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Storage scheme (scheme1..scheme5, bare).
    #[arg(long, default_value = "scheme5")]
    scheme: String,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Schedule CSV to check.
    #[arg(long)]
    schedule: PathBuf,
    /// Scenario, for its ambient temperature and renewable series.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long, default_value = "scheme5")]
    scheme: String,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Schemes to compare (repeatable); all five numbered schemes by default.
    #[arg(long)]
    scheme: Vec<String>,
    /// Concurrent solver processes.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value = "scheme5")]
    scheme: String,
    /// First axis: bes_energy (J), hs_capacity (Nm³) or ms_volume (m³).
    #[arg(long)]
    x_axis: String,
    /// Comma-separated values along the first axis.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    x_grid: Vec<f64>,
    #[arg(long)]
    y_axis: String,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    y_grid: Vec<f64>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum KindArg {
    Robust,
    Opportunistic,
    Both,
}

#[derive(Args, Debug)]
struct IgdtArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value = "scheme5")]
    scheme: String,
    #[arg(long, value_enum, default_value = "both")]
    kind: KindArg,
    /// Comma-separated deviation factors, ascending.
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = vec![0.0, 0.05, 0.1, 0.2, 0.3])]
    beta: Vec<f64>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum ModeArg {
    Chained,
    Reset,
}

#[derive(Args, Debug)]
struct RollingArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    scheme: Vec<String>,
    /// Steps per window.
    #[arg(long, default_value_t = 360)]
    window: usize,
    #[arg(long, value_enum, default_value = "chained")]
    mode: ModeArg,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    /// Geometry TOML with an [asr] table and an optional [ms_tank] table.
    #[arg(long)]
    geometry: PathBuf,
    /// Also write estimate.json and manifest.json here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Generator settings (TOML); built-in defaults when omitted.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Number of steps.
    #[arg(long)]
    horizon: Option<usize>,
    /// Step length, s.
    #[arg(long)]
    dt: Option<f64>,
    /// Zero-renewable window START:END in steps, END exclusive (repeatable).
    #[arg(long)]
    lull: Vec<String>,
    /// Scenario name; the files are <out>/<name>.csv and .toml.
    #[arg(long, default_value = "profile")]
    name: String,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    self_check: bool,
}

/// Inputs shared by the solving subcommands.
struct Setup {
    params: PlantParams,
    solver: SolverChoice,
    solver_label: String,
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

fn load_params(path: Option<&Path>) -> Result<PlantParams> {
    match path {
        Some(p) => params::load_config(p).map_err(|e| usage(format!("config {}: {e}", p.display()))),
        None => Ok(PlantParams::default()),
    }
}

fn setup(common: &Common) -> Result<Setup> {
    let params = load_params(common.config.as_deref())?;
    if !(common.time_limit > 0.0) || !(common.gap >= 0.0) {
        return Err(usage("time limit must be positive and gap non-negative"));
    }
    let (solver, solver_label) = if common.tiny {
        (SolverChoice::Tiny { binary_limit: DEFAULT_BINARY_LIMIT }, "bundled".to_string())
    } else {
        let mut cfg = SolverConfig { time_limit: common.time_limit, mip_gap: common.gap, ..Default::default() };
        if let Some(cmd) = &common.solver {
            if !cmd.contains("{lp}") || !cmd.contains("{sol}") {
                return Err(usage("solver command needs {lp} and {sol} placeholders"));
            }
            cfg.command = cmd.clone();
        }
        let label = cfg.command.clone();
        (SolverChoice::External(cfg), label)
    };
    Ok(Setup { params, solver, solver_label })
}

fn load_scenario(args: &ScenarioArgs, params: &PlantParams) -> Result<ScenarioProfile> {
    let mut s = ScenarioProfile::load(&args.scenario, params)
        .map_err(|e| usage(format!("scenario {}: {e}", args.scenario.display())))?;
    if let Some(dt) = args.dt {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(usage("--dt must be positive"));
        }
        s.dt = dt;
    }
    if let Some(h) = args.horizon {
        if h == 0 || h > s.horizon_steps() {
            return Err(usage(format!("--horizon must lie in 1..={}", s.horizon_steps())));
        }
        s = s.truncated(h);
    }
    Ok(s)
}

fn scheme(name: &str) -> Result<StorageScheme> {
    StorageScheme::by_name(name).ok_or_else(|| usage(format!("unknown scheme '{name}'")))
}

fn schemes(names: &[String]) -> Result<Vec<StorageScheme>> {
    if names.is_empty() {
        return Ok(StorageScheme::all_numbered());
    }
    names.iter().map(|n| scheme(n)).collect()
}

fn build_options(m: &ModelArgs) -> BuildOptions {
    BuildOptions { cyclic_storage: !m.no_cyclic, quadratic_penalty: m.quadratic, ..Default::default() }
}

fn workers(w: Option<usize>) -> usize {
    w.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)).max(1)
}

fn scenario_inputs(args: &ScenarioArgs) -> Vec<PathBuf> {
    vec![args.scenario.clone(), p2a_core::sched::sidecar_path(&args.scenario)]
}

fn write(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn solved_ok(status: Option<SolveStatus>) -> bool {
    matches!(status, Some(SolveStatus::Optimal) | Some(SolveStatus::Limit))
}

fn cmd_solve(a: &SolveArgs, m: &mut Manifest) -> Result<()> {
    let su = setup(&a.common)?;
    let sc = load_scenario(&a.scenario, &su.params)?;
    let scheme = scheme(&a.scheme)?;
    let opts = build_options(&a.model);
    m.record_inputs(a.common.config.iter().cloned().chain(scenario_inputs(&a.scenario)))?;
    m.solver_command = su.solver_label.clone();
    m.scenario_path = Some(a.scenario.scenario.clone());
    m.config_path = a.common.config.clone();

    let run = harness::run_one(&sc, &su.params, &scheme, &opts, &su.solver);
    m.status = run.status.map(|s| s.to_string()).unwrap_or_else(|| "error".into());
    let dir = &a.common.out;
    if let Some(schedule) = &run.schedule {
        let eff = effective_params(&sc, &su.params, &scheme)?;
        m.outputs.push(write(dir, "schedule.csv", &schedule.to_csv())?);
        m.outputs.push(write(dir, "breakdown.json", &to_json(&schedule.breakdown(&eff, opts.quadratic_penalty))?)?);
    }
    if let Some(v) = &run.verify {
        m.outputs.push(write(dir, "verify.json", &to_json(v)?)?);
    }
    m.outputs.push(write(dir, "metrics.csv", &harness::comparison_csv(std::slice::from_ref(&run)))?);
    if let Some(e) = &run.error {
        return Err(anyhow!("{}: {e}", scheme.name));
    }
    if !solved_ok(run.status) {
        return Err(anyhow!("{}: solve ended {}", scheme.name, m.status));
    }
    Ok(())
}

fn cmd_verify(a: &VerifyArgs, m: &mut Manifest) -> Result<()> {
    let base = load_params(a.common.config.as_deref())?;
    let scheme = scheme(&a.scheme)?;
    let text = std::fs::read_to_string(&a.schedule)
        .map_err(|e| usage(format!("schedule {}: {e}", a.schedule.display())))?;
    let schedule = Schedule::from_csv(&text).map_err(|e| usage(format!("schedule {}: {e}", a.schedule.display())))?;
    let mut inputs = vec![a.schedule.clone()];
    inputs.extend(a.common.config.iter().cloned());
    let params = match &a.scenario {
        Some(p) => {
            let sc = ScenarioProfile::load(p, &base).map_err(|e| usage(format!("scenario {}: {e}", p.display())))?;
            inputs.push(p.clone());
            m.scenario_path = Some(p.clone());
            effective_params(&sc, &base, &scheme)?
        }
        None => scheme.apply(&base)?,
    };
    m.record_inputs(inputs)?;
    m.config_path = a.common.config.clone();
    let report = verify_schedule(&schedule, &params);
    m.outputs.push(write(&a.common.out, "verify.json", &to_json(&report)?)?);
    m.status = if report.is_clean() { "clean" } else { "flagged" }.into();
    if !report.is_clean() {
        return Err(anyhow!(
            "schedule failed verification: {} flagged residuals{}",
            report.flagged.len(),
            report.replay_error.as_deref().map(|e| format!(", replay: {e}")).unwrap_or_default()
        ));
    }
    Ok(())
}

fn cmd_compare(a: &CompareArgs, m: &mut Manifest) -> Result<()> {
    let su = setup(&a.common)?;
    let sc = load_scenario(&a.scenario, &su.params)?;
    let list = schemes(&a.scheme)?;
    m.record_inputs(a.common.config.iter().cloned().chain(scenario_inputs(&a.scenario)))?;
    m.solver_command = su.solver_label.clone();
    m.scenario_path = Some(a.scenario.scenario.clone());
    m.config_path = a.common.config.clone();
    let runs = harness::run_scheme_comparison(&sc, &su.params, &list, &build_options(&a.model), &su.solver, workers(a.workers))?;
    let dir = &a.common.out;
    m.outputs.push(write(dir, "metrics.csv", &harness::comparison_csv(&runs))?);
    let verify: std::collections::BTreeMap<&str, _> =
        runs.iter().filter_map(|r| r.verify.as_ref().map(|v| (r.scheme.as_str(), v))).collect();
    m.outputs.push(write(dir, "verify.json", &to_json(&verify)?)?);
    for r in &runs {
        if let Some(s) = &r.schedule {
            m.outputs.push(write(dir, &format!("schedule_{}.csv", r.scheme), &s.to_csv())?);
        }
    }
    let failed: Vec<&str> = runs.iter().filter(|r| !solved_ok(r.status)).map(|r| r.scheme.as_str()).collect();
    m.status = if failed.is_empty() { "optimal".into() } else { format!("failed:{}", failed.join("+")) };
    if !failed.is_empty() {
        return Err(anyhow!("schemes without a schedule: {}", failed.join(", ")));
    }
    Ok(())
}

fn axis(name: &str) -> Result<SweepAxis> {
    SweepAxis::parse(name).ok_or_else(|| usage(format!("unknown sweep axis '{name}'")))
}

fn cmd_sweep(a: &SweepArgs, m: &mut Manifest) -> Result<()> {
    let su = setup(&a.common)?;
    let sc = load_scenario(&a.scenario, &su.params)?;
    let base = scheme(&a.scheme)?;
    let axes = (axis(&a.x_axis)?, axis(&a.y_axis)?);
    m.record_inputs(a.common.config.iter().cloned().chain(scenario_inputs(&a.scenario)))?;
    m.solver_command = su.solver_label.clone();
    m.scenario_path = Some(a.scenario.scenario.clone());
    m.config_path = a.common.config.clone();
    let result = harness::sensitivity_sweep(
        &sc,
        &su.params,
        &base,
        axes,
        (&a.x_grid, &a.y_grid),
        &build_options(&a.model),
        &su.solver,
        workers(a.workers),
    )
    .map_err(|e| match e {
        harness::HarnessError::InvalidGrid(msg) => usage(msg),
        other => other.into(),
    })?;
    m.outputs.push(write(&a.common.out, "sweep.csv", &result.to_csv())?);
    let failed = result.cells.iter().filter(|c| !solved_ok(c.run.status)).count();
    m.status = if failed == 0 { "optimal".into() } else { format!("failed_cells:{failed}") };
    if failed > 0 {
        return Err(anyhow!("{failed} of {} sweep cells have no schedule", result.cells.len()));
    }
    Ok(())
}

fn cmd_igdt(a: &IgdtArgs, m: &mut Manifest) -> Result<()> {
    let su = setup(&a.common)?;
    let sc = load_scenario(&a.scenario, &su.params)?;
    let scheme = scheme(&a.scheme)?;
    let opts = build_options(&a.model);
    if a.beta.windows(2).any(|w| w[1] < w[0]) || a.beta.iter().any(|b| !(*b >= 0.0)) {
        return Err(usage("--beta values must be non-negative and ascending"));
    }
    m.record_inputs(a.common.config.iter().cloned().chain(scenario_inputs(&a.scenario)))?;
    m.solver_command = su.solver_label.clone();
    m.scenario_path = Some(a.scenario.scenario.clone());
    m.config_path = a.common.config.clone();
    let baseline = igdt::baseline_revenue(&sc, &su.params, &scheme, &opts, &su.solver)?;
    let kinds: &[IgdtKind] = match a.kind {
        KindArg::Robust => &[IgdtKind::Robust],
        KindArg::Opportunistic => &[IgdtKind::Opportunistic],
        KindArg::Both => &[IgdtKind::Robust, IgdtKind::Opportunistic],
    };
    let mut curves = Vec::new();
    for &k in kinds {
        let c = igdt::sweep(k, &a.beta, &sc, &su.params, &scheme, baseline, &opts, &su.solver, workers(a.workers))?;
        m.outputs.push(write(&a.common.out, &format!("igdt_{}.csv", k.as_str()), &c.to_csv())?);
        curves.push(c.without_schedules());
    }
    m.outputs.push(write(&a.common.out, "igdt.json", &to_json(&curves)?)?);
    m.status = "done".into();
    Ok(())
}

fn cmd_rolling(a: &RollingArgs, m: &mut Manifest) -> Result<()> {
    let su = setup(&a.common)?;
    let sc = load_scenario(&a.scenario, &su.params)?;
    let list = schemes(&a.scheme)?;
    if a.window == 0 || a.window > sc.horizon_steps() {
        return Err(usage(format!("--window must lie in 1..={}", sc.horizon_steps())));
    }
    m.record_inputs(a.common.config.iter().cloned().chain(scenario_inputs(&a.scenario)))?;
    m.solver_command = su.solver_label.clone();
    m.scenario_path = Some(a.scenario.scenario.clone());
    m.config_path = a.common.config.clone();
    let mode = match a.mode {
        ModeArg::Chained => RollingMode::Chained,
        ModeArg::Reset => RollingMode::Reset,
    };
    let result = harness::run_rolling(&sc, a.window, &su.params, &list, mode, &build_options(&a.model), &su.solver, workers(a.workers))?;
    m.outputs.push(write(&a.common.out, "rolling.csv", &result.to_csv())?);
    m.outputs.push(write(&a.common.out, "rolling_totals.json", &to_json(&result.totals)?)?);
    let failed = result.rows.iter().filter(|r| !solved_ok(r.run.status)).count();
    m.status = if failed == 0 { "optimal".into() } else { format!("failed_windows:{failed}") };
    if failed > 0 {
        return Err(anyhow!("{failed} of {} windows have no schedule", result.rows.len()));
    }
    Ok(())
}

fn cmd_estimate(a: &EstimateArgs, m: &mut Manifest) -> Result<()> {
    let g = params::load_geometry(&a.geometry).map_err(|e| usage(format!("geometry {}: {e}", a.geometry.display())))?;
    m.record_inputs([a.geometry.clone()])?;
    let c = params::estimate_capacitance(&g.asr)?;
    let r_asr = params::estimate_loss_resistance(&g.asr.walls)?;
    let r_ms = g.ms_tank.as_ref().map(params::estimate_loss_resistance).transpose()?;
    println!("asr_capacitance_J_per_K = {c}");
    println!("asr_loss_resistance_K_per_W = {r_asr:.6}");
    if let Some(r) = r_ms {
        println!("ms_loss_resistance_K_per_W = {r:.6}");
    }
    if let Some(dir) = &a.out {
        let v = serde_json::json!({
            "asr_capacitance_J_per_K": c,
            "asr_loss_resistance_K_per_W": r_asr,
            "ms_loss_resistance_K_per_W": r_ms,
        });
        m.outputs.push(write(dir, "estimate.json", &to_json(&v)?)?);
    }
    m.status = "done".into();
    Ok(())
}

fn parse_lull(s: &str) -> Result<(usize, usize)> {
    let (a, b) = s.split_once(':').ok_or_else(|| usage(format!("lull '{s}' is not START:END")))?;
    let a = a.trim().parse().map_err(|_| usage(format!("lull '{s}': bad start")))?;
    let b = b.trim().parse().map_err(|_| usage(format!("lull '{s}': bad end")))?;
    Ok((a, b))
}

fn cmd_gen(a: &GenArgs, m: &mut Manifest) -> Result<()> {
    let params = load_params(a.config.as_deref())?;
    let mut spec = match &a.spec {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| usage(format!("spec {}: {e}", p.display())))?;
            toml::from_str::<ProfileSpec>(&text).map_err(|e| usage(format!("spec {}: {e}", p.display())))?
        }
        None => ProfileSpec::default(),
    };
    if let Some(h) = a.horizon {
        spec.steps = h;
    }
    if let Some(dt) = a.dt {
        spec.dt = dt;
    }
    for l in &a.lull {
        spec.lulls.push(parse_lull(l)?);
    }
    m.record_inputs(a.spec.iter().chain(a.config.iter()).cloned())?;
    m.seed = Some(a.seed);
    m.config_path = a.config.clone();
    let (wind, pv) = spec.generate(a.seed).map_err(|e| usage(e.to_string()))?;
    let sc = ScenarioProfile::new(&a.name, spec.dt, wind, pv, &params);
    let path = a.out.join(format!("{}.csv", a.name));
    sc.save(&path)?;
    m.outputs.push(path);
    m.outputs.push(p2a_core::sched::sidecar_path(&a.out.join(format!("{}.csv", a.name))));
    m.status = "done".into();
    Ok(())
}

fn run(cli: &Cli, m: &mut Manifest) -> Result<()> {
    let out = match &cli.command {
        Command::Solve(a) => Some(&a.common.out),
        Command::Verify(a) => Some(&a.common.out),
        Command::Compare(a) => Some(&a.common.out),
        Command::Sweep(a) => Some(&a.common.out),
        Command::Igdt(a) => Some(&a.common.out),
        Command::Rolling(a) => Some(&a.common.out),
        Command::EstimateParams(a) => a.out.as_ref(),
        Command::GenProfile(a) => Some(&a.out),
    };
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| usage(format!("output directory {}: {e}", dir.display())))?;
        m.output_dir = Some(dir.clone());
    }
    match &cli.command {
        Command::Solve(a) => cmd_solve(a, m),
        Command::Verify(a) => cmd_verify(a, m),
        Command::Compare(a) => cmd_compare(a, m),
        Command::Sweep(a) => cmd_sweep(a, m),
        Command::Igdt(a) => cmd_igdt(a, m),
        Command::Rolling(a) => cmd_rolling(a, m),
        Command::EstimateParams(a) => cmd_estimate(a, m),
        Command::GenProfile(a) => cmd_gen(a, m),
    }
}

fn self_check_requested(cli: &Cli) -> bool {
    match &cli.command {
        Command::Solve(a) => a.common.self_check,
        Command::Verify(a) => a.common.self_check,
        Command::Compare(a) => a.common.self_check,
        Command::Sweep(a) => a.common.self_check,
        Command::Igdt(a) => a.common.self_check,
        Command::Rolling(a) => a.common.self_check,
        Command::EstimateParams(_) => false,
        Command::GenProfile(a) => a.self_check,
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Solve(_) => "solve",
        Command::Verify(_) => "verify",
        Command::Compare(_) => "compare",
        Command::Sweep(_) => "sweep",
        Command::Igdt(_) => "igdt",
        Command::Rolling(_) => "rolling",
        Command::EstimateParams(_) => "estimate-params",
        Command::GenProfile(_) => "gen-profile",
    }
}

/// One line on stderr: `error kind=<usage|solve> msg="..."`.
fn report(kind: &str, e: &anyhow::Error) {
    let msg = format!("{e:#}").replace('\n', " ").replace('"', "'");
    eprintln!("error kind={kind} msg=\"{msg}\"");
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let mut m = Manifest::new(command_name(&cli.command), &argv);
    let result = run(&cli, &mut m);
    m.finish();
    if m.output_dir.is_some() {
        if let Err(e) = m.write() {
            report("usage", &e);
            return ExitCode::from(2);
        }
    }
    let result = result.and_then(|_| {
        if self_check_requested(&cli) {
            check::check_outputs(&m).map_err(|e| anyhow!("self-check: {e:#}"))
        } else {
            Ok(())
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            report("usage", &e);
            ExitCode::from(2)
        }
        Err(e) => {
            report("solve", &e);
            ExitCode::from(1)
        }
    }
}
