//! Scheme comparisons, sensitivity sweeps and rolling-horizon runs.
//!
//! Every job is an independent build-solve-verify; jobs run on a bounded
//! rayon pool and results come back in input order.

mod profile;

pub use crate::sched::StorageScheme;
pub use profile::ProfileSpec;

use crate::milp::SolveStatus;
use crate::params::{Mode, PlantParams};
use crate::sched::{
    effective_params, solve_scenario, verify_schedule, BuildOptions, SchedError, ScenarioProfile, Schedule,
    SolverChoice, VerifyReport, J_PER_MWH,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Sched(#[from] SchedError),
    #[error("schedule has {schedule} steps but the scenario has {scenario}")]
    LengthMismatch { schedule: usize, scenario: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("profile: {0}")]
    Profile(String),
    #[error("worker pool: {0}")]
    Pool(String),
}

/// Summary figures of one solved schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleMetrics {
    /// t.
    pub nh3_total: f64,
    pub startstop_count: usize,
    /// CNY.
    pub grid_cost: f64,
    pub capex_om: f64,
    pub net_revenue: f64,
    /// Sum of absolute reactor temperature changes between states, K.
    pub cum_temp_variation: f64,
    /// Consumed over available renewable energy; 1 when nothing was available.
    pub renewable_utilization: f64,
}

/// Σ|T_{t+1} − T_t|.
pub fn cumulative_variation(temps: &[f64]) -> f64 {
    temps.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// Metrics of `schedule`, which must cover `scenario`. `params` are the
/// scheme-adjusted parameters the schedule was solved with.
pub fn compute_metrics(
    schedule: &Schedule,
    scenario: &ScenarioProfile,
    params: &PlantParams,
) -> Result<ScheduleMetrics, HarnessError> {
    if schedule.steps.len() != scenario.horizon_steps() {
        return Err(HarnessError::LengthMismatch {
            schedule: schedule.steps.len(),
            scenario: scenario.horizon_steps(),
        });
    }
    let b = schedule.breakdown(params, false);
    let mut consumed = 0.0;
    let mut available = 0.0;
    for s in &schedule.steps {
        let avail = s.renewable;
        let load = s.bes_charge + s.ms_heater_power + s.suh_power + s.aux_power + s.electrolyzer_power;
        consumed += (load - s.grid_import - s.bes_discharge).clamp(0.0, avail);
        available += avail;
    }
    Ok(ScheduleMetrics {
        nh3_total: schedule.nh3_total(),
        startstop_count: schedule.startstop_count(),
        grid_cost: b.grid_cost,
        capex_om: b.capex_om_cost,
        net_revenue: b.net_revenue,
        cum_temp_variation: cumulative_variation(&schedule.asr_temps()),
        renewable_utilization: if available > 0.0 { consumed / available } else { 1.0 },
    })
}

/// Outcome of one build-solve-verify job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeRun {
    pub scheme: String,
    pub status: Option<SolveStatus>,
    pub metrics: Option<ScheduleMetrics>,
    pub verify: Option<VerifyReport>,
    pub schedule: Option<Schedule>,
    pub error: Option<String>,
}

impl SchemeRun {
    fn failed(scheme: &str, e: impl std::fmt::Display) -> Self {
        SchemeRun {
            scheme: scheme.to_string(),
            status: None,
            metrics: None,
            verify: None,
            schedule: None,
            error: Some(e.to_string()),
        }
    }
}

/// Build, solve, verify and summarise one scenario under one scheme. Errors
/// are folded into the returned record.
pub fn run_one(
    scenario: &ScenarioProfile,
    base: &PlantParams,
    scheme: &StorageScheme,
    options: &BuildOptions,
    solver: &SolverChoice,
) -> SchemeRun {
    let solved = match solve_scenario(scenario, base, scheme, options, solver) {
        Ok(s) => s,
        Err(e) => return SchemeRun::failed(&scheme.name, e),
    };
    let mut run = SchemeRun {
        scheme: scheme.name.clone(),
        status: Some(solved.status()),
        metrics: None,
        verify: None,
        schedule: None,
        error: None,
    };
    if let Some(schedule) = solved.schedule {
        match compute_metrics(&schedule, scenario, &solved.built.params) {
            Ok(m) => run.metrics = Some(m),
            Err(e) => run.error = Some(e.to_string()),
        }
        run.verify = Some(verify_schedule(&schedule, &solved.built.params));
        run.schedule = Some(schedule);
    }
    run
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, HarnessError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))
}

/// One run per scheme, in the order given.
pub fn run_scheme_comparison(
    scenario: &ScenarioProfile,
    base: &PlantParams,
    schemes: &[StorageScheme],
    options: &BuildOptions,
    solver: &SolverChoice,
    workers: usize,
) -> Result<Vec<SchemeRun>, HarnessError> {
    for s in schemes {
        s.validate()?;
    }
    let pool = pool(workers)?;
    Ok(pool.install(|| schemes.par_iter().map(|s| run_one(scenario, base, s, options, solver)).collect()))
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

const METRIC_COLUMNS: &str = "startstop_count,nh3_total_t,grid_cost_CNY,capex_om_CNY,net_revenue_CNY,cum_temp_variation_K,renewable_utilization";

fn metric_fields(m: Option<&ScheduleMetrics>) -> String {
    match m {
        Some(m) => format!(
            "{},{},{},{},{},{},{}",
            m.startstop_count,
            m.nh3_total,
            m.grid_cost,
            m.capex_om,
            m.net_revenue,
            m.cum_temp_variation,
            m.renewable_utilization
        ),
        None => ",,,,,,".to_string(),
    }
}

/// Comparison table: one row per scheme; failed runs keep their row with
/// empty metric fields.
pub fn comparison_csv(runs: &[SchemeRun]) -> String {
    let mut out = format!("scheme,{METRIC_COLUMNS},status\n");
    for r in runs {
        let _ = writeln!(out, "{},{},{}", r.scheme, metric_fields(r.metrics.as_ref()), opt(r.status));
    }
    out
}

/// Storage size varied by a sensitivity sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// J.
    BesEnergy,
    /// Nm³.
    HsCapacity,
    /// m³.
    MsVolume,
}

impl SweepAxis {
    pub fn parse(s: &str) -> Option<SweepAxis> {
        match s {
            "bes_energy" => Some(SweepAxis::BesEnergy),
            "hs_capacity" => Some(SweepAxis::HsCapacity),
            "ms_volume" => Some(SweepAxis::MsVolume),
            _ => None,
        }
    }

    pub fn column(self) -> &'static str {
        match self {
            SweepAxis::BesEnergy => "bes_energy_J",
            SweepAxis::HsCapacity => "hs_capacity_Nm3",
            SweepAxis::MsVolume => "ms_volume_m3",
        }
    }

    /// `scheme` with this axis set to `value`; zero removes the component.
    /// A battery added to a scheme without one gets a 4 h power rating.
    pub fn apply(self, scheme: &StorageScheme, value: f64) -> StorageScheme {
        let mut s = scheme.clone();
        match self {
            SweepAxis::BesEnergy => {
                if !s.has_bes || s.bes_power <= 0.0 {
                    s.bes_power = value / (4.0 * 3600.0);
                }
                s.has_bes = value > 0.0;
                s.bes_energy = value;
            }
            SweepAxis::HsCapacity => {
                s.has_hs = value > 0.0;
                s.hs_capacity = value;
            }
            SweepAxis::MsVolume => {
                s.has_mstes = value > 0.0;
                s.ms_volume = value;
            }
        }
        s.name = format!("{}:{}={value}", scheme.name, self.column());
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub i: usize,
    pub j: usize,
    pub x: f64,
    pub y: f64,
    pub run: SchemeRun,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axes: (SweepAxis, SweepAxis),
    /// Row-major over the first axis.
    pub cells: Vec<SweepCell>,
}

impl SweepResult {
    /// Heat-map table; failed cells leave the value columns empty.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{},{},net_revenue_CNY,cum_temp_K\n", self.axes.0.column(), self.axes.1.column());
        for c in &self.cells {
            let m = c.run.metrics.as_ref();
            let _ = writeln!(
                out,
                "{},{},{},{}",
                c.x,
                c.y,
                opt(m.map(|m| m.net_revenue)),
                opt(m.map(|m| m.cum_temp_variation))
            );
        }
        out
    }
}

fn check_grid(name: &str, grid: &[f64]) -> Result<(), HarnessError> {
    if grid.is_empty() {
        return Err(HarnessError::InvalidGrid(format!("{name} grid is empty")));
    }
    if grid.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(HarnessError::InvalidGrid(format!("{name} grid has negative or non-finite values")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(HarnessError::InvalidGrid(format!("{name} grid must be strictly increasing")));
    }
    Ok(())
}

/// Full two-axis grid of solves around `base_scheme`.
#[allow(clippy::too_many_arguments)]
pub fn sensitivity_sweep(
    scenario: &ScenarioProfile,
    base: &PlantParams,
    base_scheme: &StorageScheme,
    axes: (SweepAxis, SweepAxis),
    grids: (&[f64], &[f64]),
    options: &BuildOptions,
    solver: &SolverChoice,
    workers: usize,
) -> Result<SweepResult, HarnessError> {
    if axes.0 == axes.1 {
        return Err(HarnessError::InvalidGrid("sweep axes must differ".into()));
    }
    check_grid(axes.0.column(), grids.0)?;
    check_grid(axes.1.column(), grids.1)?;
    let jobs: Vec<(usize, usize, f64, f64)> = grids
        .0
        .iter()
        .enumerate()
        .flat_map(|(i, &x)| grids.1.iter().enumerate().map(move |(j, &y)| (i, j, x, y)))
        .collect();
    let pool = pool(workers)?;
    let cells = pool.install(|| {
        jobs.par_iter()
            .map(|&(i, j, x, y)| {
                let scheme = axes.1.apply(&axes.0.apply(base_scheme, x), y);
                SweepCell { i, j, x, y, run: run_one(scenario, base, &scheme, options, solver) }
            })
            .collect()
    });
    Ok(SweepResult { axes, cells })
}

/// How storage levels pass from one rolling window to the next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RollingMode {
    /// Each window starts from the previous window's final state; cyclic
    /// closure is switched off.
    Chained,
    /// Every window starts from the profile's initial conditions with cyclic
    /// closure.
    Reset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingRow {
    pub window: usize,
    pub run: SchemeRun,
    /// Initial conditions the window was solved from.
    pub initial_hs_level: f64,
    pub initial_bes_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingTotals {
    pub scheme: String,
    pub windows_solved: usize,
    pub startstop_count: usize,
    pub nh3_total: f64,
    pub net_revenue: f64,
    pub cum_temp_variation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingResult {
    pub mode: RollingMode,
    /// Grouped by scheme, windows in order.
    pub rows: Vec<RollingRow>,
    pub totals: Vec<RollingTotals>,
}

impl RollingResult {
    pub fn to_csv(&self) -> String {
        let mut out = format!("window,scheme,{METRIC_COLUMNS},status\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                r.window,
                r.run.scheme,
                metric_fields(r.run.metrics.as_ref()),
                opt(r.run.status)
            );
        }
        out
    }
}

/// Carry the end state of `schedule` into `next` as initial conditions.
fn chain_state(next: &mut ScenarioProfile, schedule: &Schedule) {
    if let (Some(last), Some(step)) = (schedule.states.last(), schedule.steps.last()) {
        next.initial_asr_temp = last.asr_temp;
        if let Some(ms) = last.ms_temp {
            next.initial_ms_temp = ms;
        }
        next.initial_hs_level = last.hs_level;
        next.initial_bes_energy = last.bes_energy;
        next.initial_mode = step.mode;
        next.initial_load = if step.mode == Mode::Production { step.load } else { 0.0 };
    }
}

/// Split `profile` into consecutive windows of `window_steps` and solve each
/// under every scheme. An incomplete final window is dropped.
#[allow(clippy::too_many_arguments)]
pub fn run_rolling(
    profile: &ScenarioProfile,
    window_steps: usize,
    base: &PlantParams,
    schemes: &[StorageScheme],
    mode: RollingMode,
    options: &BuildOptions,
    solver: &SolverChoice,
    workers: usize,
) -> Result<RollingResult, HarnessError> {
    if window_steps == 0 {
        return Err(HarnessError::InvalidGrid("window_steps must be positive".into()));
    }
    let n = profile.horizon_steps() / window_steps;
    if n * window_steps < profile.horizon_steps() {
        log::warn!(
            "dropping {} trailing steps that do not fill a window",
            profile.horizon_steps() - n * window_steps
        );
    }
    for s in schemes {
        s.validate()?;
    }
    let mut opts = options.clone();
    opts.cyclic_storage = mode == RollingMode::Reset;
    let pool = pool(workers)?;
    let per_scheme: Vec<Vec<RollingRow>> = pool.install(|| {
        schemes
            .par_iter()
            .map(|scheme| {
                let mut rows = Vec::with_capacity(n);
                let mut carry: Option<Schedule> = None;
                for w in 0..n {
                    let mut sc = profile.window(w * window_steps, (w + 1) * window_steps);
                    sc.name = format!("{}_w{w}", profile.name);
                    if mode == RollingMode::Chained {
                        if let Some(prev) = &carry {
                            chain_state(&mut sc, prev);
                        }
                    }
                    // Report storage as the model sees it: clamped into the scheme's bands.
                    let (hs0, bes0) = match effective_params(&sc, base, scheme) {
                        Ok(p) => (
                            if scheme.has_hs {
                                sc.initial_hs_level.clamp(p.operational.hs_min, p.operational.hs_max)
                            } else {
                                0.0
                            },
                            if scheme.has_bes {
                                sc.initial_bes_energy.clamp(p.operational.bes_energy_min, p.operational.bes_energy_max)
                            } else {
                                0.0
                            },
                        ),
                        Err(_) => (sc.initial_hs_level, sc.initial_bes_energy),
                    };
                    let run = run_one(&sc, base, scheme, &opts, solver);
                    carry = run.schedule.clone();
                    if carry.is_none() && mode == RollingMode::Chained {
                        log::warn!("{} window {w} failed; next window restarts from the profile's initial state", scheme.name);
                    }
                    rows.push(RollingRow { window: w, run, initial_hs_level: hs0, initial_bes_energy: bes0 });
                }
                rows
            })
            .collect()
    });
    let totals = schemes
        .iter()
        .zip(&per_scheme)
        .map(|(s, rows)| {
            let ms: Vec<&ScheduleMetrics> = rows.iter().filter_map(|r| r.run.metrics.as_ref()).collect();
            RollingTotals {
                scheme: s.name.clone(),
                windows_solved: ms.len(),
                startstop_count: ms.iter().map(|m| m.startstop_count).sum(),
                nh3_total: ms.iter().map(|m| m.nh3_total).sum(),
                net_revenue: ms.iter().map(|m| m.net_revenue).sum(),
                cum_temp_variation: ms.iter().map(|m| m.cum_temp_variation).sum(),
            }
        })
        .collect();
    Ok(RollingResult { mode, rows: per_scheme.into_iter().flatten().collect(), totals })
}

/// The shipped 48 h lull scenario: ordinary renewables for the first nine
/// hours, thirty hours with none at all, then nine hours of recovery.
pub fn lull_scenario(params: &PlantParams, seed: u64) -> Result<ScenarioProfile, HarnessError> {
    let spec = ProfileSpec { steps: 48, lulls: vec![(9, 39)], ..Default::default() };
    let (wind, pv) = spec.generate(seed)?;
    Ok(ScenarioProfile::new("lull_48h", spec.dt, wind, pv, params))
}

/// The shipped 48 h scenario without a lull.
pub fn synthetic_scenario(params: &PlantParams, seed: u64) -> Result<ScenarioProfile, HarnessError> {
    let spec = ProfileSpec { steps: 48, ..Default::default() };
    let (wind, pv) = spec.generate(seed)?;
    Ok(ScenarioProfile::new("synthetic_48h", spec.dt, wind, pv, params))
}

/// Battery energy as MWh, for reports.
pub fn mwh(j: f64) -> f64 {
    j / J_PER_MWH
}
