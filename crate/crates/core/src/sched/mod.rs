//! Deterministic scheduling model: scenario in, MILP out, schedule back.
//!
//! Inside the MILP quantities are held in scaled units so coefficients stay
//! within a few orders of magnitude: MW, MWh, kNm³ (and kNm³/h), K and CNY.
//! Everything outside (params, scenarios, schedules) is SI.

mod builder;
mod scenario;
mod schedule;
mod verify;

pub use builder::{
    build_full_model, effective_params, BuildOptions, BuiltModel, ConstraintGroup, ModelBuilder, ModelVars,
    RenewableScaling, StepVars,
};
pub use scenario::{parse_profile_csv, profile_csv, sidecar_path, ScenarioProfile, Sidecar};
pub use schedule::{decode, ObjectiveBreakdown, Schedule, ScheduleStep, StateRecord, SCHEDULE_COLUMNS};
pub use verify::{verify_schedule, ResidualKind, VerifyFlag, VerifyReport};

use crate::milp::{solve_external, solve_tiny, MilpError, MilpModel, Solution, SolveStatus, SolverConfig};
use crate::params::{
    ParamError, PlantParams, COMPONENT_BES, COMPONENT_HS, COMPONENT_MSTES,
};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SchedError {
    #[error("scenario: {0}")]
    Scenario(String),
    #[error("storage scheme `{scheme}`: {reason}")]
    Scheme { scheme: String, reason: String },
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Milp(#[from] MilpError),
    #[error("cannot decode solution: {0}")]
    Decode(String),
    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
    #[error("schedule file: {0}")]
    Format(String),
}

impl SchedError {
    pub(crate) fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        SchedError::Io { path: path.display().to_string(), reason: e.to_string() }
    }
}

pub const J_PER_MWH: f64 = 3.6e9;

/// Which storage components exist and how large they are.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StorageScheme {
    pub name: String,
    pub has_bes: bool,
    /// J.
    pub bes_energy: f64,
    /// Charge and discharge power limit, W.
    pub bes_power: f64,
    pub has_hs: bool,
    /// Nm³.
    pub hs_capacity: f64,
    pub has_mstes: bool,
    /// m³.
    pub ms_volume: f64,
}

impl StorageScheme {
    pub const LARGE_BES_MWH: f64 = 32.0;
    pub const LARGE_BES_MW: f64 = 8.0;
    pub const SMALL_BES_MWH: f64 = 4.0;
    pub const SMALL_BES_MW: f64 = 1.0;
    pub const HS_NM3: f64 = 150_000.0;
    pub const MS_M3: f64 = 20.0;

    fn preset(name: &str, bes: Option<(f64, f64)>, hs: bool, ms: bool) -> Self {
        let (e, p) = bes.unwrap_or((0.0, 0.0));
        StorageScheme {
            name: name.to_string(),
            has_bes: bes.is_some(),
            bes_energy: e * J_PER_MWH,
            bes_power: p * 1e6,
            has_hs: hs,
            hs_capacity: if hs { Self::HS_NM3 } else { 0.0 },
            has_mstes: ms,
            ms_volume: if ms { Self::MS_M3 } else { 0.0 },
        }
    }

    /// The five comparison configurations, numbered 1 to 5.
    pub fn numbered(n: usize) -> Option<StorageScheme> {
        let large = Some((Self::LARGE_BES_MWH, Self::LARGE_BES_MW));
        let small = Some((Self::SMALL_BES_MWH, Self::SMALL_BES_MW));
        Some(match n {
            1 => Self::preset("scheme1", large, true, false),
            2 => Self::preset("scheme2", None, true, false),
            3 => Self::preset("scheme3", None, false, true),
            4 => Self::preset("scheme4", large, true, true),
            5 => Self::preset("scheme5", small, true, true),
            _ => return None,
        })
    }

    pub fn all_numbered() -> Vec<StorageScheme> {
        (1..=5).filter_map(Self::numbered).collect()
    }

    /// No storage of any kind.
    pub fn bare() -> StorageScheme {
        Self::preset("bare", None, false, false)
    }

    /// `scheme1`..`scheme5`, `1`..`5` or `bare`.
    pub fn by_name(name: &str) -> Option<StorageScheme> {
        let n = name.trim().to_ascii_lowercase();
        if n == "bare" || n == "none" {
            return Some(Self::bare());
        }
        n.strip_prefix("scheme").unwrap_or(&n).parse().ok().and_then(Self::numbered)
    }

    pub fn validate(&self) -> Result<(), SchedError> {
        let bad = |reason: String| Err(SchedError::Scheme { scheme: self.name.clone(), reason });
        for (present, name, v) in [
            (self.has_bes, "bes_energy", self.bes_energy),
            (self.has_bes, "bes_power", self.bes_power),
            (self.has_hs, "hs_capacity", self.hs_capacity),
            (self.has_mstes, "ms_volume", self.ms_volume),
        ] {
            if present && !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive when present, got {v}"));
            }
            if !v.is_finite() || v < 0.0 {
                return bad(format!("{name} must be non-negative, got {v}"));
            }
        }
        Ok(())
    }

    /// Parameters with this scheme's storage sizes layered over `base`.
    ///
    /// Storage bands are 10 % to 90 % of capacity. The salt tank's loss
    /// resistance scales with surface area, i.e. with volume^(2/3), relative to
    /// the base tank. Capital cost entries follow the sizes; absent components
    /// are dropped from the cost list.
    pub fn apply(&self, base: &PlantParams) -> Result<PlantParams, SchedError> {
        self.validate()?;
        let mut p = base.clone();
        let o = &mut p.operational;
        if self.has_bes {
            o.bes_energy_min = 0.1 * self.bes_energy;
            o.bes_energy_max = 0.9 * self.bes_energy;
            o.bes_charge_max = self.bes_power;
            o.bes_discharge_max = self.bes_power;
        }
        if self.has_hs {
            o.hs_min = 0.1 * self.hs_capacity;
            o.hs_max = 0.9 * self.hs_capacity;
        }
        if self.has_mstes {
            let v0 = base.thermal.ms_volume;
            p.thermal.ms_volume = self.ms_volume;
            p.thermal.ms_loss_resistance = base.thermal.ms_loss_resistance * (self.ms_volume / v0).powf(-2.0 / 3.0);
        }
        let h2_density = p.economic.h2_density;
        let ms_kwh = p.thermal.ms_capacitance() * (p.operational.ms_temp_max - p.operational.ms_temp_min) / 3.6e6;
        let sizes = [
            (COMPONENT_BES, self.has_bes, self.bes_energy / 3.6e6),
            (COMPONENT_HS, self.has_hs, self.hs_capacity * h2_density),
            (COMPONENT_MSTES, self.has_mstes, ms_kwh),
        ];
        for (name, present, capacity) in sizes {
            if present {
                if let Some(c) = p.economic.component_mut(name) {
                    c.capacity = capacity;
                }
            } else {
                p.economic.components.retain(|c| c.name != name);
            }
        }
        p.validate()?;
        Ok(p)
    }
}

/// Which solver handles a model.
#[derive(Debug, Clone, PartialEq)]
pub enum SolverChoice {
    /// The bundled exact solver, refusing models with more free binaries.
    Tiny { binary_limit: usize },
    External(SolverConfig),
}

pub fn solve_model(model: &MilpModel, solver: &SolverChoice) -> Result<Solution, SchedError> {
    Ok(match solver {
        SolverChoice::Tiny { binary_limit } => solve_tiny(model, *binary_limit)?,
        SolverChoice::External(cfg) => solve_external(model, cfg)?,
    })
}

/// A built and solved model, with the decoded schedule when there is one.
#[derive(Debug, Clone)]
pub struct Solved {
    pub built: BuiltModel,
    pub solution: Solution,
    pub schedule: Option<Schedule>,
    pub breakdown: Option<ObjectiveBreakdown>,
}

impl Solved {
    pub fn status(&self) -> SolveStatus {
        self.solution.status
    }
}

/// Build, solve and decode one scenario under one storage scheme.
pub fn solve_scenario(
    scenario: &ScenarioProfile,
    params: &PlantParams,
    scheme: &StorageScheme,
    options: &BuildOptions,
    solver: &SolverChoice,
) -> Result<Solved, SchedError> {
    let built = build_full_model(scenario, params, scheme, options)?;
    let solution = solve_model(&built.model, solver)?;
    let decoded = match solution.status {
        SolveStatus::Optimal | SolveStatus::Limit if solution.has_point() => Some(decode(&built, &solution)?),
        _ => None,
    };
    let (schedule, breakdown) = match decoded {
        Some((s, b)) => (Some(s), Some(b)),
        None => (None, None),
    };
    Ok(Solved { built, solution, schedule, breakdown })
}
