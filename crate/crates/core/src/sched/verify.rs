//! Independent re-check of a decoded schedule.

use super::Schedule;
use crate::params::PlantParams;
use crate::thermal::{replay_schedule, MAX_SUBSTEP};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualKind {
    Hydrogen,
    Battery,
    Power,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyFlag {
    pub step: usize,
    pub kind: ResidualKind,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub steps: usize,
    /// Largest |simulated − scheduled| reactor temperature, K.
    pub max_asr_deviation: f64,
    pub max_ms_deviation: f64,
    /// Set when the simulator could not replay the schedule.
    pub replay_error: Option<String>,
    /// Per step: level change minus net inflow, Nm³.
    pub hs_residuals: Vec<f64>,
    /// Per step: energy change minus net charge, J.
    pub bes_residuals: Vec<f64>,
    /// Per step: demand not covered by renewables plus grid, W (0 when covered).
    pub power_residuals: Vec<f64>,
    pub flagged: Vec<VerifyFlag>,
}

impl VerifyReport {
    pub fn is_clean(&self) -> bool {
        self.replay_error.is_none() && self.flagged.is_empty()
    }
}

/// Replay the schedule through the thermal simulator (60 s substeps) and
/// recompute storage and power balances step by step. Residuals larger than
/// 1e-6 of the relevant capacity (1 W for power) are flagged.
pub fn verify_schedule(schedule: &Schedule, params: &PlantParams) -> VerifyReport {
    let mut report = VerifyReport {
        steps: schedule.steps.len(),
        max_asr_deviation: 0.0,
        max_ms_deviation: 0.0,
        replay_error: None,
        hs_residuals: Vec::new(),
        bes_residuals: Vec::new(),
        power_residuals: Vec::new(),
        flagged: Vec::new(),
    };
    if schedule.steps.is_empty() {
        return report;
    }
    match replay_schedule(schedule, params, MAX_SUBSTEP) {
        Ok(r) => {
            report.max_asr_deviation = r.max_asr_deviation;
            report.max_ms_deviation = r.max_ms_deviation;
        }
        Err(e) => report.replay_error = Some(e.to_string()),
    }
    if schedule.states.len() != schedule.steps.len() + 1 {
        report.replay_error.get_or_insert_with(|| "state count does not match step count".into());
        return report;
    }
    let o = &params.operational;
    let dt_h = schedule.dt_h();
    let hs_tol = 1e-6 * o.hs_max.max(1.0);
    let bes_tol = 1e-6 * o.bes_energy_max.max(1.0);
    let power_tol = 1.0;
    for (t, s) in schedule.steps.iter().enumerate() {
        let (a, b) = (&schedule.states[t], &schedule.states[t + 1]);
        let hs = (b.hs_level - a.hs_level) - (s.h2_production - s.h2_to_as) * dt_h;
        let bes = (b.bes_energy - a.bes_energy) - (s.bes_charge - s.bes_discharge) * schedule.dt;
        let power = (s.demand() - s.renewable - s.grid_import).max(0.0);
        for (kind, r, tol) in [
            (ResidualKind::Hydrogen, hs, hs_tol),
            (ResidualKind::Battery, bes, bes_tol),
            (ResidualKind::Power, power, power_tol),
        ] {
            if r.abs() > tol || r.is_nan() {
                report.flagged.push(VerifyFlag { step: t, kind, residual: r });
            }
        }
        report.hs_residuals.push(hs);
        report.bes_residuals.push(bes);
        report.power_residuals.push(power);
    }
    report
}
