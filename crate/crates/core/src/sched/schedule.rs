//! Decoded schedules, their cost breakdown and file formats.

use super::{BuiltModel, RenewableScaling, SchedError, J_PER_MWH};
use crate::milp::Solution;
use crate::params::{Mode, PlantParams, SECONDS_PER_HOUR};
use crate::thermal::ThermalInputs;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Decisions of one step. Powers and duties in W, flows per hour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleStep {
    pub mode: Mode,
    pub startup: bool,
    pub shutdown: bool,
    /// Entered shutdown this step.
    pub inoff: bool,
    /// Left shutdown this step.
    pub outoff: bool,
    pub ms_on: bool,
    pub load: f64,
    /// t/h.
    pub nh3_output: f64,
    /// Nm³/h.
    pub h2_production: f64,
    /// Nm³/h.
    pub h2_to_as: f64,
    pub bes_charge: f64,
    pub bes_discharge: f64,
    pub grid_import: f64,
    /// Renewable power available to the plant after any uncertainty scaling, W.
    pub renewable: f64,
    pub ms_heat_duty: f64,
    pub suh_heat_duty: f64,
    pub cooling_duty: f64,
    pub ms_heater_power: f64,
    pub suh_power: f64,
    pub aux_power: f64,
    pub electrolyzer_power: f64,
}

impl ScheduleStep {
    pub fn thermal_inputs(&self) -> ThermalInputs {
        ThermalInputs {
            mode: self.mode,
            load: self.load,
            cooling_duty: self.cooling_duty,
            ms_heat_duty: self.ms_heat_duty,
            suh_heat_duty: self.suh_heat_duty,
            ms_heater_power: self.ms_heater_power,
        }
    }

    /// Total electric demand, W.
    pub fn demand(&self) -> f64 {
        self.bes_charge - self.bes_discharge
            + self.ms_heater_power
            + self.suh_power
            + self.aux_power
            + self.electrolyzer_power
    }
}

/// Plant state at a step boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    pub asr_temp: f64,
    /// `None` without a salt tank.
    pub ms_temp: Option<f64>,
    /// Nm³.
    pub hs_level: f64,
    /// J.
    pub bes_energy: f64,
}

/// `steps.len() + 1` states bracket the steps: state `t` is the start of step `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    /// s.
    pub dt: f64,
    pub steps: Vec<ScheduleStep>,
    pub states: Vec<StateRecord>,
}

impl Schedule {
    pub fn empty(dt: f64) -> Self {
        Schedule { dt, steps: Vec::new(), states: Vec::new() }
    }

    pub fn dt_h(&self) -> f64 {
        self.dt / SECONDS_PER_HOUR
    }

    pub fn nh3_total(&self) -> f64 {
        self.steps.iter().map(|s| s.nh3_output).sum::<f64>() * self.dt_h()
    }

    pub fn startstop_count(&self) -> usize {
        self.steps.iter().map(|s| s.inoff as usize + s.outoff as usize).sum()
    }

    pub fn asr_temps(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.asr_temp).collect()
    }

    /// Breakdown recomputed from the schedule's own values.
    pub fn breakdown(&self, params: &PlantParams, quadratic_penalty: bool) -> ObjectiveBreakdown {
        let e = &params.economic;
        let dt_h = self.dt_h();
        let ammonia_revenue = e.nh3_price * self.nh3_total();
        let grid_cost = e.grid_price * self.steps.iter().map(|s| s.grid_import).sum::<f64>() * dt_h;
        let startup_cost = e.startup_cost * self.steps.iter().filter(|s| s.inoff).count() as f64;
        let days = self.steps.len() as f64 * self.dt / 86_400.0;
        let capex_om_cost = e.capex_om_cost(days);
        let temp_penalty = self
            .states
            .iter()
            .skip(1)
            .map(|s| {
                let d = s.asr_temp - e.temp_setpoint;
                if quadratic_penalty {
                    d * d
                } else {
                    d.abs()
                }
            })
            .sum::<f64>();
        let net_revenue = ammonia_revenue - grid_cost - startup_cost - capex_om_cost;
        ObjectiveBreakdown {
            ammonia_revenue,
            grid_cost,
            startup_cost,
            capex_om_cost,
            temp_penalty,
            net_revenue,
            objective: e.weight_profit * net_revenue - e.weight_temp * temp_penalty,
        }
    }

    /// One row per state: decisions of step `t` next to the state at its
    /// start. The last row carries only the final state. Columns are
    /// [`SCHEDULE_COLUMNS`].
    pub fn to_csv(&self) -> String {
        let mut out = SCHEDULE_COLUMNS.join(",");
        out.push('\n');
        let b = |v: bool| if v { "1" } else { "0" };
        for (t, st) in self.states.iter().enumerate() {
            let _ = write!(out, "{t},{}", self.dt);
            match self.steps.get(t) {
                Some(s) => {
                    let _ = write!(
                        out,
                        ",{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                        s.mode.short(),
                        b(s.startup),
                        b(s.shutdown),
                        b(s.inoff),
                        b(s.outoff),
                        b(s.ms_on),
                        s.load,
                        s.nh3_output,
                        s.h2_production,
                        s.h2_to_as,
                        s.bes_charge,
                        s.bes_discharge,
                        s.grid_import,
                        s.renewable,
                        s.ms_heat_duty,
                        s.suh_heat_duty,
                        s.cooling_duty,
                        s.ms_heater_power,
                        s.suh_power,
                        s.aux_power,
                        s.electrolyzer_power,
                    );
                }
                None => out.push_str(&",".repeat(STEP_COLUMNS)),
            }
            let ms = st.ms_temp.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(out, ",{},{ms},{},{}", st.asr_temp, st.hs_level, st.bes_energy);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Schedule, SchedError> {
        let bad = |m: String| SchedError::Format(m);
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| bad("empty schedule file".into()))?;
        if header.trim() != SCHEDULE_COLUMNS.join(",") {
            return Err(bad("unexpected schedule header".into()));
        }
        let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').map(str::trim).collect()).collect();
        let mut steps = Vec::new();
        let mut states = Vec::new();
        let mut dt = f64::NAN;
        for (k, f) in rows.iter().enumerate() {
            if f.len() != SCHEDULE_COLUMNS.len() {
                return Err(bad(format!("row {} has {} fields", k + 1, f.len())));
            }
            let num = |i: usize| -> Result<f64, SchedError> {
                f[i].parse::<f64>().map_err(|_| bad(format!("row {}: bad `{}` value `{}`", k + 1, SCHEDULE_COLUMNS[i], f[i])))
            };
            let flag = |i: usize| -> Result<bool, SchedError> {
                match f[i] {
                    "1" | "true" => Ok(true),
                    "0" | "false" => Ok(false),
                    v => Err(bad(format!("row {}: bad flag `{v}`", k + 1))),
                }
            };
            if num(0)? != k as f64 {
                return Err(bad(format!("row {} has step {}", k + 1, f[0])));
            }
            dt = num(1)?;
            let last = k + 1 == rows.len();
            if !last {
                let mode = Mode::parse(f[2]).ok_or_else(|| bad(format!("row {}: bad mode `{}`", k + 1, f[2])))?;
                steps.push(ScheduleStep {
                    mode,
                    startup: flag(3)?,
                    shutdown: flag(4)?,
                    inoff: flag(5)?,
                    outoff: flag(6)?,
                    ms_on: flag(7)?,
                    load: num(8)?,
                    nh3_output: num(9)?,
                    h2_production: num(10)?,
                    h2_to_as: num(11)?,
                    bes_charge: num(12)?,
                    bes_discharge: num(13)?,
                    grid_import: num(14)?,
                    renewable: num(15)?,
                    ms_heat_duty: num(16)?,
                    suh_heat_duty: num(17)?,
                    cooling_duty: num(18)?,
                    ms_heater_power: num(19)?,
                    suh_power: num(20)?,
                    aux_power: num(21)?,
                    electrolyzer_power: num(22)?,
                });
            } else if f[2..2 + STEP_COLUMNS].iter().any(|v| !v.is_empty()) {
                return Err(bad("final row must hold only the end state".into()));
            }
            let base = 2 + STEP_COLUMNS;
            states.push(StateRecord {
                asr_temp: num(base)?,
                ms_temp: if f[base + 1].is_empty() { None } else { Some(num(base + 1)?) },
                hs_level: num(base + 2)?,
                bes_energy: num(base + 3)?,
            });
        }
        if rows.is_empty() {
            return Ok(Schedule::empty(SECONDS_PER_HOUR));
        }
        Ok(Schedule { dt, steps, states })
    }
}

const STEP_COLUMNS: usize = 21;

/// Column order of the schedule CSV.
pub const SCHEDULE_COLUMNS: [&str; 27] = [
    "step",
    "dt_s",
    "mode",
    "startup",
    "shutdown",
    "inoff",
    "outoff",
    "ms_on",
    "load",
    "nh3_output_t_per_h",
    "h2_production_Nm3_per_h",
    "h2_to_as_Nm3_per_h",
    "bes_charge_W",
    "bes_discharge_W",
    "grid_import_W",
    "renewable_W",
    "ms_heat_duty_W",
    "suh_heat_duty_W",
    "cooling_duty_W",
    "ms_heater_power_W",
    "suh_power_W",
    "aux_power_W",
    "electrolyzer_power_W",
    "asr_temp_K",
    "ms_temp_K",
    "hs_level_Nm3",
    "bes_energy_J",
];

/// Objective terms in CNY; the temperature penalty is in K (or K² with the
/// quadratic penalty).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveBreakdown {
    pub ammonia_revenue: f64,
    pub grid_cost: f64,
    pub startup_cost: f64,
    pub capex_om_cost: f64,
    pub temp_penalty: f64,
    pub net_revenue: f64,
    /// Weighted objective: w₁·net_revenue − w₂·temp_penalty.
    pub objective: f64,
}

/// Turn a solution of `built` into a schedule and its recomputed breakdown.
///
/// Modes come from the four state binaries; more than one above 0.5 is an
/// error. When the model carries the standard objective the recomputed value
/// must match the solver's within 1e-4 relative.
pub fn decode(built: &BuiltModel, solution: &Solution) -> Result<(Schedule, ObjectiveBreakdown), SchedError> {
    if solution.values.len() != built.model.vars().len() {
        return Err(SchedError::Decode(format!(
            "{} values for {} variables",
            solution.values.len(),
            built.model.vars().len()
        )));
    }
    let v = |id| solution.value(id);
    let bit = |id| v(id) > 0.5;
    // Clip solver noise below zero.
    let pos = |x: f64| if x < 1e-9 { 0.0 } else { x };
    let p = &built.params;
    let o = &p.operational;
    let vars = &built.vars;
    // Renewable power the schedule was built against, after any α scaling.
    let renew_factor = match (vars.alpha, built.options.renewable_scaling) {
        (Some(a), Some(RenewableScaling::Shortfall)) => 1.0 - v(a),
        (Some(a), Some(RenewableScaling::Surplus { .. })) => 1.0 + v(a),
        _ => 1.0,
    };
    let mut steps = Vec::with_capacity(vars.steps.len());
    for (t, s) in vars.steps.iter().enumerate() {
        let active: Vec<Mode> = Mode::ALL.into_iter().filter(|&m| bit(s.mode_var(m))).collect();
        let mode = match active.as_slice() {
            [m] => *m,
            [] => return Err(SchedError::Decode(format!("no operating state selected at step {t}"))),
            _ => return Err(SchedError::Decode(format!("several operating states selected at step {t}: {active:?}"))),
        };
        let load = if mode == Mode::Production { pos(v(s.load)) } else { 0.0 };
        let running = mode.is_running();
        let ms_heater_power = pos(v(s.ms_heater)) * 1e6;
        let h2_production = pos(v(s.h2_production)) * 1e3;
        steps.push(ScheduleStep {
            mode,
            startup: bit(s.startup),
            shutdown: bit(s.shutdown),
            inoff: bit(s.inoff),
            outoff: bit(s.outoff),
            ms_on: bit(s.ms_on),
            load,
            nh3_output: o.nh3_rate_rated * load,
            h2_production,
            h2_to_as: o.h2_consumption_rated * load,
            bes_charge: pos(v(s.bes_charge)) * 1e6,
            bes_discharge: pos(v(s.bes_discharge)) * 1e6,
            grid_import: pos(v(s.grid)) * 1e6,
            renewable: built.scenario.renewable(t) * renew_factor,
            ms_heat_duty: if running { pos(v(s.ms_duty)) * 1e6 } else { 0.0 },
            suh_heat_duty: if running { pos(v(s.suh_duty)) * 1e6 } else { 0.0 },
            cooling_duty: if mode == Mode::Production { pos(v(s.cooling)) * 1e6 } else { 0.0 },
            ms_heater_power,
            suh_power: pos(v(s.suh_power)) * 1e6,
            aux_power: if running { o.aux_base_power } else { 0.0 } + o.aux_load_coeff * load,
            electrolyzer_power: o.hp_specific_power * h2_production,
        });
    }
    let states = (0..vars.asr_temp.len())
        .map(|k| StateRecord {
            asr_temp: v(vars.asr_temp[k]),
            ms_temp: vars.ms_temp.as_ref().map(|ms| v(ms[k])),
            hs_level: v(vars.hs_level[k]) * 1e3,
            bes_energy: v(vars.bes_energy[k]) * J_PER_MWH,
        })
        .collect();
    let schedule = Schedule { dt: built.scenario.dt, steps, states };
    let breakdown = schedule.breakdown(p, built.options.quadratic_penalty);
    if vars.alpha.is_none() {
        let reported = solution.objective_value;
        let tol = 1e-4 * (1.0 + reported.abs());
        if (breakdown.objective - reported).abs() > tol {
            return Err(SchedError::Decode(format!(
                "recomputed objective {} differs from solver objective {reported}",
                breakdown.objective
            )));
        }
    }
    Ok((schedule, breakdown))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Schedule {
        let step = |mode, load: f64| ScheduleStep {
            mode,
            startup: false,
            shutdown: false,
            inoff: false,
            outoff: false,
            ms_on: mode == Mode::Standby,
            load,
            nh3_output: 24.9 * load,
            h2_production: 1000.5,
            h2_to_as: 49_202.4 * load,
            bes_charge: 0.0,
            bes_discharge: 1.0e5,
            grid_import: 2.0e6 / 3.0,
            renewable: 1.0e8,
            ms_heat_duty: 85_576.92,
            suh_heat_duty: 0.0,
            cooling_duty: 0.0,
            ms_heater_power: 1.0e6,
            suh_power: 0.0,
            aux_power: 3.97e6,
            electrolyzer_power: 4.8e6,
        };
        let st = |t: f64| StateRecord { asr_temp: t, ms_temp: Some(800.1), hs_level: 7.5e4, bes_energy: 1.0e9 };
        Schedule {
            dt: 3600.0,
            steps: vec![step(Mode::Production, 0.7), step(Mode::Standby, 0.0)],
            states: vec![st(733.0), st(734.25), st(1.0 / 3.0 + 700.0)],
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let s = sample();
        let text = s.to_csv();
        assert_eq!(text.lines().count(), 4);
        assert!(text.lines().all(|l| l.split(',').count() == SCHEDULE_COLUMNS.len()), "{text}");
        assert_eq!(Schedule::from_csv(&text).unwrap(), s);
        let mut no_ms = s.clone();
        no_ms.states.iter_mut().for_each(|st| st.ms_temp = None);
        assert_eq!(Schedule::from_csv(&no_ms.to_csv()).unwrap(), no_ms);
    }

    #[test]
    fn json_round_trip() {
        let s = sample();
        let back: Schedule = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn bad_csv_is_rejected() {
        assert!(Schedule::from_csv("").is_err());
        assert!(Schedule::from_csv("a,b\n").is_err());
        let text = sample().to_csv().replace(",by,", ",xx,");
        assert!(Schedule::from_csv(&text).is_err());
    }

    #[test]
    fn breakdown_identity_and_zero_case() {
        let p = PlantParams::default();
        let b = sample().breakdown(&p, false);
        let id = b.ammonia_revenue - b.grid_cost - b.startup_cost - b.capex_om_cost;
        assert!((b.net_revenue - id).abs() < 1e-9);
        assert!((b.temp_penalty - (1.25 + (33.0 - 1.0 / 3.0))).abs() < 1e-9);
        let mut idle = sample();
        for s in &mut idle.steps {
            s.mode = Mode::Shutdown;
            s.load = 0.0;
            s.nh3_output = 0.0;
            s.grid_import = 0.0;
        }
        let b = idle.breakdown(&p, false);
        assert!((b.net_revenue + b.capex_om_cost).abs() < 1e-9);
        assert!(b.capex_om_cost > 0.0);
    }
}
