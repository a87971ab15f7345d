//! Model assembly.
//!
//! Step `t` runs from state `t` to state `t + 1`; decisions are indexed by
//! step and temperatures and storage levels by state, so there are `τ + 1`
//! states with state 0 fixed to the scenario's initial conditions. The
//! reactor and salt balances are forward differences evaluated at the
//! start-of-step temperature, the same update the simulator applies per
//! substep.

use super::{SchedError, ScenarioProfile, StorageScheme};
use crate::milp::{Direction, LinExpr, MilpModel, Sense, VarId};
use crate::params::{Mode, PlantParams, SECONDS_PER_HOUR};
use serde::{Deserialize, Serialize};
use std::ops::Range;

const MW: f64 = 1e6;
const KNM3: f64 = 1e3;

/// Uniform scaling of the renewable forecast by a decision variable α.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RenewableScaling {
    /// Available power is (1 − α)·P̃, α ∈ [0, 1].
    Shortfall,
    /// Available power is (1 + α)·P̃, α ∈ [0, cap].
    Surplus { cap: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildOptions {
    /// Close HS and BES levels back to their initial values at the horizon end.
    pub cyclic_storage: bool,
    /// Penalise squared setpoint deviation instead of absolute deviation.
    /// Only external solvers that read quadratic LP objectives can use this.
    pub quadratic_penalty: bool,
    /// Multiplier on every Big-M constant (1 = tight values).
    pub big_m_scale: f64,
    pub renewable_scaling: Option<RenewableScaling>,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { cyclic_storage: true, quadratic_penalty: false, big_m_scale: 1.0, renewable_scaling: None }
    }
}

/// Variables of one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepVars {
    pub on: VarId,
    pub by: VarId,
    pub cs: VarId,
    pub off: VarId,
    pub startup: VarId,
    pub shutdown: VarId,
    pub inoff: VarId,
    pub outoff: VarId,
    pub ms_on: VarId,
    pub ms_by: VarId,
    pub bes_cha_on: VarId,
    pub bes_dis_on: VarId,
    pub load: VarId,
    /// MW.
    pub cooling: VarId,
    pub ms_duty: VarId,
    pub suh_duty: VarId,
    pub ms_heater: VarId,
    pub suh_power: VarId,
    pub bes_charge: VarId,
    pub bes_discharge: VarId,
    pub grid: VarId,
    /// kNm³/h.
    pub h2_production: VarId,
    /// Deviation of the end-of-step reactor temperature above / below setpoint, K.
    pub dev_pos: VarId,
    pub dev_neg: VarId,
}

impl StepVars {
    pub fn mode_var(&self, mode: Mode) -> VarId {
        match mode {
            Mode::Production => self.on,
            Mode::Standby => self.by,
            Mode::ColdStart => self.cs,
            Mode::Shutdown => self.off,
        }
    }

    /// All twelve binaries in a fixed order.
    pub fn binaries(&self) -> [VarId; 12] {
        [
            self.on,
            self.by,
            self.cs,
            self.off,
            self.startup,
            self.shutdown,
            self.inoff,
            self.outoff,
            self.ms_on,
            self.ms_by,
            self.bes_cha_on,
            self.bes_dis_on,
        ]
    }
}

/// Handles into a built model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelVars {
    pub steps: Vec<StepVars>,
    /// Reactor temperature per state (τ + 1 entries), K.
    pub asr_temp: Vec<VarId>,
    /// Salt temperature per state; `None` without a tank.
    pub ms_temp: Option<Vec<VarId>>,
    /// kNm³.
    pub hs_level: Vec<VarId>,
    /// MWh.
    pub bes_energy: Vec<VarId>,
    pub alpha: Option<VarId>,
    /// Net revenue in CNY, including the constant capital charge.
    pub net_revenue: LinExpr,
    /// Sum of absolute setpoint deviations, K.
    pub temp_penalty: LinExpr,
}

/// Contiguous block of constraints added by one builder stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintGroup {
    pub name: String,
    pub range: Range<usize>,
}

#[derive(Debug, Clone)]
pub struct BuiltModel {
    pub model: MilpModel,
    pub vars: ModelVars,
    pub groups: Vec<ConstraintGroup>,
    /// Scheme-adjusted parameters the model was built from.
    pub params: PlantParams,
    pub scenario: ScenarioProfile,
    pub options: BuildOptions,
}

/// `params` with the scheme's storage sizes applied and the scenario's ambient
/// temperature, if it has one.
pub fn effective_params(
    scenario: &ScenarioProfile,
    params: &PlantParams,
    scheme: &StorageScheme,
) -> Result<PlantParams, SchedError> {
    let mut p = scheme.apply(params)?;
    if let Some(t) = scenario.ambient_temp {
        p.thermal.ambient_temp = t;
        p.validate()?;
    }
    Ok(p)
}

/// Initial conditions after clamping storage into the scheme's bands.
#[derive(Debug, Clone, Copy)]
struct Initial {
    asr_temp: f64,
    ms_temp: f64,
    /// kNm³.
    hs: f64,
    /// MWh.
    bes: f64,
    mode: Mode,
    load: f64,
}

pub struct ModelBuilder<'a> {
    pub model: MilpModel,
    pub vars: ModelVars,
    scenario: &'a ScenarioProfile,
    params: &'a PlantParams,
    options: &'a BuildOptions,
    init: Initial,
    groups: Vec<ConstraintGroup>,
}

fn tag(name: &str, t: usize) -> String {
    format!("{name}[t={t}]")
}

impl<'a> ModelBuilder<'a> {
    /// Declare every variable. `params` must already reflect `scheme`
    /// (see [`effective_params`]).
    pub fn new(
        scenario: &'a ScenarioProfile,
        params: &'a PlantParams,
        scheme: &'a StorageScheme,
        options: &'a BuildOptions,
    ) -> Result<Self, SchedError> {
        scenario.validate()?;
        if !(options.big_m_scale >= 1.0 && options.big_m_scale.is_finite()) {
            return Err(SchedError::Scenario(format!("big_m_scale must be at least 1, got {}", options.big_m_scale)));
        }
        let th = &params.thermal;
        let o = &params.operational;
        let ambient = th.ambient_temp;
        if !(ambient..=o.asr_temp_act_max).contains(&scenario.initial_asr_temp) {
            return Err(SchedError::Scenario(format!(
                "initial reactor temperature {} K outside [{ambient}, {}] K",
                scenario.initial_asr_temp, o.asr_temp_act_max
            )));
        }
        if scheme.has_mstes && !(o.ms_temp_min..=o.ms_temp_max).contains(&scenario.initial_ms_temp) {
            return Err(SchedError::Scenario(format!(
                "initial salt temperature {} K outside [{}, {}] K",
                scenario.initial_ms_temp, o.ms_temp_min, o.ms_temp_max
            )));
        }
        let init = Initial {
            asr_temp: scenario.initial_asr_temp,
            ms_temp: scenario.initial_ms_temp,
            hs: if scheme.has_hs { scenario.initial_hs_level.clamp(o.hs_min, o.hs_max) / KNM3 } else { 0.0 },
            bes: if scheme.has_bes {
                scenario.initial_bes_energy.clamp(o.bes_energy_min, o.bes_energy_max) / super::J_PER_MWH
            } else {
                0.0
            },
            mode: scenario.initial_mode,
            load: if scenario.initial_mode == Mode::Production {
                scenario.initial_load.clamp(o.load_min, o.load_max)
            } else {
                0.0
            },
        };

        let tau = scenario.horizon_steps();
        let mut m = MilpModel::new(Direction::Maximize);
        let mut steps = Vec::with_capacity(tau);
        for t in 0..tau {
            let b = |m: &mut MilpModel, n: &str| m.add_binary(&format!("{n}_{t}"));
            let c = |m: &mut MilpModel, n: &str, hi: f64| m.add_continuous(&format!("{n}_{t}"), 0.0, hi);
            let sv = StepVars {
                on: b(&mut m, "on")?,
                by: b(&mut m, "by")?,
                cs: b(&mut m, "cs")?,
                off: b(&mut m, "off")?,
                startup: b(&mut m, "su")?,
                shutdown: b(&mut m, "sd")?,
                inoff: b(&mut m, "inoff")?,
                outoff: b(&mut m, "outoff")?,
                ms_on: b(&mut m, "mson")?,
                ms_by: b(&mut m, "msby")?,
                bes_cha_on: b(&mut m, "bcha")?,
                bes_dis_on: b(&mut m, "bdis")?,
                load: c(&mut m, "load", o.load_max)?,
                cooling: c(&mut m, "qcool", o.cooling_duty_max / MW)?,
                ms_duty: c(&mut m, "qms", if scheme.has_mstes { o.ms_heat_duty_max / MW } else { 0.0 })?,
                suh_duty: c(&mut m, "qsu", o.suh_heat_duty_max / MW)?,
                ms_heater: c(&mut m, "pms", if scheme.has_mstes { o.ms_heater_power_max / MW } else { 0.0 })?,
                suh_power: c(&mut m, "psu", o.suh_power_max / MW)?,
                bes_charge: c(&mut m, "pcha", if scheme.has_bes { o.bes_charge_max / MW } else { 0.0 })?,
                bes_discharge: c(&mut m, "pdis", if scheme.has_bes { o.bes_discharge_max / MW } else { 0.0 })?,
                grid: c(&mut m, "grid", o.grid_import_max / MW)?,
                h2_production: c(&mut m, "fhp", o.hp_flow_max / KNM3)?,
                dev_pos: c(&mut m, "devp", f64::INFINITY)?,
                dev_neg: c(&mut m, "devn", f64::INFINITY)?,
            };
            if !scheme.has_mstes {
                m.fix(sv.ms_on, 0.0)?;
                m.fix(sv.ms_by, 1.0)?;
            }
            if !scheme.has_bes {
                m.fix(sv.bes_cha_on, 0.0)?;
                m.fix(sv.bes_dis_on, 0.0)?;
            }
            steps.push(sv);
        }

        let state_vars = |m: &mut MilpModel, n: &str, lo: f64, hi: f64, first: f64| -> Result<Vec<VarId>, SchedError> {
            let mut v = Vec::with_capacity(tau + 1);
            for k in 0..=tau {
                let id = m.add_continuous(&format!("{n}_{k}"), lo, hi)?;
                if k == 0 {
                    m.fix(id, first)?;
                }
                v.push(id);
            }
            Ok(v)
        };
        let asr_temp = state_vars(&mut m, "T", ambient, o.asr_temp_act_max, init.asr_temp)?;
        let ms_temp = if scheme.has_mstes {
            Some(state_vars(&mut m, "Tms", o.ms_temp_min, o.ms_temp_max, init.ms_temp)?)
        } else {
            None
        };
        let (hs_lo, hs_hi) = if scheme.has_hs { (o.hs_min / KNM3, o.hs_max / KNM3) } else { (0.0, 0.0) };
        let hs_level = state_vars(&mut m, "hs", hs_lo, hs_hi, init.hs)?;
        let (e_lo, e_hi) = if scheme.has_bes {
            (o.bes_energy_min / super::J_PER_MWH, o.bes_energy_max / super::J_PER_MWH)
        } else {
            (0.0, 0.0)
        };
        let bes_energy = state_vars(&mut m, "ebat", e_lo, e_hi, init.bes)?;
        let alpha = match options.renewable_scaling {
            None => None,
            Some(RenewableScaling::Shortfall) => Some(m.add_continuous("alpha", 0.0, 1.0)?),
            Some(RenewableScaling::Surplus { cap }) => {
                if !(cap >= 0.0) {
                    return Err(SchedError::Scenario(format!("surplus cap must be non-negative, got {cap}")));
                }
                Some(m.add_continuous("alpha", 0.0, cap)?)
            }
        };

        Ok(ModelBuilder {
            model: m,
            vars: ModelVars {
                steps,
                asr_temp,
                ms_temp,
                hs_level,
                bes_energy,
                alpha,
                net_revenue: LinExpr::new(),
                temp_penalty: LinExpr::new(),
            },
            scenario,
            params,
            options,
            init,
            groups: Vec::new(),
        })
    }

    fn dt_h(&self) -> f64 {
        self.scenario.dt / SECONDS_PER_HOUR
    }

    fn big_m(&self, m: f64) -> f64 {
        m * self.options.big_m_scale
    }

    fn group<F>(&mut self, name: &str, f: F) -> Result<ConstraintGroup, SchedError>
    where
        F: FnOnce(&mut Self) -> Result<(), SchedError>,
    {
        let start = self.model.constraints().len();
        f(self)?;
        let g = ConstraintGroup { name: name.to_string(), range: start..self.model.constraints().len() };
        self.groups.push(g.clone());
        Ok(g)
    }

    /// `on + by + cs` as an expression at step `t`.
    fn running(&self, t: usize) -> LinExpr {
        let s = &self.vars.steps[t];
        LinExpr::new().with(s.on, 1.0).with(s.by, 1.0).with(s.cs, 1.0)
    }

    /// Mode binaries, entry and exit links, the production temperature gate
    /// and the transition matrix.
    pub fn state_logic(&mut self) -> Result<ConstraintGroup, SchedError> {
        self.group("state_logic", |b| {
            let o = &b.params.operational;
            let gate_m = b.big_m(o.asr_temp_act_min - b.params.thermal.ambient_temp);
            let forbidden: Vec<(Mode, Mode)> = Mode::ALL
                .iter()
                .flat_map(|&f| Mode::ALL.iter().map(move |&to| (f, to)))
                .filter(|&(f, to)| !o.transitions.allows(f, to))
                .collect();
            for t in 0..b.vars.steps.len() {
                let s = b.vars.steps[t];
                let m = &mut b.model;
                m.add_constraint(
                    LinExpr::new().with(s.on, 1.0).with(s.by, 1.0).with(s.cs, 1.0).with(s.off, 1.0),
                    Sense::Eq,
                    1.0,
                    tag("state_exclusive", t),
                )?;
                let prev_on = |mode: Mode| -> LinExpr {
                    if t == 0 {
                        LinExpr::constant(if b.init.mode == mode { 1.0 } else { 0.0 })
                    } else {
                        LinExpr::term(b.vars.steps[t - 1].mode_var(mode), 1.0)
                    }
                };
                let mut e = LinExpr::new().with(s.on, 1.0).with(s.startup, -1.0).with(s.shutdown, 1.0);
                e.add_expr(&prev_on(Mode::Production), -1.0);
                m.add_constraint(e, Sense::Eq, 0.0, tag("production_link", t))?;
                m.add_constraint(
                    LinExpr::new().with(s.startup, 1.0).with(s.shutdown, 1.0),
                    Sense::Le,
                    1.0,
                    tag("production_switch", t),
                )?;
                let mut e = LinExpr::new().with(s.off, 1.0).with(s.inoff, -1.0).with(s.outoff, 1.0);
                e.add_expr(&prev_on(Mode::Shutdown), -1.0);
                m.add_constraint(e, Sense::Eq, 0.0, tag("shutdown_link", t))?;
                m.add_constraint(
                    LinExpr::new().with(s.inoff, 1.0).with(s.outoff, 1.0),
                    Sense::Le,
                    1.0,
                    tag("shutdown_switch", t),
                )?;
                // T_t >= T_act_min when producing.
                m.add_constraint(
                    LinExpr::new().with(b.vars.asr_temp[t], 1.0).with(s.on, -gate_m),
                    Sense::Ge,
                    o.asr_temp_act_min - gate_m,
                    tag("production_temp_gate", t),
                )?;
                for &(from, to) in &forbidden {
                    let mut e = prev_on(from);
                    e.add(s.mode_var(to), 1.0);
                    m.add_constraint(e, Sense::Le, 1.0, format!("transition_{}_{}[t={t}]", from.short(), to.short()))?;
                }
            }
            Ok(())
        })
    }

    /// Load band, ramp limits relaxed across start and stop, and load pinned
    /// to the minimum at the start-up step and the step before a shutdown.
    pub fn load_constraints(&mut self) -> Result<ConstraintGroup, SchedError> {
        self.group("load", |b| {
            let o = &b.params.operational;
            let big = b.big_m(o.load_max);
            let dt_h = b.dt_h();
            for t in 0..b.vars.steps.len() {
                let s = b.vars.steps[t];
                let prev_load = if t == 0 {
                    LinExpr::constant(b.init.load)
                } else {
                    LinExpr::term(b.vars.steps[t - 1].load, 1.0)
                };
                let m = &mut b.model;
                m.add_constraint(
                    LinExpr::new().with(s.load, 1.0).with(s.on, -o.load_min),
                    Sense::Ge,
                    0.0,
                    tag("load_min", t),
                )?;
                m.add_constraint(
                    LinExpr::new().with(s.load, 1.0).with(s.on, -o.load_max),
                    Sense::Le,
                    0.0,
                    tag("load_max", t),
                )?;
                let mut up = LinExpr::new().with(s.load, 1.0).with(s.startup, -big).with(s.shutdown, -big);
                up.add_expr(&prev_load, -1.0);
                m.add_constraint(up, Sense::Le, o.ramp_up * dt_h, tag("ramp_up", t))?;
                let mut down = LinExpr::new().with(s.load, -1.0).with(s.startup, -big).with(s.shutdown, -big);
                down.add_expr(&prev_load, 1.0);
                m.add_constraint(down, Sense::Le, o.ramp_down * dt_h, tag("ramp_down", t))?;
                m.add_constraint(
                    LinExpr::new().with(s.load, 1.0).with(s.startup, big),
                    Sense::Le,
                    o.load_min + big,
                    tag("startup_load_pin", t),
                )?;
                let mut pin = LinExpr::term(s.shutdown, big);
                pin.add_expr(&prev_load, 1.0);
                m.add_constraint(pin, Sense::Le, o.load_min + big, tag("shutdown_load_pin", t))?;
            }
            Ok(())
        })
    }

    /// Reactor and salt energy balances, duty caps, salt state logic and the
    /// salt-to-gas temperature gate.
    pub fn thermal_constraints(&mut self) -> Result<ConstraintGroup, SchedError> {
        self.group("thermal", |b| {
            let th = &b.params.thermal;
            let o = &b.params.operational;
            let dt = b.scenario.dt;
            let ambient = th.ambient_temp;
            // Gas enthalpy terms in MW: production flow is F0·on + F1·L.
            let prod_gas = th.rig_specific_heat * th.rig_temp_production - th.rog_specific_heat * th.rog_temp_production;
            let a_on = o.rig_flow_intercept / SECONDS_PER_HOUR * prod_gas / MW;
            let a_load = o.rig_flow_slope / SECONDS_PER_HOUR * prod_gas / MW + th.reaction_heat_coeff / MW;
            let a_idle = o.rig_flow_standby / SECONDS_PER_HOUR
                * th.rig_temp_standby
                * (th.rig_specific_heat - th.rog_specific_heat_standby)
                / MW;
            let cap = th.asr_capacitance / (MW * dt);
            let loss = 1.0 / (th.asr_loss_resistance * MW);
            let cool_m = b.big_m(o.cooling_duty_max / MW);
            let suh_m = b.big_m(o.suh_heat_duty_max / MW);
            let ms_m = b.big_m(o.ms_heat_duty_max / MW);
            for t in 0..b.vars.steps.len() {
                let s = b.vars.steps[t];
                let (t0, t1) = (b.vars.asr_temp[t], b.vars.asr_temp[t + 1]);
                // cap·(T1 − T0) = react + gas + qms + qsu − qcool − (T0 − Ta)/R
                let e = LinExpr::new()
                    .with(t1, cap)
                    .with(t0, -cap + loss)
                    .with(s.on, -a_on)
                    .with(s.load, -a_load)
                    .with(s.by, -a_idle)
                    .with(s.cs, -a_idle)
                    .with(s.ms_duty, -1.0)
                    .with(s.suh_duty, -1.0)
                    .with(s.cooling, 1.0);
                let run = b.running(t);
                let m = &mut b.model;
                m.add_constraint(e, Sense::Eq, loss * ambient, tag("asr_balance", t))?;
                m.add_constraint(
                    LinExpr::new().with(s.cooling, 1.0).with(s.on, -cool_m),
                    Sense::Le,
                    0.0,
                    tag("cooling_cap", t),
                )?;
                let mut e = LinExpr::term(s.suh_duty, 1.0);
                e.add_expr(&run, -suh_m);
                m.add_constraint(e, Sense::Le, 0.0, tag("suh_duty_cap", t))?;
                m.add_constraint(
                    LinExpr::new().with(s.suh_power, o.suh_eff).with(s.suh_duty, -1.0),
                    Sense::Eq,
                    0.0,
                    tag("suh_power", t),
                )?;
                m.add_constraint(
                    LinExpr::new().with(s.ms_on, 1.0).with(s.ms_by, 1.0),
                    Sense::Eq,
                    1.0,
                    tag("ms_mode", t),
                )?;
                let mut e = LinExpr::term(s.ms_on, 1.0);
                e.add_expr(&run, -1.0);
                m.add_constraint(e, Sense::Le, 0.0, tag("ms_needs_flow", t))?;
                m.add_constraint(
                    LinExpr::new().with(s.ms_duty, 1.0).with(s.ms_on, -ms_m),
                    Sense::Le,
                    0.0,
                    tag("ms_duty_cap", t),
                )?;
            }
            if let Some(ms) = b.vars.ms_temp.clone() {
                let cap = th.ms_capacitance() / (MW * dt);
                let loss = 1.0 / (th.ms_loss_resistance * MW);
                let gap = th.ms_approach_gap;
                let gate_m = b.big_m(th.rig_temp_standby + gap - o.ms_temp_min);
                for t in 0..b.vars.steps.len() {
                    let s = b.vars.steps[t];
                    let m = &mut b.model;
                    // cap·(Tms1 − Tms0) = −qms/η_ex + η_h·pms − (Tms0 − Ta)/R
                    m.add_constraint(
                        LinExpr::new()
                            .with(ms[t + 1], cap)
                            .with(ms[t], -cap + loss)
                            .with(s.ms_duty, 1.0 / o.ms_exchanger_eff)
                            .with(s.ms_heater, -o.ms_heater_eff),
                        Sense::Eq,
                        loss * ambient,
                        tag("ms_balance", t),
                    )?;
                    // Salt must be hotter than the gas it heats, by the approach gap.
                    m.add_constraint(
                        LinExpr::new()
                            .with(ms[t], 1.0)
                            .with(s.on, -th.rig_temp_production)
                            .with(s.by, -th.rig_temp_standby)
                            .with(s.cs, -th.rig_temp_standby)
                            .with(s.ms_on, -(gap + gate_m)),
                        Sense::Ge,
                        -gate_m,
                        tag("ms_temp_gate", t),
                    )?;
                }
            }
            Ok(())
        })
    }

    /// Hydrogen and battery balances, cyclic closure, auxiliary load and the
    /// plant power balance.
    pub fn mass_and_power(&mut self) -> Result<ConstraintGroup, SchedError> {
        self.group("mass_and_power", |b| {
            let o = &b.params.operational;
            let dt_h = b.dt_h();
            let tau = b.vars.steps.len();
            let h2_per_load = o.h2_consumption_rated / KNM3;
            let hp_mw = o.hp_specific_power * KNM3 / MW;
            for t in 0..tau {
                let s = b.vars.steps[t];
                let renew = b.scenario.renewable(t) / MW;
                let run = b.running(t);
                let (h0, h1) = (b.vars.hs_level[t], b.vars.hs_level[t + 1]);
                let (e0, e1) = (b.vars.bes_energy[t], b.vars.bes_energy[t + 1]);
                let alpha = b.vars.alpha;
                let scaling = b.options.renewable_scaling;
                let m = &mut b.model;
                m.add_constraint(
                    LinExpr::new()
                        .with(h1, 1.0)
                        .with(h0, -1.0)
                        .with(s.h2_production, -dt_h)
                        .with(s.load, h2_per_load * dt_h),
                    Sense::Eq,
                    0.0,
                    tag("hs_balance", t),
                )?;
                m.add_constraint(
                    LinExpr::new()
                        .with(e1, 1.0)
                        .with(e0, -1.0)
                        .with(s.bes_charge, -dt_h)
                        .with(s.bes_discharge, dt_h),
                    Sense::Eq,
                    0.0,
                    tag("bes_balance", t),
                )?;
                m.add_constraint(
                    LinExpr::new().with(s.bes_charge, 1.0).with(s.bes_cha_on, -b_big(o.bes_charge_max / MW, b.options)),
                    Sense::Le,
                    0.0,
                    tag("bes_charge_cap", t),
                )?;
                m.add_constraint(
                    LinExpr::new()
                        .with(s.bes_discharge, 1.0)
                        .with(s.bes_dis_on, -b_big(o.bes_discharge_max / MW, b.options)),
                    Sense::Le,
                    0.0,
                    tag("bes_discharge_cap", t),
                )?;
                m.add_constraint(
                    LinExpr::new().with(s.bes_cha_on, 1.0).with(s.bes_dis_on, 1.0),
                    Sense::Le,
                    1.0,
                    tag("bes_exclusive", t),
                )?;
                let mut bal = LinExpr::new()
                    .with(s.bes_charge, 1.0)
                    .with(s.bes_discharge, -1.0)
                    .with(s.ms_heater, 1.0)
                    .with(s.suh_power, 1.0)
                    .with(s.load, o.aux_load_coeff / MW)
                    .with(s.h2_production, hp_mw)
                    .with(s.grid, -1.0);
                bal.add_expr(&run, o.aux_base_power / MW);
                match (alpha, scaling) {
                    (Some(a), Some(RenewableScaling::Shortfall)) => {
                        bal.add(a, renew);
                    }
                    (Some(a), Some(RenewableScaling::Surplus { .. })) => {
                        bal.add(a, -renew);
                    }
                    _ => {}
                }
                m.add_constraint(bal, Sense::Le, renew, tag("power_balance", t))?;
            }
            if b.options.cyclic_storage && tau > 0 {
                let m = &mut b.model;
                m.add_constraint(
                    LinExpr::new().with(b.vars.hs_level[tau], 1.0).with(b.vars.hs_level[0], -1.0),
                    Sense::Eq,
                    0.0,
                    "hs_cyclic",
                )?;
                m.add_constraint(
                    LinExpr::new().with(b.vars.bes_energy[tau], 1.0).with(b.vars.bes_energy[0], -1.0),
                    Sense::Eq,
                    0.0,
                    "bes_cyclic",
                )?;
            }
            Ok(())
        })
    }

    /// Setpoint deviation rows and the weighted objective. Also fills
    /// [`ModelVars::net_revenue`] and [`ModelVars::temp_penalty`].
    pub fn objective(&mut self) -> Result<ConstraintGroup, SchedError> {
        self.group("objective", |b| {
            let o = &b.params.operational;
            let econ = &b.params.economic;
            let dt_h = b.dt_h();
            let mut revenue = LinExpr::constant(-econ.capex_om_cost(b.scenario.horizon_days()));
            let mut penalty = LinExpr::new();
            for t in 0..b.vars.steps.len() {
                let s = b.vars.steps[t];
                revenue.add(s.load, econ.nh3_price * o.nh3_rate_rated * dt_h);
                revenue.add(s.grid, -econ.grid_price * MW * dt_h);
                revenue.add(s.inoff, -econ.startup_cost);
                penalty.add(s.dev_pos, 1.0).add(s.dev_neg, 1.0);
                b.model.add_constraint(
                    LinExpr::new().with(b.vars.asr_temp[t + 1], 1.0).with(s.dev_pos, -1.0).with(s.dev_neg, 1.0),
                    Sense::Eq,
                    econ.temp_setpoint,
                    tag("temp_deviation", t),
                )?;
            }
            let mut obj = LinExpr::new();
            obj.add_expr(&revenue, econ.weight_profit);
            if b.options.quadratic_penalty {
                for s in &b.vars.steps {
                    b.model.add_quadratic_term(s.dev_pos, s.dev_pos, -econ.weight_temp)?;
                    b.model.add_quadratic_term(s.dev_neg, s.dev_neg, -econ.weight_temp)?;
                }
            } else {
                obj.add_expr(&penalty, -econ.weight_temp);
            }
            b.model.set_objective(obj)?;
            b.vars.net_revenue = revenue;
            b.vars.temp_penalty = penalty;
            Ok(())
        })
    }

    pub fn finish(self) -> BuiltModel {
        BuiltModel {
            model: self.model,
            vars: self.vars,
            groups: self.groups,
            params: self.params.clone(),
            scenario: self.scenario.clone(),
            options: self.options.clone(),
        }
    }
}

fn b_big(m: f64, options: &BuildOptions) -> f64 {
    m * options.big_m_scale
}

/// The complete scheduling model for one scenario and storage scheme.
pub fn build_full_model(
    scenario: &ScenarioProfile,
    params: &PlantParams,
    scheme: &StorageScheme,
    options: &BuildOptions,
) -> Result<BuiltModel, SchedError> {
    let p = effective_params(scenario, params, scheme)?;
    let mut b = ModelBuilder::new(scenario, &p, scheme, options)?;
    b.state_logic()?;
    b.load_constraints()?;
    b.thermal_constraints()?;
    b.mass_and_power()?;
    b.objective()?;
    Ok(b.finish())
}
