//! Plant parameters.
//!
//! Every quantity is held in canonical SI-style units: W, J, K, s, kg, Nm³,
//! t and CNY. Flow rates keep their per-hour design units (kg/h, Nm³/h, t/h)
//! because that is how the design data is quoted; the model builder divides
//! by 3600 wherever a flow enters a power balance.

mod config;
mod geometry;

pub use config::{
    load_config, normalize_entries, parse_config, to_config_string, ConfigEntry, CONFIG_KEYS,
};
pub use geometry::{
    estimate_capacitance, estimate_loss_resistance, hollow_cylinder_volume, load_geometry,
    GeometryFile, ReactorGeometry, WallGeometry,
};

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Seconds per hour, used for every per-hour flow conversion.
pub const SECONDS_PER_HOUR: f64 = 3600.0;

/// Rated ammonia output of the reference plant, t/h.
pub const RATED_NH3_T_PER_H: f64 = 24.9;
/// Molar mass of ammonia, g/mol.
pub const NH3_MOLAR_MASS_G_PER_MOL: f64 = 17.0;
/// Heat released per mole of ammonia formed, J/mol.
pub const NH3_REACTION_ENTHALPY_J_PER_MOL: f64 = 46_100.0;

/// Reaction heat at rated load from the stoichiometry of the rated output.
pub fn stoichiometric_reaction_heat(nh3_t_per_h: f64) -> f64 {
    let mol_per_h = nh3_t_per_h * 1.0e6 / NH3_MOLAR_MASS_G_PER_MOL;
    mol_per_h * NH3_REACTION_ENTHALPY_J_PER_MOL / SECONDS_PER_HOUR
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("unit mismatch for `{key}`: expected one of {expected}")]
    UnitMismatch { key: String, expected: String },
    #[error("config value for `{key}` is not a number")]
    NotANumber { key: String },
    #[error("config parse error: {0}")]
    Syntax(String),
    #[error("cannot read `{path}`: {reason}")]
    Io { path: String, reason: String },
}

impl ParamError {
    pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Self {
        ParamError::Invalid { field: field.to_string(), reason: reason.into() }
    }

    /// Field or key the error refers to, when there is one.
    pub fn field(&self) -> Option<&str> {
        match self {
            ParamError::Invalid { field, .. } => Some(field),
            ParamError::UnknownKey(k) => Some(k),
            ParamError::UnitMismatch { key, .. } | ParamError::NotANumber { key } => Some(key),
            _ => None,
        }
    }
}

/// Operating state of the ammonia synthesis section.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Production,
    Standby,
    ColdStart,
    Shutdown,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Production, Mode::Standby, Mode::ColdStart, Mode::Shutdown];

    pub fn index(self) -> usize {
        match self {
            Mode::Production => 0,
            Mode::Standby => 1,
            Mode::ColdStart => 2,
            Mode::Shutdown => 3,
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            Mode::Production => "on",
            Mode::Standby => "by",
            Mode::ColdStart => "cs",
            Mode::Shutdown => "off",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        match s.trim().to_ascii_lowercase().as_str() {
            "on" | "production" => Some(Mode::Production),
            "by" | "standby" | "hot_standby" => Some(Mode::Standby),
            "cs" | "cold_start" | "coldstart" => Some(Mode::ColdStart),
            "off" | "shutdown" => Some(Mode::Shutdown),
            _ => None,
        }
    }

    /// Recycle gas circulates (production, standby or cold start).
    pub fn is_running(self) -> bool {
        self != Mode::Shutdown
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short())
    }
}

/// Allowed state successors, `allowed[from][to]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    pub allowed: [[bool; 4]; 4],
}

impl Default for TransitionMatrix {
    fn default() -> Self {
        use Mode::*;
        let mut m = TransitionMatrix { allowed: [[false; 4]; 4] };
        for (from, tos) in [
            (Shutdown, &[Shutdown, ColdStart][..]),
            (ColdStart, &[ColdStart, Production][..]),
            (Production, &[Production, Standby, Shutdown][..]),
            (Standby, &[Standby, Production, Shutdown][..]),
        ] {
            for to in tos {
                m.allowed[from.index()][to.index()] = true;
            }
        }
        m
    }
}

impl TransitionMatrix {
    pub fn allows(&self, from: Mode, to: Mode) -> bool {
        self.allowed[from.index()][to.index()]
    }

    pub fn set(&mut self, from: Mode, to: Mode, allowed: bool) {
        self.allowed[from.index()][to.index()] = allowed;
    }

    /// `from->to` pairs, in mode order.
    pub fn pairs(&self) -> Vec<(Mode, Mode)> {
        let mut out = Vec::new();
        for from in Mode::ALL {
            for to in Mode::ALL {
                if self.allows(from, to) {
                    out.push((from, to));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalParams {
    /// Lumped heat capacity of the reactor, J/K.
    pub asr_capacitance: f64,
    /// Reactor-to-ambient thermal resistance, K/W.
    pub asr_loss_resistance: f64,
    /// Salt-tank-to-ambient thermal resistance, K/W.
    pub ms_loss_resistance: f64,
    pub ms_density: f64,
    pub ms_specific_heat: f64,
    pub ms_volume: f64,
    /// Reaction heat at unit load, W.
    pub reaction_heat_coeff: f64,
    pub rig_specific_heat: f64,
    pub rog_specific_heat: f64,
    /// Outlet gas heat capacity while no reaction takes place (standby and cold start).
    pub rog_specific_heat_standby: f64,
    pub rig_temp_production: f64,
    pub rog_temp_production: f64,
    pub rig_temp_standby: f64,
    /// Gas outlet temperature sits this far below the salt temperature, K.
    pub ms_approach_gap: f64,
    pub ambient_temp: f64,
}

impl Default for ThermalParams {
    fn default() -> Self {
        ThermalParams {
            asr_capacitance: 1.918e8,
            asr_loss_resistance: 0.0052,
            ms_loss_resistance: 0.0535,
            ms_density: 1924.6,
            ms_specific_heat: 1488.0,
            ms_volume: 20.0,
            reaction_heat_coeff: stoichiometric_reaction_heat(RATED_NH3_T_PER_H),
            rig_specific_heat: 3461.0,
            rog_specific_heat: 3297.0,
            rog_specific_heat_standby: 3461.0,
            rig_temp_production: 143.0 + 273.15,
            rog_temp_production: 390.4 + 273.15,
            rig_temp_standby: 390.4 + 273.15,
            ms_approach_gap: 15.0,
            ambient_temp: 15.0 + 273.0,
        }
    }
}

impl ThermalParams {
    /// Heat capacity of the salt inventory, J/K.
    pub fn ms_capacitance(&self) -> f64 {
        self.ms_density * self.ms_volume * self.ms_specific_heat
    }

    /// Time constant of free reactor cooling, s.
    pub fn asr_time_constant(&self) -> f64 {
        self.asr_capacitance * self.asr_loss_resistance
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        let positive = [
            ("asr_capacitance", self.asr_capacitance),
            ("asr_loss_resistance", self.asr_loss_resistance),
            ("ms_loss_resistance", self.ms_loss_resistance),
            ("ms_density", self.ms_density),
            ("ms_specific_heat", self.ms_specific_heat),
            ("ms_volume", self.ms_volume),
            ("reaction_heat_coeff", self.reaction_heat_coeff),
            ("rig_specific_heat", self.rig_specific_heat),
            ("rog_specific_heat", self.rog_specific_heat),
            ("rog_specific_heat_standby", self.rog_specific_heat_standby),
            ("rig_temp_production", self.rig_temp_production),
            ("rog_temp_production", self.rog_temp_production),
            ("rig_temp_standby", self.rig_temp_standby),
            ("ms_approach_gap", self.ms_approach_gap),
            ("ambient_temp", self.ambient_temp),
        ];
        for (name, v) in positive {
            require_positive(name, v)?;
        }
        if self.rig_temp_standby <= self.rig_temp_production {
            return Err(ParamError::invalid(
                "rig_temp_standby",
                "must exceed rig_temp_production",
            ));
        }
        if self.ambient_temp >= self.rig_temp_production {
            return Err(ParamError::invalid("ambient_temp", "must be below rig_temp_production"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperationalParams {
    pub load_min: f64,
    pub load_max: f64,
    /// Largest load decrease per hour (magnitude).
    pub ramp_down: f64,
    /// Largest load increase per hour.
    pub ramp_up: f64,
    pub asr_temp_act_min: f64,
    pub asr_temp_act_max: f64,
    pub ms_temp_min: f64,
    pub ms_temp_max: f64,
    pub cooling_duty_max: f64,
    pub ms_heat_duty_max: f64,
    pub suh_heat_duty_max: f64,
    pub ms_heater_power_max: f64,
    pub suh_power_max: f64,
    pub ms_exchanger_eff: f64,
    pub ms_heater_eff: f64,
    pub suh_eff: f64,
    /// Inlet gas flow at zero load, kg/h.
    pub rig_flow_intercept: f64,
    /// Inlet gas flow per unit load, kg/h.
    pub rig_flow_slope: f64,
    pub rig_flow_standby: f64,
    /// Nm³/h at unit load.
    pub h2_consumption_rated: f64,
    /// t/h at unit load.
    pub nh3_rate_rated: f64,
    /// W·h per Nm³ of hydrogen.
    pub hp_specific_power: f64,
    /// Nm³/h.
    pub hp_flow_max: f64,
    pub hs_min: f64,
    pub hs_max: f64,
    pub bes_energy_min: f64,
    pub bes_energy_max: f64,
    pub bes_charge_max: f64,
    pub bes_discharge_max: f64,
    pub aux_base_power: f64,
    pub aux_load_coeff: f64,
    pub grid_import_max: f64,
    pub transitions: TransitionMatrix,
}

impl Default for OperationalParams {
    fn default() -> Self {
        OperationalParams {
            load_min: 0.3,
            load_max: 1.1,
            ramp_down: 0.25,
            ramp_up: 0.25,
            asr_temp_act_min: 420.0 + 273.0,
            asr_temp_act_max: 490.0 + 273.0,
            ms_temp_min: 280.0 + 273.15,
            ms_temp_max: 565.0 + 273.15,
            cooling_duty_max: 4.1e6,
            ms_heat_duty_max: 3.0e6,
            suh_heat_duty_max: 1.9e6,
            ms_heater_power_max: 3.1e6,
            suh_power_max: 2.0e6,
            ms_exchanger_eff: 0.9,
            ms_heater_eff: 0.95,
            suh_eff: 0.95,
            rig_flow_intercept: 13_368.0,
            rig_flow_slope: 62_661.43,
            rig_flow_standby: 15_205.89,
            h2_consumption_rated: 49_202.4,
            nh3_rate_rated: RATED_NH3_T_PER_H,
            hp_specific_power: 4800.0,
            hp_flow_max: 200.0e6 / 4800.0,
            hs_min: 1.5e4,
            hs_max: 1.35e5,
            // 4 MWh battery held between 10% and 90% state of charge.
            bes_energy_min: 0.1 * 4.0 * 3.6e9,
            bes_energy_max: 0.9 * 4.0 * 3.6e9,
            bes_charge_max: 1.0e6,
            bes_discharge_max: 1.0e6,
            aux_base_power: 3.97e6,
            aux_load_coeff: 1.59e7,
            grid_import_max: 2.0e7,
            transitions: TransitionMatrix::default(),
        }
    }
}

impl OperationalParams {
    /// Inlet gas flow in production at load `load`, kg/h.
    pub fn rig_flow(&self, load: f64) -> f64 {
        self.rig_flow_intercept + load * self.rig_flow_slope
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.load_min > 0.0 && self.load_min < 1.0) {
            return Err(ParamError::invalid("load_min", "must lie in (0, 1)"));
        }
        if !(self.load_max >= 1.0) || !self.load_max.is_finite() {
            return Err(ParamError::invalid("load_max", "must be at least 1"));
        }
        for (name, v) in [
            ("ramp_down", self.ramp_down),
            ("ramp_up", self.ramp_up),
            ("cooling_duty_max", self.cooling_duty_max),
            ("ms_heat_duty_max", self.ms_heat_duty_max),
            ("suh_heat_duty_max", self.suh_heat_duty_max),
            ("ms_heater_power_max", self.ms_heater_power_max),
            ("suh_power_max", self.suh_power_max),
            ("rig_flow_intercept", self.rig_flow_intercept),
            ("rig_flow_slope", self.rig_flow_slope),
            ("rig_flow_standby", self.rig_flow_standby),
            ("h2_consumption_rated", self.h2_consumption_rated),
            ("nh3_rate_rated", self.nh3_rate_rated),
            ("hp_specific_power", self.hp_specific_power),
            ("hp_flow_max", self.hp_flow_max),
            ("aux_base_power", self.aux_base_power),
            ("aux_load_coeff", self.aux_load_coeff),
            ("asr_temp_act_min", self.asr_temp_act_min),
            ("ms_temp_min", self.ms_temp_min),
        ] {
            require_positive(name, v)?;
        }
        for (name, v) in [
            ("hs_min", self.hs_min),
            ("bes_energy_min", self.bes_energy_min),
            ("bes_charge_max", self.bes_charge_max),
            ("bes_discharge_max", self.bes_discharge_max),
            ("grid_import_max", self.grid_import_max),
        ] {
            require_non_negative(name, v)?;
        }
        if self.asr_temp_act_min >= self.asr_temp_act_max {
            return Err(ParamError::invalid("asr_temp_act_max", "must exceed asr_temp_act_min"));
        }
        if self.ms_temp_min >= self.ms_temp_max {
            return Err(ParamError::invalid("ms_temp_max", "must exceed ms_temp_min"));
        }
        if self.hs_min >= self.hs_max {
            return Err(ParamError::invalid("hs_max", "must exceed hs_min"));
        }
        if self.bes_energy_min >= self.bes_energy_max {
            return Err(ParamError::invalid("bes_energy_max", "must exceed bes_energy_min"));
        }
        for (name, v) in [
            ("ms_exchanger_eff", self.ms_exchanger_eff),
            ("ms_heater_eff", self.ms_heater_eff),
            ("suh_eff", self.suh_eff),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(ParamError::invalid(name, "efficiency must lie in (0, 1]"));
            }
        }
        if self.suh_heat_duty_max > self.suh_eff * self.suh_power_max * (1.0 + 1e-12) {
            return Err(ParamError::invalid(
                "suh_heat_duty_max",
                "cannot exceed suh_eff x suh_power_max",
            ));
        }
        Ok(())
    }
}

/// Annualised cost data for one plant component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentCost {
    pub name: String,
    /// CNY per unit of `capacity`.
    pub unit_capital_cost: f64,
    pub capacity: f64,
    /// Capacity unit label (kW, kWh, kg, t_per_yr).
    pub unit: String,
    pub life_years: f64,
    /// Annual O&M cost as a fraction of capital cost.
    pub om_ratio: f64,
}

impl ComponentCost {
    fn new(name: &str, unit_cost: f64, capacity: f64, unit: &str, life: f64, om: f64) -> Self {
        ComponentCost {
            name: name.to_string(),
            unit_capital_cost: unit_cost,
            capacity,
            unit: unit.to_string(),
            life_years: life,
            om_ratio: om,
        }
    }

    pub fn capital(&self) -> f64 {
        self.unit_capital_cost * self.capacity
    }

    /// Annualised investment plus O&M, CNY/yr.
    pub fn annual_cost(&self, discount_rate: f64) -> f64 {
        self.capital() * (capital_recovery_factor(discount_rate, self.life_years) + self.om_ratio)
    }
}

/// Capital recovery factor r(1+r)^n / ((1+r)^n - 1); 1/n at zero rate.
pub fn capital_recovery_factor(rate: f64, life_years: f64) -> f64 {
    if rate.abs() < 1e-12 {
        return 1.0 / life_years;
    }
    let g = (1.0 + rate).powf(life_years);
    rate * g / (g - 1.0)
}

pub const COMPONENT_WIND: &str = "wind";
pub const COMPONENT_PV: &str = "pv";
pub const COMPONENT_ELECTROLYZER: &str = "electrolyzer";
pub const COMPONENT_AMMONIA: &str = "ammonia_synthesis";
pub const COMPONENT_HS: &str = "hydrogen_storage";
pub const COMPONENT_BES: &str = "bes";
pub const COMPONENT_MSTES: &str = "mstes";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EconomicParams {
    /// CNY/t.
    pub nh3_price: f64,
    /// CNY per W·h.
    pub grid_price: f64,
    /// CNY per entry into shutdown.
    pub startup_cost: f64,
    pub components: Vec<ComponentCost>,
    pub discount_rate: f64,
    /// Hydrogen density used to express storage capacity in kg, kg/Nm³.
    pub h2_density: f64,
    pub weight_profit: f64,
    /// Objective weight per kelvin of setpoint deviation per step.
    pub weight_temp: f64,
    pub temp_setpoint: f64,
}

impl Default for EconomicParams {
    fn default() -> Self {
        let ms_kwh = {
            let t = ThermalParams::default();
            let o = OperationalParams::default();
            t.ms_capacitance() * (o.ms_temp_max - o.ms_temp_min) / 3.6e6
        };
        EconomicParams {
            nh3_price: 4200.0,
            grid_price: 1.2 / 1000.0,
            startup_cost: 1.0e5,
            components: vec![
                ComponentCost::new(COMPONENT_WIND, 3700.0, 450_000.0, "kW", 25.0, 0.02),
                ComponentCost::new(COMPONENT_PV, 3450.0, 150_000.0, "kW", 25.0, 0.01),
                ComponentCost::new(COMPONENT_ELECTROLYZER, 500.0, 200_000.0, "kW", 25.0, 0.02),
                ComponentCost::new(COMPONENT_AMMONIA, 1100.0, 200_000.0, "t_per_yr", 25.0, 0.02),
                ComponentCost::new(COMPONENT_HS, 1750.0, 150_000.0 * 0.08988, "kg", 25.0, 0.01),
                ComponentCost::new(COMPONENT_BES, 1700.0, 4000.0, "kWh", 12.0, 0.02),
                ComponentCost::new(COMPONENT_MSTES, 150.0, ms_kwh, "kWh", 25.0, 0.02),
            ],
            discount_rate: 0.05,
            h2_density: 0.08988,
            weight_profit: 1.0,
            weight_temp: 50.0,
            temp_setpoint: 733.0,
        }
    }
}

impl EconomicParams {
    pub fn component(&self, name: &str) -> Option<&ComponentCost> {
        self.components.iter().find(|c| c.name == name)
    }

    pub fn component_mut(&mut self, name: &str) -> Option<&mut ComponentCost> {
        self.components.iter_mut().find(|c| c.name == name)
    }

    /// Investment plus O&M cost attributed to a horizon of `days` days.
    pub fn capex_om_cost(&self, days: f64) -> f64 {
        let annual: f64 = self.components.iter().map(|c| c.annual_cost(self.discount_rate)).sum();
        days * annual / 365.0
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        require_non_negative("nh3_price", self.nh3_price)?;
        require_non_negative("grid_price", self.grid_price)?;
        require_non_negative("startup_cost", self.startup_cost)?;
        require_non_negative("discount_rate", self.discount_rate)?;
        require_positive("h2_density", self.h2_density)?;
        require_positive("weight_profit", self.weight_profit)?;
        require_non_negative("weight_temp", self.weight_temp)?;
        require_positive("temp_setpoint", self.temp_setpoint)?;
        for c in &self.components {
            let prefix = format!("capex_{}", c.name);
            require_non_negative(&format!("{prefix}_unit_cost"), c.unit_capital_cost)?;
            require_non_negative(&format!("{prefix}_capacity"), c.capacity)?;
            require_positive(&format!("{prefix}_life_years"), c.life_years)?;
            require_non_negative(&format!("{prefix}_om_ratio"), c.om_ratio)?;
        }
        Ok(())
    }
}

/// Complete parameter set. Immutable once built; share by reference.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PlantParams {
    pub thermal: ThermalParams,
    pub operational: OperationalParams,
    pub economic: EconomicParams,
}

impl PlantParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        self.thermal.validate()?;
        self.operational.validate()?;
        self.economic.validate()?;
        if self.thermal.ambient_temp >= self.operational.asr_temp_act_min {
            return Err(ParamError::invalid("ambient_temp", "must be below asr_temp_act_min"));
        }
        Ok(())
    }
}

fn require_positive(name: &str, v: f64) -> Result<(), ParamError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ParamError::invalid(name, format!("must be positive and finite, got {v}")))
    }
}

fn require_non_negative(name: &str, v: f64) -> Result<(), ParamError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(ParamError::invalid(name, format!("must be non-negative and finite, got {v}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn defaults_validate() {
        PlantParams::default().validate().unwrap();
    }

    #[test]
    fn reaction_heat_from_stoichiometry() {
        // 24.9 t/h -> 1.4647e6 mol/h -> x 46.1 kJ/mol / 3600 s
        let q = stoichiometric_reaction_heat(24.9);
        assert_relative_eq!(q, 1.8756e7, max_relative = 1e-4);
    }

    #[test]
    fn electrolyzer_flow_cap_matches_plant_size() {
        let o = OperationalParams::default();
        assert_relative_eq!(o.hp_flow_max, 41_666.666_666_7, max_relative = 1e-9);
        assert_relative_eq!(o.hp_flow_max * o.hp_specific_power, 2.0e8, max_relative = 1e-12);
    }

    #[test]
    fn crf_reference_values() {
        assert_relative_eq!(capital_recovery_factor(0.08, 12.0), 0.13270, epsilon = 1e-5);
        assert_relative_eq!(capital_recovery_factor(0.0, 10.0), 0.1);
    }

    #[test]
    fn single_bes_component_cost_over_fifteen_days() {
        let mut e = EconomicParams::default();
        e.discount_rate = 0.08;
        e.components = vec![ComponentCost::new(COMPONENT_BES, 1700.0, 1.0, "kWh", 12.0, 0.02)];
        // 15/365 x (1700 x 0.13270 + 34)
        let expected = 15.0 / 365.0 * (1700.0 * capital_recovery_factor(0.08, 12.0) + 34.0);
        assert_relative_eq!(e.capex_om_cost(15.0), expected, max_relative = 1e-12);
        assert_relative_eq!(e.capex_om_cost(15.0), 10.67, epsilon = 0.01);
    }

    #[test]
    fn hs_only_fleet_cost_matches_reference_table() {
        // Wind, PV, electrolyzer, synthesis and the 150,000 Nm³ tank over 15 days:
        // 921.96 x 10^4 CNY in the reference comparison table.
        let mut e = EconomicParams::default();
        e.components.retain(|c| c.name != COMPONENT_BES && c.name != COMPONENT_MSTES);
        assert_relative_eq!(e.capex_om_cost(15.0), 921.96e4, max_relative = 2e-4);
        // Adding the 32 MWh battery gives 951.66 x 10^4 CNY.
        let mut big = e.clone();
        big.components.push(ComponentCost::new(COMPONENT_BES, 1700.0, 32_000.0, "kWh", 12.0, 0.02));
        assert_relative_eq!(big.capex_om_cost(15.0), 951.66e4, max_relative = 2e-4);
    }

    #[test]
    fn invalid_load_min_names_field() {
        let mut p = PlantParams::default();
        p.operational.load_min = 1.2;
        let err = p.validate().unwrap_err();
        assert_eq!(err.field(), Some("load_min"));
    }

    #[test]
    fn standby_inlet_must_exceed_production_inlet() {
        let mut t = ThermalParams::default();
        t.rig_temp_standby = t.rig_temp_production - 1.0;
        assert_eq!(t.validate().unwrap_err().field(), Some("rig_temp_standby"));
    }

    #[test]
    fn default_transitions() {
        let m = TransitionMatrix::default();
        assert!(m.allows(Mode::Shutdown, Mode::ColdStart));
        assert!(!m.allows(Mode::Shutdown, Mode::Production));
        assert!(m.allows(Mode::Standby, Mode::Production));
        assert!(!m.allows(Mode::ColdStart, Mode::Standby));
        assert_eq!(m.pairs().len(), 10);
    }
}
