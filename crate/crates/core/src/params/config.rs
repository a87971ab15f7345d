//! Flat key-value parameter files.
//!
//! Each key carries its unit as a suffix (`ambient_temp_K`, `grid_price_CNY_per_kWh`).
//! A handful of alternative suffixes are accepted and converted on load; the
//! canonical suffix is the one written back out. The file syntax is TOML with
//! only top-level keys.

use super::{Mode, ParamError, PlantParams, TransitionMatrix};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dim {
    Power,
    Energy,
    Temperature,
    /// Single accepted unit suffix.
    Fixed(&'static str),
    /// Price per energy: canonical CNY/(W·h).
    EnergyPrice,
}

impl Dim {
    /// `(suffix, scale, offset)`; canonical value = raw * scale + offset.
    fn units(self) -> &'static [(&'static str, f64, f64)] {
        match self {
            Dim::Power => &[("W", 1.0, 0.0), ("kW", 1e3, 0.0), ("MW", 1e6, 0.0)],
            Dim::Energy => &[("J", 1.0, 0.0), ("kWh", 3.6e6, 0.0), ("MWh", 3.6e9, 0.0)],
            Dim::Temperature => &[("K", 1.0, 0.0), ("C", 1.0, 273.15)],
            Dim::EnergyPrice => &[("CNY_per_Wh", 1.0, 0.0), ("CNY_per_kWh", 1e-3, 0.0)],
            Dim::Fixed(u) => match u {
                "" => &[("", 1.0, 0.0)],
                "J_per_K" => &[("J_per_K", 1.0, 0.0)],
                "K_per_W" => &[("K_per_W", 1.0, 0.0)],
                "kg_per_m3" => &[("kg_per_m3", 1.0, 0.0)],
                "J_per_kgK" => &[("J_per_kgK", 1.0, 0.0)],
                "m3" => &[("m3", 1.0, 0.0)],
                "K" => &[("K", 1.0, 0.0)],
                "per_h" => &[("per_h", 1.0, 0.0)],
                "kg_per_h" => &[("kg_per_h", 1.0, 0.0)],
                "Nm3_per_h" => &[("Nm3_per_h", 1.0, 0.0)],
                "t_per_h" => &[("t_per_h", 1.0, 0.0)],
                "Wh_per_Nm3" => &[("Wh_per_Nm3", 1.0, 0.0)],
                "Nm3" => &[("Nm3", 1.0, 0.0)],
                "CNY_per_t" => &[("CNY_per_t", 1.0, 0.0)],
                "CNY" => &[("CNY", 1.0, 0.0)],
                "kg_per_Nm3" => &[("kg_per_Nm3", 1.0, 0.0)],
                "CNY_per_K" => &[("CNY_per_K", 1.0, 0.0)],
                _ => &[],
            },
        }
    }

    fn canonical(self) -> &'static str {
        self.units()[0].0
    }

    fn convert(self, suffix: &str, raw: f64) -> Option<f64> {
        self.units().iter().find(|(s, _, _)| *s == suffix).map(|(_, k, o)| raw * k + o)
    }

    fn expected(self) -> String {
        self.units().iter().map(|(s, _, _)| format!("`{s}`")).collect::<Vec<_>>().join(", ")
    }
}

type Accessor = fn(&mut PlantParams) -> &mut f64;

/// One scalar parameter reachable from a config file.
pub struct ConfigEntry {
    pub base: &'static str,
    dim: Dim,
    access: Accessor,
}

impl ConfigEntry {
    /// Key as written in canonical form, e.g. `ambient_temp_K`.
    pub fn canonical_key(&self) -> String {
        join_key(self.base, self.dim.canonical())
    }
}

fn join_key(base: &str, suffix: &str) -> String {
    if suffix.is_empty() {
        base.to_string()
    } else {
        format!("{base}_{suffix}")
    }
}

macro_rules! entries {
    ($( $base:literal, $dim:expr, $($path:ident).+ ;)*) => {
        &[ $( ConfigEntry { base: $base, dim: $dim, access: |p: &mut PlantParams| &mut p.$($path).+ }, )* ]
    };
}

/// Every scalar key, in the order written by [`to_config_string`].
pub static CONFIG_KEYS: &[ConfigEntry] = entries! {
    "asr_capacitance", Dim::Fixed("J_per_K"), thermal.asr_capacitance;
    "asr_loss_resistance", Dim::Fixed("K_per_W"), thermal.asr_loss_resistance;
    "ms_loss_resistance", Dim::Fixed("K_per_W"), thermal.ms_loss_resistance;
    "ms_density", Dim::Fixed("kg_per_m3"), thermal.ms_density;
    "ms_specific_heat", Dim::Fixed("J_per_kgK"), thermal.ms_specific_heat;
    "ms_volume", Dim::Fixed("m3"), thermal.ms_volume;
    "reaction_heat_coeff", Dim::Power, thermal.reaction_heat_coeff;
    "rig_specific_heat", Dim::Fixed("J_per_kgK"), thermal.rig_specific_heat;
    "rog_specific_heat", Dim::Fixed("J_per_kgK"), thermal.rog_specific_heat;
    "rog_specific_heat_standby", Dim::Fixed("J_per_kgK"), thermal.rog_specific_heat_standby;
    "rig_temp_production", Dim::Temperature, thermal.rig_temp_production;
    "rog_temp_production", Dim::Temperature, thermal.rog_temp_production;
    "rig_temp_standby", Dim::Temperature, thermal.rig_temp_standby;
    "ms_approach_gap", Dim::Fixed("K"), thermal.ms_approach_gap;
    "ambient_temp", Dim::Temperature, thermal.ambient_temp;
    "load_min", Dim::Fixed(""), operational.load_min;
    "load_max", Dim::Fixed(""), operational.load_max;
    "ramp_down", Dim::Fixed("per_h"), operational.ramp_down;
    "ramp_up", Dim::Fixed("per_h"), operational.ramp_up;
    "asr_temp_act_min", Dim::Temperature, operational.asr_temp_act_min;
    "asr_temp_act_max", Dim::Temperature, operational.asr_temp_act_max;
    "ms_temp_min", Dim::Temperature, operational.ms_temp_min;
    "ms_temp_max", Dim::Temperature, operational.ms_temp_max;
    "cooling_duty_max", Dim::Power, operational.cooling_duty_max;
    "ms_heat_duty_max", Dim::Power, operational.ms_heat_duty_max;
    "suh_heat_duty_max", Dim::Power, operational.suh_heat_duty_max;
    "ms_heater_power_max", Dim::Power, operational.ms_heater_power_max;
    "suh_power_max", Dim::Power, operational.suh_power_max;
    "ms_exchanger_eff", Dim::Fixed(""), operational.ms_exchanger_eff;
    "ms_heater_eff", Dim::Fixed(""), operational.ms_heater_eff;
    "suh_eff", Dim::Fixed(""), operational.suh_eff;
    "rig_flow_intercept", Dim::Fixed("kg_per_h"), operational.rig_flow_intercept;
    "rig_flow_slope", Dim::Fixed("kg_per_h"), operational.rig_flow_slope;
    "rig_flow_standby", Dim::Fixed("kg_per_h"), operational.rig_flow_standby;
    "h2_consumption_rated", Dim::Fixed("Nm3_per_h"), operational.h2_consumption_rated;
    "nh3_rate_rated", Dim::Fixed("t_per_h"), operational.nh3_rate_rated;
    "hp_specific_power", Dim::Fixed("Wh_per_Nm3"), operational.hp_specific_power;
    "hp_flow_max", Dim::Fixed("Nm3_per_h"), operational.hp_flow_max;
    "hs_min", Dim::Fixed("Nm3"), operational.hs_min;
    "hs_max", Dim::Fixed("Nm3"), operational.hs_max;
    "bes_energy_min", Dim::Energy, operational.bes_energy_min;
    "bes_energy_max", Dim::Energy, operational.bes_energy_max;
    "bes_charge_max", Dim::Power, operational.bes_charge_max;
    "bes_discharge_max", Dim::Power, operational.bes_discharge_max;
    "aux_base_power", Dim::Power, operational.aux_base_power;
    "aux_load_coeff", Dim::Power, operational.aux_load_coeff;
    "grid_import_max", Dim::Power, operational.grid_import_max;
    "nh3_price", Dim::Fixed("CNY_per_t"), economic.nh3_price;
    "grid_price", Dim::EnergyPrice, economic.grid_price;
    "startup_cost", Dim::Fixed("CNY"), economic.startup_cost;
    "discount_rate", Dim::Fixed(""), economic.discount_rate;
    "h2_density", Dim::Fixed("kg_per_Nm3"), economic.h2_density;
    "weight_profit", Dim::Fixed(""), economic.weight_profit;
    "weight_temp", Dim::Fixed("CNY_per_K"), economic.weight_temp;
    "temp_setpoint", Dim::Temperature, economic.temp_setpoint;
};

const TRANSITIONS_KEY: &str = "allowed_transitions";
const COMPONENT_PREFIX: &str = "capex_";
const COMPONENT_FIELDS: [&str; 4] = ["unit_cost", "capacity", "life_years", "om_ratio"];

/// Resolved key: which scalar it sets and the value in canonical units.
enum Target {
    Scalar(&'static ConfigEntry),
    Component { name: String, field: &'static str },
}

fn resolve(key: &str, raw: f64, params: &PlantParams) -> Result<(Target, String, f64), ParamError> {
    let mut mismatch: Option<Dim> = None;
    for entry in CONFIG_KEYS {
        if key == entry.base && entry.dim.convert("", raw).is_some() {
            return Ok((Target::Scalar(entry), entry.canonical_key(), raw));
        }
        if let Some(suffix) = key.strip_prefix(entry.base).and_then(|r| r.strip_prefix('_')) {
            match entry.dim.convert(suffix, raw) {
                Some(v) => return Ok((Target::Scalar(entry), entry.canonical_key(), v)),
                None => {
                    // A longer base may still match (e.g. `rog_specific_heat_standby`).
                    if mismatch.is_none() {
                        mismatch = Some(entry.dim);
                    }
                }
            }
        } else if key == entry.base {
            mismatch = Some(entry.dim);
        }
    }
    if let Some(rest) = key.strip_prefix(COMPONENT_PREFIX) {
        for c in &params.economic.components {
            let Some(tail) = rest.strip_prefix(c.name.as_str()).and_then(|r| r.strip_prefix('_'))
            else {
                continue;
            };
            for field in COMPONENT_FIELDS {
                let Some(unit) = tail.strip_prefix(field) else { continue };
                let expected = component_suffix(field, &c.unit);
                let unit = unit.strip_prefix('_').unwrap_or(unit);
                if unit == expected {
                    let canonical = join_key(&format!("{COMPONENT_PREFIX}{}_{field}", c.name), &expected);
                    return Ok((Target::Component { name: c.name.clone(), field }, canonical, raw));
                }
                return Err(ParamError::UnitMismatch {
                    key: key.to_string(),
                    expected: format!("`{expected}`"),
                });
            }
        }
    }
    match mismatch {
        Some(dim) => Err(ParamError::UnitMismatch { key: key.to_string(), expected: dim.expected() }),
        None => Err(ParamError::UnknownKey(key.to_string())),
    }
}

fn component_suffix(field: &str, unit: &str) -> String {
    match field {
        "unit_cost" => format!("CNY_per_{unit}"),
        "capacity" => unit.to_string(),
        _ => String::new(),
    }
}

fn apply(target: &Target, value: f64, params: &mut PlantParams) {
    match target {
        Target::Scalar(entry) => *(entry.access)(params) = value,
        Target::Component { name, field } => {
            let c = params.economic.component_mut(name).expect("resolved component exists");
            match *field {
                "unit_cost" => c.unit_capital_cost = value,
                "capacity" => c.capacity = value,
                "life_years" => c.life_years = value,
                _ => c.om_ratio = value,
            }
        }
    }
}

/// Map raw `(key, value)` pairs to canonical keys and units.
///
/// Applying it to its own output returns the same list.
pub fn normalize_entries(entries: &[(String, f64)]) -> Result<Vec<(String, f64)>, ParamError> {
    let defaults = PlantParams::default();
    entries
        .iter()
        .map(|(k, v)| resolve(k, *v, &defaults).map(|(_, key, value)| (key, value)))
        .collect()
}

fn value_as_f64(key: &str, v: &toml::Value) -> Result<f64, ParamError> {
    match v {
        toml::Value::Float(f) => Ok(*f),
        toml::Value::Integer(i) => Ok(*i as f64),
        _ => Err(ParamError::NotANumber { key: key.to_string() }),
    }
}

fn parse_transitions(v: &toml::Value) -> Result<TransitionMatrix, ParamError> {
    let bad = |why: String| ParamError::invalid(TRANSITIONS_KEY, why);
    let arr = v.as_array().ok_or_else(|| bad("expected an array of \"from->to\" strings".into()))?;
    let mut m = TransitionMatrix { allowed: [[false; 4]; 4] };
    for item in arr {
        let s = item.as_str().ok_or_else(|| bad("entries must be strings".into()))?;
        let (a, b) = s.split_once("->").ok_or_else(|| bad(format!("`{s}` is not `from->to`")))?;
        let from = Mode::parse(a).ok_or_else(|| bad(format!("unknown mode `{a}`")))?;
        let to = Mode::parse(b).ok_or_else(|| bad(format!("unknown mode `{b}`")))?;
        m.set(from, to, true);
    }
    Ok(m)
}

/// Parse config text on top of the defaults and validate the result.
pub fn parse_config(text: &str) -> Result<PlantParams, ParamError> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| ParamError::Syntax(e.to_string()))?;
    let mut params = PlantParams::default();
    for (key, value) in &table {
        if key == TRANSITIONS_KEY {
            params.operational.transitions = parse_transitions(value)?;
            continue;
        }
        let raw = value_as_f64(key, value)?;
        let (target, _, v) = resolve(key, raw, &params)?;
        apply(&target, v, &mut params);
    }
    params.validate()?;
    Ok(params)
}

/// Read a config file; an empty file yields the default parameter set.
pub fn load_config(path: &Path) -> Result<PlantParams, ParamError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ParamError::Io { path: path.display().to_string(), reason: e.to_string() })?;
    parse_config(&text)
}

/// Write every parameter under its canonical key. Values use Rust's shortest
/// round-trip float formatting, so parsing the output reproduces the input bit for bit.
pub fn to_config_string(params: &PlantParams) -> String {
    let mut scratch = params.clone();
    let mut out = String::new();
    for entry in CONFIG_KEYS {
        let v = *(entry.access)(&mut scratch);
        out.push_str(&format!("{} = {:?}\n", entry.canonical_key(), v));
    }
    for c in &params.economic.components {
        let base = format!("{COMPONENT_PREFIX}{}", c.name);
        for (field, v) in [
            ("unit_cost", c.unit_capital_cost),
            ("capacity", c.capacity),
            ("life_years", c.life_years),
            ("om_ratio", c.om_ratio),
        ] {
            let key = join_key(&format!("{base}_{field}"), &component_suffix(field, &c.unit));
            out.push_str(&format!("{key} = {v:?}\n"));
        }
    }
    let pairs: Vec<String> = params
        .operational
        .transitions
        .pairs()
        .into_iter()
        .map(|(a, b)| format!("\"{}->{}\"", a.short(), b.short()))
        .collect();
    out.push_str(&format!("{TRANSITIONS_KEY} = [{}]\n", pairs.join(", ")));
    out
}
