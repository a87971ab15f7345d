//! Renewable profiles and initial conditions.
//!
//! On disk a scenario is a CSV with header `step,wind_W,pv_W` plus an optional
//! TOML sidecar next to it (same stem, `.toml`) holding the time step and
//! initial states.

use super::SchedError;
use crate::params::{Mode, PlantParams};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioProfile {
    pub name: String,
    /// Step length, s.
    pub dt: f64,
    /// Available wind power per step, W.
    pub wind: Vec<f64>,
    /// Available PV power per step, W.
    pub pv: Vec<f64>,
    /// Overrides the parameter-set ambient temperature when set, K.
    pub ambient_temp: Option<f64>,
    pub initial_asr_temp: f64,
    pub initial_ms_temp: f64,
    /// J.
    pub initial_bes_energy: f64,
    /// Nm³.
    pub initial_hs_level: f64,
    pub initial_mode: Mode,
    /// Load in the step before the horizon; only meaningful in production.
    pub initial_load: f64,
}

impl ScenarioProfile {
    /// Profile with default initial conditions: hot reactor in production at
    /// minimum load, salt tank hot, storage half full.
    pub fn new(name: &str, dt: f64, wind: Vec<f64>, pv: Vec<f64>, params: &PlantParams) -> Self {
        let o = &params.operational;
        ScenarioProfile {
            name: name.to_string(),
            dt,
            wind,
            pv,
            ambient_temp: None,
            initial_asr_temp: params.economic.temp_setpoint,
            initial_ms_temp: o.ms_temp_max,
            initial_bes_energy: 0.5 * (o.bes_energy_min + o.bes_energy_max),
            initial_hs_level: 0.5 * (o.hs_min + o.hs_max),
            initial_mode: Mode::Production,
            initial_load: o.load_min,
        }
    }

    pub fn horizon_steps(&self) -> usize {
        self.wind.len()
    }

    /// Available renewable power at step `t`, W.
    pub fn renewable(&self, t: usize) -> f64 {
        self.wind[t] + self.pv[t]
    }

    pub fn horizon_days(&self) -> f64 {
        self.horizon_steps() as f64 * self.dt / 86_400.0
    }

    pub fn validate(&self) -> Result<(), SchedError> {
        let bad = |m: String| Err(SchedError::Scenario(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("time step must be positive, got {}", self.dt));
        }
        if self.wind.len() != self.pv.len() {
            return bad(format!("{} wind values but {} pv values", self.wind.len(), self.pv.len()));
        }
        for (t, (w, p)) in self.wind.iter().zip(&self.pv).enumerate() {
            if !(w.is_finite() && *w >= 0.0 && p.is_finite() && *p >= 0.0) {
                return bad(format!("negative or non-finite renewable power at step {t}"));
            }
        }
        for (name, v) in [
            ("initial_asr_temp", self.initial_asr_temp),
            ("initial_ms_temp", self.initial_ms_temp),
            ("initial_bes_energy", self.initial_bes_energy),
            ("initial_hs_level", self.initial_hs_level),
            ("initial_load", self.initial_load),
        ] {
            if !v.is_finite() || v < 0.0 {
                return bad(format!("{name} must be non-negative and finite, got {v}"));
            }
        }
        Ok(())
    }

    /// First `steps` steps (or all of them, if shorter).
    pub fn truncated(&self, steps: usize) -> ScenarioProfile {
        let mut s = self.clone();
        s.wind.truncate(steps);
        s.pv.truncate(steps);
        s
    }

    /// Steps `start..end` as a new profile with the same initial conditions.
    pub fn window(&self, start: usize, end: usize) -> ScenarioProfile {
        let mut s = self.clone();
        s.wind = self.wind[start..end].to_vec();
        s.pv = self.pv[start..end].to_vec();
        s
    }

    /// Renewables multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> ScenarioProfile {
        let mut s = self.clone();
        s.wind.iter_mut().for_each(|v| *v *= factor);
        s.pv.iter_mut().for_each(|v| *v *= factor);
        s
    }

    pub fn to_csv(&self) -> String {
        profile_csv(&self.wind, &self.pv)
    }

    pub fn sidecar(&self) -> Sidecar {
        Sidecar {
            name: Some(self.name.clone()),
            dt_s: Some(self.dt),
            ambient_temp_K: self.ambient_temp,
            initial_asr_temp_K: Some(self.initial_asr_temp),
            initial_ms_temp_K: Some(self.initial_ms_temp),
            initial_bes_energy_J: Some(self.initial_bes_energy),
            initial_bes_energy_kWh: None,
            initial_bes_energy_MWh: None,
            initial_hs_level_Nm3: Some(self.initial_hs_level),
            initial_mode: Some(self.initial_mode.short().to_string()),
            initial_load: Some(self.initial_load),
        }
    }

    /// Write `<path>` (CSV) and the sidecar `<path with .toml>`.
    pub fn save(&self, csv_path: &Path) -> Result<(), SchedError> {
        std::fs::write(csv_path, self.to_csv()).map_err(|e| SchedError::io(csv_path, e))?;
        let side = sidecar_path(csv_path);
        let text = toml::to_string(&self.sidecar()).map_err(|e| SchedError::Scenario(e.to_string()))?;
        std::fs::write(&side, text).map_err(|e| SchedError::io(&side, e))
    }

    /// Load a CSV profile and, if present, its sidecar. Missing sidecar fields
    /// take the defaults of [`ScenarioProfile::new`] with a 1 h step.
    pub fn load(csv_path: &Path, params: &PlantParams) -> Result<ScenarioProfile, SchedError> {
        let text = std::fs::read_to_string(csv_path).map_err(|e| SchedError::io(csv_path, e))?;
        let (wind, pv) = parse_profile_csv(&text)?;
        let stem = csv_path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
        let mut s = ScenarioProfile::new(stem, 3600.0, wind, pv, params);
        let side = sidecar_path(csv_path);
        if side.exists() {
            let text = std::fs::read_to_string(&side).map_err(|e| SchedError::io(&side, e))?;
            let sc: Sidecar = toml::from_str(&text)
                .map_err(|e| SchedError::Scenario(format!("{}: {e}", side.display())))?;
            sc.apply(&mut s)?;
        }
        s.validate()?;
        Ok(s)
    }
}

/// Sidecar keys, with units in the names.
#[allow(non_snake_case)]
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    pub name: Option<String>,
    pub dt_s: Option<f64>,
    pub ambient_temp_K: Option<f64>,
    pub initial_asr_temp_K: Option<f64>,
    pub initial_ms_temp_K: Option<f64>,
    pub initial_bes_energy_J: Option<f64>,
    pub initial_bes_energy_kWh: Option<f64>,
    pub initial_bes_energy_MWh: Option<f64>,
    pub initial_hs_level_Nm3: Option<f64>,
    pub initial_mode: Option<String>,
    pub initial_load: Option<f64>,
}

impl Sidecar {
    pub fn apply(&self, s: &mut ScenarioProfile) -> Result<(), SchedError> {
        if let Some(n) = &self.name {
            s.name = n.clone();
        }
        if let Some(v) = self.dt_s {
            s.dt = v;
        }
        if self.ambient_temp_K.is_some() {
            s.ambient_temp = self.ambient_temp_K;
        }
        if let Some(v) = self.initial_asr_temp_K {
            s.initial_asr_temp = v;
        }
        if let Some(v) = self.initial_ms_temp_K {
            s.initial_ms_temp = v;
        }
        let bes = [
            self.initial_bes_energy_J,
            self.initial_bes_energy_kWh.map(|v| v * 3.6e6),
            self.initial_bes_energy_MWh.map(|v| v * 3.6e9),
        ];
        match bes.iter().flatten().count() {
            0 => {}
            1 => s.initial_bes_energy = bes.iter().flatten().copied().next().unwrap_or_default(),
            _ => return Err(SchedError::Scenario("initial BES energy given in more than one unit".into())),
        }
        if let Some(v) = self.initial_hs_level_Nm3 {
            s.initial_hs_level = v;
        }
        if let Some(m) = &self.initial_mode {
            s.initial_mode =
                Mode::parse(m).ok_or_else(|| SchedError::Scenario(format!("unknown initial_mode `{m}`")))?;
        }
        if let Some(v) = self.initial_load {
            s.initial_load = v;
        }
        Ok(())
    }
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("toml")
}

pub fn profile_csv(wind: &[f64], pv: &[f64]) -> String {
    let mut out = String::from("step,wind_W,pv_W\n");
    for (t, (w, p)) in wind.iter().zip(pv).enumerate() {
        let _ = writeln!(out, "{t},{w},{p}");
    }
    out
}

pub fn parse_profile_csv(text: &str) -> Result<(Vec<f64>, Vec<f64>), SchedError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| SchedError::Scenario("empty profile".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let find = |name: &str| {
        cols.iter()
            .position(|c| *c == name)
            .ok_or_else(|| SchedError::Scenario(format!("profile header lacks `{name}`")))
    };
    let (i_step, i_wind, i_pv) = (find("step")?, find("wind_W")?, find("pv_W")?);
    let mut wind = Vec::new();
    let mut pv = Vec::new();
    for (k, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        let get = |i: usize| -> Result<f64, SchedError> {
            f.get(i)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| SchedError::Scenario(format!("bad value on data row {}", k + 1)))
        };
        let step = get(i_step)?;
        if step != k as f64 {
            return Err(SchedError::Scenario(format!("expected step {k}, found {step}")));
        }
        wind.push(get(i_wind)?);
        pv.push(get(i_pv)?);
    }
    Ok((wind, pv))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_with_sidecar() {
        let p = PlantParams::default();
        let mut s = ScenarioProfile::new("demo", 3600.0, vec![1.0e6, 0.0, 2.5e7], vec![0.0, 3.0e6, 1.5], &p);
        s.initial_mode = Mode::Standby;
        s.initial_load = 0.0;
        s.ambient_temp = Some(290.0);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("demo.csv");
        s.save(&path).unwrap();
        let back = ScenarioProfile::load(&path, &p).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn missing_sidecar_uses_defaults() {
        let p = PlantParams::default();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bare.csv");
        std::fs::write(&path, "step,wind_W,pv_W\n0,1,2\n1,3,4\n").unwrap();
        let s = ScenarioProfile::load(&path, &p).unwrap();
        assert_eq!(s.horizon_steps(), 2);
        assert_eq!(s.renewable(1), 7.0);
        assert_eq!(s.dt, 3600.0);
        assert_eq!(s.initial_mode, Mode::Production);
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(parse_profile_csv("step,wind_W\n0,1\n").is_err());
        assert!(parse_profile_csv("step,wind_W,pv_W\n0,1,x\n").is_err());
        assert!(parse_profile_csv("step,wind_W,pv_W\n1,1,1\n").is_err());
        let p = PlantParams::default();
        let s = ScenarioProfile::new("neg", 3600.0, vec![-1.0], vec![0.0], &p);
        assert!(s.validate().is_err());
    }

    #[test]
    fn sidecar_energy_units() {
        let p = PlantParams::default();
        let mut s = ScenarioProfile::new("u", 3600.0, vec![], vec![], &p);
        let sc = Sidecar { initial_bes_energy_MWh: Some(2.0), ..Default::default() };
        sc.apply(&mut s).unwrap();
        assert_eq!(s.initial_bes_energy, 7.2e9);
        let both = Sidecar { initial_bes_energy_J: Some(1.0), initial_bes_energy_kWh: Some(1.0), ..Default::default() };
        assert!(both.apply(&mut s).is_err());
    }
}
