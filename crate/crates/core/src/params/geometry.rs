//! Lumped thermal parameters from vessel geometry and materials.

use super::ParamError;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Wall and insulation layers of a cylindrical vessel with two flat ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WallGeometry {
    /// m.
    pub wall_thickness: f64,
    /// W/(m·K).
    pub wall_conductivity: f64,
    pub insulation_thickness: f64,
    pub insulation_conductivity: f64,
    /// m².
    pub side_wall_area: f64,
    /// Area of one end, m².
    pub end_wall_area: f64,
    pub side_insulation_area: f64,
    pub end_insulation_area: f64,
}

impl WallGeometry {
    pub fn validate(&self) -> Result<(), ParamError> {
        for (name, v) in [
            ("wall_conductivity", self.wall_conductivity),
            ("insulation_conductivity", self.insulation_conductivity),
            ("side_wall_area", self.side_wall_area),
            ("end_wall_area", self.end_wall_area),
            ("side_insulation_area", self.side_insulation_area),
            ("end_insulation_area", self.end_insulation_area),
        ] {
            // Infinite conductivity is a legitimate limit (no resistance).
            if !(v > 0.0) {
                return Err(ParamError::invalid(name, format!("must be positive, got {v}")));
            }
        }
        for (name, v) in [
            ("wall_thickness", self.wall_thickness),
            ("insulation_thickness", self.insulation_thickness),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ParamError::invalid(name, format!("must be non-negative, got {v}")));
            }
        }
        Ok(())
    }

    fn path_resistance(&self, wall_area: f64, ins_area: f64) -> f64 {
        self.wall_thickness / (self.wall_conductivity * wall_area)
            + self.insulation_thickness / (self.insulation_conductivity * ins_area)
    }
}

/// Masses and heat capacities of the reactor parts plus its walls.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactorGeometry {
    /// kg.
    pub shell_mass: f64,
    /// J/(kg·K).
    pub shell_specific_heat: f64,
    pub internals_mass: f64,
    pub internals_specific_heat: f64,
    pub catalyst_mass: f64,
    pub catalyst_specific_heat: f64,
    pub walls: WallGeometry,
}

impl ReactorGeometry {
    fn mass_terms(&self) -> [(&'static str, f64, &'static str, f64); 3] {
        [
            ("shell_mass", self.shell_mass, "shell_specific_heat", self.shell_specific_heat),
            ("internals_mass", self.internals_mass, "internals_specific_heat", self.internals_specific_heat),
            ("catalyst_mass", self.catalyst_mass, "catalyst_specific_heat", self.catalyst_specific_heat),
        ]
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        for (m_name, m, c_name, c) in self.mass_terms() {
            if !(m.is_finite() && m >= 0.0) {
                return Err(ParamError::invalid(m_name, format!("must be non-negative, got {m}")));
            }
            if !(c.is_finite() && c >= 0.0) {
                return Err(ParamError::invalid(c_name, format!("must be non-negative, got {c}")));
            }
        }
        if self.mass_terms().iter().all(|(_, m, _, c)| m * c == 0.0) {
            return Err(ParamError::invalid("shell_mass", "at least one part needs positive mass and heat capacity"));
        }
        self.walls.validate()
    }
}

/// Volume of a cylindrical shell, m³.
pub fn hollow_cylinder_volume(inner_diameter: f64, thickness: f64, height: f64) -> f64 {
    let r_in = 0.5 * inner_diameter;
    let r_out = r_in + thickness;
    std::f64::consts::PI * (r_out * r_out - r_in * r_in) * height
}

/// Sum of mass times specific heat over shell, internals and catalyst, J/K.
pub fn estimate_capacitance(geom: &ReactorGeometry) -> Result<f64, ParamError> {
    geom.validate()?;
    Ok(geom.mass_terms().iter().map(|(_, m, _, c)| m * c).sum())
}

/// Side wall and both ends as parallel paths, each a wall layer in series with
/// insulation, K/W.
pub fn estimate_loss_resistance(walls: &WallGeometry) -> Result<f64, ParamError> {
    walls.validate()?;
    let side = walls.path_resistance(walls.side_wall_area, walls.side_insulation_area);
    let end = walls.path_resistance(walls.end_wall_area, walls.end_insulation_area);
    if side == 0.0 || end == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (1.0 / side + 2.0 / end))
}

/// Geometry input file: `[asr]` holds a [`ReactorGeometry`], the optional
/// `[ms_tank]` table a [`WallGeometry`].
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryFile {
    pub asr: ReactorGeometry,
    pub ms_tank: Option<WallGeometry>,
}

// Flat on-disk form of the `[asr]` table.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAsr {
    shell_mass: f64,
    shell_specific_heat: f64,
    internals_mass: f64,
    internals_specific_heat: f64,
    catalyst_mass: f64,
    catalyst_specific_heat: f64,
    wall_thickness: f64,
    wall_conductivity: f64,
    insulation_thickness: f64,
    insulation_conductivity: f64,
    side_wall_area: f64,
    end_wall_area: f64,
    side_insulation_area: f64,
    end_insulation_area: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    asr: RawAsr,
    ms_tank: Option<WallGeometry>,
}

pub fn load_geometry(path: &Path) -> Result<GeometryFile, ParamError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ParamError::Io { path: path.display().to_string(), reason: e.to_string() })?;
    let raw: RawFile = toml::from_str(&text).map_err(|e| ParamError::Syntax(e.to_string()))?;
    let a = raw.asr;
    let geom = GeometryFile {
        asr: ReactorGeometry {
            shell_mass: a.shell_mass,
            shell_specific_heat: a.shell_specific_heat,
            internals_mass: a.internals_mass,
            internals_specific_heat: a.internals_specific_heat,
            catalyst_mass: a.catalyst_mass,
            catalyst_specific_heat: a.catalyst_specific_heat,
            walls: WallGeometry {
                wall_thickness: a.wall_thickness,
                wall_conductivity: a.wall_conductivity,
                insulation_thickness: a.insulation_thickness,
                insulation_conductivity: a.insulation_conductivity,
                side_wall_area: a.side_wall_area,
                end_wall_area: a.end_wall_area,
                side_insulation_area: a.side_insulation_area,
                end_insulation_area: a.end_insulation_area,
            },
        },
        ms_tank: raw.ms_tank,
    };
    geom.asr.validate()?;
    if let Some(ms) = &geom.ms_tank {
        ms.validate()?;
    }
    Ok(geom)
}
