//! Schema checks for written outputs (`--self-check`).

use crate::manifest::Manifest;
use anyhow::{bail, Context, Result};
use p2a_core::sched::{parse_profile_csv, ObjectiveBreakdown, Schedule, VerifyReport};
use std::collections::BTreeMap;
use std::path::Path;

const METRICS_HEADER: &str = "scheme,startstop_count,nh3_total_t,grid_cost_CNY,capex_om_CNY,net_revenue_CNY,cum_temp_variation_K,renewable_utilization,status";

fn check_table(text: &str, header_prefix: &str, what: &str) -> Result<()> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if !header.starts_with(header_prefix) {
        bail!("{what}: unexpected header '{header}'");
    }
    let cols = header.split(',').count();
    for (i, l) in lines.enumerate() {
        if l.split(',').count() != cols {
            bail!("{what}: row {} has the wrong number of fields", i + 1);
        }
    }
    Ok(())
}

fn check_file(path: &Path) -> Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    match name {
        "breakdown.json" => drop(serde_json::from_str::<ObjectiveBreakdown>(&text)?),
        "verify.json" => {
            if serde_json::from_str::<VerifyReport>(&text).is_err() {
                serde_json::from_str::<BTreeMap<String, VerifyReport>>(&text)?;
            }
        }
        "metrics.csv" => check_table(&text, METRICS_HEADER, name)?,
        "sweep.csv" | "rolling.csv" => check_table(&text, "", name)?,
        n if n.starts_with("igdt_") && n.ends_with(".csv") => check_table(&text, "beta,alpha,status", name)?,
        n if n.ends_with(".json") => drop(serde_json::from_str::<serde_json::Value>(&text)?),
        n if n.starts_with("schedule") && n.ends_with(".csv") => drop(Schedule::from_csv(&text)?),
        n if n.ends_with(".csv") => drop(parse_profile_csv(&text)?),
        n if n.ends_with(".toml") => drop(text.parse::<toml::Table>()?),
        _ => {}
    }
    Ok(())
}

/// Re-read every output and the manifest and check them against their formats.
pub fn check_outputs(m: &Manifest) -> Result<()> {
    for p in &m.outputs {
        check_file(p).with_context(|| p.display().to_string())?;
    }
    if let Some(dir) = &m.output_dir {
        let text = std::fs::read_to_string(dir.join("manifest.json"))?;
        let v: serde_json::Value = serde_json::from_str(&text)?;
        for key in ["command", "inputs_sha256", "solver_command", "status", "wall_time_s", "flags"] {
            if v.get(key).is_none() {
                bail!("manifest.json lacks '{key}'");
            }
        }
    }
    Ok(())
}
