//! Shared helpers for the integration tests.
#![allow(dead_code)]

use p2a_core::milp::{SolverConfig, DEFAULT_BINARY_LIMIT};
use p2a_core::params::{Mode, PlantParams};
use p2a_core::sched::{solve_scenario, BuildOptions, ScenarioProfile, Schedule, SolverChoice, Solved, StorageScheme};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};

pub fn repo(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

pub fn tiny() -> SolverChoice {
    SolverChoice::Tiny { binary_limit: DEFAULT_BINARY_LIMIT }
}

/// Bundled HiGHS adapter with the given relative gap.
pub fn highs(gap: f64) -> SolverChoice {
    SolverChoice::External(SolverConfig { time_limit: 300.0, mip_gap: gap, ..Default::default() })
}

/// A randomized instance small enough for the bundled solver: one step with
/// any scheme, or two steps with a scheme that has at most ten free binaries
/// per step.
#[derive(Debug, Clone)]
pub struct TinyCase {
    pub seed: u64,
    pub params: PlantParams,
    pub scenario: ScenarioProfile,
    pub scheme: StorageScheme,
    pub options: BuildOptions,
}

pub fn tiny_case(seed: u64) -> TinyCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = PlantParams::default();
    let steps = rng.gen_range(1..=2usize);
    let scheme = if steps == 1 {
        let n = rng.gen_range(0..=5usize);
        if n == 0 { StorageScheme::bare() } else { StorageScheme::numbered(n).unwrap() }
    } else {
        [StorageScheme::bare(), StorageScheme::numbered(2).unwrap(), StorageScheme::numbered(3).unwrap()]
            [rng.gen_range(0..3usize)]
        .clone()
    };
    let wind: Vec<f64> = (0..steps).map(|_| rng.gen_range(0.0..450.0e6)).collect();
    let pv: Vec<f64> = (0..steps).map(|_| rng.gen_range(0.0..150.0e6)).collect();
    let mut scenario = ScenarioProfile::new(&format!("tiny{seed}"), 3600.0, wind, pv, &params);
    match rng.gen_range(0..3u8) {
        0 => {
            scenario.initial_mode = Mode::Production;
            scenario.initial_asr_temp = rng.gen_range(700.0..760.0);
            scenario.initial_load = rng.gen_range(0.3..1.0);
        }
        1 => {
            scenario.initial_mode = Mode::Standby;
            scenario.initial_asr_temp = rng.gen_range(700.0..760.0);
            scenario.initial_load = 0.0;
        }
        _ => {
            scenario.initial_mode = Mode::Shutdown;
            scenario.initial_asr_temp = rng.gen_range(400.0..733.0);
            scenario.initial_load = 0.0;
        }
    }
    let options = BuildOptions { cyclic_storage: rng.gen_bool(0.5), ..Default::default() };
    TinyCase { seed, params, scenario, scheme, options }
}

/// Each step's four mode binaries sum to one in the raw solution.
pub fn check_exclusive(solved: &Solved) -> Result<(), String> {
    for (t, sv) in solved.built.vars.steps.iter().enumerate() {
        let sum: f64 = Mode::ALL.iter().map(|&m| solved.solution.values[sv.mode_var(m).index()]).sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(format!("step {t}: mode binaries sum to {sum}"));
        }
    }
    Ok(())
}

/// Production only from a reactor at or above the activation temperature.
pub fn check_temp_gate(s: &Schedule, params: &PlantParams) -> Result<(), String> {
    let min = params.operational.asr_temp_act_min;
    for (t, st) in s.steps.iter().enumerate() {
        if st.mode == Mode::Production && s.states[t].asr_temp < min - 1e-6 {
            return Err(format!("step {t} produces at {} K", s.states[t].asr_temp));
        }
    }
    Ok(())
}

/// Minimum load in the start-up step and in the step before a shutdown.
pub fn check_load_pins(s: &Schedule, scenario: &ScenarioProfile, params: &PlantParams) -> Result<(), String> {
    let lmin = params.operational.load_min;
    for (t, st) in s.steps.iter().enumerate() {
        if st.startup && (st.load - lmin).abs() > 1e-6 {
            return Err(format!("start-up step {t} at load {}", st.load));
        }
        if st.shutdown {
            let prev = if t == 0 { scenario.initial_load } else { s.steps[t - 1].load };
            if (prev - lmin).abs() > 1e-6 {
                return Err(format!("shutdown at step {t} from load {prev}"));
            }
        }
    }
    Ok(())
}

/// HS level change over the horizon equals the summed net inflow.
pub fn check_hydrogen_telescoping(s: &Schedule, params: &PlantParams) -> Result<(), String> {
    let net: f64 = s.steps.iter().map(|st| (st.h2_production - st.h2_to_as) * s.dt_h()).sum();
    let change = s.states.last().unwrap().hs_level - s.states[0].hs_level;
    let tol = 1e-6 * params.operational.hs_max.max(1.0);
    if (change - net).abs() > tol {
        return Err(format!("level change {change} vs net inflow {net}"));
    }
    Ok(())
}

/// Solve a case and run the per-schedule invariants on the result. Returns
/// the solve for further checks.
pub fn solve_and_check(case: &TinyCase, solver: &SolverChoice) -> Result<Solved, String> {
    let solved = solve_scenario(&case.scenario, &case.params, &case.scheme, &case.options, solver)
        .map_err(|e| format!("seed {}: {e}", case.seed))?;
    if let Some(s) = &solved.schedule {
        let p = &solved.built.params;
        check_exclusive(&solved)
            .and_then(|_| check_temp_gate(s, p))
            .and_then(|_| check_load_pins(s, &case.scenario, p))
            .and_then(|_| check_hydrogen_telescoping(s, p))
            .map_err(|e| format!("seed {}: {e}", case.seed))?;
    }
    Ok(solved)
}

/// Joint (w1, w2) scaling by `c`: the scaled optimum is `c` times the
/// original, and the scaled argmax is optimal for the original weights.
pub fn check_weight_scaling(case: &TinyCase, c: f64, solver: &SolverChoice) -> Result<(), String> {
    let a = solve_scenario(&case.scenario, &case.params, &case.scheme, &case.options, solver).map_err(|e| e.to_string())?;
    let mut scaled = case.clone();
    scaled.params.economic.weight_profit *= c;
    scaled.params.economic.weight_temp *= c;
    let b = solve_scenario(&scaled.scenario, &scaled.params, &scaled.scheme, &scaled.options, solver)
        .map_err(|e| e.to_string())?;
    if a.status() != b.status() {
        return Err(format!("seed {}: status {} vs {}", case.seed, a.status(), b.status()));
    }
    if let (Some(sa), Some(sb)) = (&a.schedule, &b.schedule) {
        let oa = a.solution.objective_value;
        if !rel_close(b.solution.objective_value, c * oa, 1e-6) {
            return Err(format!("seed {}: scaled optimum {} vs {}", case.seed, b.solution.objective_value, c * oa));
        }
        let p = &a.built.params;
        let ob = sb.breakdown(p, case.options.quadratic_penalty).objective;
        let oa_re = sa.breakdown(p, case.options.quadratic_penalty).objective;
        if !rel_close(ob, oa_re, 1e-6) {
            return Err(format!("seed {}: scaled argmax scores {ob} under original weights, optimum {oa_re}", case.seed));
        }
    }
    Ok(())
}

/// Optimum unchanged when every Big-M constant is ten times larger.
pub fn check_big_m(case: &TinyCase, solver: &SolverChoice) -> Result<(), String> {
    let a = solve_scenario(&case.scenario, &case.params, &case.scheme, &case.options, solver).map_err(|e| e.to_string())?;
    let opts = BuildOptions { big_m_scale: 10.0, ..case.options.clone() };
    let b = solve_scenario(&case.scenario, &case.params, &case.scheme, &opts, solver).map_err(|e| e.to_string())?;
    if a.status() != b.status() {
        return Err(format!("seed {}: status {} vs {}", case.seed, a.status(), b.status()));
    }
    if a.solution.has_point() && !rel_close(a.solution.objective_value, b.solution.objective_value, 1e-6) {
        return Err(format!("seed {}: {} vs {}", case.seed, a.solution.objective_value, b.solution.objective_value));
    }
    Ok(())
}

pub fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}
