//! File-based adapter to an external MILP solver.
//!
//! The model is written to `model.lp`; the configured command is run through
//! `sh -c` with `{lp}`, `{sol}`, `{time_limit}` and `{gap}` substituted, and must leave
//! a solution file at `{sol}` (see [`super::parse_solution`]).

use super::{emit_lp, parse_solution, MilpError, MilpModel, Solution};
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

/// Environment variable that overrides the default solver command.
pub const SOLVER_ENV: &str = "P2A_SOLVER";

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Command template with `{lp}`, `{sol}`, `{time_limit}` and `{gap}` placeholders.
    pub command: String,
    /// Seconds handed to the solver.
    pub time_limit: f64,
    /// Relative MIP gap handed to the solver.
    pub mip_gap: f64,
    /// Extra wall time past `time_limit` before the process is killed, s.
    pub grace: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { command: default_solver_command(), time_limit: 600.0, mip_gap: 1e-6, grace: 30.0 }
    }
}

/// `$P2A_SOLVER` if set, otherwise the bundled HiGHS adapter script.
pub fn default_solver_command() -> String {
    if let Ok(cmd) = std::env::var(SOLVER_ENV) {
        if !cmd.trim().is_empty() {
            return cmd;
        }
    }
    let script = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scripts/highs_adapter.py");
    let script = script.canonicalize().unwrap_or(script);
    format!("python3 {} {{lp}} {{sol}} {{time_limit}} {{gap}}", shell_quote(&script.display().to_string()))
}

fn shell_quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', r"'\''"))
}

fn tail(text: &str, max: usize) -> String {
    let t = text.trim();
    if t.len() <= max {
        return t.to_string();
    }
    let mut start = t.len() - max;
    while !t.is_char_boundary(start) {
        start += 1;
    }
    format!("...{}", &t[start..])
}

/// Solve `model` with the external command in `config`.
pub fn solve_external(model: &MilpModel, config: &SolverConfig) -> Result<Solution, MilpError> {
    let io = |e: std::io::Error| MilpError::Io(e.to_string());
    let dir = tempfile::tempdir().map_err(io)?;
    let lp_path = dir.path().join("model.lp");
    let sol_path = dir.path().join("model.sol");
    let err_path = dir.path().join("solver.stderr");
    std::fs::write(&lp_path, emit_lp(model)?).map_err(io)?;

    let command = config
        .command
        .replace("{lp}", &shell_quote(&lp_path.display().to_string()))
        .replace("{sol}", &shell_quote(&sol_path.display().to_string()))
        .replace("{time_limit}", &format!("{}", config.time_limit))
        .replace("{gap}", &format!("{}", config.mip_gap));
    let stderr_file = std::fs::File::create(&err_path).map_err(io)?;
    let started = Instant::now();
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(&command)
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(stderr_file)
        .spawn()
        .map_err(|e| MilpError::Spawn { command: command.clone(), reason: e.to_string() })?;

    let deadline = Duration::from_secs_f64((config.time_limit + config.grace).max(0.0));
    let status = loop {
        if let Some(status) = child.try_wait().map_err(io)? {
            break status;
        }
        if started.elapsed() > deadline {
            let _ = child.kill();
            let _ = child.wait();
            return Err(MilpError::Timeout(config.time_limit));
        }
        std::thread::sleep(Duration::from_millis(20));
    };
    let stderr = std::fs::read_to_string(&err_path).unwrap_or_default();
    if !status.success() {
        let code = status.code().map_or_else(|| "a signal".to_string(), |c| format!("status {c}"));
        return Err(MilpError::SolverFailed { code, stderr: tail(&stderr, 2000) });
    }
    let text = std::fs::read_to_string(&sol_path)
        .map_err(|e| MilpError::Parse(format!("no solution file ({e}); solver stderr: {}", tail(&stderr, 500))))?;
    log::debug!("external solve took {:.2} s", started.elapsed().as_secs_f64());
    parse_solution(&text, model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quoting_survives_spaces_and_quotes() {
        assert_eq!(shell_quote("/a b/c'd"), r"'/a b/c'\''d'");
    }

    #[test]
    fn failing_command_reports_status_and_stderr() {
        let m = MilpModel::default();
        let cfg = SolverConfig { command: "echo boom >&2; exit 3".into(), time_limit: 5.0, mip_gap: 1e-6, grace: 5.0 };
        match solve_external(&m, &cfg) {
            Err(MilpError::SolverFailed { code, stderr }) => {
                assert_eq!(code, "status 3");
                assert_eq!(stderr, "boom");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_solution_file_is_a_parse_error() {
        let cfg = SolverConfig { command: "true".into(), time_limit: 5.0, mip_gap: 1e-6, grace: 5.0 };
        assert!(matches!(solve_external(&MilpModel::default(), &cfg), Err(MilpError::Parse(_))));
    }

    #[test]
    fn slow_solver_times_out() {
        let cfg = SolverConfig { command: "sleep 5".into(), time_limit: 0.2, mip_gap: 1e-6, grace: 0.3 };
        assert!(matches!(solve_external(&MilpModel::default(), &cfg), Err(MilpError::Timeout(_))));
    }

    #[test]
    fn scripted_solver_output_is_parsed() {
        let mut m = MilpModel::default();
        let x = m.add_continuous("x", 0.0, 3.0).unwrap();
        m.set_objective(super::super::LinExpr::term(x, 1.0)).unwrap();
        let cfg = SolverConfig {
            command: "test -s {lp} && printf 'status optimal\\nobjective 3\\nx 3\\n' > {sol}".into(),
            time_limit: 5.0,
            mip_gap: 1e-6,
            grace: 5.0,
        };
        let s = solve_external(&m, &cfg).unwrap();
        assert_eq!(s.objective_value, 3.0);
    }
}
