//! Information-gap programs around the deterministic scheduling model.
//!
//! Both programs scale every renewable forecast value by one scalar α that
//! becomes a decision variable. The robust program finds the largest uniform
//! shortfall that still earns the revenue target; the opportunistic program
//! finds the smallest uniform surplus that reaches a higher target.
//!
//! Targets are `C_c − β·|C_c|` (robust) and `C_c + β·|C_c|` (opportunistic),
//! where `C_c` is the baseline net revenue. For a positive baseline these are
//! the usual `(1 ∓ β)·C_c`; the absolute value keeps their meaning when the
//! horizon's capital charge makes the baseline negative.

use crate::milp::{LinExpr, Sense, SolveStatus};
use crate::params::PlantParams;
use crate::sched::{
    build_full_model, decode, solve_model, solve_scenario, BuildOptions, BuiltModel, RenewableScaling, SchedError,
    ScenarioProfile, Schedule, SolverChoice, StorageScheme,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IgdtError {
    #[error(transparent)]
    Sched(#[from] SchedError),
    #[error("invalid IGDT input: {0}")]
    Invalid(String),
    #[error("baseline solve ended {0}; no baseline revenue")]
    NoBaseline(SolveStatus),
    #[error("worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IgdtKind {
    Robust,
    Opportunistic,
}

impl IgdtKind {
    pub fn as_str(self) -> &'static str {
        match self {
            IgdtKind::Robust => "robust",
            IgdtKind::Opportunistic => "opportunistic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IgdtSpec {
    pub kind: IgdtKind,
    /// β: tolerated revenue loss (robust) or demanded gain (opportunistic)
    /// as a fraction of |baseline_revenue|.
    pub deviation_factor: f64,
    /// Net revenue of the deterministic schedule, CNY.
    pub baseline_revenue: f64,
    /// Upper bound on α for the opportunistic program.
    pub surplus_cap: f64,
}

impl IgdtSpec {
    pub fn robust(beta: f64, baseline_revenue: f64) -> Self {
        IgdtSpec { kind: IgdtKind::Robust, deviation_factor: beta, baseline_revenue, surplus_cap: 1.0 }
    }

    pub fn opportunistic(beta: f64, baseline_revenue: f64) -> Self {
        IgdtSpec { kind: IgdtKind::Opportunistic, deviation_factor: beta, baseline_revenue, surplus_cap: 1.0 }
    }

    pub fn validate(&self) -> Result<(), IgdtError> {
        if !(self.deviation_factor >= 0.0 && self.deviation_factor.is_finite()) {
            return Err(IgdtError::Invalid(format!("deviation factor must be >= 0, got {}", self.deviation_factor)));
        }
        if !self.baseline_revenue.is_finite() {
            return Err(IgdtError::Invalid("baseline revenue must be finite".into()));
        }
        if !(self.surplus_cap >= 0.0 && self.surplus_cap.is_finite()) {
            return Err(IgdtError::Invalid(format!("surplus cap must be >= 0, got {}", self.surplus_cap)));
        }
        Ok(())
    }

    /// Net revenue the α-scaled schedule must reach, CNY.
    pub fn revenue_target(&self) -> f64 {
        let swing = self.deviation_factor * self.baseline_revenue.abs();
        match self.kind {
            IgdtKind::Robust => self.baseline_revenue - swing,
            IgdtKind::Opportunistic => self.baseline_revenue + swing,
        }
    }

    fn scaling(&self) -> RenewableScaling {
        match self.kind {
            IgdtKind::Robust => RenewableScaling::Shortfall,
            IgdtKind::Opportunistic => RenewableScaling::Surplus { cap: self.surplus_cap },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IgdtResult {
    pub kind: IgdtKind,
    pub beta: f64,
    pub target_revenue: f64,
    pub status: SolveStatus,
    pub alpha: Option<f64>,
    /// Net revenue of the returned schedule, CNY.
    pub revenue: Option<f64>,
    pub schedule: Option<Schedule>,
}

/// Net revenue of the deterministic optimum.
pub fn baseline_revenue(
    scenario: &ScenarioProfile,
    params: &PlantParams,
    scheme: &StorageScheme,
    options: &BuildOptions,
    solver: &SolverChoice,
) -> Result<f64, IgdtError> {
    let mut opts = options.clone();
    opts.renewable_scaling = None;
    let solved = solve_scenario(scenario, params, scheme, &opts, solver)?;
    match solved.breakdown {
        Some(b) => Ok(b.net_revenue),
        None => Err(IgdtError::NoBaseline(solved.status())),
    }
}

/// The deterministic model with α scaling, the revenue floor and α as the
/// objective (maximised when robust, minimised when opportunistic).
pub fn build_igdt_model(
    scenario: &ScenarioProfile,
    params: &PlantParams,
    scheme: &StorageScheme,
    spec: &IgdtSpec,
    options: &BuildOptions,
) -> Result<BuiltModel, IgdtError> {
    spec.validate()?;
    let mut opts = options.clone();
    opts.renewable_scaling = Some(spec.scaling());
    let mut built = build_full_model(scenario, params, scheme, &opts)?;
    let alpha = built.vars.alpha.expect("alpha exists when scaling is requested");
    // net_revenue carries −C^Z as its constant; move it to the right-hand side.
    let rev = &built.vars.net_revenue;
    let constant = rev.constant;
    let mut lhs = rev.clone();
    lhs.constant = 0.0;
    // A baseline schedule re-solved at β = 0 sits exactly on the floor; leave
    // room for the solver's feasibility tolerance.
    let slack = 1e-7 * (1.0 + spec.baseline_revenue.abs());
    built
        .model
        .add_constraint(lhs, Sense::Ge, spec.revenue_target() - constant - slack, "igdt_revenue_floor")
        .map_err(SchedError::from)?;
    let sign = match spec.kind {
        IgdtKind::Robust => 1.0,
        IgdtKind::Opportunistic => -1.0,
    };
    built.model.set_objective(LinExpr::term(alpha, sign)).map_err(SchedError::from)?;
    Ok(built)
}

fn run(
    scenario: &ScenarioProfile,
    params: &PlantParams,
    scheme: &StorageScheme,
    spec: &IgdtSpec,
    options: &BuildOptions,
    solver: &SolverChoice,
) -> Result<IgdtResult, IgdtError> {
    let built = build_igdt_model(scenario, params, scheme, spec, options)?;
    let solution = solve_model(&built.model, solver)?;
    let mut result = IgdtResult {
        kind: spec.kind,
        beta: spec.deviation_factor,
        target_revenue: spec.revenue_target(),
        status: solution.status,
        alpha: None,
        revenue: None,
        schedule: None,
    };
    if matches!(solution.status, SolveStatus::Optimal | SolveStatus::Limit) && solution.has_point() {
        let alpha = built.vars.alpha.expect("alpha exists");
        let (schedule, breakdown) = decode(&built, &solution)?;
        result.alpha = Some(solution.value(alpha));
        result.revenue = Some(breakdown.net_revenue);
        result.schedule = Some(schedule);
    }
    Ok(result)
}

/// Largest uniform renewable shortfall α ∈ [0, 1] keeping net revenue at or
/// above `C_c − β·|C_c|`.
pub fn solve_robust(
    scenario: &ScenarioProfile,
    params: &PlantParams,
    scheme: &StorageScheme,
    beta: f64,
    baseline_revenue: f64,
    options: &BuildOptions,
    solver: &SolverChoice,
) -> Result<IgdtResult, IgdtError> {
    run(scenario, params, scheme, &IgdtSpec::robust(beta, baseline_revenue), options, solver)
}

/// Smallest uniform renewable surplus α ∈ [0, cap] lifting net revenue to
/// `C_c + β·|C_c|`.
#[allow(clippy::too_many_arguments)]
pub fn solve_opportunistic(
    scenario: &ScenarioProfile,
    params: &PlantParams,
    scheme: &StorageScheme,
    beta: f64,
    baseline_revenue: f64,
    surplus_cap: f64,
    options: &BuildOptions,
    solver: &SolverChoice,
) -> Result<IgdtResult, IgdtError> {
    let spec = IgdtSpec { surplus_cap, ..IgdtSpec::opportunistic(beta, baseline_revenue) };
    run(scenario, params, scheme, &spec, options, solver)
}

/// α as a function of β for one program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IgdtCurve {
    pub kind: IgdtKind,
    pub scheme: String,
    pub baseline_revenue: f64,
    pub points: Vec<IgdtResult>,
}

impl IgdtCurve {
    /// `beta,alpha,status`; α is empty where the program has no solution.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("beta,alpha,status\n");
        for p in &self.points {
            let alpha = p.alpha.map(|a| a.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{},{}", p.beta, alpha, p.status);
        }
        out
    }

    /// The curve without the per-point schedules.
    pub fn without_schedules(&self) -> IgdtCurve {
        let mut c = self.clone();
        c.points.iter_mut().for_each(|p| p.schedule = None);
        c
    }
}

/// Evaluate one program at every β. Points whose solve fails with an error
/// are reported as infeasible gaps after a warning.
#[allow(clippy::too_many_arguments)]
pub fn sweep(
    kind: IgdtKind,
    betas: &[f64],
    scenario: &ScenarioProfile,
    params: &PlantParams,
    scheme: &StorageScheme,
    baseline_revenue: f64,
    options: &BuildOptions,
    solver: &SolverChoice,
    workers: usize,
) -> Result<IgdtCurve, IgdtError> {
    if betas.windows(2).any(|w| w[1] < w[0]) {
        return Err(IgdtError::Invalid("betas must be sorted ascending".into()));
    }
    let base = match kind {
        IgdtKind::Robust => IgdtSpec::robust(0.0, baseline_revenue),
        IgdtKind::Opportunistic => IgdtSpec::opportunistic(0.0, baseline_revenue),
    };
    for &b in betas {
        IgdtSpec { deviation_factor: b, ..base.clone() }.validate()?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| IgdtError::Pool(e.to_string()))?;
    let points = pool.install(|| {
        betas
            .par_iter()
            .map(|&b| {
                let spec = IgdtSpec { deviation_factor: b, ..base.clone() };
                run(scenario, params, scheme, &spec, options, solver).unwrap_or_else(|e| {
                    log::warn!("{} point beta={b} failed: {e}", kind.as_str());
                    IgdtResult {
                        kind,
                        beta: b,
                        target_revenue: spec.revenue_target(),
                        status: SolveStatus::Infeasible,
                        alpha: None,
                        revenue: None,
                        schedule: None,
                    }
                })
            })
            .collect()
    });
    Ok(IgdtCurve { kind, scheme: scheme.name.clone(), baseline_revenue, points })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn targets_follow_sign_of_baseline() {
        assert_eq!(IgdtSpec::robust(0.1, 1000.0).revenue_target(), 900.0);
        assert_eq!(IgdtSpec::opportunistic(0.1, 1000.0).revenue_target(), 1100.0);
        assert_eq!(IgdtSpec::robust(0.1, -1000.0).revenue_target(), -1100.0);
        assert_eq!(IgdtSpec::opportunistic(0.1, -1000.0).revenue_target(), -900.0);
        assert_eq!(IgdtSpec::robust(0.0, -5.0).revenue_target(), -5.0);
    }

    #[test]
    fn invalid_specs() {
        assert!(IgdtSpec::robust(-0.1, 1.0).validate().is_err());
        assert!(IgdtSpec::robust(0.1, f64::NAN).validate().is_err());
        let s = IgdtSpec { surplus_cap: -1.0, ..IgdtSpec::opportunistic(0.1, 1.0) };
        assert!(s.validate().is_err());
    }

    #[test]
    fn curve_csv_leaves_gaps() {
        let c = IgdtCurve {
            kind: IgdtKind::Robust,
            scheme: "s".into(),
            baseline_revenue: 1.0,
            points: vec![
                IgdtResult {
                    kind: IgdtKind::Robust,
                    beta: 0.0,
                    target_revenue: 1.0,
                    status: SolveStatus::Optimal,
                    alpha: Some(0.25),
                    revenue: Some(1.0),
                    schedule: None,
                },
                IgdtResult {
                    kind: IgdtKind::Robust,
                    beta: 0.5,
                    target_revenue: 0.5,
                    status: SolveStatus::Infeasible,
                    alpha: None,
                    revenue: None,
                    schedule: None,
                },
            ],
        };
        assert_eq!(c.to_csv(), "beta,alpha,status\n0,0.25,optimal\n0.5,,infeasible\n");
    }
}
