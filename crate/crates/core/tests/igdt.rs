mod common;

use common::*;
use p2a_core::igdt::{self, IgdtKind};
use p2a_core::milp::SolveStatus;
use p2a_core::params::PlantParams;
use p2a_core::sched::{solve_scenario, BuildOptions, ScenarioProfile, StorageScheme};

/// One production step with revenue depending on the renewable supply, and
/// no temperature penalty so the objective is revenue alone.
fn instance() -> (PlantParams, ScenarioProfile, StorageScheme) {
    let mut p = PlantParams::default();
    p.economic.weight_temp = 0.0;
    let mut sc = ScenarioProfile::new("igdt_tiny", 3600.0, vec![120.0e6], vec![30.0e6], &p);
    sc.initial_load = 0.7;
    (p, sc, StorageScheme::numbered(5).unwrap())
}

/// Best net revenue with renewables scaled by `factor`.
fn revenue_at(factor: f64, p: &PlantParams, sc: &ScenarioProfile, scheme: &StorageScheme) -> Option<f64> {
    let s = solve_scenario(&sc.scaled(factor), p, scheme, &BuildOptions::default(), &tiny()).unwrap();
    s.breakdown.map(|b| b.net_revenue)
}

/// Fixed-α oracle: bisection on α over the deterministic model.
fn bisect(kind: IgdtKind, target: f64, p: &PlantParams, sc: &ScenarioProfile, scheme: &StorageScheme) -> f64 {
    let ok = |a: f64| {
        let f = match kind {
            IgdtKind::Robust => 1.0 - a,
            IgdtKind::Opportunistic => 1.0 + a,
        };
        revenue_at(f, p, sc, scheme).is_some_and(|r| r >= target)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        // Robust keeps the largest feasible α, opportunistic the smallest.
        match (kind, ok(mid)) {
            (IgdtKind::Robust, true) | (IgdtKind::Opportunistic, false) => lo = mid,
            _ => hi = mid,
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn robust_alpha_matches_bisection() {
    let (p, sc, scheme) = instance();
    let base = igdt::baseline_revenue(&sc, &p, &scheme, &BuildOptions::default(), &tiny()).unwrap();
    let r = igdt::solve_robust(&sc, &p, &scheme, 0.5, base, &BuildOptions::default(), &tiny()).unwrap();
    assert_eq!(r.status, SolveStatus::Optimal);
    let a = r.alpha.unwrap();
    assert!(a > 0.05 && a < 0.95, "alpha {a} is not interior");
    let oracle = bisect(IgdtKind::Robust, r.target_revenue, &p, &sc, &scheme);
    assert!((a - oracle).abs() < 1e-3, "embedded {a} vs bisection {oracle}");
}

#[test]
fn opportunistic_alpha_matches_bisection() {
    let (p, sc, scheme) = instance();
    let base = igdt::baseline_revenue(&sc, &p, &scheme, &BuildOptions::default(), &tiny()).unwrap();
    let r = igdt::solve_opportunistic(&sc, &p, &scheme, 0.3, base, 1.0, &BuildOptions::default(), &tiny()).unwrap();
    assert_eq!(r.status, SolveStatus::Optimal);
    let a = r.alpha.unwrap();
    assert!(a > 0.05 && a < 0.95, "alpha {a} is not interior");
    let oracle = bisect(IgdtKind::Opportunistic, r.target_revenue, &p, &sc, &scheme);
    assert!((a - oracle).abs() < 1e-3, "embedded {a} vs bisection {oracle}");
}

#[test]
fn zero_beta_opportunistic_needs_no_surplus() {
    let (p, sc, scheme) = instance();
    let base = igdt::baseline_revenue(&sc, &p, &scheme, &BuildOptions::default(), &tiny()).unwrap();
    let r = igdt::solve_opportunistic(&sc, &p, &scheme, 0.0, base, 1.0, &BuildOptions::default(), &tiny()).unwrap();
    assert!(r.alpha.unwrap().abs() < 1e-6);
}

#[test]
fn unreachable_gain_is_infeasible() {
    let (p, sc, scheme) = instance();
    let base = igdt::baseline_revenue(&sc, &p, &scheme, &BuildOptions::default(), &tiny()).unwrap();
    let r = igdt::solve_opportunistic(&sc, &p, &scheme, 50.0, base, 0.1, &BuildOptions::default(), &tiny()).unwrap();
    assert_eq!(r.status, SolveStatus::Infeasible);
    assert!(r.alpha.is_none());
}

#[test]
fn sweep_is_monotone_on_the_tiny_instance() {
    let (p, sc, scheme) = instance();
    let opts = BuildOptions::default();
    let base = igdt::baseline_revenue(&sc, &p, &scheme, &opts, &tiny()).unwrap();
    let betas = [0.0, 0.1, 0.2, 0.3, 0.5];
    for kind in [IgdtKind::Robust, IgdtKind::Opportunistic] {
        let c = igdt::sweep(kind, &betas, &sc, &p, &scheme, base, &opts, &tiny(), 2).unwrap();
        let alphas: Vec<f64> = c.points.iter().map(|pt| pt.alpha.unwrap()).collect();
        assert!(alphas.windows(2).all(|w| w[1] >= w[0] - 1e-9), "{kind:?}: {alphas:?}");
    }
}
