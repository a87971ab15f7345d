mod common;

use common::*;
use p2a_core::harness::*;
use p2a_core::params::PlantParams;
use p2a_core::sched::{BuildOptions, ScenarioProfile};

#[test]
fn shipped_scenarios_come_from_seed_one() {
    let p = PlantParams::default();
    for (name, sc) in [("lull_48h", lull_scenario(&p, 1).unwrap()), ("synthetic_48h", synthetic_scenario(&p, 1).unwrap())] {
        let shipped = ScenarioProfile::load(&repo(&format!("scenarios/{name}.csv")), &p).unwrap();
        assert_eq!(shipped, sc, "{name}");
    }
    let lull = lull_scenario(&p, 1).unwrap();
    assert!((9..39).all(|t| lull.renewable(t) == 0.0));
    assert!((0..9).chain(39..48).any(|t| lull.renewable(t) > 0.0));
}

fn short_profile() -> (PlantParams, ScenarioProfile) {
    let p = PlantParams::default();
    let sc = synthetic_scenario(&p, 2).unwrap().truncated(6);
    (p, sc)
}

#[test]
fn chained_windows_start_where_the_previous_one_ended() {
    let (p, sc) = short_profile();
    let schemes = [StorageScheme::numbered(2).unwrap()];
    let r = run_rolling(&sc, 2, &p, &schemes, RollingMode::Chained, &BuildOptions::default(), &tiny(), 2).unwrap();
    assert_eq!(r.rows.len(), 3);
    for w in 1..r.rows.len() {
        let prev = r.rows[w - 1].run.schedule.as_ref().expect("window solved");
        let end = prev.states.last().unwrap();
        assert!((r.rows[w].initial_hs_level - end.hs_level).abs() < 1e-6);
        let next = r.rows[w].run.schedule.as_ref().unwrap();
        assert!((next.states[0].asr_temp - end.asr_temp).abs() < 1e-9);
    }
    assert_eq!(r.totals[0].windows_solved, 3);
    let csv = r.to_csv();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.starts_with("window,scheme,"));
}

#[test]
fn reset_windows_share_the_initial_state() {
    let (p, sc) = short_profile();
    let schemes = [StorageScheme::numbered(2).unwrap()];
    let r = run_rolling(&sc, 2, &p, &schemes, RollingMode::Reset, &BuildOptions::default(), &tiny(), 1).unwrap();
    let first = r.rows[0].initial_hs_level;
    assert!(r.rows.iter().all(|row| row.initial_hs_level == first));
}

#[test]
fn incomplete_final_window_is_dropped() {
    let (p, sc) = short_profile();
    let r = run_rolling(&sc.truncated(5), 2, &p, &[StorageScheme::bare()], RollingMode::Chained, &BuildOptions::default(), &tiny(), 1)
        .unwrap();
    assert_eq!(r.rows.len(), 2);
}

#[test]
fn comparison_keeps_scheme_order_and_reports_each() {
    let (p, sc) = short_profile();
    let sc = sc.truncated(1);
    let schemes = StorageScheme::all_numbered();
    let runs = run_scheme_comparison(&sc, &p, &schemes, &BuildOptions::default(), &tiny(), 3).unwrap();
    let names: Vec<&str> = runs.iter().map(|r| r.scheme.as_str()).collect();
    assert_eq!(names, ["scheme1", "scheme2", "scheme3", "scheme4", "scheme5"]);
    for r in &runs {
        let m = r.metrics.as_ref().expect("metrics");
        assert!((0.0..=1.0 + 1e-9).contains(&m.renewable_utilization));
        assert!(r.verify.as_ref().unwrap().flagged.is_empty());
    }
    assert_eq!(comparison_csv(&runs).lines().count(), 6);
}

#[test]
fn sweep_grid_is_row_major() {
    let (p, sc) = short_profile();
    let sc = sc.truncated(1);
    let base = StorageScheme::numbered(5).unwrap();
    let xs = [0.0, 36.0e9];
    let ys = [0.0, 1.0e5, 2.0e5];
    let r = sensitivity_sweep(
        &sc,
        &p,
        &base,
        (SweepAxis::BesEnergy, SweepAxis::HsCapacity),
        (&xs, &ys),
        &BuildOptions::default(),
        &tiny(),
        4,
    )
    .unwrap();
    assert_eq!(r.cells.len(), 6);
    assert_eq!((r.cells[4].i, r.cells[4].j), (1, 1));
    assert_eq!((r.cells[4].x, r.cells[4].y), (36.0e9, 1.0e5));
    let csv = r.to_csv();
    assert!(csv.starts_with("bes_energy_J,hs_capacity_Nm3,net_revenue_CNY,cum_temp_K\n"));
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn cumulative_variation_sums_absolute_changes() {
    assert_eq!(cumulative_variation(&[733.0, 730.0, 735.0]), 8.0);
    assert_eq!(cumulative_variation(&[]), 0.0);
}
