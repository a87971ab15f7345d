//! Exact in-process solver for models with few binaries.
//!
//! Implicit enumeration: depth-first branching over the free binaries, with
//! each node's LP relaxation used to prune subtrees that are infeasible or
//! cannot beat the incumbent. Every assignment is either visited or provably
//! dominated, so the result is the true optimum up to LP tolerance.

use super::simplex::{solve_lp, LpOutcome, LpProblem, RowSense};
use super::{Direction, MilpError, MilpModel, Sense, Solution, SolveStatus, Tolerances, VarKind};

pub const DEFAULT_BINARY_LIMIT: usize = 20;

/// Solve with default tolerances; refuses models with more than
/// `binary_limit` free binaries.
pub fn solve_tiny(model: &MilpModel, binary_limit: usize) -> Result<Solution, MilpError> {
    solve_tiny_with(model, binary_limit, &Tolerances::default())
}

pub fn solve_tiny_with(model: &MilpModel, binary_limit: usize, tol: &Tolerances) -> Result<Solution, MilpError> {
    if !model.quadratic_terms().is_empty() {
        return Err(MilpError::QuadraticUnsupported);
    }
    let free: Vec<usize> = model.free_binaries().iter().map(|v| v.index()).collect();
    if free.len() > binary_limit {
        return Err(MilpError::TooManyBinaries { count: free.len(), limit: binary_limit });
    }
    let sign = match model.direction {
        Direction::Maximize => 1.0,
        Direction::Minimize => -1.0,
    };
    let n = model.vars().len();
    let mut objective = vec![0.0; n];
    for &(v, c) in model.objective().terms() {
        objective[v.index()] = sign * c;
    }
    let rows = model
        .constraints()
        .iter()
        .map(|c| {
            let terms = c.expr.terms().iter().map(|&(v, a)| (v.index(), a)).collect();
            let sense = match c.sense {
                Sense::Le => RowSense::Le,
                Sense::Eq => RowSense::Eq,
                Sense::Ge => RowSense::Ge,
            };
            (terms, sense, c.rhs - c.expr.constant)
        })
        .collect();
    let mut base = LpProblem {
        objective,
        rows,
        lower: model.vars().iter().map(|v| v.lower).collect(),
        upper: model.vars().iter().map(|v| v.upper).collect(),
    };
    // Fixed binaries must sit on an integer.
    for (j, v) in model.vars().iter().enumerate() {
        if v.kind == VarKind::Binary && v.is_fixed() {
            let r = v.lower.round();
            base.lower[j] = r;
            base.upper[j] = r;
        }
    }

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut stack: Vec<Vec<(usize, f64)>> = vec![Vec::new()];
    while let Some(fixings) = stack.pop() {
        let mut lp = base.clone();
        for &(j, v) in &fixings {
            lp.lower[j] = v;
            lp.upper[j] = v;
        }
        let (x, obj) = match solve_lp(&lp, tol) {
            LpOutcome::Optimal { x, objective } => (x, objective),
            LpOutcome::Infeasible => continue,
            // Binaries are bounded, so an unbounded relaxation means the
            // problem itself is unbounded.
            LpOutcome::Unbounded => return Ok(Solution::without_point(SolveStatus::Unbounded)),
        };
        if let Some((inc, _)) = &best {
            if obj <= inc + tol.optimality * (1.0 + inc.abs()) {
                continue;
            }
        }
        let pending: Vec<usize> = free.iter().copied().filter(|j| !fixings.iter().any(|f| f.0 == *j)).collect();
        let branch = pending
            .iter()
            .copied()
            .filter(|&j| (x[j] - x[j].round()).abs() > tol.integrality)
            .max_by(|&a, &b| {
                let fa = (x[a] - x[a].round()).abs();
                let fb = (x[b] - x[b].round()).abs();
                fa.total_cmp(&fb).then(b.cmp(&a))
            });
        match branch {
            None => {
                // Integral relaxation: re-solve with the binaries pinned so the
                // continuous part is consistent with exact 0/1 values.
                let mut pinned = lp.clone();
                for &j in &free {
                    let r = x[j].round();
                    pinned.lower[j] = r;
                    pinned.upper[j] = r;
                }
                if let LpOutcome::Optimal { x, objective } = solve_lp(&pinned, tol) {
                    if best.as_ref().is_none_or(|(inc, _)| objective > *inc) {
                        best = Some((objective, x));
                    }
                }
            }
            Some(j) => {
                let prefer_one = x[j] >= 0.5;
                let (first, second) = if prefer_one { (0.0, 1.0) } else { (1.0, 0.0) };
                // Pushed second is explored first.
                for v in [first, second] {
                    let mut f = fixings.clone();
                    f.push((j, v));
                    stack.push(f);
                }
            }
        }
    }
    Ok(match best {
        Some((_, x)) => {
            let objective_value = model.objective_value(&x);
            Solution { status: SolveStatus::Optimal, values: x, objective_value }
        }
        None => Solution::without_point(SolveStatus::Infeasible),
    })
}

#[cfg(test)]
mod tests {
    use super::super::{check_feasible, LinExpr};
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn continuous_only() {
        let mut m = MilpModel::new(Direction::Maximize);
        let x = m.add_continuous("x", 0.0, 3.0).unwrap();
        m.set_objective(LinExpr::term(x, 1.0)).unwrap();
        let s = solve_tiny(&m, DEFAULT_BINARY_LIMIT).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.objective_value - 3.0).abs() < 1e-9);
    }

    #[test]
    fn two_binary_toy() {
        let mut m = MilpModel::new(Direction::Maximize);
        let a = m.add_binary("a").unwrap();
        let b = m.add_binary("b").unwrap();
        m.add_constraint(LinExpr::term(a, 1.0).with(b, 1.0), Sense::Le, 1.0, "pick_one").unwrap();
        m.set_objective(LinExpr::term(a, 3.0).with(b, 2.0)).unwrap();
        let s = solve_tiny(&m, 2).unwrap();
        assert!((s.objective_value - 3.0).abs() < 1e-9);
        assert_eq!(s.value(a), 1.0);
        assert!(check_feasible(&m, &s, 1e-6).unwrap().is_empty());
    }

    #[test]
    fn refuses_too_many_binaries() {
        let mut m = MilpModel::default();
        for i in 0..3 {
            m.add_binary(&format!("b{i}")).unwrap();
        }
        assert!(matches!(solve_tiny(&m, 2), Err(MilpError::TooManyBinaries { count: 3, limit: 2 })));
        // Fixed binaries do not count.
        let b0 = m.var_by_name("b0").unwrap();
        m.fix(b0, 1.0).unwrap();
        assert!(solve_tiny(&m, 2).is_ok());
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut m = MilpModel::new(Direction::Maximize);
        let x = m.add_continuous("x", 0.0, f64::INFINITY).unwrap();
        m.add_constraint(LinExpr::term(x, 1.0), Sense::Ge, 1.0, "lo").unwrap();
        m.set_objective(LinExpr::term(x, 1.0)).unwrap();
        assert_eq!(solve_tiny(&m, 0).unwrap().status, SolveStatus::Unbounded);
        m.add_constraint(LinExpr::term(x, 1.0), Sense::Le, 0.0, "hi").unwrap();
        assert_eq!(solve_tiny(&m, 0).unwrap().status, SolveStatus::Infeasible);
    }

    #[test]
    fn all_binaries_fixed_matches_relaxation() {
        let mut m = MilpModel::new(Direction::Minimize);
        let x = m.add_continuous("x", 0.0, 10.0).unwrap();
        let b = m.add_binary("b").unwrap();
        m.add_constraint(LinExpr::term(x, 1.0).with(b, -4.0), Sense::Ge, 1.0, "x_ge").unwrap();
        m.set_objective(LinExpr::term(x, 1.0).with(b, 1.0)).unwrap();
        m.fix(b, 1.0).unwrap();
        let s = solve_tiny(&m, 0).unwrap();
        assert!((s.objective_value - 6.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_quadratic() {
        let mut m = MilpModel::default();
        let x = m.add_continuous("x", 0.0, 1.0).unwrap();
        m.add_quadratic_term(x, x, 1.0).unwrap();
        assert!(matches!(solve_tiny(&m, 0), Err(MilpError::QuadraticUnsupported)));
    }

    /// Knapsack-like random instance plus its brute-force optimum.
    fn random_model(values: &[f64], weights: &[f64], cap: f64, slack_cost: f64) -> (MilpModel, f64) {
        let mut m = MilpModel::new(Direction::Maximize);
        let bins: Vec<_> = (0..values.len()).map(|i| m.add_binary(&format!("b{i}")).unwrap()).collect();
        // Continuous overflow allowance at a price.
        let s = m.add_continuous("s", 0.0, 2.0).unwrap();
        let mut row = LinExpr::term(s, -1.0);
        let mut obj = LinExpr::term(s, -slack_cost);
        for (i, &b) in bins.iter().enumerate() {
            row.add(b, weights[i]);
            obj.add(b, values[i]);
        }
        m.add_constraint(row, Sense::Le, cap, "capacity").unwrap();
        m.set_objective(obj).unwrap();
        let mut best = f64::NEG_INFINITY;
        for mask in 0u32..(1 << values.len()) {
            let w: f64 = (0..values.len()).filter(|i| mask >> i & 1 == 1).map(|i| weights[i]).sum();
            let v: f64 = (0..values.len()).filter(|i| mask >> i & 1 == 1).map(|i| values[i]).sum();
            let over = (w - cap).max(0.0);
            if over <= 2.0 {
                best = best.max(v - slack_cost * over);
            }
        }
        (m, best)
    }

    proptest! {
        #[test]
        fn matches_brute_force(
            items in proptest::collection::vec((0.0..10.0f64, 0.1..5.0f64), 1..8),
            cap in 1.0..10.0f64,
            slack_cost in 0.5..5.0f64,
        ) {
            let values: Vec<f64> = items.iter().map(|i| i.0).collect();
            let weights: Vec<f64> = items.iter().map(|i| i.1).collect();
            let (m, oracle) = random_model(&values, &weights, cap, slack_cost);
            let s = solve_tiny(&m, 8).unwrap();
            prop_assert!((s.objective_value - oracle).abs() <= 1e-6 * (1.0 + oracle.abs()));
            prop_assert!(check_feasible(&m, &s, 1e-6).unwrap().is_empty());
        }

        #[test]
        fn row_scaling_is_harmless(
            items in proptest::collection::vec((0.0..10.0f64, 0.1..5.0f64), 1..6),
            cap in 1.0..10.0f64,
            scale in prop_oneof![1e-4..1e-2f64, 1e2..1e5f64],
        ) {
            let values: Vec<f64> = items.iter().map(|i| i.0).collect();
            let weights: Vec<f64> = items.iter().map(|i| i.1).collect();
            let (m, _) = random_model(&values, &weights, cap, 1.0);
            let scaled_w: Vec<f64> = weights.iter().map(|w| w * scale).collect();
            // Same feasible set with the row and the slack rescaled.
            let mut ms = MilpModel::new(Direction::Maximize);
            let bins: Vec<_> = (0..values.len()).map(|i| ms.add_binary(&format!("b{i}")).unwrap()).collect();
            let s = ms.add_continuous("s", 0.0, 2.0).unwrap();
            let mut row = LinExpr::term(s, -scale);
            let mut obj = LinExpr::term(s, -1.0);
            for (i, &b) in bins.iter().enumerate() {
                row.add(b, scaled_w[i]);
                obj.add(b, values[i]);
            }
            ms.add_constraint(row, Sense::Le, cap * scale, "capacity").unwrap();
            ms.set_objective(obj).unwrap();
            let a = solve_tiny(&m, 8).unwrap().objective_value;
            let b = solve_tiny(&ms, 8).unwrap().objective_value;
            prop_assert!((a - b).abs() <= 1e-6 * (1.0 + a.abs()));
        }
    }
}
