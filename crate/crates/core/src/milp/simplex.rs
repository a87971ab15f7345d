//! Dense two-phase primal simplex for small LPs.
//!
//! Bounded variables are shifted or split onto `y >= 0`, finite upper bounds
//! become rows, and rows and columns are equilibrated before pivoting. Meant
//! for problems with at most a few hundred variables.

use super::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

/// `maximize c.x  s.t.  rows, lower <= x <= upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    /// Sparse rows `(terms, sense, rhs)`.
    pub rows: Vec<(Vec<(usize, f64)>, RowSense, f64)>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, objective: f64 },
    Infeasible,
    Unbounded,
}

const PIVOT_TOL: f64 = 1e-10;
const MAX_ITERATIONS: usize = 100_000;
const DEGENERATE_SWITCH: usize = 50;

/// How an original variable maps onto non-negative columns.
#[derive(Clone, Copy)]
enum Map {
    /// x = offset + y[col]
    Shift { col: usize, offset: f64 },
    /// x = offset - y[col]
    Mirror { col: usize, offset: f64 },
    /// x = y[pos] - y[neg]
    Split { pos: usize, neg: usize },
    Fixed(f64),
}

struct Tableau {
    /// `m` rows of `ncols + 1` entries, rhs last.
    a: Vec<Vec<f64>>,
    /// Reduced-cost row: `z_j = c_B B^-1 a_j - c_j`, objective value last.
    z: Vec<f64>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, s: usize) {
        let p = self.a[r][s];
        for v in self.a[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.a[r].clone();
        for (i, row) in self.a.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[s];
            if f != 0.0 {
                for (v, pr) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pr;
                }
                row[s] = 0.0;
            }
        }
        let f = self.z[s];
        if f != 0.0 {
            for (v, pr) in self.z.iter_mut().zip(&pivot_row) {
                *v -= f * pr;
            }
            self.z[s] = 0.0;
        }
        self.basis[r] = s;
    }

    fn set_costs(&mut self, c: &[f64]) {
        let n = self.ncols;
        self.z = vec![0.0; n + 1];
        for j in 0..n {
            self.z[j] = -c[j];
        }
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = c[b];
            if cb != 0.0 {
                for (zj, aij) in self.z.iter_mut().zip(&self.a[i]) {
                    *zj += cb * aij;
                }
            }
        }
    }

    /// Run primal simplex on the current costs. Returns false if unbounded.
    fn optimize(&mut self, allowed: &[bool], opt_tol: f64) -> Result<bool, ()> {
        let rhs = self.ncols;
        let mut degenerate = 0usize;
        for _ in 0..MAX_ITERATIONS {
            let bland = degenerate >= DEGENERATE_SWITCH;
            let mut enter = None;
            let mut best = -opt_tol;
            for j in 0..self.ncols {
                if !allowed[j] {
                    continue;
                }
                if self.z[j] < best {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    best = self.z[j];
                }
            }
            let Some(s) = enter else { return Ok(true) };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.a.iter().enumerate() {
                let aij = row[s];
                if aij > PIVOT_TOL {
                    let ratio = row[rhs].max(0.0) / aij;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((k, best_ratio)) => {
                            if ratio < best_ratio - 1e-12
                                || (ratio <= best_ratio + 1e-12 && self.basis[i] < self.basis[k])
                            {
                                Some((i, ratio))
                            } else {
                                Some((k, best_ratio))
                            }
                        }
                    };
                }
            }
            let Some((r, ratio)) = leave else { return Ok(false) };
            degenerate = if ratio <= 1e-12 { degenerate + 1 } else { 0 };
            self.pivot(r, s);
        }
        Err(())
    }
}

/// Solve a small dense LP to optimality.
pub fn solve_lp(problem: &LpProblem, tol: &Tolerances) -> LpOutcome {
    let n = problem.objective.len();
    // Map original variables to non-negative columns.
    let mut maps = Vec::with_capacity(n);
    let mut ncol = 0usize;
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for j in 0..n {
        let (l, u) = (problem.lower[j], problem.upper[j]);
        if l > u {
            return LpOutcome::Infeasible;
        }
        let m = if l == u {
            Map::Fixed(l)
        } else if l.is_finite() {
            if u.is_finite() {
                bound_rows.push((ncol, u - l));
            }
            Map::Shift { col: ncol, offset: l }
        } else if u.is_finite() {
            Map::Mirror { col: ncol, offset: u }
        } else {
            ncol += 1;
            Map::Split { pos: ncol - 1, neg: ncol }
        };
        if !matches!(m, Map::Fixed(_)) {
            ncol += 1;
        }
        maps.push(m);
    }

    // Rows in y-space.
    let mut rows: Vec<(Vec<f64>, RowSense, f64)> = Vec::new();
    for (terms, sense, rhs) in &problem.rows {
        let mut dense = vec![0.0; ncol];
        let mut b = *rhs;
        for &(j, c) in terms {
            match maps[j] {
                Map::Fixed(v) => b -= c * v,
                Map::Shift { col, offset } => {
                    dense[col] += c;
                    b -= c * offset;
                }
                Map::Mirror { col, offset } => {
                    dense[col] -= c;
                    b -= c * offset;
                }
                Map::Split { pos, neg } => {
                    dense[pos] += c;
                    dense[neg] -= c;
                }
            }
        }
        if dense.iter().all(|&v| v == 0.0) {
            let ok = match sense {
                RowSense::Le => 0.0 <= b + tol.feasibility,
                RowSense::Ge => 0.0 >= b - tol.feasibility,
                RowSense::Eq => b.abs() <= tol.feasibility,
            };
            if !ok {
                return LpOutcome::Infeasible;
            }
            continue;
        }
        rows.push((dense, *sense, b));
    }
    for (col, span) in bound_rows {
        let mut dense = vec![0.0; ncol];
        dense[col] = 1.0;
        rows.push((dense, RowSense::Le, span));
    }
    let mut cost = vec![0.0; ncol];
    for j in 0..n {
        let c = problem.objective[j];
        match maps[j] {
            Map::Fixed(_) => {}
            Map::Shift { col, .. } => cost[col] += c,
            Map::Mirror { col, .. } => cost[col] -= c,
            Map::Split { pos, neg } => {
                cost[pos] += c;
                cost[neg] -= c;
            }
        }
    }

    // Equilibrate: rows to unit max, then columns to unit max.
    let mut row_feas = Vec::with_capacity(rows.len());
    for (dense, _, b) in rows.iter_mut() {
        let s = dense.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for v in dense.iter_mut() {
            *v /= s;
        }
        *b /= s;
        row_feas.push(tol.feasibility / s);
    }
    let mut col_scale = vec![1.0; ncol];
    for (j, cs) in col_scale.iter_mut().enumerate() {
        let s = rows.iter().fold(0.0f64, |m, r| m.max(r.0[j].abs()));
        if s > 0.0 {
            *cs = 1.0 / s;
        }
    }
    for (dense, _, _) in rows.iter_mut() {
        for (v, cs) in dense.iter_mut().zip(&col_scale) {
            *v *= cs;
        }
    }
    let cost: Vec<f64> = cost.iter().zip(&col_scale).map(|(c, s)| c * s).collect();
    let cost_norm = cost.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);

    // Standard form with b >= 0.
    let m = rows.len();
    let mut n_slack = 0;
    let mut n_art = 0;
    for (dense, sense, b) in rows.iter_mut() {
        if *b < 0.0 {
            for v in dense.iter_mut() {
                *v = -*v;
            }
            *b = -*b;
            *sense = match *sense {
                RowSense::Le => RowSense::Ge,
                RowSense::Ge => RowSense::Le,
                RowSense::Eq => RowSense::Eq,
            };
        }
        match sense {
            RowSense::Le => n_slack += 1,
            RowSense::Ge => {
                n_slack += 1;
                n_art += 1;
            }
            RowSense::Eq => n_art += 1,
        }
    }
    let total = ncol + n_slack + n_art;
    let art_start = ncol + n_slack;
    let mut a = vec![vec![0.0; total + 1]; m];
    let mut basis = vec![0; m];
    let (mut next_slack, mut next_art) = (ncol, art_start);
    for (i, (dense, sense, b)) in rows.iter().enumerate() {
        a[i][..ncol].copy_from_slice(dense);
        a[i][total] = *b;
        match sense {
            RowSense::Le => {
                a[i][next_slack] = 1.0;
                basis[i] = next_slack;
                next_slack += 1;
            }
            RowSense::Ge => {
                a[i][next_slack] = -1.0;
                next_slack += 1;
                a[i][next_art] = 1.0;
                basis[i] = next_art;
                next_art += 1;
            }
            RowSense::Eq => {
                a[i][next_art] = 1.0;
                basis[i] = next_art;
                next_art += 1;
            }
        }
    }
    let mut t = Tableau { a, z: Vec::new(), basis, ncols: total };

    if n_art > 0 {
        let mut c1 = vec![0.0; total];
        for c in c1.iter_mut().skip(art_start) {
            *c = -1.0;
        }
        t.set_costs(&c1);
        let allowed = vec![true; total];
        if t.optimize(&allowed, 1e-12).is_err() {
            return LpOutcome::Infeasible;
        }
        // Scaled infeasibility: sum of artificials left.
        let infeas: f64 = t
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| b >= art_start)
            .map(|(i, _)| t.a[i][total].max(0.0))
            .sum();
        let feas_tol = row_feas.iter().cloned().fold(f64::INFINITY, f64::min).min(tol.feasibility);
        if infeas > feas_tol.max(1e-9) {
            return LpOutcome::Infeasible;
        }
        // Drive remaining artificials out where possible.
        for r in 0..m {
            if t.basis[r] < art_start {
                continue;
            }
            if let Some(s) = (0..art_start).find(|&j| t.a[r][j].abs() > 1e-9) {
                t.pivot(r, s);
            }
        }
    }

    let mut c2 = vec![0.0; total];
    c2[..ncol].copy_from_slice(&cost);
    t.set_costs(&c2);
    let mut allowed = vec![true; total];
    for al in allowed.iter_mut().skip(art_start) {
        *al = false;
    }
    match t.optimize(&allowed, tol.optimality * cost_norm) {
        Ok(true) => {}
        Ok(false) => return LpOutcome::Unbounded,
        Err(()) => return LpOutcome::Infeasible,
    }

    let mut y = vec![0.0; total];
    for (i, &b) in t.basis.iter().enumerate() {
        y[b] = t.a[i][total];
    }
    let x: Vec<f64> = maps
        .iter()
        .map(|m| match *m {
            Map::Fixed(v) => v,
            Map::Shift { col, offset } => offset + y[col] * col_scale[col],
            Map::Mirror { col, offset } => offset - y[col] * col_scale[col],
            Map::Split { pos, neg } => y[pos] * col_scale[pos] - y[neg] * col_scale[neg],
        })
        .collect();
    let objective = problem.objective.iter().zip(&x).map(|(c, v)| c * v).sum::<f64>();
    LpOutcome::Optimal { x, objective }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn opt(o: LpOutcome) -> (Vec<f64>, f64) {
        match o {
            LpOutcome::Optimal { x, objective } => (x, objective),
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn textbook_max() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let p = LpProblem {
            objective: vec![3.0, 5.0],
            rows: vec![
                (vec![(0, 1.0)], RowSense::Le, 4.0),
                (vec![(1, 2.0)], RowSense::Le, 12.0),
                (vec![(0, 3.0), (1, 2.0)], RowSense::Le, 18.0),
            ],
            lower: vec![0.0; 2],
            upper: vec![f64::INFINITY; 2],
        };
        let (x, obj) = opt(solve_lp(&p, &tol()));
        assert!((obj - 36.0).abs() < 1e-9);
        assert!((x[0] - 2.0).abs() < 1e-9 && (x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn equality_and_ge_rows_with_free_variable() {
        // max -|x| style: max -(p) with x free, x = z - 2, z >= 3 -> x = 1
        let p = LpProblem {
            objective: vec![-1.0, 0.0],
            rows: vec![
                (vec![(0, 1.0), (1, -1.0)], RowSense::Eq, -2.0),
                (vec![(1, 1.0)], RowSense::Ge, 3.0),
            ],
            lower: vec![f64::NEG_INFINITY, f64::NEG_INFINITY],
            upper: vec![f64::INFINITY, 10.0],
        };
        let (x, obj) = opt(solve_lp(&p, &tol()));
        assert!((x[0] - 1.0).abs() < 1e-9, "{x:?}");
        assert!((obj + 1.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let infeasible = LpProblem {
            objective: vec![1.0],
            rows: vec![(vec![(0, 1.0)], RowSense::Ge, 1.0), (vec![(0, 1.0)], RowSense::Le, 0.0)],
            lower: vec![0.0],
            upper: vec![f64::INFINITY],
        };
        assert_eq!(solve_lp(&infeasible, &tol()), LpOutcome::Infeasible);
        let unbounded = LpProblem {
            objective: vec![1.0, 0.0],
            rows: vec![(vec![(0, 1.0), (1, -1.0)], RowSense::Le, 1.0)],
            lower: vec![0.0, 0.0],
            upper: vec![f64::INFINITY; 2],
        };
        assert_eq!(solve_lp(&unbounded, &tol()), LpOutcome::Unbounded);
    }

    #[test]
    fn badly_scaled_rows() {
        // Same as a unit problem but with rows multiplied by 1e6 and 1e-4.
        let p = LpProblem {
            objective: vec![1.0, 1.0],
            rows: vec![
                (vec![(0, 1e6), (1, 2e6)], RowSense::Le, 4e6),
                (vec![(0, 3e-4), (1, 1e-4)], RowSense::Le, 6e-4),
            ],
            lower: vec![0.0; 2],
            upper: vec![f64::INFINITY; 2],
        };
        let (_, obj) = opt(solve_lp(&p, &tol()));
        // Intersection of x + 2y = 4 and 3x + y = 6 -> (1.6, 1.2).
        assert!((obj - 2.8).abs() < 1e-9, "{obj}");
    }

    #[test]
    fn fixed_and_mirrored_variables() {
        let p = LpProblem {
            objective: vec![1.0, 2.0],
            rows: vec![(vec![(0, 1.0), (1, 1.0)], RowSense::Le, 10.0)],
            lower: vec![3.0, f64::NEG_INFINITY],
            upper: vec![3.0, 5.0],
        };
        let (x, obj) = opt(solve_lp(&p, &tol()));
        assert_eq!(x[0], 3.0);
        assert!((x[1] - 5.0).abs() < 1e-9);
        assert!((obj - 13.0).abs() < 1e-9);
    }
}
