//! Solver-agnostic mixed-integer linear model.
//!
//! Models are assembled here, written out as CPLEX LP text for an external
//! solver ([`solve_external`]) or, when small enough, solved in-process by
//! [`solve_tiny`].

mod external;
mod lp;
mod simplex;
mod tiny;

pub use external::{default_solver_command, solve_external, SolverConfig, SOLVER_ENV};
pub use lp::{emit_lp, parse_solution};
pub use simplex::{solve_lp, LpOutcome, LpProblem, RowSense};
pub use tiny::{solve_tiny, solve_tiny_with, DEFAULT_BINARY_LIMIT};

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MilpError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("{count} free binaries exceed the limit of {limit}")]
    TooManyBinaries { count: usize, limit: usize },
    #[error("the bundled solver does not handle quadratic objectives")]
    QuadraticUnsupported,
    #[error("cannot start solver `{command}`: {reason}")]
    Spawn { command: String, reason: String },
    #[error("solver exited with {code}: {stderr}")]
    SolverFailed { code: String, stderr: String },
    #[error("solver exceeded the time limit of {0} s")]
    Timeout(f64),
    #[error("cannot parse solver output: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("solution has no value for `{0}`")]
    MissingValue(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarId(usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

impl Variable {
    pub fn is_fixed(&self) -> bool {
        self.lower == self.upper
    }
}

/// Sum of `coefficient * variable` terms plus a constant.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LinExpr {
    terms: Vec<(VarId, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn new() -> Self {
        LinExpr::default()
    }

    pub fn constant(c: f64) -> Self {
        LinExpr { terms: Vec::new(), constant: c }
    }

    pub fn term(v: VarId, coef: f64) -> Self {
        let mut e = LinExpr::new();
        e.add(v, coef);
        e
    }

    /// Add `coef * v`; repeated variables are merged.
    pub fn add(&mut self, v: VarId, coef: f64) -> &mut Self {
        self.terms.push((v, coef));
        self
    }

    pub fn with(mut self, v: VarId, coef: f64) -> Self {
        self.add(v, coef);
        self
    }

    pub fn add_constant(&mut self, c: f64) -> &mut Self {
        self.constant += c;
        self
    }

    pub fn add_expr(&mut self, other: &LinExpr, scale: f64) -> &mut Self {
        for &(v, c) in &other.terms {
            self.terms.push((v, c * scale));
        }
        self.constant += other.constant * scale;
        self
    }

    /// Terms sorted by variable, duplicates merged, zeros dropped.
    pub fn terms(&self) -> &[(VarId, f64)] {
        &self.terms
    }

    fn normalize(&mut self) {
        self.terms.sort_by_key(|t| t.0);
        let mut merged: Vec<(VarId, f64)> = Vec::with_capacity(self.terms.len());
        for &(v, c) in &self.terms {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += c,
                _ => merged.push((v, c)),
            }
        }
        merged.retain(|t| t.1 != 0.0);
        self.terms = merged;
    }

    pub fn eval(&self, values: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(v, c)| c * values[v.0]).sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub expr: LinExpr,
    pub sense: Sense,
    pub rhs: f64,
    /// Equation label such as `state_exclusive[t=5]`.
    pub tag: String,
}

impl Constraint {
    /// Amount by which the constraint is violated at `values` (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.expr.eval(values);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Minimize,
    Maximize,
}

/// Integrality, feasibility and LP optimality tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub integrality: f64,
    pub feasibility: f64,
    pub optimality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { integrality: 1e-6, feasibility: 1e-6, optimality: 1e-7 }
    }
}

const RESERVED_NAMES: [&str; 18] = [
    "status", "objective", "inf", "infinity", "free", "st", "end", "bounds", "binaries", "binary",
    "bin", "general", "generals", "subject", "to", "maximize", "minimize", "obj",
];

/// Names usable in LP files: `[A-Za-z_][A-Za-z0-9_.]*`, not a keyword and not
/// starting with `e`/`E` followed by a digit (which parses as an exponent).
pub fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    let Some(first) = chars.next() else { return false };
    if !(first.is_ascii_alphabetic() || first == '_') {
        return false;
    }
    if !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.') {
        return false;
    }
    if (first == 'e' || first == 'E') && name[1..].starts_with(|c: char| c.is_ascii_digit()) {
        return false;
    }
    !RESERVED_NAMES.contains(&name.to_ascii_lowercase().as_str())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MilpModel {
    vars: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: LinExpr,
    /// Optional `(i, j, q)` terms; the objective gains `q * x_i * x_j`.
    quadratic: Vec<(VarId, VarId, f64)>,
    pub direction: Direction,
    #[serde(skip)]
    names: HashMap<String, VarId>,
}

impl Default for MilpModel {
    fn default() -> Self {
        MilpModel::new(Direction::Maximize)
    }
}

impl MilpModel {
    pub fn new(direction: Direction) -> Self {
        MilpModel {
            vars: Vec::new(),
            constraints: Vec::new(),
            objective: LinExpr::new(),
            quadratic: Vec::new(),
            direction,
            names: HashMap::new(),
        }
    }

    pub fn add_var(&mut self, name: &str, kind: VarKind, lower: f64, upper: f64) -> Result<VarId, MilpError> {
        if !is_valid_name(name) {
            return Err(MilpError::InvalidModel(format!("bad variable name `{name}`")));
        }
        if self.names.contains_key(name) {
            return Err(MilpError::InvalidModel(format!("duplicate variable `{name}`")));
        }
        if lower.is_nan() || upper.is_nan() || lower > upper || lower == f64::INFINITY || upper == f64::NEG_INFINITY {
            return Err(MilpError::InvalidModel(format!("bad bounds [{lower}, {upper}] for `{name}`")));
        }
        if kind == VarKind::Binary && (lower < 0.0 || upper > 1.0) {
            return Err(MilpError::InvalidModel(format!("binary `{name}` bounds outside [0, 1]")));
        }
        let id = VarId(self.vars.len());
        self.vars.push(Variable { name: name.to_string(), kind, lower, upper });
        self.names.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn add_continuous(&mut self, name: &str, lower: f64, upper: f64) -> Result<VarId, MilpError> {
        self.add_var(name, VarKind::Continuous, lower, upper)
    }

    pub fn add_binary(&mut self, name: &str) -> Result<VarId, MilpError> {
        self.add_var(name, VarKind::Binary, 0.0, 1.0)
    }

    /// Tighten or fix a variable's bounds (e.g. to pin a binary).
    pub fn set_bounds(&mut self, v: VarId, lower: f64, upper: f64) -> Result<(), MilpError> {
        let var = self
            .vars
            .get_mut(v.0)
            .ok_or_else(|| MilpError::InvalidModel(format!("unknown variable id {}", v.0)))?;
        if lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(MilpError::InvalidModel(format!("bad bounds [{lower}, {upper}] for `{}`", var.name)));
        }
        if var.kind == VarKind::Binary && (lower < 0.0 || upper > 1.0) {
            return Err(MilpError::InvalidModel(format!("binary `{}` bounds outside [0, 1]", var.name)));
        }
        var.lower = lower;
        var.upper = upper;
        Ok(())
    }

    pub fn fix(&mut self, v: VarId, value: f64) -> Result<(), MilpError> {
        self.set_bounds(v, value, value)
    }

    fn check_expr(&self, e: &LinExpr, what: &str) -> Result<(), MilpError> {
        if !e.constant.is_finite() {
            return Err(MilpError::InvalidModel(format!("non-finite constant in {what}")));
        }
        for &(v, c) in &e.terms {
            if v.0 >= self.vars.len() {
                return Err(MilpError::InvalidModel(format!("unregistered variable in {what}")));
            }
            if !c.is_finite() {
                return Err(MilpError::InvalidModel(format!(
                    "non-finite coefficient on `{}` in {what}",
                    self.vars[v.0].name
                )));
            }
        }
        Ok(())
    }

    pub fn add_constraint(
        &mut self,
        mut expr: LinExpr,
        sense: Sense,
        rhs: f64,
        tag: impl Into<String>,
    ) -> Result<usize, MilpError> {
        let tag = tag.into();
        if tag.is_empty() {
            return Err(MilpError::InvalidModel("constraint tag is empty".into()));
        }
        if !rhs.is_finite() {
            return Err(MilpError::InvalidModel(format!("non-finite rhs in `{tag}`")));
        }
        self.check_expr(&expr, &tag)?;
        expr.normalize();
        self.constraints.push(Constraint { expr, sense, rhs, tag });
        Ok(self.constraints.len() - 1)
    }

    pub fn set_objective(&mut self, mut expr: LinExpr) -> Result<(), MilpError> {
        self.check_expr(&expr, "objective")?;
        expr.normalize();
        self.objective = expr;
        Ok(())
    }

    /// Add `q * x_i * x_j` to the objective. Only external solvers accept these.
    pub fn add_quadratic_term(&mut self, i: VarId, j: VarId, q: f64) -> Result<(), MilpError> {
        if i.0 >= self.vars.len() || j.0 >= self.vars.len() || !q.is_finite() {
            return Err(MilpError::InvalidModel("bad quadratic objective term".into()));
        }
        self.quadratic.push((i, j, q));
        Ok(())
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn var(&self, v: VarId) -> &Variable {
        &self.vars[v.0]
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.names.get(name).copied()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &LinExpr {
        &self.objective
    }

    pub fn quadratic_terms(&self) -> &[(VarId, VarId, f64)] {
        &self.quadratic
    }

    pub fn num_binaries(&self) -> usize {
        self.vars.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    /// Binaries whose bounds still leave both 0 and 1 open.
    pub fn free_binaries(&self) -> Vec<VarId> {
        self.vars
            .iter()
            .enumerate()
            .filter(|(_, v)| v.kind == VarKind::Binary && v.lower < v.upper)
            .map(|(i, _)| VarId(i))
            .collect()
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        let quad: f64 = self.quadratic.iter().map(|&(i, j, q)| q * values[i.0] * values[j.0]).sum();
        self.objective.eval(values) + quad
    }

    /// Rebuild the name index after deserialization.
    pub fn reindex(&mut self) {
        self.names = self.vars.iter().enumerate().map(|(i, v)| (v.name.clone(), VarId(i))).collect();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Stopped by a time or node limit; values, if any, are the best found.
    Limit,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::Limit => "limit",
        }
    }

    pub fn parse(s: &str) -> Option<SolveStatus> {
        match s {
            "optimal" => Some(SolveStatus::Optimal),
            "infeasible" => Some(SolveStatus::Infeasible),
            "unbounded" => Some(SolveStatus::Unbounded),
            "limit" => Some(SolveStatus::Limit),
            _ => None,
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub status: SolveStatus,
    /// Indexed by [`VarId::index`]; empty when no point is available.
    pub values: Vec<f64>,
    pub objective_value: f64,
}

impl Solution {
    pub fn without_point(status: SolveStatus) -> Self {
        Solution { status, values: Vec::new(), objective_value: f64::NAN }
    }

    pub fn has_point(&self) -> bool {
        !self.values.is_empty()
    }

    pub fn value(&self, v: VarId) -> f64 {
        self.values[v.0]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub tag: String,
    pub residual: f64,
}

/// Every constraint, bound or integrality requirement violated by more than `tol`.
/// Bound and integrality entries are tagged `bound:<name>` and `integrality:<name>`.
pub fn check_feasible(model: &MilpModel, solution: &Solution, tol: f64) -> Result<Vec<Violation>, MilpError> {
    if solution.values.len() != model.vars.len() {
        let missing = model
            .vars
            .get(solution.values.len())
            .map(|v| v.name.clone())
            .unwrap_or_else(|| "<extra values>".into());
        return Err(MilpError::MissingValue(missing));
    }
    let x = &solution.values;
    let mut out = Vec::new();
    for c in &model.constraints {
        let r = c.violation(x);
        if r > tol || r.is_nan() {
            out.push(Violation { tag: c.tag.clone(), residual: r });
        }
    }
    for (v, &val) in model.vars.iter().zip(x) {
        let r = (v.lower - val).max(val - v.upper).max(0.0);
        if r > tol || val.is_nan() {
            out.push(Violation { tag: format!("bound:{}", v.name), residual: r });
        }
        if v.kind == VarKind::Binary {
            let r = (val - val.round()).abs();
            if r > tol {
                out.push(Violation { tag: format!("integrality:{}", v.name), residual: r });
            }
        }
    }
    Ok(out)
}
