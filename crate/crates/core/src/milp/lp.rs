//! CPLEX LP text output and the adapter solution-file format.
//!
//! Solution files hold a `status <optimal|infeasible|unbounded|limit>` line,
//! an optional `objective <value>` line and one `name value` line per variable.

use super::{Direction, MilpError, MilpModel, Sense, Solution, SolveStatus, VarKind};
use std::collections::HashMap;
use std::fmt::Write as _;

const MAX_LINE: usize = 200;

fn num(v: f64) -> String {
    // Debug formatting is the shortest string that parses back to the same f64.
    format!("{v:?}")
}

fn sanitize(tag: &str) -> String {
    tag.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '.' { c } else { '_' }).collect()
}

/// Append `items` after `head`, wrapping lines that get long.
fn write_wrapped(out: &mut String, head: &str, items: &[String], tail: &str) {
    let mut line = String::from(head);
    for item in items {
        if line.len() + item.len() + 1 > MAX_LINE && !line.trim().is_empty() {
            out.push_str(&line);
            out.push('\n');
            line = String::from("   ");
        }
        line.push(' ');
        line.push_str(item);
    }
    if !tail.is_empty() {
        if line.len() + tail.len() + 1 > MAX_LINE {
            out.push_str(&line);
            out.push('\n');
            line = String::from("   ");
        }
        line.push(' ');
        line.push_str(tail);
    }
    out.push_str(&line);
    out.push('\n');
}

fn term_strings(model: &MilpModel, terms: &[(super::VarId, f64)]) -> Vec<String> {
    terms
        .iter()
        .enumerate()
        .map(|(k, &(v, c))| {
            let name = &model.var(v).name;
            match (k, c < 0.0) {
                (0, false) => format!("{} {name}", num(c)),
                (0, true) => format!("- {} {name}", num(-c)),
                (_, false) => format!("+ {} {name}", num(c)),
                (_, true) => format!("- {} {name}", num(-c)),
            }
        })
        .collect()
}

/// Render the model in CPLEX LP format. Output depends only on the model, so
/// equal models give byte-identical text.
pub fn emit_lp(model: &MilpModel) -> Result<String, MilpError> {
    let mut out = String::new();
    out.push_str("\\ generated by p2a\n");
    out.push_str(match model.direction {
        Direction::Maximize => "Maximize\n",
        Direction::Minimize => "Minimize\n",
    });

    let obj = model.objective();
    let mut items = term_strings(model, obj.terms());
    if obj.constant != 0.0 || items.is_empty() {
        let c = obj.constant;
        items.push(if items.is_empty() {
            num(c)
        } else if c < 0.0 {
            format!("- {}", num(-c))
        } else {
            format!("+ {}", num(c))
        });
    }
    if !model.quadratic_terms().is_empty() {
        // LP format expects [ ... ] / 2, so coefficients are doubled.
        let mut q = vec!["+ [".to_string()];
        for (k, &(i, j, c)) in model.quadratic_terms().iter().enumerate() {
            let sign = if c < 0.0 { "-" } else if k == 0 { "" } else { "+" };
            let (a, b) = (&model.var(i).name, &model.var(j).name);
            let body = if i == j { format!("{a} ^ 2") } else { format!("{a} * {b}") };
            let coef = num(2.0 * c.abs());
            q.push(if sign.is_empty() { format!("{coef} {body}") } else { format!("{sign} {coef} {body}") });
        }
        q.push("] / 2".to_string());
        items.extend(q);
    }
    write_wrapped(&mut out, " obj:", &items, "");

    out.push_str("Subject To\n");
    for (idx, c) in model.constraints().iter().enumerate() {
        let head = format!(" c{idx}_{}:", sanitize(&c.tag));
        let mut items = term_strings(model, c.expr.terms());
        if items.is_empty() {
            // Constant-only rows still need a variable reference to be legal.
            if let Some(first) = model.vars().first() {
                items.push(format!("0 {}", first.name));
            } else {
                let lhs = c.expr.constant;
                let ok = match c.sense {
                    Sense::Le => lhs <= c.rhs,
                    Sense::Ge => lhs >= c.rhs,
                    Sense::Eq => lhs == c.rhs,
                };
                if !ok {
                    return Err(MilpError::InvalidModel(format!(
                        "constraint `{}` has no variables and is violated",
                        c.tag
                    )));
                }
                continue;
            }
        }
        let tail = format!("{} {}", c.sense, num(c.rhs - c.expr.constant));
        write_wrapped(&mut out, &head, &items, &tail);
    }

    out.push_str("Bounds\n");
    for v in model.vars() {
        let line = if v.is_fixed() {
            format!(" {} = {}", v.name, num(v.lower))
        } else {
            let lo = if v.lower == f64::NEG_INFINITY { "-inf".to_string() } else { num(v.lower) };
            let hi = if v.upper == f64::INFINITY { "+inf".to_string() } else { num(v.upper) };
            format!(" {lo} <= {} <= {hi}", v.name)
        };
        out.push_str(&line);
        out.push('\n');
    }

    let binaries: Vec<String> = model
        .vars()
        .iter()
        .filter(|v| v.kind == VarKind::Binary && !v.is_fixed())
        .map(|v| v.name.clone())
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for chunk in binaries.chunks(8) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    Ok(out)
}

/// Read a solution file written by a solver adapter. The objective is
/// recomputed from the values so it is consistent with the model.
pub fn parse_solution(text: &str, model: &MilpModel) -> Result<Solution, MilpError> {
    let mut status = None;
    let mut reported_obj = None;
    let mut values: HashMap<&str, f64> = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(key), Some(val), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(MilpError::Parse(format!("line {}: expected `name value`, got `{line}`", lineno + 1)));
        };
        match key {
            "status" => {
                status = Some(
                    SolveStatus::parse(val)
                        .ok_or_else(|| MilpError::Parse(format!("unknown status `{val}`")))?,
                )
            }
            "objective" => {
                reported_obj = Some(parse_f64(val, lineno)?);
            }
            name => {
                if values.insert(name, parse_f64(val, lineno)?).is_some() {
                    return Err(MilpError::Parse(format!("duplicate value for `{name}`")));
                }
            }
        }
    }
    let status = status.ok_or_else(|| MilpError::Parse("missing status line".into()))?;
    if values.is_empty() {
        if status == SolveStatus::Optimal {
            return Err(MilpError::Parse("optimal status without variable values".into()));
        }
        return Ok(Solution::without_point(status));
    }
    let mut x = Vec::with_capacity(model.vars().len());
    for v in model.vars() {
        match values.get(v.name.as_str()) {
            Some(&val) => x.push(val),
            None => return Err(MilpError::MissingValue(v.name.clone())),
        }
    }
    if values.len() != x.len() {
        let unknown = values.keys().find(|k| model.var_by_name(k).is_none()).copied().unwrap_or("?");
        return Err(MilpError::Parse(format!("value for unknown variable `{unknown}`")));
    }
    let objective_value = model.objective_value(&x);
    if let Some(r) = reported_obj {
        let scale = 1.0 + objective_value.abs();
        if (r - objective_value).abs() > 1e-4 * scale {
            log::warn!("solver objective {r} differs from recomputed {objective_value}");
        }
    }
    Ok(Solution { status, values: x, objective_value })
}

fn parse_f64(s: &str, lineno: usize) -> Result<f64, MilpError> {
    s.parse::<f64>().map_err(|_| MilpError::Parse(format!("line {}: bad number `{s}`", lineno + 1)))
}

#[cfg(test)]
mod tests {
    use super::super::{LinExpr, MilpModel};
    use super::*;

    fn binary_toy() -> MilpModel {
        let mut m = MilpModel::new(Direction::Maximize);
        let x = m.add_continuous("x", 0.0, 10.0).unwrap();
        let b = m.add_binary("b").unwrap();
        m.add_constraint(LinExpr::new().with(x, 1.0).with(b, -5.0), Sense::Le, 0.0, "x_le_5b").unwrap();
        m.set_objective(LinExpr::term(x, 1.0).with(b, -0.5)).unwrap();
        m
    }

    #[test]
    fn binaries_section_lists_binary() {
        let text = emit_lp(&binary_toy()).unwrap();
        let sec = text.split("Binaries\n").nth(1).unwrap();
        assert!(sec.starts_with(" b\n"), "{text}");
        assert!(text.contains("c0_x_le_5b: 1.0 x - 5.0 b <= 0.0"), "{text}");
        assert!(text.ends_with("End\n"));
    }

    #[test]
    fn empty_model_is_minimal() {
        let m = MilpModel::new(Direction::Minimize);
        let text = emit_lp(&m).unwrap();
        assert_eq!(text, "\\ generated by p2a\nMinimize\n obj: 0.0\nSubject To\nBounds\nEnd\n");
    }

    #[test]
    fn bounds_fixed_and_infinite() {
        let mut m = MilpModel::default();
        let a = m.add_continuous("a", f64::NEG_INFINITY, f64::INFINITY).unwrap();
        let b = m.add_binary("bb").unwrap();
        m.fix(b, 1.0).unwrap();
        m.set_objective(LinExpr::term(a, -1.0).with(b, 2.0)).unwrap();
        let text = emit_lp(&m).unwrap();
        assert!(text.contains(" -inf <= a <= +inf\n"));
        assert!(text.contains(" bb = 1.0\n"));
        assert!(!text.contains("Binaries"));
        assert!(text.contains("obj: - 1.0 a + 2.0 bb"));
    }

    #[test]
    fn long_rows_wrap() {
        let mut m = MilpModel::default();
        let mut e = LinExpr::new();
        for i in 0..200 {
            let v = m.add_continuous(&format!("variable_{i}"), 0.0, 1.0).unwrap();
            e.add(v, 1.5);
        }
        m.add_constraint(e, Sense::Le, 10.0, "sum[t=1]").unwrap();
        let text = emit_lp(&m).unwrap();
        assert!(text.lines().all(|l| l.len() <= MAX_LINE + 40));
        assert!(text.contains("c0_sum_t_1_:"));
    }

    #[test]
    fn deterministic_output() {
        assert_eq!(emit_lp(&binary_toy()).unwrap(), emit_lp(&binary_toy()).unwrap());
    }

    #[test]
    fn quadratic_objective_section() {
        let mut m = MilpModel::new(Direction::Minimize);
        let x = m.add_continuous("x", 0.0, 1.0).unwrap();
        m.add_quadratic_term(x, x, 1.5).unwrap();
        let text = emit_lp(&m).unwrap();
        assert!(text.contains("obj: 0.0 + [ 3.0 x ^ 2 ] / 2"), "{text}");
    }

    #[test]
    fn parses_solution_file() {
        let m = binary_toy();
        let s = parse_solution("status optimal\nobjective 4.5\nx 5\nb 1\n", &m).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert_eq!(s.values, vec![5.0, 1.0]);
        assert_eq!(s.objective_value, 4.5);
        let s = parse_solution("status infeasible\n", &m).unwrap();
        assert_eq!(s.status, SolveStatus::Infeasible);
        assert!(!s.has_point());
        assert!(matches!(parse_solution("status optimal\nx 1\n", &m), Err(MilpError::MissingValue(_))));
        assert!(matches!(parse_solution("x 1\nb 0\n", &m), Err(MilpError::Parse(_))));
        assert!(matches!(parse_solution("status optimal\nx one\nb 0", &m), Err(MilpError::Parse(_))));
    }
}
