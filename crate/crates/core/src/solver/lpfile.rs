//! CPLEX LP text export and `name value` solution files.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::SolverError;
use crate::encoder::{MilpModel, Sense, VarKind};

const TERMS_PER_LINE: usize = 8;

fn push_terms(out: &mut String, terms: impl Iterator<Item = (f64, String)>) {
    for (k, (c, name)) in terms.enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if c < 0.0 { '-' } else { '+' };
        let mag = c.abs();
        if k == 0 && c >= 0.0 {
            if mag == 1.0 {
                let _ = write!(out, " {name}");
            } else {
                let _ = write!(out, " {mag} {name}");
            }
        } else if mag == 1.0 {
            let _ = write!(out, " {sign} {name}");
        } else {
            let _ = write!(out, " {sign} {mag} {name}");
        }
    }
}

fn num(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

/// Renders `model` in CPLEX LP format. Identical models give identical text.
pub fn export_lp(model: &MilpModel) -> String {
    let name = |v: crate::encoder::VarId| model.variables[v.0].name.clone();
    let mut out = String::from("\\ stl-synth model\nMinimize\n obj:");
    push_terms(
        &mut out,
        model.objective.linear.iter().filter(|(_, c)| *c != 0.0).map(|&(v, c)| (c, name(v))),
    );
    let quad: Vec<_> = model.objective.quadratic.iter().filter(|(_, q)| *q != 0.0).collect();
    if !quad.is_empty() {
        out.push_str(if model.objective.linear.is_empty() { " [" } else { " + [" });
        push_terms(&mut out, quad.iter().map(|&&(v, q)| (2.0 * q, format!("{} ^ 2", name(v)))));
        out.push_str(" ] / 2");
    }
    out.push_str("\nSubject To\n");
    for c in &model.constraints {
        let _ = write!(out, " {}:", c.name);
        if c.terms.is_empty() {
            let _ = write!(out, " 0 {}", model.variables.first().map_or("x", |v| v.name.as_str()));
        }
        push_terms(&mut out, c.terms.iter().map(|&(v, a)| (a, name(v))));
        let op = match c.sense {
            Sense::Le => "<=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", num(c.rhs));
    }
    let bounds: Vec<String> = model
        .variables
        .iter()
        .filter(|v| !(v.kind == VarKind::Binary && v.lower == 0.0 && v.upper == 1.0))
        .map(|v| {
            if v.lower == v.upper {
                format!(" {} = {}", v.name, num(v.lower))
            } else if v.lower == f64::NEG_INFINITY && v.upper == f64::INFINITY {
                format!(" {} free", v.name)
            } else {
                format!(" {} <= {} <= {}", num(v.lower), v.name, num(v.upper))
            }
        })
        .collect();
    if !bounds.is_empty() {
        out.push_str("Bounds\n");
        for b in bounds {
            out.push_str(&b);
            out.push('\n');
        }
    }
    let binaries: Vec<&str> = model
        .variables
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .map(|v| v.name.as_str())
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for b in binaries {
            let _ = writeln!(out, " {b}");
        }
    }
    out.push_str("End\n");
    out
}

/// Writes one `name value` line per variable.
pub fn write_solution(model: &MilpModel, values: &[f64]) -> String {
    let mut out = String::new();
    for (v, x) in model.variables.iter().zip(values) {
        let _ = writeln!(out, "{} {x:?}", v.name);
    }
    out
}

/// Parses `name value` lines (with `#` comments) into a value per model
/// variable. Variables missing from the file are taken as zero.
pub fn read_solution(model: &MilpModel, text: &str) -> Result<Vec<f64>, SolverError> {
    let index: HashMap<&str, usize> = model
        .variables
        .iter()
        .enumerate()
        .map(|(i, v)| (v.name.as_str(), i))
        .collect();
    let mut values = vec![0.0; model.num_vars()];
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(SolverError::SolutionSyntax {
                line: ln + 1,
                text: raw.to_string(),
            });
        };
        let Some(&j) = index.get(name) else {
            return Err(SolverError::UnknownVariable {
                name: name.to_string(),
                line: ln + 1,
            });
        };
        values[j] = value.parse().map_err(|_| SolverError::SolutionSyntax {
            line: ln + 1,
            text: raw.to_string(),
        })?;
    }
    Ok(values)
}
