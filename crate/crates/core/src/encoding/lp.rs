//! CPLEX-LP export of the linearized routing model.
//!
//! Each product `x_e^(t1) * x_f^(t2)` of the resiliency term is replaced by a
//! continuous `y_<e>_<f>` in `[0, 1]` tied to its factors by
//! `y <= x_e`, `y <= x_f` and `y >= x_e + x_f - 1`.

use std::fmt::Write;

use crate::error::Result;
use crate::topology::{FailureModel, Topology};

use super::{layout_for, VariableLayout};

const TERMS_PER_LINE: usize = 6;

fn edge_tag(topology: &Topology, layout: &VariableLayout, e: usize) -> String {
    let (u, v) = layout.endpoints(e);
    format!("{}_{}", topology.id(u), topology.id(v))
}

pub fn slack_name(topology: &Topology, layout: &VariableLayout, e: usize, f: usize) -> String {
    format!(
        "y_{}_{}",
        edge_tag(topology, layout, e),
        edge_tag(topology, layout, f)
    )
}

fn format_coefficient(c: f64) -> String {
    // shortest representation that round-trips
    format!("{c:?}")
}

/// Writes `label: c1 v1 + c2 v2 ...` wrapped over several lines.
fn write_expression(out: &mut String, label: &str, terms: &[(f64, String)]) {
    write!(out, " {label}:").unwrap();
    for (k, (c, name)) in terms.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if *c < 0.0 { '-' } else { '+' };
        if k == 0 && sign == '+' {
            write!(out, " {} {name}", format_coefficient(c.abs())).unwrap();
        } else {
            write!(out, " {sign} {} {name}", format_coefficient(c.abs())).unwrap();
        }
    }
}

fn write_constraint(out: &mut String, label: &str, terms: &[(f64, String)], sense: &str, rhs: f64) {
    write_expression(out, label, terms);
    writeln!(out, " {sense} {}", format_coefficient(rhs)).unwrap();
}

/// Renders the integer program for one source as LP-format text.
pub fn export_ilp(
    topology: &Topology,
    failures: &FailureModel,
    source: &str,
    trade_off: f64,
    demand: f64,
) -> Result<String> {
    let layout = layout_for(topology, source)?;
    let s = layout.source();
    let terminals = layout.terminals();
    let name = |i: usize| layout.name(i, topology);
    let mut out = String::new();

    writeln!(
        out,
        "\\ routing model for source {} (B = {trade_off:?}, d_s = {demand:?})",
        topology.id(s)
    )
    .unwrap();

    let mut objective = Vec::new();
    for d in 0..2 {
        for &e in layout.edge_order() {
            let c = topology.edges()[e].latency;
            if c != 0.0 {
                objective.push((c, name(layout.edge_var(d, e))));
            }
        }
    }
    let mut slacks = Vec::new();
    for &e in layout.edge_order() {
        for &f in layout.edge_order() {
            let y = slack_name(topology, &layout, e, f);
            let c = trade_off * demand * failures.joint(e, f);
            if c != 0.0 {
                objective.push((c, y.clone()));
            }
            slacks.push((e, f, y));
        }
    }
    out.push_str("Minimize\n");
    write_expression(&mut out, "obj", &objective);
    out.push('\n');

    out.push_str("Subject To\n");
    for d in 0..2 {
        let l = terminals[d];
        let tag = topology.id(l);
        let degree = |v: usize| -> Vec<(f64, String)> {
            layout
                .incident_edges(v)
                .map(|e| (1.0, name(layout.edge_var(d, e))))
                .collect()
        };
        write_constraint(&mut out, &format!("src_deg_{tag}"), &degree(s), "=", 1.0);
        write_constraint(
            &mut out,
            &format!("src_on_{tag}"),
            &[(1.0, name(layout.vertex_var(d, s)))],
            "=",
            1.0,
        );
        write_constraint(&mut out, &format!("dst_deg_{tag}"), &degree(l), "=", 1.0);
        write_constraint(
            &mut out,
            &format!("dst_on_{tag}"),
            &[(1.0, name(layout.vertex_var(d, l)))],
            "=",
            1.0,
        );
        for &v in layout.vertex_order() {
            if v == s || v == l {
                continue;
            }
            let mut terms = degree(v);
            terms.push((-2.0, name(layout.vertex_var(d, v))));
            write_constraint(
                &mut out,
                &format!("mid_{tag}_{}", topology.id(v)),
                &terms,
                "=",
                0.0,
            );
        }
    }
    for &v in layout.vertex_order() {
        if v == s {
            continue;
        }
        write_constraint(
            &mut out,
            &format!("disj_{}", topology.id(v)),
            &[
                (1.0, name(layout.vertex_var(0, v))),
                (1.0, name(layout.vertex_var(1, v))),
            ],
            "<=",
            1.0,
        );
    }
    for (e, f, y) in &slacks {
        let xe = name(layout.edge_var(0, *e));
        let xf = name(layout.edge_var(1, *f));
        let tag = &y[2..];
        write_constraint(
            &mut out,
            &format!("lin_a_{tag}"),
            &[(1.0, y.clone()), (-1.0, xe.clone())],
            "<=",
            0.0,
        );
        write_constraint(
            &mut out,
            &format!("lin_b_{tag}"),
            &[(1.0, y.clone()), (-1.0, xf.clone())],
            "<=",
            0.0,
        );
        write_constraint(
            &mut out,
            &format!("lin_c_{tag}"),
            &[(1.0, y.clone()), (-1.0, xe), (-1.0, xf)],
            ">=",
            -1.0,
        );
    }

    out.push_str("Bounds\n");
    for (_, _, y) in &slacks {
        writeln!(out, " 0 <= {y} <= 1").unwrap();
    }
    out.push_str("Binary\n");
    for i in 0..layout.len() {
        writeln!(out, " {}", name(i)).unwrap();
    }
    out.push_str("End\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{build_failure_model, toy_topology, Scenario};

    #[test]
    fn toy_export_declares_24_binaries_and_49_slacks() {
        let t = toy_topology();
        let fm = build_failure_model(&t, &Scenario::uncorrelated(0.1)).unwrap();
        let text = export_ilp(&t, &fm, "S2", 1000.0, 1.0).unwrap();
        let binary: Vec<&str> = text
            .split("Binary\n")
            .nth(1)
            .unwrap()
            .lines()
            .take_while(|l| *l != "End")
            .collect();
        assert_eq!(binary.len(), 24);
        let bounds = text
            .split("Bounds\n")
            .nth(1)
            .unwrap()
            .lines()
            .take_while(|l| *l != "Binary")
            .count();
        assert_eq!(bounds, 49);
    }

    #[test]
    fn zero_trade_off_omits_slack_terms_from_objective() {
        let t = toy_topology();
        let fm = build_failure_model(&t, &Scenario::uncorrelated(0.1)).unwrap();
        let text = export_ilp(&t, &fm, "S1", 0.0, 1.0).unwrap();
        let objective = text
            .split("Minimize\n")
            .nth(1)
            .unwrap()
            .split("Subject To")
            .next()
            .unwrap();
        assert!(!objective.contains("y_"));
        assert!(text.contains(" 0 <= y_S1_S2_S1_S2 <= 1"));
    }
}
