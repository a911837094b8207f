//! Reads the LP export back with a small standalone parser and substitutes
//! path pairs into it: every disjoint pair must be feasible with objective
//! `f + B g`, and breaking a pair must violate some row.

use std::collections::{BTreeMap, BTreeSet};

use resroute::encoding::export_ilp;
use resroute::oracle::{simple_paths, vertex_disjoint, Path, RoutingSolution};
use resroute::topology::{build_failure_model, resolve_scenario, toy_topology, Topology};

#[derive(Debug)]
struct Row {
    name: String,
    terms: Vec<(f64, String)>,
    sense: String,
    rhs: f64,
}

#[derive(Debug, Default)]
struct Lp {
    objective: Vec<(f64, String)>,
    rows: Vec<Row>,
    bounded: BTreeSet<String>,
    binary: BTreeSet<String>,
}

fn parse_terms(tokens: &[&str]) -> Vec<(f64, String)> {
    let mut out = Vec::new();
    let mut sign = 1.0;
    let mut k = 0;
    while k < tokens.len() {
        match tokens[k] {
            "+" => sign = 1.0,
            "-" => sign = -1.0,
            coef => {
                let c: f64 = coef.parse().unwrap_or_else(|_| panic!("bad coefficient {coef}"));
                out.push((sign * c, tokens[k + 1].to_string()));
                sign = 1.0;
                k += 1;
            }
        }
        k += 1;
    }
    out
}

fn parse(text: &str) -> Lp {
    let mut lp = Lp::default();
    let mut section = "";
    let mut pending = String::new();
    let flush = |pending: &mut String, section: &str, lp: &mut Lp| {
        if pending.is_empty() {
            return;
        }
        let (name, body) = pending.split_once(':').expect("labelled row");
        let tokens: Vec<&str> = body.split_whitespace().collect();
        if section == "obj" {
            lp.objective = parse_terms(&tokens);
        } else {
            let n = tokens.len();
            lp.rows.push(Row {
                name: name.trim().to_string(),
                terms: parse_terms(&tokens[..n - 2]),
                sense: tokens[n - 2].to_string(),
                rhs: tokens[n - 1].parse().unwrap(),
            });
        }
        pending.clear();
    };
    for line in text.lines() {
        if line.starts_with('\\') {
            continue;
        }
        let head = line.trim();
        match head {
            "Minimize" => section = "obj",
            "Subject To" | "Bounds" | "Binary" | "End" => {
                flush(&mut pending, section, &mut lp);
                section = head;
            }
            _ if section == "Bounds" => {
                let parts: Vec<&str> = head.split_whitespace().collect();
                assert_eq!((parts[0], parts[1], parts[3], parts[4]), ("0", "<=", "<=", "1"));
                lp.bounded.insert(parts[2].to_string());
            }
            _ if section == "Binary" => {
                lp.binary.insert(head.to_string());
            }
            _ if line.starts_with("    ") => {
                pending.push(' ');
                pending.push_str(head);
            }
            _ => {
                flush(&mut pending, section, &mut lp);
                pending.push_str(head);
            }
        }
    }
    lp
}

fn eval(terms: &[(f64, String)], values: &BTreeMap<String, f64>) -> f64 {
    terms
        .iter()
        .map(|(c, v)| c * values.get(v).copied().unwrap_or_else(|| panic!("unknown variable {v}")))
        .sum()
}

fn satisfied(row: &Row, values: &BTreeMap<String, f64>) -> bool {
    let lhs = eval(&row.terms, values);
    match row.sense.as_str() {
        "=" => (lhs - row.rhs).abs() < 1e-9,
        "<=" => lhs <= row.rhs + 1e-9,
        ">=" => lhs >= row.rhs - 1e-9,
        s => panic!("unknown sense {s}"),
    }
}

/// Values of every variable for a pair of paths, found by name.
fn substitute(lp: &Lp, t: &Topology, paths: [&Path; 2]) -> BTreeMap<String, f64> {
    let mut values: BTreeMap<String, f64> = lp.binary.iter().map(|v| (v.clone(), 0.0)).collect();
    let [t1, t2] = t.terminals();
    let mut used: [Vec<String>; 2] = Default::default();
    for (d, (term, path)) in [(t1, paths[0]), (t2, paths[1])].into_iter().enumerate() {
        let tag = t.id(term);
        for &v in path.vertices() {
            *values.get_mut(&format!("xv_{tag}_{}", t.id(v))).unwrap() = 1.0;
        }
        for w in path.vertices().windows(2) {
            let (a, b) = (t.id(w[0]), t.id(w[1]));
            let name = [format!("xe_{tag}_{a}_{b}"), format!("xe_{tag}_{b}_{a}")]
                .into_iter()
                .find(|n| values.contains_key(n))
                .expect("edge variable exists");
            values.insert(name.clone(), 1.0);
            used[d].push(name[4 + tag.len()..].to_string());
        }
    }
    for y in &lp.bounded {
        let on = used[0].iter().any(|e| used[1].iter().any(|f| *y == format!("y_{e}_{f}")));
        values.insert(y.clone(), if on { 1.0 } else { 0.0 });
    }
    values
}

#[test]
fn every_disjoint_pair_is_feasible_with_its_objective() {
    let t = toy_topology();
    let [t1, t2] = t.terminals();
    for scenario in ["uncorrelated", "correlated"] {
        let sc = resolve_scenario(&t, None, Some(scenario)).unwrap();
        let fm = build_failure_model(&t, &sc).unwrap();
        for s in t.secondaries() {
            let src = t.id(s);
            let lp = parse(&export_ilp(&t, &fm, src, 1000.0, 1.0).unwrap());
            assert_eq!(lp.binary.len(), 24, "{src}");
            assert_eq!(lp.bounded.len(), 49, "{src}");
            let mut pairs = 0;
            for p1 in simple_paths(&t, s, t1) {
                for p2 in simple_paths(&t, s, t2) {
                    if !vertex_disjoint(&p1, &p2) {
                        continue;
                    }
                    pairs += 1;
                    let values = substitute(&lp, &t, [&p1, &p2]);
                    for row in &lp.rows {
                        assert!(satisfied(row, &values), "{src} {} violates {}", p1.describe(&t), row.name);
                    }
                    let want = RoutingSolution::evaluate(&t, &fm, p1.clone(), p2.clone(), 1000.0, 1.0).objective;
                    let got = eval(&lp.objective, &values);
                    assert!((got - want).abs() <= 1e-9 * want, "{src}: {got} vs {want}");

                    // dropping the first edge of the t1 path must break a row
                    let mut broken = values.clone();
                    let first = broken
                        .iter()
                        .find(|(k, v)| k.starts_with(&format!("xe_{}_", t.id(t1))) && **v == 1.0)
                        .map(|(k, _)| k.clone())
                        .unwrap();
                    broken.insert(first, 0.0);
                    assert!(lp.rows.iter().any(|r| !satisfied(r, &broken)));
                }
            }
            assert!(pairs > 0);
        }
    }
}

#[test]
fn overlapping_pairs_are_infeasible() {
    let t = toy_topology();
    let fm = build_failure_model(&t, &resolve_scenario(&t, None, Some("uncorrelated")).unwrap()).unwrap();
    let lp = parse(&export_ilp(&t, &fm, "S2", 1000.0, 1.0).unwrap());
    // both paths through S1
    let p1 = Path::from_ids(&t, &["S2", "S1", "T1"]).unwrap();
    let p2 = Path::from_ids(&t, &["S2", "S1", "T2"]).unwrap();
    let values = substitute(&lp, &t, [&p1, &p2]);
    let failing: Vec<&str> = lp
        .rows
        .iter()
        .filter(|r| !satisfied(r, &values))
        .map(|r| r.name.as_str())
        .collect();
    assert_eq!(failing, ["disj_S1"]);
}
