//! Quadratic unconstrained binary model of the routing problem.
//!
//! The energy of an assignment is
//!
//! ```text
//! f(x) + B g(x) + alpha (p(x) + q(x) + r(x) + s(x))
//! ```
//!
//! where `f` is the latency of the selected edges, `g` the demand-weighted
//! joint failure probability over cross-destination edge pairs, `p`/`q` force
//! exactly one active edge at the source/destination of each path, `r`
//! forces two active edges at each selected intermediate vertex and `s`
//! penalizes intermediate (non-terminal) vertices shared by both paths.
//! Squared binaries are folded into linear terms (`x^2 = x`).

mod anneal;
mod exhaustive;

pub use anneal::{anneal, anneal_restarts, AnnealSchedule};
pub use exhaustive::{
    energy_table, exhaustive_minimize, penalty_audit, GrayWalker, MinimumResult, PenaltyAudit,
    DEFAULT_EXHAUSTIVE_LIMIT,
};

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::encoding::{layout_for, Assignment, VariableLayout};
use crate::error::{Error, Result};
use crate::topology::{FailureModel, Topology};

/// Coefficients of a quadratic pseudo-Boolean function.
#[derive(Debug, Clone, PartialEq)]
pub struct Qubo {
    constant: f64,
    linear: Vec<f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
}

impl Qubo {
    pub fn new(n: usize) -> Self {
        Qubo {
            constant: 0.0,
            linear: vec![0.0; n],
            quadratic: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.linear.len()
    }

    pub fn is_empty(&self) -> bool {
        self.linear.is_empty()
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    /// Upper-triangular couplings keyed by `(i, j)` with `i < j`.
    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.quadratic
    }

    pub fn add_constant(&mut self, c: f64) {
        self.constant += c;
    }

    pub fn add_linear(&mut self, i: usize, c: f64) {
        self.linear[i] += c;
    }

    /// Adds `c * x_i * x_j`; `i == j` lands on the linear term.
    pub fn add_quadratic(&mut self, i: usize, j: usize, c: f64) {
        if i == j {
            self.add_linear(i, c);
            return;
        }
        let key = if i < j { (i, j) } else { (j, i) };
        *self.quadratic.entry(key).or_insert(0.0) += c;
    }

    /// Adds `scale * (c0 + sum_k a_k x_k)^2` for distinct variables.
    pub fn add_square(&mut self, scale: f64, c0: f64, terms: &[(usize, f64)]) {
        self.add_constant(scale * c0 * c0);
        for (k, &(i, a)) in terms.iter().enumerate() {
            self.add_linear(i, scale * (a * a + 2.0 * c0 * a));
            for &(j, b) in &terms[k + 1..] {
                debug_assert_ne!(i, j, "square terms must be distinct variables");
                self.add_quadratic(i, j, scale * 2.0 * a * b);
            }
        }
    }

    /// `self + scale * other`.
    pub fn add_scaled(&mut self, other: &Qubo, scale: f64) {
        assert_eq!(self.len(), other.len());
        self.constant += scale * other.constant;
        for (a, b) in self.linear.iter_mut().zip(&other.linear) {
            *a += scale * b;
        }
        for (&k, &v) in &other.quadratic {
            *self.quadratic.entry(k).or_insert(0.0) += scale * v;
        }
    }

    /// Drops couplings that cancelled to exactly zero.
    pub fn prune(&mut self) {
        self.quadratic.retain(|_, v| *v != 0.0);
    }

    pub fn energy(&self, a: &Assignment) -> Result<f64> {
        if a.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                found: a.len(),
            });
        }
        Ok(self.energy_bits(|i| a.get(i)))
    }

    /// Energy of the basis index whose bit `i` is variable `i`.
    pub fn energy_of_index(&self, index: u64) -> f64 {
        self.energy_bits(|i| (index >> i) & 1 == 1)
    }

    fn energy_bits(&self, bit: impl Fn(usize) -> bool) -> f64 {
        let mut e = self.constant;
        for (i, &c) in self.linear.iter().enumerate() {
            if bit(i) {
                e += c;
            }
        }
        for (&(i, j), &c) in &self.quadratic {
            if bit(i) && bit(j) {
                e += c;
            }
        }
        e
    }

    /// Symmetric neighbor lists `(j, Q_ij)`.
    pub fn couplings(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.len()];
        for (&(i, j), &c) in &self.quadratic {
            adj[i].push((j, c));
            adj[j].push((i, c));
        }
        adj
    }

    pub fn nonzero_count(&self) -> usize {
        (self.constant != 0.0) as usize
            + self.linear.iter().filter(|&&c| c != 0.0).count()
            + self.quadratic.values().filter(|&&c| c != 0.0).count()
    }

    /// Sparse text form: a `# constant <c>` header line, then `i j value` rows
    /// with `i == j` for linear terms. Zero coefficients are omitted.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# constant {:?}", self.constant).unwrap();
        writeln!(out, "# variables {}", self.len()).unwrap();
        for (i, &c) in self.linear.iter().enumerate() {
            if c != 0.0 {
                writeln!(out, "{i} {i} {c:?}").unwrap();
            }
        }
        for (&(i, j), &c) in &self.quadratic {
            if c != 0.0 {
                writeln!(out, "{i} {j} {c:?}").unwrap();
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut constant = 0.0;
        let mut n = None;
        let mut rows = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let bad = |msg: &str| Error::Parse {
                line: k + 1,
                column: 1,
                message: msg.to_string(),
            };
            let line = line.trim();
            if let Some(rest) = line.strip_prefix('#') {
                let mut parts = rest.split_whitespace();
                match (parts.next(), parts.next()) {
                    (Some("constant"), Some(v)) => {
                        constant = v.parse().map_err(|_| bad("bad constant"))?
                    }
                    (Some("variables"), Some(v)) => {
                        n = Some(v.parse::<usize>().map_err(|_| bad("bad variable count"))?)
                    }
                    _ => {}
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(bad("expected `i j value`"));
            }
            let i: usize = parts[0].parse().map_err(|_| bad("bad index"))?;
            let j: usize = parts[1].parse().map_err(|_| bad("bad index"))?;
            let v: f64 = parts[2].parse().map_err(|_| bad("bad value"))?;
            rows.push((i, j, v));
        }
        let n = n.unwrap_or_else(|| rows.iter().map(|&(i, j, _)| i.max(j) + 1).max().unwrap_or(0));
        let mut q = Qubo::new(n);
        q.constant = constant;
        for (i, j, v) in rows {
            if i >= n || j >= n {
                return Err(Error::InvalidParameter(format!("index ({i}, {j}) out of range")));
            }
            q.add_quadratic(i, j, v);
        }
        Ok(q)
    }
}

/// Penalty weight: twice the total edge latency.
pub fn default_alpha(topology: &Topology) -> f64 {
    2.0 * topology.total_latency()
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuboModel {
    pub layout: VariableLayout,
    /// Full energy: objective plus `alpha` times penalty.
    pub qubo: Qubo,
    /// `f + B g` alone.
    pub objective: Qubo,
    /// `p + q + r + s` alone, unscaled.
    pub penalty: Qubo,
    pub trade_off: f64,
    pub alpha: f64,
    pub demand: f64,
}

impl QuboModel {
    pub fn len(&self) -> usize {
        self.qubo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.qubo.is_empty()
    }

    pub fn energy(&self, a: &Assignment) -> Result<f64> {
        self.qubo.energy(a)
    }
}

pub fn build_qubo(
    topology: &Topology,
    failures: &FailureModel,
    source: &str,
    trade_off: f64,
    alpha: f64,
    demand: f64,
) -> Result<QuboModel> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    let layout = layout_for(topology, source)?;
    let n = layout.len();
    let s = layout.source();
    let terminals = layout.terminals();

    let mut objective = Qubo::new(n);
    for d in 0..2 {
        for &e in layout.edge_order() {
            objective.add_linear(layout.edge_var(d, e), topology.edges()[e].latency);
        }
    }
    // resiliency couples an edge of the t1 path with an edge of the t2 path
    for &e in layout.edge_order() {
        for &f in layout.edge_order() {
            objective.add_quadratic(
                layout.edge_var(0, e),
                layout.edge_var(1, f),
                trade_off * demand * failures.joint(e, f),
            );
        }
    }

    let mut penalty = Qubo::new(n);
    for d in 0..2 {
        let l = terminals[d];
        let incident = |v: usize| -> Vec<(usize, f64)> {
            layout.incident_edges(v).map(|e| (layout.edge_var(d, e), -1.0)).collect()
        };
        for end in [s, l] {
            // 1 - x_end + (x_end - sum_j x_{end,j})^2
            let x = layout.vertex_var(d, end);
            penalty.add_constant(1.0);
            penalty.add_linear(x, -1.0);
            let mut terms = vec![(x, 1.0)];
            terms.extend(incident(end));
            penalty.add_square(1.0, 0.0, &terms);
        }
        for &v in layout.vertex_order() {
            if v == s || v == l {
                continue;
            }
            // (2 x_v - sum_j x_{v,j})^2
            let mut terms = vec![(layout.vertex_var(d, v), 2.0)];
            terms.extend(incident(v));
            penalty.add_square(1.0, 0.0, &terms);
        }
    }
    for &v in layout.vertex_order() {
        if v == s || terminals.contains(&v) {
            continue;
        }
        penalty.add_quadratic(layout.vertex_var(0, v), layout.vertex_var(1, v), 1.0);
    }
    objective.prune();
    penalty.prune();

    let mut qubo = objective.clone();
    qubo.add_scaled(&penalty, alpha);
    qubo.prune();

    Ok(QuboModel {
        layout,
        qubo,
        objective,
        penalty,
        trade_off,
        alpha,
        demand,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{encode, VariableKind};
    use crate::oracle::solve_source;
    use crate::topology::{
        build_failure_model, reduced_topology, toy_topology, toy_topology_with, Scenario,
    };

    /// Term-by-term evaluation of the energy straight from the definitions,
    /// with squares computed numerically rather than through `x^2 = x`.
    pub(crate) fn direct_energy(
        topology: &Topology,
        failures: &FailureModel,
        layout: &VariableLayout,
        trade_off: f64,
        alpha: f64,
        demand: f64,
        a: &Assignment,
    ) -> (f64, f64) {
        let x = |i: usize| a.get(i) as i64 as f64;
        let s = layout.source();
        let terms = layout.terminals();
        let edges = topology.edges();
        let mut f = 0.0;
        for d in 0..2 {
            for e in 0..edges.len() {
                f += edges[e].latency * x(layout.edge_var(d, e));
            }
        }
        let mut g = 0.0;
        for e in 0..edges.len() {
            for h in 0..edges.len() {
                g += failures.joint(e, h) * x(layout.edge_var(0, e)) * x(layout.edge_var(1, h));
            }
        }
        g *= demand;
        let degree = |d: usize, v: usize| -> f64 {
            (0..edges.len())
                .filter(|&e| edges[e].touches(v))
                .map(|e| x(layout.edge_var(d, e)))
                .sum()
        };
        let (mut p, mut q, mut r, mut sp) = (0.0, 0.0, 0.0, 0.0);
        for d in 0..2 {
            let l = terms[d];
            let xs = x(layout.vertex_var(d, s));
            p += 1.0 - xs * xs + (xs - degree(d, s)).powi(2);
            let xl = x(layout.vertex_var(d, l));
            q += 1.0 - xl * xl + (xl - degree(d, l)).powi(2);
            for v in 0..topology.vertex_count() {
                if v != s && v != l {
                    r += (2.0 * x(layout.vertex_var(d, v)) - degree(d, v)).powi(2);
                }
            }
        }
        for v in 0..topology.vertex_count() {
            if v != s && !terms.contains(&v) {
                sp += x(layout.vertex_var(0, v)) * x(layout.vertex_var(1, v));
            }
        }
        let penalty = p + q + r + sp;
        (f + trade_off * g + alpha * penalty, penalty)
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn default_alpha_is_twice_total_latency() {
        let unit = toy_topology_with([1.0; 7]).unwrap();
        assert_eq!(default_alpha(&unit), 14.0);
        let t = toy_topology_with([1.0, 2.0, 3.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(default_alpha(&t), 12.0);
        assert_eq!(default_alpha(&toy_topology()), 16.0);
    }

    #[test]
    fn default_alpha_of_edgeless_graph_is_zero() {
        use crate::topology::{Role, Vertex};
        let vertices = vec![
            Vertex { id: "a".into(), role: Role::Terminal },
            Vertex { id: "b".into(), role: Role::Terminal },
        ];
        let t = Topology::new::<&str>(vertices, &[]).unwrap();
        assert_eq!(default_alpha(&t), 0.0);
    }

    #[test]
    fn alpha_must_be_positive() {
        let t = toy_topology();
        let fm = FailureModel::uniform(&t, 0.1).unwrap();
        assert!(build_qubo(&t, &fm, "S1", 1000.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn all_zeros_energy_is_four_alpha() {
        let t = toy_topology();
        let fm = FailureModel::uniform(&t, 0.1).unwrap();
        let m = build_qubo(&t, &fm, "S2", 1000.0, 16.0, 1.0).unwrap();
        assert_eq!(m.len(), 24);
        let zeros = Assignment::zeros(24);
        assert_eq!(m.energy(&zeros).unwrap(), 64.0);
        assert_eq!(m.qubo.constant(), 64.0);
        let (direct, _) = direct_energy(&t, &fm, &m.layout, 1000.0, 16.0, 1.0, &zeros);
        assert_eq!(direct, 64.0);
    }

    #[test]
    fn single_bit_energy_is_constant_plus_linear() {
        let t = toy_topology();
        let fm = FailureModel::uniform(&t, 0.1).unwrap();
        let m = build_qubo(&t, &fm, "S1", 1000.0, 16.0, 1.0).unwrap();
        for i in 0..m.len() {
            let a = Assignment::from_index(1 << i, m.len());
            assert_eq!(
                m.energy(&a).unwrap(),
                m.qubo.constant() + m.qubo.linear()[i]
            );
        }
    }

    #[test]
    fn oracle_optimum_energy_is_objective() {
        let t = toy_topology();
        for sc in [Scenario::uncorrelated(0.1), Scenario::toy_correlated()] {
            let fm = build_failure_model(&t, &sc).unwrap();
            for s in t.secondaries() {
                let sol = solve_source(&t, &fm, s, 1000.0, 1.0).unwrap();
                let m = build_qubo(&t, &fm, t.id(s), 1000.0, 16.0, 1.0).unwrap();
                let a = encode(&sol, &m.layout).unwrap();
                assert!(close(m.energy(&a).unwrap(), sol.objective));
                assert_eq!(m.penalty.energy(&a).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn each_penalty_expands_as_written() {
        // Isolate each penalty on the reduced graph by evaluating all 2^16
        // assignments against the numeric definition.
        let t = reduced_topology();
        let fm = build_failure_model(&t, &Scenario::reduced_correlated()).unwrap();
        let m = build_qubo(&t, &fm, "S1", 7.0, 3.0, 1.5).unwrap();
        for idx in 0..(1u64 << 16) {
            let a = Assignment::from_index(idx, 16);
            let (direct, pen) = direct_energy(&t, &fm, &m.layout, 7.0, 3.0, 1.5, &a);
            assert!(close(m.qubo.energy_of_index(idx), direct), "index {idx}");
            assert_eq!(m.penalty.energy_of_index(idx), pen, "index {idx}");
        }
    }

    #[test]
    fn resiliency_couples_only_cross_destination_edges() {
        let t = toy_topology();
        let fm = FailureModel::uniform(&t, 0.1).unwrap();
        let m = build_qubo(&t, &fm, "S1", 1000.0, 16.0, 1.0).unwrap();
        for &(i, j) in m.objective.quadratic().keys() {
            let (a, b) = (m.layout.variable(i), m.layout.variable(j));
            assert_ne!(a.destination, b.destination);
            assert!(matches!(a.kind, VariableKind::Edge(_)));
            assert!(matches!(b.kind, VariableKind::Edge(_)));
        }
        assert_eq!(m.objective.quadratic().len(), 49);
    }

    #[test]
    fn text_round_trip() {
        let t = toy_topology();
        let fm = FailureModel::uniform(&t, 0.1).unwrap();
        let m = build_qubo(&t, &fm, "S3", 1000.0, 16.0, 1.0).unwrap();
        let text = m.qubo.to_text();
        let rows = text.lines().filter(|l| !l.starts_with('#')).count();
        assert_eq!(rows + 1, m.qubo.nonzero_count());
        let back = Qubo::from_text(&text).unwrap();
        assert_eq!(back, m.qubo);
    }
}
