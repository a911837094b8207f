//! Binary decision variables for one source and the path <-> bitvector codec.
//!
//! For each destination `l` in `[t1, t2]` the layout lists one variable per
//! vertex (ids in lexicographic order) followed by one per edge (canonical
//! order), `n = 2 * (|V| + |E|)` in total. Bit `i` of a basis index is
//! variable `i`.

mod lp;

pub use lp::export_ilp;

use crate::error::{Error, Result};
use crate::oracle::{Path, RoutingSolution};
use crate::topology::Topology;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VariableKind {
    Vertex(usize),
    Edge(usize),
}

/// What a single variable index stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Variable {
    /// 0 for the path to `t1`, 1 for the path to `t2`.
    pub destination: usize,
    pub kind: VariableKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariableLayout {
    source: usize,
    terminals: [usize; 2],
    vertex_order: Vec<usize>,
    edge_order: Vec<usize>,
    vertex_slot: Vec<usize>,
    edge_slot: Vec<usize>,
    endpoints: Vec<(usize, usize)>,
}

impl VariableLayout {
    pub fn source(&self) -> usize {
        self.source
    }

    pub fn terminals(&self) -> [usize; 2] {
        self.terminals
    }

    pub fn num_vertices(&self) -> usize {
        self.vertex_order.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edge_order.len()
    }

    pub fn len(&self) -> usize {
        2 * (self.num_vertices() + self.num_edges())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn block(&self) -> usize {
        self.num_vertices() + self.num_edges()
    }

    pub fn vertex_var(&self, destination: usize, vertex: usize) -> usize {
        destination * self.block() + self.vertex_slot[vertex]
    }

    pub fn edge_var(&self, destination: usize, edge: usize) -> usize {
        destination * self.block() + self.num_vertices() + self.edge_slot[edge]
    }

    pub fn variable(&self, index: usize) -> Variable {
        assert!(index < self.len(), "variable index out of range");
        let destination = index / self.block();
        let k = index % self.block();
        let kind = if k < self.num_vertices() {
            VariableKind::Vertex(self.vertex_order[k])
        } else {
            VariableKind::Edge(self.edge_order[k - self.num_vertices()])
        };
        Variable { destination, kind }
    }

    pub fn endpoints(&self, edge: usize) -> (usize, usize) {
        self.endpoints[edge]
    }

    /// Vertex indices in layout order.
    pub fn vertex_order(&self) -> &[usize] {
        &self.vertex_order
    }

    /// Edge indices in layout order.
    pub fn edge_order(&self) -> &[usize] {
        &self.edge_order
    }

    /// Edge indices incident to `vertex`, in layout order.
    pub fn incident_edges(&self, vertex: usize) -> impl Iterator<Item = usize> + '_ {
        self.edge_order.iter().copied().filter(move |&e| {
            let (a, b) = self.endpoints[e];
            a == vertex || b == vertex
        })
    }

    /// Human-readable variable name, e.g. `xv_T1_S2` or `xe_T2_S1_S3`.
    pub fn name(&self, index: usize, topology: &Topology) -> String {
        let var = self.variable(index);
        let dest = topology.id(self.terminals[var.destination]);
        match var.kind {
            VariableKind::Vertex(v) => format!("xv_{dest}_{}", topology.id(v)),
            VariableKind::Edge(e) => {
                let (a, b) = self.endpoints[e];
                format!("xe_{dest}_{}_{}", topology.id(a), topology.id(b))
            }
        }
    }
}

pub fn layout_for(topology: &Topology, source: &str) -> Result<VariableLayout> {
    let s = topology.require_secondary(source)?;
    Ok(layout_for_index(topology, s))
}

pub fn layout_for_index(topology: &Topology, source: usize) -> VariableLayout {
    let vertex_order = topology.lexicographic_vertex_order();
    let edge_order = topology.canonical_edge_order();
    let mut vertex_slot = vec![0; vertex_order.len()];
    for (k, &v) in vertex_order.iter().enumerate() {
        vertex_slot[v] = k;
    }
    let mut edge_slot = vec![0; edge_order.len()];
    for (k, &e) in edge_order.iter().enumerate() {
        edge_slot[e] = k;
    }
    VariableLayout {
        source,
        terminals: topology.terminals(),
        vertex_order,
        edge_order,
        vertex_slot,
        edge_slot,
        endpoints: topology.edges().iter().map(|e| (e.u, e.v)).collect(),
    }
}

/// A bitvector over a [`VariableLayout`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    bits: Vec<bool>,
}

impl Assignment {
    pub fn zeros(n: usize) -> Self {
        Assignment {
            bits: vec![false; n],
        }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Assignment { bits }
    }

    /// Bit `i` of `index` becomes variable `i`.
    pub fn from_index(index: u64, n: usize) -> Self {
        assert!(n <= 64, "index form holds at most 64 variables");
        Assignment {
            bits: (0..n).map(|i| (index >> i) & 1 == 1).collect(),
        }
    }

    pub fn to_index(&self) -> u64 {
        assert!(self.bits.len() <= 64, "index form holds at most 64 variables");
        self.bits
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &b)| acc | ((b as u64) << i))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.bits[i] = value;
    }

    pub fn flip(&mut self, i: usize) {
        self.bits[i] = !self.bits[i];
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Character `i` is variable `i`.
    pub fn to_bitstring(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathChecks {
    pub source_degree: bool,
    pub destination_degree: bool,
    pub intermediate_degrees: bool,
    pub connectivity: bool,
}

impl PathChecks {
    pub fn all(&self) -> bool {
        self.source_degree && self.destination_degree && self.intermediate_degrees && self.connectivity
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidityReport {
    /// Per destination, `[t1, t2]`.
    pub paths: [PathChecks; 2],
    pub disjointness: bool,
    pub valid: bool,
}

impl ValidityReport {
    pub fn describe(&self) -> String {
        if self.valid {
            return "valid".to_string();
        }
        let mut failed = Vec::new();
        for (d, p) in self.paths.iter().enumerate() {
            let dest = d + 1;
            if !p.source_degree {
                failed.push(format!("source-degree[t{dest}]"));
            }
            if !p.destination_degree {
                failed.push(format!("destination-degree[t{dest}]"));
            }
            if !p.intermediate_degrees {
                failed.push(format!("intermediate-degree[t{dest}]"));
            }
            if !p.connectivity {
                failed.push(format!("connectivity[t{dest}]"));
            }
        }
        if !self.disjointness {
            failed.push("disjointness".to_string());
        }
        failed.join(",")
    }
}

fn check_length(layout: &VariableLayout, assignment: &Assignment) -> Result<()> {
    if assignment.len() != layout.len() {
        return Err(Error::LengthMismatch {
            expected: layout.len(),
            found: assignment.len(),
        });
    }
    Ok(())
}

/// Degree, connectivity and disjointness checks for an assignment.
///
/// Connectivity is verified by walking the active edges from the source:
/// degree conditions alone admit a path plus detached cycles. Disjointness
/// covers every vertex other than the source, terminals included.
pub fn check_validity(layout: &VariableLayout, assignment: &Assignment) -> Result<ValidityReport> {
    check_length(layout, assignment)?;
    Ok(validity(layout, assignment).0)
}

/// Validity plus the walked paths when every per-path check holds.
fn validity(layout: &VariableLayout, a: &Assignment) -> (ValidityReport, [Option<Vec<usize>>; 2]) {
    let s = layout.source;
    let n_vertices = layout.num_vertices();
    let mut paths = [PathChecks {
        source_degree: false,
        destination_degree: false,
        intermediate_degrees: false,
        connectivity: false,
    }; 2];
    let mut walks: [Option<Vec<usize>>; 2] = [None, None];

    for d in 0..2 {
        let l = layout.terminals[d];
        let mut degree = vec![0usize; n_vertices];
        let mut active = Vec::new();
        for &e in &layout.edge_order {
            if a.get(layout.edge_var(d, e)) {
                let (u, v) = layout.endpoints[e];
                degree[u] += 1;
                degree[v] += 1;
                active.push(e);
            }
        }
        let on = |v: usize| a.get(layout.vertex_var(d, v));
        let checks = &mut paths[d];
        checks.source_degree = on(s) && degree[s] == 1;
        checks.destination_degree = on(l) && degree[l] == 1;
        checks.intermediate_degrees = (0..n_vertices)
            .filter(|&v| v != s && v != l)
            .all(|v| degree[v] == 2 * on(v) as usize);

        if checks.source_degree && checks.destination_degree && checks.intermediate_degrees {
            // Walk from s; every vertex on the way has degree two, so the walk
            // is forced until it reaches a degree-one vertex.
            let mut used = vec![false; layout.endpoints.len()];
            let mut walk = vec![s];
            let mut here = s;
            let mut steps = 0;
            loop {
                let next = active
                    .iter()
                    .copied()
                    .find(|&e| !used[e] && {
                        let (u, v) = layout.endpoints[e];
                        u == here || v == here
                    });
                let Some(e) = next else { break };
                used[e] = true;
                steps += 1;
                let (u, v) = layout.endpoints[e];
                here = if u == here { v } else { u };
                walk.push(here);
                if here == l {
                    break;
                }
            }
            checks.connectivity = here == l && steps == active.len();
            if checks.connectivity {
                walks[d] = Some(walk);
            }
        }
    }

    let disjointness = (0..n_vertices)
        .filter(|&v| v != s)
        .all(|v| !(a.get(layout.vertex_var(0, v)) && a.get(layout.vertex_var(1, v))));
    let valid = paths[0].all() && paths[1].all() && disjointness;
    (
        ValidityReport {
            paths,
            disjointness,
            valid,
        },
        walks,
    )
}

/// Sets the vertex and edge bits of each path for its destination.
pub fn encode(solution: &RoutingSolution, layout: &VariableLayout) -> Result<Assignment> {
    encode_paths(&solution.path1, &solution.path2, layout)
}

pub fn encode_paths(path1: &Path, path2: &Path, layout: &VariableLayout) -> Result<Assignment> {
    if path1.source() != layout.source || path2.source() != layout.source {
        return Err(Error::InvalidParameter(
            "solution source does not match the layout".into(),
        ));
    }
    let mut a = Assignment::zeros(layout.len());
    for (d, path) in [path1, path2].into_iter().enumerate() {
        for &v in path.vertices() {
            a.set(layout.vertex_var(d, v), true);
        }
        for w in path.vertices().windows(2) {
            let e = layout
                .endpoints
                .iter()
                .position(|&(u, v)| (u, v) == (w[0], w[1]) || (v, u) == (w[0], w[1]))
                .ok_or_else(|| Error::UnknownEdge {
                    location: "path".into(),
                    u: w[0].to_string(),
                    v: w[1].to_string(),
                })?;
            a.set(layout.edge_var(d, e), true);
        }
    }
    Ok(a)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decoded {
    Valid { path1: Path, path2: Path },
    Invalid(ValidityReport),
}

impl Decoded {
    pub fn is_valid(&self) -> bool {
        matches!(self, Decoded::Valid { .. })
    }

    pub fn paths(&self) -> Option<(&Path, &Path)> {
        match self {
            Decoded::Valid { path1, path2 } => Some((path1, path2)),
            Decoded::Invalid(_) => None,
        }
    }
}

/// Reconstructs the two paths when the assignment is valid.
pub fn decode(layout: &VariableLayout, assignment: &Assignment) -> Result<Decoded> {
    check_length(layout, assignment)?;
    let (report, [w1, w2]) = validity(layout, assignment);
    if !report.valid {
        return Ok(Decoded::Invalid(report));
    }
    Ok(Decoded::Valid {
        path1: Path::new(w1.expect("valid path walk")),
        path2: Path::new(w2.expect("valid path walk")),
    })
}
