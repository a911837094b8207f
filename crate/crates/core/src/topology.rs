//! Network graph, link failure model and the built-in instances.
//!
//! A [`Topology`] is an undirected simple graph whose vertices are either
//! secondary sites or one of exactly two terminals. Vertices and edges keep
//! the order in which they were supplied; each edge stores its endpoints in
//! canonical order (lexicographically smaller id first) so that unordered
//! lookups are total.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Secondary,
    Terminal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub id: String,
    pub role: Role,
}

/// An undirected link. `u` and `v` are vertex indices with `id(u) < id(v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub latency: f64,
}

impl Edge {
    pub fn other(&self, end: usize) -> usize {
        if end == self.u {
            self.v
        } else {
            self.u
        }
    }

    pub fn touches(&self, vertex: usize) -> bool {
        self.u == vertex || self.v == vertex
    }
}

#[derive(Debug, Clone)]
pub struct Topology {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    index: HashMap<String, usize>,
    edge_index: HashMap<(usize, usize), usize>,
    adjacency: Vec<Vec<(usize, usize)>>,
    rank: Vec<usize>,
    terminals: [usize; 2],
}

impl PartialEq for Topology {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.edges == other.edges
    }
}

pub(crate) fn valid_identifier(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

impl Topology {
    /// Builds and validates a topology. Edge endpoints may be given in either
    /// order.
    pub fn new<S: AsRef<str>>(vertices: Vec<Vertex>, edges: &[(S, S, f64)]) -> Result<Self> {
        let mut index = HashMap::with_capacity(vertices.len());
        for (i, vertex) in vertices.iter().enumerate() {
            let location = format!("vertices[{i}]");
            if !valid_identifier(&vertex.id) {
                return Err(Error::InvalidIdentifier {
                    location,
                    id: vertex.id.clone(),
                });
            }
            if index.insert(vertex.id.clone(), i).is_some() {
                return Err(Error::DuplicateVertex {
                    location,
                    id: vertex.id.clone(),
                });
            }
        }

        let terminal_list: Vec<usize> = vertices
            .iter()
            .enumerate()
            .filter(|(_, v)| v.role == Role::Terminal)
            .map(|(i, _)| i)
            .collect();
        if terminal_list.len() != 2 {
            return Err(Error::WrongTerminalCount {
                found: terminal_list.len(),
            });
        }

        let mut order: Vec<usize> = (0..vertices.len()).collect();
        order.sort_by(|&a, &b| vertices[a].id.cmp(&vertices[b].id));
        let mut rank = vec![0; vertices.len()];
        for (r, &v) in order.iter().enumerate() {
            rank[v] = r;
        }

        let mut out_edges = Vec::with_capacity(edges.len());
        let mut edge_index = HashMap::with_capacity(edges.len());
        let mut adjacency = vec![Vec::new(); vertices.len()];
        for (k, (a, b, latency)) in edges.iter().enumerate() {
            let location = format!("edges[{k}]");
            let lookup = |id: &str| {
                index.get(id).copied().ok_or_else(|| Error::UnknownVertex {
                    location: location.clone(),
                    id: id.to_string(),
                })
            };
            let a = lookup(a.as_ref())?;
            let b = lookup(b.as_ref())?;
            if a == b {
                return Err(Error::SelfLoop {
                    location,
                    vertex: vertices[a].id.clone(),
                });
            }
            if !(*latency >= 0.0) || !latency.is_finite() {
                return Err(Error::NegativeLatency {
                    location,
                    latency: *latency,
                });
            }
            let (u, v) = if rank[a] < rank[b] { (a, b) } else { (b, a) };
            if edge_index.insert(pair_key(u, v), k).is_some() {
                return Err(Error::DuplicateEdge {
                    location,
                    u: vertices[u].id.clone(),
                    v: vertices[v].id.clone(),
                });
            }
            adjacency[u].push((v, k));
            adjacency[v].push((u, k));
            out_edges.push(Edge {
                u,
                v,
                latency: *latency,
            });
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(w, _)| rank[w]);
        }

        Ok(Topology {
            vertices,
            edges: out_edges,
            index,
            edge_index,
            adjacency,
            rank,
            terminals: [terminal_list[0], terminal_list[1]],
        })
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn id(&self, vertex: usize) -> &str {
        &self.vertices[vertex].id
    }

    pub fn role(&self, vertex: usize) -> Role {
        self.vertices[vertex].role
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub(crate) fn require_vertex(&self, id: &str) -> Result<usize> {
        self.vertex_index(id).ok_or_else(|| Error::UnknownVertex {
            location: "argument".to_string(),
            id: id.to_string(),
        })
    }

    pub(crate) fn require_secondary(&self, id: &str) -> Result<usize> {
        let v = self.require_vertex(id)?;
        if self.role(v) != Role::Secondary {
            return Err(Error::NotSecondary { id: id.to_string() });
        }
        Ok(v)
    }

    /// Terminals in the order they were listed: `[t1, t2]`.
    pub fn terminals(&self) -> [usize; 2] {
        self.terminals
    }

    pub fn secondaries(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertices.len()).filter(|&v| self.vertices[v].role == Role::Secondary)
    }

    /// Position of the vertex in lexicographic id order.
    pub fn rank(&self, vertex: usize) -> usize {
        self.rank[vertex]
    }

    /// `(neighbor, edge)` pairs, neighbors in lexicographic order.
    pub fn neighbors(&self, vertex: usize) -> &[(usize, usize)] {
        &self.adjacency[vertex]
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&pair_key(a, b)).copied()
    }

    pub fn edge_by_ids(&self, a: &str, b: &str) -> Option<usize> {
        self.edge_between(self.vertex_index(a)?, self.vertex_index(b)?)
    }

    pub fn total_latency(&self) -> f64 {
        self.edges.iter().map(|e| e.latency).sum()
    }

    /// Edge indices sorted by canonical `(id(u), id(v))`.
    pub fn canonical_edge_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.edges.len()).collect();
        order.sort_by_key(|&e| (self.rank[self.edges[e].u], self.rank[self.edges[e].v]));
        order
    }

    /// Vertex indices sorted by id.
    pub fn lexicographic_vertex_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.vertices.len()).collect();
        order.sort_by_key(|&v| self.rank[v]);
        order
    }

    pub fn is_connected(&self) -> bool {
        if self.vertices.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.vertices.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(w, _) in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn edge_label(&self, e: usize) -> (String, String) {
        let edge = &self.edges[e];
        (self.id(edge.u).to_string(), self.id(edge.v).to_string())
    }
}

fn pair_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Marginal and pairwise joint link-failure probabilities.
///
/// Pairs without an explicit override fail independently, so their joint
/// probability is the product of the marginals. An edge paired with itself
/// fails with its marginal probability.
#[derive(Debug, Clone, PartialEq)]
pub struct FailureModel {
    marginal: Vec<f64>,
    overrides: HashMap<(usize, usize), f64>,
}

impl FailureModel {
    pub fn uniform(topology: &Topology, marginal: f64) -> Result<Self> {
        check_probability("default_marginal", marginal)?;
        Ok(FailureModel {
            marginal: vec![marginal; topology.edge_count()],
            overrides: HashMap::new(),
        })
    }

    pub fn marginal(&self, edge: usize) -> f64 {
        self.marginal[edge]
    }

    pub fn joint(&self, a: usize, b: usize) -> f64 {
        if a == b {
            return self.marginal[a];
        }
        match self.overrides.get(&pair_key(a, b)) {
            Some(&p) => p,
            None => self.marginal[a] * self.marginal[b],
        }
    }

    pub fn edge_count(&self) -> usize {
        self.marginal.len()
    }

    pub fn set_joint(&mut self, a: usize, b: usize, p: f64) -> Result<()> {
        check_probability("joint override", p)?;
        if a == b {
            return Err(Error::InvalidParameter(
                "a joint override needs two distinct edges".into(),
            ));
        }
        self.overrides.insert(pair_key(a, b), p);
        Ok(())
    }

    pub fn override_count(&self) -> usize {
        self.overrides.len()
    }
}

fn check_probability(location: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::ProbabilityOutOfRange {
            location: location.to_string(),
            value: p,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointOverride {
    pub edge: [String; 2],
    pub pair: [String; 2],
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_scenario_name")]
    pub name: String,
    pub default_marginal: f64,
    #[serde(default)]
    pub overrides: Vec<JointOverride>,
}

fn default_scenario_name() -> String {
    "custom".to_string()
}

pub const UNCORRELATED: &str = "uncorrelated";
pub const CORRELATED: &str = "correlated";

impl Scenario {
    /// Independent failures with the given per-link probability.
    pub fn uncorrelated(marginal: f64) -> Self {
        Scenario {
            name: UNCORRELATED.to_string(),
            default_marginal: marginal,
            overrides: Vec::new(),
        }
    }

    /// Links (S1,S2) and (S2,T1) fully correlated: their joint failure
    /// probability equals the 0.1 marginal.
    pub fn toy_correlated() -> Self {
        Scenario {
            name: CORRELATED.to_string(),
            default_marginal: 0.1,
            overrides: vec![JointOverride {
                edge: ["S1".into(), "S2".into()],
                pair: ["S2".into(), "T1".into()],
                p: 0.1,
            }],
        }
    }

    /// Links (S1,T1) and (S1,T2) of the reduced instance fully correlated.
    pub fn reduced_correlated() -> Self {
        Scenario {
            name: CORRELATED.to_string(),
            default_marginal: 0.1,
            overrides: vec![JointOverride {
                edge: ["S1".into(), "T1".into()],
                pair: ["S1".into(), "T2".into()],
                p: 0.1,
            }],
        }
    }

    pub fn validate(&self, topology: &Topology) -> Result<()> {
        check_probability("scenario.default_marginal", self.default_marginal)?;
        for (k, o) in self.overrides.iter().enumerate() {
            let location = format!("scenario.overrides[{k}]");
            check_probability(&location, o.p)?;
            let a = resolve_edge(topology, &o.edge, &location)?;
            let b = resolve_edge(topology, &o.pair, &location)?;
            if a == b {
                return Err(Error::InvalidParameter(format!(
                    "{location}: override pairs an edge with itself"
                )));
            }
        }
        Ok(())
    }
}

fn resolve_edge(topology: &Topology, ends: &[String; 2], location: &str) -> Result<usize> {
    topology
        .edge_by_ids(&ends[0], &ends[1])
        .ok_or_else(|| Error::UnknownEdge {
            location: location.to_string(),
            u: ends[0].clone(),
            v: ends[1].clone(),
        })
}

pub fn build_failure_model(topology: &Topology, scenario: &Scenario) -> Result<FailureModel> {
    scenario.validate(topology)?;
    let mut model = FailureModel::uniform(topology, scenario.default_marginal)?;
    for o in &scenario.overrides {
        let a = resolve_edge(topology, &o.edge, "scenario")?;
        let b = resolve_edge(topology, &o.pair, "scenario")?;
        model.set_joint(a, b, o.p)?;
    }
    Ok(model)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexRecord {
    pub id: String,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub u: String,
    pub v: String,
    pub latency: f64,
}

/// On-disk JSON layout of a topology file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyDocument {
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<EdgeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<Scenario>,
}

impl TopologyDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    pub fn topology(&self) -> Result<Topology> {
        let vertices = self
            .vertices
            .iter()
            .map(|v| Vertex {
                id: v.id.clone(),
                role: v.role,
            })
            .collect();
        let edges: Vec<(&str, &str, f64)> = self
            .edges
            .iter()
            .map(|e| (e.u.as_str(), e.v.as_str(), e.latency))
            .collect();
        let topology = Topology::new(vertices, &edges)?;
        if let Some(scenario) = &self.scenario {
            scenario.validate(&topology)?;
        }
        Ok(topology)
    }

    pub fn from_topology(topology: &Topology, scenario: Option<Scenario>) -> Self {
        TopologyDocument {
            vertices: topology
                .vertices()
                .iter()
                .map(|v| VertexRecord {
                    id: v.id.clone(),
                    role: v.role,
                })
                .collect(),
            edges: topology
                .edges()
                .iter()
                .map(|e| EdgeRecord {
                    u: topology.id(e.u).to_string(),
                    v: topology.id(e.v).to_string(),
                    latency: e.latency,
                })
                .collect(),
            scenario,
        }
    }
}

/// Parses and validates a topology document.
pub fn load_topology(text: &str) -> Result<Topology> {
    TopologyDocument::from_json(text)?.topology()
}

pub fn save_topology(topology: &Topology) -> String {
    TopologyDocument::from_topology(topology, None).to_json()
}

/// Edges of the five-vertex toy network, in the order used by
/// [`toy_topology_with`].
pub const TOY_EDGES: [(&str, &str); 7] = [
    ("S1", "T1"),
    ("S1", "S2"),
    ("S1", "S3"),
    ("S1", "T2"),
    ("S2", "T1"),
    ("S2", "S3"),
    ("S3", "T2"),
];

/// Small-integer latencies for [`TOY_EDGES`] under which the oracle's
/// optimum totals 8 with independent failures and 9 with (S1,S2)/(S2,T1)
/// correlated, with S2 rerouting its T2 path in the correlated case.
pub const TOY_LATENCIES: [f64; 7] = [1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 1.0];

pub fn toy_topology() -> Topology {
    toy_topology_with(TOY_LATENCIES).expect("toy latencies are valid")
}

pub fn toy_topology_with(latencies: [f64; 7]) -> Result<Topology> {
    let vertices = [
        ("S1", Role::Secondary),
        ("S2", Role::Secondary),
        ("S3", Role::Secondary),
        ("T1", Role::Terminal),
        ("T2", Role::Terminal),
    ]
    .into_iter()
    .map(|(id, role)| Vertex {
        id: id.to_string(),
        role,
    })
    .collect();
    let edges: Vec<(&str, &str, f64)> = TOY_EDGES
        .iter()
        .zip(latencies)
        .map(|(&(u, v), c)| (u, v, c))
        .collect();
    Topology::new(vertices, &edges)
}

/// Four vertices, four unit-latency edges: 16 binary variables per source.
pub fn reduced_topology() -> Topology {
    let vertices = [
        ("S1", Role::Secondary),
        ("S2", Role::Secondary),
        ("T1", Role::Terminal),
        ("T2", Role::Terminal),
    ]
    .into_iter()
    .map(|(id, role)| Vertex {
        id: id.to_string(),
        role,
    })
    .collect();
    let edges = [
        ("S1", "T1", 1.0),
        ("S1", "T2", 1.0),
        ("S1", "S2", 1.0),
        ("S2", "T1", 1.0),
    ];
    Topology::new(vertices, &edges).expect("reduced instance is valid")
}

/// Resolves a scenario by name: the document's own scenario when the name
/// matches (or no name is given), otherwise one of the built-ins.
pub fn resolve_scenario(
    topology: &Topology,
    from_document: Option<&Scenario>,
    name: Option<&str>,
) -> Result<Scenario> {
    match (name, from_document) {
        (None, Some(sc)) => Ok(sc.clone()),
        (None, None) => Ok(Scenario::uncorrelated(0.1)),
        (Some(n), Some(sc)) if sc.name == n => Ok(sc.clone()),
        (Some(UNCORRELATED), _) | (Some("independent"), _) => Ok(Scenario::uncorrelated(0.1)),
        (Some(CORRELATED), _) => {
            let sc = if same_links(topology, &reduced_topology()) {
                Scenario::reduced_correlated()
            } else {
                Scenario::toy_correlated()
            };
            sc.validate(topology)
                .map_err(|_| Error::UnknownScenario(CORRELATED.to_string()))?;
            Ok(sc)
        }
        (Some(other), _) => Err(Error::UnknownScenario(other.to_string())),
    }
}

fn same_links(a: &Topology, b: &Topology) -> bool {
    let links = |t: &Topology| {
        let mut v: Vec<(String, String)> = (0..t.edge_count()).map(|e| t.edge_label(e)).collect();
        v.sort();
        v
    };
    a.vertex_count() == b.vertex_count() && links(a) == links(b)
}

/// Random connected edge set on `0..n`: a random spanning tree plus each
/// remaining pair with probability `extra`.
pub fn random_connected_edges<R: Rng>(n: usize, extra: f64, rng: &mut R) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for k in 1..n {
        let parent = order[rng.gen_range(0..k)];
        let v = order[k];
        edges.push((parent.min(v), parent.max(v)));
    }
    for a in 0..n {
        for b in a + 1..n {
            if !edges.contains(&(a, b)) && rng.gen_bool(extra) {
                edges.push((a, b));
            }
        }
    }
    edges.sort_unstable();
    edges
}

/// Random connected topology with vertices `V0..V{n-1}`; the last two are
/// the terminals. Latencies are integers in `1..=max_latency`.
pub fn random_topology<R: Rng>(n: usize, extra: f64, max_latency: u32, rng: &mut R) -> Result<Topology> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 vertices, got {n}")));
    }
    let vertices = (0..n)
        .map(|i| Vertex {
            id: format!("V{i}"),
            role: if i + 2 >= n { Role::Terminal } else { Role::Secondary },
        })
        .collect();
    let edges: Vec<(String, String, f64)> = random_connected_edges(n, extra, rng)
        .into_iter()
        .map(|(a, b)| (format!("V{a}"), format!("V{b}"), rng.gen_range(1..=max_latency) as f64))
        .collect();
    Topology::new(vertices, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_doc() -> String {
        save_topology(&toy_topology())
    }

    #[test]
    fn toy_document_loads_with_five_vertices_and_seven_edges() {
        let t = load_topology(&toy_doc()).unwrap();
        assert_eq!(t.vertex_count(), 5);
        assert_eq!(t.edge_count(), 7);
    }

    #[test]
    fn toy_has_no_terminal_to_terminal_link() {
        let t = toy_topology();
        let [t1, t2] = t.terminals();
        assert_eq!(t.edge_between(t1, t2), None);
    }

    #[test]
    fn three_terminals_are_rejected() {
        let text = r#"{"vertices":[{"id":"a","role":"terminal"},{"id":"b","role":"terminal"},
            {"id":"c","role":"terminal"}],"edges":[]}"#;
        let err = load_topology(text).unwrap_err();
        assert!(err.to_string().contains("wrong terminal count"), "{err}");
    }

    #[test]
    fn self_loop_is_rejected() {
        let text = r#"{"vertices":[{"id":"S1","role":"secondary"},{"id":"T1","role":"terminal"},
            {"id":"T2","role":"terminal"}],"edges":[{"u":"S1","v":"S1","latency":1}]}"#;
        let err = load_topology(text).unwrap_err();
        assert!(err.to_string().contains("self-loop"), "{err}");
        assert!(err.to_string().contains("edges[0]"), "{err}");
    }

    #[test]
    fn duplicate_edge_in_either_orientation_is_rejected() {
        let text = r#"{"vertices":[{"id":"S1","role":"secondary"},{"id":"T1","role":"terminal"},
            {"id":"T2","role":"terminal"}],
            "edges":[{"u":"S1","v":"T1","latency":1},{"u":"T1","v":"S1","latency":2}]}"#;
        let err = load_topology(text).unwrap_err();
        assert!(matches!(err, Error::DuplicateEdge { ref location, .. } if location == "edges[1]"));
    }

    #[test]
    fn negative_latency_is_rejected() {
        let text = r#"{"vertices":[{"id":"S1","role":"secondary"},{"id":"T1","role":"terminal"},
            {"id":"T2","role":"terminal"}],"edges":[{"u":"S1","v":"T1","latency":-1}]}"#;
        assert!(matches!(
            load_topology(text),
            Err(Error::NegativeLatency { .. })
        ));
    }

    #[test]
    fn syntax_errors_carry_a_location() {
        let err = load_topology("{\n  \"vertices\": [,]\n}").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = r#"{"vertices":[],"edges":[],"extra":1}"#;
        assert!(matches!(load_topology(text), Err(Error::Parse { .. })));
    }

    #[test]
    fn scenario_with_unknown_edge_is_rejected() {
        let mut doc = TopologyDocument::from_topology(&toy_topology(), None);
        doc.scenario = Some(Scenario {
            name: "bad".into(),
            default_marginal: 0.1,
            overrides: vec![JointOverride {
                edge: ["T1".into(), "T2".into()],
                pair: ["S1".into(), "S2".into()],
                p: 0.5,
            }],
        });
        let err = TopologyDocument::from_json(&doc.to_json())
            .unwrap()
            .topology()
            .unwrap_err();
        assert!(matches!(err, Error::UnknownEdge { .. }), "{err}");
    }

    #[test]
    fn uncorrelated_joint_is_product_of_marginals() {
        let t = toy_topology();
        let fm = build_failure_model(&t, &Scenario::uncorrelated(0.1)).unwrap();
        for a in 0..7 {
            for b in 0..7 {
                if a != b {
                    assert!((fm.joint(a, b) - 0.01).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn correlated_override_touches_only_its_pair() {
        let t = toy_topology();
        let fm = build_failure_model(&t, &Scenario::toy_correlated()).unwrap();
        let a = t.edge_by_ids("S1", "S2").unwrap();
        let b = t.edge_by_ids("T1", "S2").unwrap();
        assert_eq!(fm.joint(a, b), 0.1);
        assert_eq!(fm.joint(b, a), 0.1);
        for x in 0..7 {
            for y in 0..7 {
                if x != y && !((x == a && y == b) || (x == b && y == a)) {
                    assert!((fm.joint(x, y) - 0.01).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn zero_marginal_gives_zero_joints() {
        let t = toy_topology();
        let fm = build_failure_model(&t, &Scenario::uncorrelated(0.0)).unwrap();
        for a in 0..7 {
            for b in 0..7 {
                assert_eq!(fm.joint(a, b), 0.0);
            }
        }
    }

    #[test]
    fn edges_are_stored_canonically() {
        let t = toy_topology();
        for e in t.edges() {
            assert!(t.id(e.u) < t.id(e.v));
        }
        assert_eq!(t.edge_by_ids("T1", "S2"), t.edge_by_ids("S2", "T1"));
    }

    #[test]
    fn builtin_scenarios_resolve_by_name() {
        let t = toy_topology();
        let sc = resolve_scenario(&t, None, Some("correlated")).unwrap();
        assert_eq!(sc, Scenario::toy_correlated());
        let r = reduced_topology();
        let sc = resolve_scenario(&r, None, Some("correlated")).unwrap();
        assert_eq!(sc, Scenario::reduced_correlated());
        assert!(resolve_scenario(&t, None, Some("nope")).is_err());
    }
}
