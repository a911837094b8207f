//! Exact solver over explicit path pairs.
//!
//! For a source `s` every simple path to each terminal is enumerated; each
//! combination of one path per terminal is a candidate, candidates sharing a
//! vertex other than `s` are rejected, and the survivor minimizing
//! `latency + B * resiliency` wins. Ties go to the lexicographically smallest
//! `(path1, path2)` vertex-id sequences.

mod baseline;

pub use baseline::{min_cost_disjoint_paths, min_sum_baseline};

use serde::Serialize;

use crate::error::Result;
use crate::topology::{FailureModel, Topology};

/// A walk from a source vertex to a destination, stored as vertex indices.
/// A single-vertex path has no edges.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    vertices: Vec<usize>,
}

impl Path {
    pub fn new(vertices: Vec<usize>) -> Self {
        assert!(!vertices.is_empty(), "a path has at least one vertex");
        Path { vertices }
    }

    pub fn from_ids(topology: &Topology, ids: &[&str]) -> Result<Self> {
        let vertices = ids
            .iter()
            .map(|id| topology.require_vertex(id))
            .collect::<Result<Vec<_>>>()?;
        Ok(Path::new(vertices))
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn source(&self) -> usize {
        self.vertices[0]
    }

    pub fn destination(&self) -> usize {
        *self.vertices.last().expect("non-empty")
    }

    pub fn edge_count(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn contains(&self, vertex: usize) -> bool {
        self.vertices.contains(&vertex)
    }

    /// Edge indices along the path, or `None` if two consecutive vertices are
    /// not adjacent.
    pub fn edges(&self, topology: &Topology) -> Option<Vec<usize>> {
        self.vertices
            .windows(2)
            .map(|w| topology.edge_between(w[0], w[1]))
            .collect()
    }

    pub fn is_simple(&self) -> bool {
        let mut seen = self.vertices.clone();
        seen.sort_unstable();
        seen.windows(2).all(|w| w[0] != w[1])
    }

    pub fn is_valid_in(&self, topology: &Topology) -> bool {
        self.vertices.iter().all(|&v| v < topology.vertex_count())
            && self.is_simple()
            && self.edges(topology).is_some()
    }

    pub fn ids<'a>(&self, topology: &'a Topology) -> Vec<&'a str> {
        self.vertices.iter().map(|&v| topology.id(v)).collect()
    }

    pub fn describe(&self, topology: &Topology) -> String {
        format!("({})", self.ids(topology).join(","))
    }

    /// Sort key comparing vertex ids lexicographically.
    pub fn order_key(&self, topology: &Topology) -> Vec<usize> {
        self.vertices.iter().map(|&v| topology.rank(v)).collect()
    }
}

/// True when the paths share no vertex other than their common source.
pub fn vertex_disjoint(p1: &Path, p2: &Path) -> bool {
    p1.source() == p2.source()
        && p1.vertices[1..]
            .iter()
            .all(|v| !p2.vertices[1..].contains(v))
}

/// Every simple path between two vertices (ids), lexicographically ordered.
pub fn enumerate_simple_paths(topology: &Topology, source: &str, dest: &str) -> Result<Vec<Path>> {
    let s = topology.require_vertex(source)?;
    let d = topology.require_vertex(dest)?;
    Ok(simple_paths(topology, s, d))
}

/// Index-level form of [`enumerate_simple_paths`].
pub fn simple_paths(topology: &Topology, source: usize, dest: usize) -> Vec<Path> {
    let mut out = Vec::new();
    let mut on_path = vec![false; topology.vertex_count()];
    let mut stack = vec![source];
    on_path[source] = true;
    if source == dest {
        return vec![Path::new(stack)];
    }
    dfs(topology, dest, &mut stack, &mut on_path, &mut out);
    // neighbor lists are id-sorted, so DFS already yields lexicographic order
    debug_assert!(out
        .windows(2)
        .all(|w| w[0].order_key(topology) < w[1].order_key(topology)));
    out
}

fn dfs(
    topology: &Topology,
    dest: usize,
    stack: &mut Vec<usize>,
    on_path: &mut [bool],
    out: &mut Vec<Path>,
) {
    let here = *stack.last().expect("non-empty");
    for &(next, _) in topology.neighbors(here) {
        if on_path[next] {
            continue;
        }
        stack.push(next);
        if next == dest {
            out.push(Path::new(stack.clone()));
        } else {
            on_path[next] = true;
            dfs(topology, dest, stack, on_path, out);
            on_path[next] = false;
        }
        stack.pop();
    }
}

/// Total latency of the edges of both paths.
pub fn latency_objective(p1: &Path, p2: &Path, topology: &Topology) -> f64 {
    let sum = |p: &Path| -> f64 {
        p.edges(topology)
            .expect("path edges exist in topology")
            .into_iter()
            .map(|e| topology.edges()[e].latency)
            .sum()
    };
    sum(p1) + sum(p2)
}

/// `d_s` times the sum of joint failure probabilities over every
/// (edge of `p1`, edge of `p2`) pair.
pub fn resiliency_objective(
    p1: &Path,
    p2: &Path,
    topology: &Topology,
    failures: &FailureModel,
    demand: f64,
) -> f64 {
    let e1 = p1.edges(topology).expect("path edges exist in topology");
    let e2 = p2.edges(topology).expect("path edges exist in topology");
    let mut total = 0.0;
    for &a in &e1 {
        for &b in &e2 {
            total += failures.joint(a, b);
        }
    }
    demand * total
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutingSolution {
    pub source: usize,
    /// Path ending at the first terminal.
    pub path1: Path,
    /// Path ending at the second terminal.
    pub path2: Path,
    pub latency: f64,
    pub resiliency: f64,
    pub objective: f64,
    pub trade_off: f64,
    pub demand: f64,
}

impl RoutingSolution {
    pub fn evaluate(
        topology: &Topology,
        failures: &FailureModel,
        path1: Path,
        path2: Path,
        trade_off: f64,
        demand: f64,
    ) -> Self {
        let latency = latency_objective(&path1, &path2, topology);
        let resiliency = resiliency_objective(&path1, &path2, topology, failures, demand);
        RoutingSolution {
            source: path1.source(),
            path1,
            path2,
            latency,
            resiliency,
            objective: latency + trade_off * resiliency,
            trade_off,
            demand,
        }
    }

    pub fn same_paths(&self, other: &RoutingSolution) -> bool {
        self.path1 == other.path1 && self.path2 == other.path2
    }

    pub fn is_vertex_disjoint(&self) -> bool {
        vertex_disjoint(&self.path1, &self.path2)
    }

    pub fn view(&self, topology: &Topology) -> SolutionView {
        SolutionView {
            source: topology.id(self.source).to_string(),
            path1: self.path1.ids(topology).iter().map(|s| s.to_string()).collect(),
            path2: self.path2.ids(topology).iter().map(|s| s.to_string()).collect(),
            latency: self.latency,
            resiliency: self.resiliency,
            objective: self.objective,
        }
    }
}

/// Serializable form of a [`RoutingSolution`] using vertex ids.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionView {
    pub source: String,
    pub path1: Vec<String>,
    pub path2: Vec<String>,
    pub latency: f64,
    pub resiliency: f64,
    pub objective: f64,
}

pub(crate) fn nearly_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Exhaustive search over path pairs for one source (id).
pub fn brute_force_solve(
    topology: &Topology,
    failures: &FailureModel,
    source: &str,
    trade_off: f64,
    demand: f64,
) -> Result<Option<RoutingSolution>> {
    let s = topology.require_secondary(source)?;
    Ok(solve_source(topology, failures, s, trade_off, demand))
}

/// Index-level form of [`brute_force_solve`]; `source` must be secondary.
pub fn solve_source(
    topology: &Topology,
    failures: &FailureModel,
    source: usize,
    trade_off: f64,
    demand: f64,
) -> Option<RoutingSolution> {
    let [t1, t2] = topology.terminals();
    let to_t1 = simple_paths(topology, source, t1);
    let to_t2 = simple_paths(topology, source, t2);
    let mut best: Option<RoutingSolution> = None;
    // both lists are in lexicographic order, so the first strict minimum
    // is also the lexicographically smallest tie
    for p1 in &to_t1 {
        for p2 in &to_t2 {
            if !vertex_disjoint(p1, p2) {
                continue;
            }
            let candidate = RoutingSolution::evaluate(
                topology,
                failures,
                p1.clone(),
                p2.clone(),
                trade_off,
                demand,
            );
            let better = match &best {
                None => true,
                Some(b) => {
                    candidate.objective < b.objective
                        && !nearly_equal(candidate.objective, b.objective)
                }
            };
            if better {
                best = Some(candidate);
            }
        }
    }
    best
}

/// Number of (path-to-t1, path-to-t2) combinations examined before the
/// disjointness filter. With `exclude_terminal_crossing`, paths that pass
/// through the other terminal are dropped first.
pub fn candidate_count(
    topology: &Topology,
    source: &str,
    exclude_terminal_crossing: bool,
) -> Result<usize> {
    let s = topology.require_vertex(source)?;
    let [t1, t2] = topology.terminals();
    let count = |dest: usize, other: usize| {
        simple_paths(topology, s, dest)
            .into_iter()
            .filter(|p| !exclude_terminal_crossing || !p.contains(other))
            .count()
    };
    Ok(count(t1, t2) * count(t2, t1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{build_failure_model, toy_topology, Role, Scenario, Vertex};

    fn ids(t: &Topology, paths: &[Path]) -> Vec<Vec<String>> {
        paths
            .iter()
            .map(|p| p.ids(t).into_iter().map(String::from).collect())
            .collect()
    }

    fn v(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn toy_paths_from_s2_to_t1() {
        let t = toy_topology();
        let paths = enumerate_simple_paths(&t, "S2", "T1").unwrap();
        assert_eq!(
            ids(&t, &paths),
            vec![
                v(&["S2", "S1", "T1"]),
                v(&["S2", "S3", "S1", "T1"]),
                v(&["S2", "S3", "T2", "S1", "T1"]),
                v(&["S2", "T1"]),
            ]
        );
    }

    #[test]
    fn toy_paths_from_s2_to_t2() {
        let t = toy_topology();
        assert_eq!(enumerate_simple_paths(&t, "S2", "T2").unwrap().len(), 6);
    }

    #[test]
    fn unknown_vertex_is_an_error() {
        let t = toy_topology();
        assert!(enumerate_simple_paths(&t, "S9", "T1").is_err());
    }

    #[test]
    fn single_edge_graph_has_one_path() {
        let vertices = vec![
            Vertex { id: "a".into(), role: Role::Secondary },
            Vertex { id: "b".into(), role: Role::Terminal },
            Vertex { id: "c".into(), role: Role::Terminal },
        ];
        let t = Topology::new(vertices, &[("a", "b", 1.0)]).unwrap();
        let paths = enumerate_simple_paths(&t, "a", "b").unwrap();
        assert_eq!(ids(&t, &paths), vec![v(&["a", "b"])]);
    }

    #[test]
    fn latency_sums_both_paths() {
        let vertices = vec![
            Vertex { id: "a".into(), role: Role::Secondary },
            Vertex { id: "b".into(), role: Role::Terminal },
            Vertex { id: "c".into(), role: Role::Terminal },
        ];
        let t = Topology::new(vertices, &[("a", "b", 3.0), ("a", "c", 5.0)]).unwrap();
        let p1 = Path::from_ids(&t, &["a", "b"]).unwrap();
        let p2 = Path::from_ids(&t, &["a", "c"]).unwrap();
        assert_eq!(latency_objective(&p1, &p2, &t), 8.0);
        let empty = Path::new(vec![0]);
        assert_eq!(latency_objective(&empty, &empty, &t), 0.0);
    }

    #[test]
    fn resiliency_counts_cross_pairs_once() {
        let t = toy_topology();
        let fm = build_failure_model(&t, &Scenario::uncorrelated(0.1)).unwrap();
        let one = Path::from_ids(&t, &["S1", "T1"]).unwrap();
        let other = Path::from_ids(&t, &["S1", "T2"]).unwrap();
        assert!((resiliency_objective(&one, &other, &t, &fm, 1.0) - 0.01).abs() < 1e-15);
        let none = Path::new(vec![t.vertex_index("S1").unwrap()]);
        assert_eq!(resiliency_objective(&none, &other, &t, &fm, 1.0), 0.0);

        let two = Path::from_ids(&t, &["S2", "S1", "T1"]).unwrap();
        let three = Path::from_ids(&t, &["S2", "S3", "S1", "T2"]).unwrap();
        let mut brute = 0.0;
        for a in two.edges(&t).unwrap() {
            for b in three.edges(&t).unwrap() {
                brute += fm.joint(a, b);
            }
        }
        let got = resiliency_objective(&two, &three, &t, &fm, 1.0);
        assert!((got - brute).abs() < 1e-15);
        assert!((got - 0.06).abs() < 1e-12);
        assert!((resiliency_objective(&two, &three, &t, &fm, 2.5) - 0.15).abs() < 1e-12);
    }

    #[test]
    fn search_space_sizes_with_terminal_crossing_excluded() {
        let t = toy_topology();
        assert_eq!(candidate_count(&t, "S1", true).unwrap(), 9);
        assert_eq!(candidate_count(&t, "S2", true).unwrap(), 12);
        assert_eq!(candidate_count(&t, "S3", true).unwrap(), 12);
        assert!(candidate_count(&t, "S2", false).unwrap() > 12);
    }

    #[test]
    fn two_edge_star_has_unique_solution() {
        let vertices = vec![
            Vertex { id: "a".into(), role: Role::Secondary },
            Vertex { id: "t1".into(), role: Role::Terminal },
            Vertex { id: "t2".into(), role: Role::Terminal },
        ];
        let t = Topology::new(vertices, &[("a", "t1", 2.0), ("a", "t2", 3.0)]).unwrap();
        let fm = FailureModel::uniform(&t, 0.1).unwrap();
        let sol = brute_force_solve(&t, &fm, "a", 1000.0, 1.0).unwrap().unwrap();
        assert_eq!(sol.path1.describe(&t), "(a,t1)");
        assert_eq!(sol.path2.describe(&t), "(a,t2)");
        assert_eq!(sol.latency, 5.0);
    }

    #[test]
    fn terminal_source_is_rejected() {
        let t = toy_topology();
        let fm = FailureModel::uniform(&t, 0.1).unwrap();
        assert!(brute_force_solve(&t, &fm, "T1", 1000.0, 1.0).is_err());
    }

    #[test]
    fn correlated_s2_avoids_the_correlated_pair() {
        let t = toy_topology();
        let fm = build_failure_model(&t, &Scenario::toy_correlated()).unwrap();
        let sol = brute_force_solve(&t, &fm, "S2", 1000.0, 1.0).unwrap().unwrap();
        let a = t.edge_by_ids("S1", "S2").unwrap();
        let b = t.edge_by_ids("S2", "T1").unwrap();
        let e1 = sol.path1.edges(&t).unwrap();
        let e2 = sol.path2.edges(&t).unwrap();
        let crosses = (e1.contains(&a) && e2.contains(&b)) || (e1.contains(&b) && e2.contains(&a));
        assert!(!crosses);
    }
}
