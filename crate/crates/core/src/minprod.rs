//! Disjoint path pairs minimizing `(|P1| + C)(|P2| + C)`, and the reduction
//! of that problem onto the routing problem.
//!
//! The reduction picks two neighbors `t1`, `t2` of `t`, deletes `t`, and asks
//! the routing solver for paths `s -> t1`, `s -> t2` with unit latencies, every
//! joint failure probability equal to 1 (so `g = |P^(s,t1)| * |P^(s,t2)|`) and
//! `B = 1 / (1 + C)`. Appending the edge to `t` then gives
//!
//! ```text
//! (f + B g) / B + 1 / B^2 = (|P1| + C)(|P2| + C)
//! ```
//!
//! Minimizing over all neighbor pairs solves the original instance.
//!
//! `t` is removed from each subinstance so a subpath cannot run through it.
//! That deletion is a repair: the construction as usually stated is silent on
//! whether `P^(s,t_i)` may visit `t`, and without it the extended paths could
//! repeat `t`. When `s` is itself adjacent to `t` the single edge `(s, t)` is one
//! candidate path, paired with a shortest route to another neighbor.

use std::collections::{HashMap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{solve_source, vertex_disjoint, Path, RoutingSolution};
use crate::topology::{FailureModel, Role, Topology, Vertex};

/// Undirected, unweighted simple graph with named vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleGraph {
    ids: Vec<String>,
    /// Sorted neighbor lists.
    adj: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

impl SimpleGraph {
    pub fn new<S: AsRef<str>>(ids: Vec<String>, edges: &[(S, S)]) -> Result<Self> {
        let mut index = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::DuplicateVertex {
                    location: format!("vertices[{i}]"),
                    id: id.clone(),
                });
            }
        }
        let mut adj = vec![Vec::new(); ids.len()];
        let mut list = Vec::with_capacity(edges.len());
        for (k, (a, b)) in edges.iter().enumerate() {
            let location = format!("edges[{k}]");
            let find = |id: &str| {
                index.get(id).copied().ok_or_else(|| Error::UnknownVertex {
                    location: location.clone(),
                    id: id.to_string(),
                })
            };
            let (u, v) = (find(a.as_ref())?, find(b.as_ref())?);
            if u == v {
                return Err(Error::SelfLoop {
                    location,
                    vertex: ids[u].clone(),
                });
            }
            if adj[u].contains(&v) {
                return Err(Error::DuplicateEdge {
                    location,
                    u: ids[u].clone(),
                    v: ids[v].clone(),
                });
            }
            adj[u].push(v);
            adj[v].push(u);
            list.push((u.min(v), u.max(v)));
        }
        adj.iter_mut().for_each(|n| n.sort_unstable());
        Ok(SimpleGraph {
            ids,
            adj,
            edges: list,
        })
    }

    /// Vertices named `0..n` by index.
    pub fn from_indices(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let ids: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let named: Vec<(String, String)> = edges
            .iter()
            .map(|&(a, b)| (a.to_string(), b.to_string()))
            .collect();
        SimpleGraph::new(ids, &named)
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn id(&self, v: usize) -> &str {
        &self.ids[v]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    pub fn describe(&self, path: &Path) -> String {
        let ids: Vec<&str> = path.vertices().iter().map(|&v| self.id(v)).collect();
        format!("({})", ids.join(","))
    }

    pub fn is_connected(&self) -> bool {
        if self.ids.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.ids.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Every simple path from `s` to `t`, in lexicographic index order.
    pub fn simple_paths(&self, s: usize, t: usize) -> Vec<Path> {
        fn walk(g: &SimpleGraph, t: usize, stack: &mut Vec<usize>, on: &mut [bool], out: &mut Vec<Path>) {
            let here = *stack.last().expect("non-empty");
            for &next in &g.adj[here] {
                if on[next] {
                    continue;
                }
                stack.push(next);
                if next == t {
                    out.push(Path::new(stack.clone()));
                } else {
                    on[next] = true;
                    walk(g, t, stack, on, out);
                    on[next] = false;
                }
                stack.pop();
            }
        }
        let mut out = Vec::new();
        let mut on = vec![false; self.ids.len()];
        on[s] = true;
        walk(self, t, &mut vec![s], &mut on, &mut out);
        out
    }

    /// Shortest path by BFS, skipping `avoid`; ties favor lower indices.
    fn shortest_path(&self, from: usize, to: usize, avoid: usize) -> Option<Path> {
        let mut parent = vec![usize::MAX; self.ids.len()];
        parent[from] = from;
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            if v == to {
                break;
            }
            for &w in &self.adj[v] {
                if w != avoid && parent[w] == usize::MAX {
                    parent[w] = v;
                    queue.push_back(w);
                }
            }
        }
        if parent[to] == usize::MAX {
            return None;
        }
        let mut seq = vec![to];
        while *seq.last().unwrap() != from {
            seq.push(parent[*seq.last().unwrap()]);
        }
        seq.reverse();
        Some(Path::new(seq))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinProdInstance {
    pub graph: SimpleGraph,
    pub s: usize,
    pub t: usize,
    pub c: f64,
}

impl MinProdInstance {
    pub fn new(graph: SimpleGraph, s: usize, t: usize, c: f64) -> Result<Self> {
        let n = graph.vertex_count();
        if s >= n || t >= n || s == t {
            return Err(Error::InvalidParameter(
                "s and t must be distinct vertices of the graph".into(),
            ));
        }
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("C must be non-negative, got {c}")));
        }
        Ok(MinProdInstance { graph, s, t, c })
    }
}

/// JSON form: named vertices, edge pairs, endpoints and `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinProdDocument {
    pub vertices: Vec<String>,
    pub edges: Vec<[String; 2]>,
    pub s: String,
    pub t: String,
    #[serde(default)]
    pub c: f64,
}

impl MinProdDocument {
    pub fn instance(&self) -> Result<MinProdInstance> {
        let pairs: Vec<(&str, &str)> = self
            .edges
            .iter()
            .map(|[a, b]| (a.as_str(), b.as_str()))
            .collect();
        let graph = SimpleGraph::new(self.vertices.clone(), &pairs)?;
        let find = |id: &str| {
            graph.index_of(id).ok_or_else(|| Error::UnknownVertex {
                location: "endpoints".into(),
                id: id.to_string(),
            })
        };
        let (s, t) = (find(&self.s)?, find(&self.t)?);
        MinProdInstance::new(graph, s, t, self.c)
    }
}

/// `(|P1| + C)(|P2| + C)` with lengths in edges.
pub fn minprod_objective(p1: &Path, p2: &Path, c: f64) -> f64 {
    (p1.edge_count() as f64 + c) * (p2.edge_count() as f64 + c)
}

/// The routing objective of a subinstance rescaled as in the reduction:
/// `(f + B g) / B + 1 / B^2` with `B = 1 / (1 + C)`.
pub fn scaled_routing_objective(f: f64, g: f64, c: f64) -> f64 {
    let b = (1.0 + c).recip();
    (f + b * g) / b + 1.0 / (b * b)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinProdSolution {
    pub path1: Path,
    pub path2: Path,
    pub objective: f64,
}

/// Two distinct, internally vertex-disjoint s-t paths.
fn internally_disjoint(p1: &Path, p2: &Path) -> bool {
    let (a, b) = (p1.vertices(), p2.vertices());
    a != b && a[1..a.len() - 1].iter().all(|v| !b[1..b.len() - 1].contains(v))
}

/// Exact minimum over all unordered pairs of s-t paths; the lexicographically
/// first pair wins ties.
pub fn minprod_bruteforce(instance: &MinProdInstance) -> Option<MinProdSolution> {
    let paths = instance.graph.simple_paths(instance.s, instance.t);
    let mut best: Option<MinProdSolution> = None;
    for (i, p1) in paths.iter().enumerate() {
        for p2 in &paths[i + 1..] {
            if !internally_disjoint(p1, p2) {
                continue;
            }
            let objective = minprod_objective(p1, p2, instance.c);
            if best.as_ref().is_none_or(|b| objective < b.objective) {
                best = Some(MinProdSolution {
                    path1: p1.clone(),
                    path2: p2.clone(),
                    objective,
                });
            }
        }
    }
    best
}

/// One routing subinstance built by the reduction.
#[derive(Debug, Clone)]
pub struct Subinstance {
    pub topology: Topology,
    pub failures: FailureModel,
    /// Source index in `topology`.
    pub source: usize,
    pub trade_off: f64,
    pub demand: f64,
    /// Graph vertex of each topology vertex.
    pub graph_vertex: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub t1: usize,
    pub t2: usize,
    /// Extended paths, ending at `t`.
    pub path1: Path,
    pub path2: Path,
    /// `f + B g` of the subinstance solution; `None` for the direct-edge case.
    pub routing_objective: Option<f64>,
    pub minprod: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub best: Option<MinProdSolution>,
    /// Every neighbor pair that produced a solution, in pair order.
    pub candidates: Vec<Candidate>,
}

/// Exact routing solver for a subinstance.
pub fn oracle_subsolver(sub: &Subinstance) -> Result<Option<RoutingSolution>> {
    Ok(solve_source(
        &sub.topology,
        &sub.failures,
        sub.source,
        sub.trade_off,
        sub.demand,
    ))
}

fn build_subinstance(inst: &MinProdInstance, t1: usize, t2: usize) -> Result<Subinstance> {
    let g = &inst.graph;
    let graph_vertex: Vec<usize> = (0..g.vertex_count()).filter(|&v| v != inst.t).collect();
    let vertices = graph_vertex
        .iter()
        .map(|&v| Vertex {
            id: g.id(v).to_string(),
            role: if v == t1 || v == t2 {
                Role::Terminal
            } else {
                Role::Secondary
            },
        })
        .collect();
    let edges: Vec<(&str, &str, f64)> = g
        .edges()
        .iter()
        .filter(|&&(a, b)| a != inst.t && b != inst.t)
        .map(|&(a, b)| (g.id(a), g.id(b), 1.0))
        .collect();
    let topology = Topology::new(vertices, &edges)?;
    let failures = FailureModel::uniform(&topology, 1.0)?;
    let source = graph_vertex
        .iter()
        .position(|&v| v == inst.s)
        .expect("s is kept");
    Ok(Subinstance {
        topology,
        failures,
        source,
        trade_off: (1.0 + inst.c).recip(),
        demand: 1.0,
        graph_vertex,
    })
}

fn extend(path: &Path, map: &[usize], t: usize) -> Path {
    let mut seq: Vec<usize> = path.vertices().iter().map(|&v| map[v]).collect();
    seq.push(t);
    Path::new(seq)
}

/// Solves `instance` through routing subinstances, one per neighbor pair of
/// `t`, using `solver` for each. Pairs are solved in parallel.
pub fn reduce_and_solve<F>(instance: &MinProdInstance, solver: F) -> Result<Reduction>
where
    F: Fn(&Subinstance) -> Result<Option<RoutingSolution>> + Sync,
{
    let g = &instance.graph;
    let (s, t) = (instance.s, instance.t);
    let near = g.neighbors(t);
    let pairs: Vec<(usize, usize)> = near
        .iter()
        .enumerate()
        .flat_map(|(i, &a)| near[i + 1..].iter().map(move |&b| (a, b)))
        .collect();

    let solved: Vec<Option<Candidate>> = pairs
        .par_iter()
        .map(|&(t1, t2)| -> Result<Option<Candidate>> {
            if t1 == s || t2 == s {
                let other = if t1 == s { t2 } else { t1 };
                let Some(route) = g.shortest_path(s, other, t) else {
                    return Ok(None);
                };
                let direct = Path::new(vec![s, t]);
                let mut seq = route.vertices().to_vec();
                seq.push(t);
                let routed = Path::new(seq);
                let (path1, path2) = if t1 == s { (direct, routed) } else { (routed, direct) };
                let minprod = minprod_objective(&path1, &path2, instance.c);
                return Ok(Some(Candidate {
                    t1,
                    t2,
                    path1,
                    path2,
                    routing_objective: None,
                    minprod,
                }));
            }
            let sub = build_subinstance(instance, t1, t2)?;
            let Some(sol) = solver(&sub)? else {
                return Ok(None);
            };
            if !vertex_disjoint(&sol.path1, &sol.path2) {
                return Err(Error::Solver("subinstance paths are not disjoint".into()));
            }
            let path1 = extend(&sol.path1, &sub.graph_vertex, t);
            let path2 = extend(&sol.path2, &sub.graph_vertex, t);
            let minprod = minprod_objective(&path1, &path2, instance.c);
            Ok(Some(Candidate {
                t1,
                t2,
                path1,
                path2,
                routing_objective: Some(sol.objective),
                minprod,
            }))
        })
        .collect::<Result<_>>()?;

    let candidates: Vec<Candidate> = solved.into_iter().flatten().collect();
    let best = candidates
        .iter()
        .fold(None::<&Candidate>, |acc, c| match acc {
            Some(b) if b.minprod <= c.minprod => Some(b),
            _ => Some(c),
        })
        .map(|c| MinProdSolution {
            path1: c.path1.clone(),
            path2: c.path2.clone(),
            objective: c.minprod,
        });
    Ok(Reduction { best, candidates })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn instance(n: usize, edges: &[(usize, usize)], s: usize, t: usize, c: f64) -> MinProdInstance {
        MinProdInstance::new(SimpleGraph::from_indices(n, edges).unwrap(), s, t, c).unwrap()
    }

    #[test]
    fn objective_arithmetic() {
        let one = Path::new(vec![0, 1]);
        assert_eq!(minprod_objective(&one, &one, 0.0), 1.0);
        let two = Path::new(vec![0, 2, 1]);
        let three = Path::new(vec![0, 3, 4, 1]);
        assert_eq!(minprod_objective(&two, &three, 1.0), 12.0);
        // C^2 + C(|P1| + |P2|) + |P1||P2|
        let c = 2.5;
        assert_eq!(minprod_objective(&two, &three, c), c * c + c * 5.0 + 6.0);
    }

    #[test]
    fn scaled_objective_identity_on_a_grid() {
        for f1 in 0..8 {
            for f2 in 0..8 {
                for ci in 0..=20 {
                    let c = ci as f64 * 0.25;
                    let (a, b) = (f1 as f64, f2 as f64);
                    let lhs = scaled_routing_objective(a + b, a * b, c);
                    let rhs = (a + 1.0 + c) * (b + 1.0 + c);
                    assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0), "{f1} {f2} {c}");
                }
            }
        }
    }

    #[test]
    fn square_has_one_pair() {
        // 0 - 1 - 3 and 0 - 2 - 3
        let inst = instance(4, &[(0, 1), (0, 2), (1, 3), (2, 3)], 0, 3, 0.0);
        let brute = minprod_bruteforce(&inst).unwrap();
        assert_eq!(brute.objective, 4.0);
        let red = reduce_and_solve(&inst, oracle_subsolver).unwrap();
        let best = red.best.unwrap();
        assert_eq!(best.objective, 4.0);
        let mut got = [best.path1.vertices().to_vec(), best.path2.vertices().to_vec()];
        got.sort();
        assert_eq!(got, [vec![0, 1, 3], vec![0, 2, 3]]);
    }

    #[test]
    fn single_route_has_no_pair() {
        let inst = instance(3, &[(0, 1), (1, 2)], 0, 2, 1.0);
        assert!(minprod_bruteforce(&inst).is_none());
        assert!(reduce_and_solve(&inst, oracle_subsolver).unwrap().best.is_none());
    }

    #[test]
    fn direct_edge_pairs_with_a_detour() {
        // triangle plus a pendant: s=0, t=1
        let inst = instance(4, &[(0, 1), (0, 2), (1, 2), (2, 3)], 0, 1, 1.0);
        let brute = minprod_bruteforce(&inst).unwrap();
        // (0,1) and (0,2,1): (1+1)(2+1)
        assert_eq!(brute.objective, 6.0);
        let red = reduce_and_solve(&inst, oracle_subsolver).unwrap();
        assert_eq!(red.best.unwrap().objective, 6.0);
        assert!(red.candidates.iter().any(|c| c.routing_objective.is_none()));
    }

    #[test]
    fn candidates_satisfy_the_scaled_identity() {
        let edges = [(0, 1), (0, 2), (1, 3), (2, 3), (1, 2), (3, 4), (2, 4), (1, 5), (5, 4)];
        for c in [0.0, 1.0, 2.0, 7.5] {
            let inst = instance(6, &edges, 0, 4, c);
            let red = reduce_and_solve(&inst, oracle_subsolver).unwrap();
            assert!(!red.candidates.is_empty());
            for cand in &red.candidates {
                let Some(obj) = cand.routing_objective else { continue };
                let b = (1.0 + c).recip();
                let scaled = obj / b + 1.0 / (b * b);
                assert!((scaled - cand.minprod).abs() <= 1e-12 * cand.minprod);
            }
            let brute = minprod_bruteforce(&inst).unwrap();
            assert_eq!(red.best.unwrap().objective, brute.objective);
        }
    }

    #[test]
    fn document_round_trip() {
        let doc: MinProdDocument = serde_json::from_str(
            r#"{"vertices":["s","a","b","t"],"edges":[["s","a"],["s","b"],["a","t"],["b","t"]],"s":"s","t":"t","c":1}"#,
        )
        .unwrap();
        let inst = doc.instance().unwrap();
        assert_eq!(minprod_bruteforce(&inst).unwrap().objective, 9.0);
        assert!(serde_json::from_str::<MinProdDocument>(r#"{"vertices":[],"edges":[],"s":"a","t":"b","x":1}"#).is_err());
    }

    #[test]
    fn graph_validation() {
        assert!(matches!(
            SimpleGraph::from_indices(2, &[(0, 0)]),
            Err(Error::SelfLoop { .. })
        ));
        assert!(matches!(
            SimpleGraph::from_indices(2, &[(0, 1), (1, 0)]),
            Err(Error::DuplicateEdge { .. })
        ));
        assert!(matches!(
            SimpleGraph::from_indices(2, &[(0, 2)]),
            Err(Error::UnknownVertex { .. })
        ));
        let g = SimpleGraph::from_indices(3, &[(0, 1)]).unwrap();
        assert!(MinProdInstance::new(g.clone(), 0, 0, 0.0).is_err());
        assert!(MinProdInstance::new(g, 0, 1, -1.0).is_err());
    }
}
