//! Min-sum disjoint pair by successive shortest paths.
//!
//! Every vertex except the source is split into an in-half and an out-half
//! joined by a unit-capacity arc, so paths cannot share vertices. Each
//! undirected edge becomes two opposite unit arcs between the halves. A
//! super-sink collects one unit from each destination. Two augmentations of
//! Bellman-Ford shortest paths in the residual graph give the cheapest pair.

use crate::error::Result;
use crate::topology::{FailureModel, Topology};

use super::{Path, RoutingSolution};

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    cap: i32,
    flow: i32,
    cost: f64,
    rev: usize,
    original: bool,
}

struct FlowNetwork {
    arcs: Vec<Vec<Arc>>,
}

impl FlowNetwork {
    fn new(nodes: usize) -> Self {
        FlowNetwork {
            arcs: vec![Vec::new(); nodes],
        }
    }

    fn add_arc(&mut self, from: usize, to: usize, cap: i32, cost: f64) {
        let rev_from = self.arcs[to].len();
        let rev_to = self.arcs[from].len();
        self.arcs[from].push(Arc {
            to,
            cap,
            flow: 0,
            cost,
            rev: rev_from,
            original: true,
        });
        self.arcs[to].push(Arc {
            to: from,
            cap: 0,
            flow: 0,
            cost: -cost,
            rev: rev_to,
            original: false,
        });
    }

    fn residual(arc: &Arc) -> i32 {
        arc.cap - arc.flow
    }

    /// One unit along a cheapest residual path; false if the sink is cut off.
    fn augment(&mut self, source: usize, sink: usize) -> bool {
        let n = self.arcs.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred: Vec<Option<(usize, usize)>> = vec![None; n];
        dist[source] = 0.0;
        for _ in 0..n {
            let mut changed = false;
            for u in 0..n {
                if dist[u].is_infinite() {
                    continue;
                }
                for (k, arc) in self.arcs[u].iter().enumerate() {
                    if Self::residual(arc) > 0 && dist[u] + arc.cost < dist[arc.to] - 1e-12 {
                        dist[arc.to] = dist[u] + arc.cost;
                        pred[arc.to] = Some((u, k));
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if dist[sink].is_infinite() {
            return false;
        }
        let mut v = sink;
        while v != source {
            let (u, k) = pred[v].expect("predecessor on shortest path");
            let rev = self.arcs[u][k].rev;
            self.arcs[u][k].flow += 1;
            self.arcs[v][rev].flow -= 1;
            v = u;
        }
        true
    }
}

/// Two internally vertex-disjoint paths from `source` ending at the given
/// sinks (one path per unit of sink capacity) with minimum total cost.
///
/// `edges` are undirected `(a, b, cost)` over vertex indices `0..n`. Each
/// sink entry is `(vertex, capacity)`; the pair `[(t1, 1), (t2, 1)]` forces
/// one path to each terminal, `[(t, 2)]` asks for two paths to `t`. Returns
/// the vertex sequences, or `None` when fewer than two disjoint paths exist.
pub fn min_cost_disjoint_paths(
    n: usize,
    edges: &[(usize, usize, f64)],
    source: usize,
    sinks: &[(usize, i32)],
) -> Option<Vec<Vec<usize>>> {
    let vin = |v: usize| 2 * v;
    let vout = |v: usize| 2 * v + 1;
    let super_sink = 2 * n;
    let mut net = FlowNetwork::new(2 * n + 1);
    for v in 0..n {
        if v == source {
            continue;
        }
        let cap = sinks
            .iter()
            .find(|&&(t, _)| t == v)
            .map_or(1, |&(_, c)| c);
        net.add_arc(vin(v), vout(v), cap, 0.0);
    }
    for &(a, b, cost) in edges {
        net.add_arc(vout(a), vin(b), 1, cost);
        net.add_arc(vout(b), vin(a), 1, cost);
    }
    for &(t, cap) in sinks {
        net.add_arc(vout(t), super_sink, cap, 0.0);
    }

    let start = vout(source);
    for _ in 0..2 {
        if !net.augment(start, super_sink) {
            return None;
        }
    }

    // Peel two unit paths off the flow.
    let mut paths = Vec::with_capacity(2);
    for _ in 0..2 {
        let mut path = vec![source];
        let mut node = start;
        while node != super_sink {
            let k = net.arcs[node]
                .iter()
                .position(|a| a.original && a.flow > 0)?;
            net.arcs[node][k].flow -= 1;
            let next = net.arcs[node][k].to;
            if next != super_sink && next.is_multiple_of(2) {
                path.push(next / 2);
            }
            node = next;
        }
        paths.push(path);
    }
    Some(paths)
}

/// The latency-only (B = 0) optimum computed in polynomial time.
///
/// The returned solution carries zero resiliency and `objective == latency`;
/// use [`RoutingSolution::evaluate`] to score it under a failure model.
pub fn min_sum_baseline(topology: &Topology, source: &str) -> Result<Option<RoutingSolution>> {
    let s = topology.require_secondary(source)?;
    let [t1, t2] = topology.terminals();
    let edges: Vec<(usize, usize, f64)> = topology
        .edges()
        .iter()
        .map(|e| (e.u, e.v, e.latency))
        .collect();
    let Some(paths) = min_cost_disjoint_paths(topology.vertex_count(), &edges, s, &[(t1, 1), (t2, 1)])
    else {
        return Ok(None);
    };
    let mut path1 = None;
    let mut path2 = None;
    for p in paths {
        let p = Path::new(p);
        if p.destination() == t1 {
            path1 = Some(p);
        } else {
            path2 = Some(p);
        }
    }
    let (path1, path2) = (path1.expect("path to t1"), path2.expect("path to t2"));
    let silent = FailureModel::uniform(topology, 0.0)?;
    Ok(Some(RoutingSolution::evaluate(
        topology, &silent, path1, path2, 0.0, 1.0,
    )))
}
