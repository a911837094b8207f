//! Randomized invariants over generated networks.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use resroute::encoding::{decode, encode_paths, layout_for, Assignment, Decoded};
use resroute::minprod::{minprod_bruteforce, oracle_subsolver, reduce_and_solve, MinProdInstance, SimpleGraph};
use resroute::oracle::{
    brute_force_solve, min_cost_disjoint_paths, min_sum_baseline, simple_paths, vertex_disjoint, RoutingSolution,
};
use resroute::qubo::{build_qubo, GrayWalker};
use resroute::topology::{
    build_failure_model, load_topology, random_connected_edges, random_topology, save_topology, FailureModel,
    JointOverride, Scenario, Topology,
};

fn topology(seed: u64, n: usize) -> Topology {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_topology(n, 0.35, 4, &mut rng).unwrap()
}

/// Random correlated scenario: up to three pairs with joint at most the
/// marginal.
fn scenario(t: &Topology, seed: u64) -> Scenario {
    let m = t.edge_count();
    let label = |e: usize| {
        let (a, b) = t.edge_label(e);
        [a, b]
    };
    let overrides = (0..3u64)
        .filter_map(|k| {
            let a = ((seed >> (8 * k)) as usize) % m;
            let b = ((seed >> (8 * k + 4)) as usize) % m;
            (a != b).then(|| JointOverride {
                edge: label(a),
                pair: label(b),
                p: 0.02 * (k + 1) as f64,
            })
        })
        .collect();
    Scenario {
        name: "random".into(),
        default_marginal: 0.1,
        overrides,
    }
}

fn sources(t: &Topology) -> Vec<String> {
    t.secondaries().map(|v| t.id(v).to_string()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn save_then_load_is_identity(seed in any::<u64>(), n in 3usize..10) {
        let t = topology(seed, n);
        let back = load_topology(&save_topology(&t)).unwrap();
        prop_assert_eq!(save_topology(&back), save_topology(&t));
        prop_assert_eq!(back.edge_count(), t.edge_count());
    }

    #[test]
    fn joint_is_symmetric_with_marginal_on_the_diagonal(seed in any::<u64>(), n in 3usize..9) {
        let t = topology(seed, n);
        let fm = build_failure_model(&t, &scenario(&t, seed)).unwrap();
        for a in 0..t.edge_count() {
            prop_assert_eq!(fm.joint(a, a), fm.marginal(a));
            for b in 0..t.edge_count() {
                prop_assert_eq!(fm.joint(a, b), fm.joint(b, a));
            }
        }
    }

    #[test]
    fn raising_the_trade_off_never_raises_resiliency(seed in any::<u64>(), n in 4usize..8) {
        let t = topology(seed, n);
        let fm = build_failure_model(&t, &scenario(&t, seed)).unwrap();
        for src in sources(&t) {
            let mut prev: Option<RoutingSolution> = None;
            for b in [0.0, 1.0, 10.0, 100.0, 1000.0] {
                let Some(sol) = brute_force_solve(&t, &fm, &src, b, 1.0).unwrap() else { break };
                if let Some(p) = &prev {
                    prop_assert!(sol.resiliency <= p.resiliency + 1e-12);
                    prop_assert!(sol.latency >= p.latency - 1e-12);
                }
                prev = Some(sol);
            }
        }
    }

    #[test]
    fn zero_trade_off_is_the_min_sum_baseline(seed in any::<u64>(), n in 3usize..10) {
        let t = topology(seed, n);
        let fm = FailureModel::uniform(&t, 0.2).unwrap();
        for src in sources(&t) {
            let a = brute_force_solve(&t, &fm, &src, 0.0, 1.0).unwrap().map(|s| s.latency);
            let b = min_sum_baseline(&t, &src).unwrap().map(|s| s.latency);
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn qubo_energy_of_a_valid_pair_is_its_objective(seed in any::<u64>(), n in 3usize..7, b in 0.0f64..50.0) {
        let t = topology(seed, n);
        let fm = build_failure_model(&t, &scenario(&t, seed)).unwrap();
        let [t1, t2] = t.terminals();
        for src in sources(&t) {
            let s = t.vertex_index(&src).unwrap();
            let layout = layout_for(&t, &src).unwrap();
            let model = build_qubo(&t, &fm, &src, b, 2.0 * t.total_latency(), 1.5).unwrap();
            for p1 in simple_paths(&t, s, t1) {
                for p2 in simple_paths(&t, s, t2) {
                    if !vertex_disjoint(&p1, &p2) {
                        continue;
                    }
                    let a = encode_paths(&p1, &p2, &layout).unwrap();
                    let direct = RoutingSolution::evaluate(&t, &fm, p1.clone(), p2.clone(), b, 1.5);
                    let e = model.energy(&a).unwrap();
                    prop_assert!((e - direct.objective).abs() <= 1e-9 * direct.objective.max(1.0));
                    prop_assert_eq!(model.penalty.energy(&a).unwrap(), 0.0);
                    prop_assert_eq!(decode(&layout, &a).unwrap(), Decoded::Valid { path1: p1.clone(), path2: p2.clone() });
                }
            }
        }
    }

    #[test]
    fn gray_walk_tracks_direct_energy(seed in any::<u64>(), flips in proptest::collection::vec(0usize..16, 1..60)) {
        let t = topology(seed, 4);
        let fm = build_failure_model(&t, &scenario(&t, seed)).unwrap();
        let src = sources(&t)[0].clone();
        let model = build_qubo(&t, &fm, &src, 7.0, 3.0, 1.0).unwrap();
        let n = model.len();
        let couplings = model.qubo.couplings();
        let mut walker = GrayWalker::new(&model.qubo, &couplings, 0);
        for k in flips {
            walker.flip(k % n);
            let direct = model.qubo.energy(&Assignment::from_index(walker.state(), n)).unwrap();
            prop_assert!((walker.energy() - direct).abs() <= 1e-9 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn large_c_minprod_minimizes_total_length(seed in any::<u64>(), n in 3usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let edges = random_connected_edges(n, 0.4, &mut rng);
        let graph = SimpleGraph::from_indices(n, &edges).unwrap();
        let inst = MinProdInstance::new(graph, 0, n - 1, 1e6).unwrap();
        let reduced = reduce_and_solve(&inst, oracle_subsolver).unwrap().best;
        let brute = minprod_bruteforce(&inst);
        prop_assert_eq!(reduced.as_ref().map(|s| s.objective), brute.as_ref().map(|s| s.objective));
        let weighted: Vec<(usize, usize, f64)> = edges.iter().map(|&(a, b)| (a, b, 1.0)).collect();
        let flow = min_cost_disjoint_paths(n, &weighted, 0, &[(n - 1, 2)]);
        // the direct edge may be used by only one path, which flow allows too
        let flow_len = flow.map(|ps| ps.iter().map(|p| p.len() - 1).sum::<usize>());
        let prod_len = reduced.map(|s| s.path1.edge_count() + s.path2.edge_count());
        prop_assert_eq!(prod_len, flow_len);
    }
}
