//! Cross-module property tests: serialization round-trips, generator
//! guarantees, and the incremental/full cost equivalence over random move
//! chains.

use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use modview_core::cost::{calc_coord_cost, update_tcc, CostState};
use modview_core::graph::{
    authoritative_partition, bind_partition, gen_planted, parse_graph, partition_to_json,
    read_partition, write_graph_json, DesignGraph, GraphFormat,
};
use modview_core::partition::Partition;
use modview_core::Dsm;

fn arb_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("pkg{}.entity{i}", i % 3)).collect()
}

proptest! {
    #[test]
    fn partition_json_round_trips(assignment in prop::collection::vec(0..6usize, 1..40)) {
        let n = assignment.len();
        let labels = arb_labels(n);
        let partition = Partition::from_assignment(assignment);
        let json = partition_to_json(&partition, &labels);
        let clusters = read_partition(json.as_bytes()).unwrap();
        let back = bind_partition(&clusters, &labels).unwrap();
        prop_assert!(back.same_grouping(&partition));
        // Canonical form is a fixpoint.
        prop_assert_eq!(partition_to_json(&back, &labels), json);
    }

    #[test]
    fn graph_json_round_trips(seed in 0..200u64) {
        let inst = gen_planted(3, 4, 0.4, 0.1, seed).unwrap();
        let mut bytes = Vec::new();
        write_graph_json(&inst.graph, &mut bytes).unwrap();
        let back = parse_graph(&bytes, GraphFormat::Json).unwrap();
        prop_assert_eq!(back, inst.graph);
    }

    #[test]
    fn planted_cliques_components_equal_truth(
        modules in 1..5usize,
        size in 1..6usize,
        seed in 0..500u64,
    ) {
        let inst = gen_planted(modules, size, 1.0, 0.0, seed).unwrap();
        let components = weak_components(&inst.graph);
        prop_assert!(components.same_grouping(&inst.truth));
    }

    #[test]
    fn authoritative_partition_ignores_final_segment(seed in 0..300u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(1..20usize);
        let nodes: Vec<(String, String)> = (0..n)
            .map(|i| {
                let depth = rng.random_range(1..4usize);
                let name: Vec<String> = (0..depth)
                    .map(|d| format!("s{}", rng.random_range(0..3u8) as usize + d))
                    .collect();
                (format!("n{i}"), name.join("."))
            })
            .collect();
        let graph = DesignGraph::from_parts(nodes.clone(), vec![]).unwrap();
        let renamed = DesignGraph::from_parts(
            nodes
                .iter()
                .map(|(id, name)| {
                    let mut renamed = name.clone();
                    let cut = renamed.rfind('.').map_or(0, |p| p + 1);
                    renamed.truncate(cut);
                    renamed.push_str("zzz");
                    (id.clone(), renamed)
                })
                .collect(),
            vec![],
        )
        .unwrap();
        prop_assert!(authoritative_partition(&graph)
            .same_grouping(&authoritative_partition(&renamed)));
    }
}

fn weak_components(graph: &DesignGraph) -> Partition {
    let n = graph.node_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let root = find(parent, parent[x]);
            parent[x] = root;
        }
        parent[x]
    }
    for &(s, d, _) in graph.edges() {
        let (a, b) = (find(&mut parent, s), find(&mut parent, d));
        if a != b {
            parent[a] = b;
        }
    }
    Partition::from_assignment((0..n).map(|e| find(&mut parent, e)).collect())
}

fn random_integer_dsm(rng: &mut ChaCha8Rng, n: usize) -> Dsm {
    let mut weights = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.random_bool(0.25) {
                weights[i * n + j] = rng.random_range(1..=9) as f64;
            }
        }
    }
    Dsm::from_weights((0..n).map(|i| format!("e{i}")).collect(), weights).unwrap()
}

fn random_real_dsm(rng: &mut ChaCha8Rng, n: usize) -> Dsm {
    let mut weights = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.random_bool(0.25) {
                weights[i * n + j] = rng.random_range(0.01..4.0);
            }
        }
    }
    Dsm::from_weights((0..n).map(|i| format!("e{i}")).collect(), weights).unwrap()
}

/// Apply `moves` random entity moves, checking the chained incremental
/// state against a fresh recomputation after each one.
fn chase_moves(
    dsm: &Dsm,
    rng: &mut ChaCha8Rng,
    powcc: f64,
    moves: usize,
    check: impl Fn(&CostState, &CostState, usize),
) {
    let n = dsm.n();
    let mut assignment: Vec<usize> = (0..n).collect();
    let mut state = calc_coord_cost(dsm, &Partition::from_assignment(assignment.clone()), powcc)
        .unwrap();
    for step in 0..moves {
        let entity = rng.random_range(0..n);
        let old = assignment[entity];
        let live: Vec<usize> = state
            .module_raw()
            .keys()
            .copied()
            .filter(|&c| c != old)
            .collect();
        if live.is_empty() {
            break;
        }
        let new = live[rng.random_range(0..live.len())];
        assignment[entity] = new;
        let partition = Partition::from_assignment(assignment.clone());
        let updated = update_tcc(&state, dsm, &partition, entity, old, new).unwrap();
        let fresh = calc_coord_cost(dsm, &partition, powcc).unwrap();
        check(&updated, &fresh, step);
        state = updated;
    }
}

#[test]
fn chained_updates_stay_exact_for_integer_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for powcc in [0.0, 1.0, 3.0, 5.0] {
        let dsm = random_integer_dsm(&mut rng, 20);
        chase_moves(&dsm, &mut rng, powcc, 1000, |updated, fresh, step| {
            assert_eq!(
                updated.tcc(),
                fresh.tcc(),
                "tcc drifted at step {step} (powcc {powcc})"
            );
            assert_eq!(updated.intra_cost(), fresh.intra_cost());
            assert_eq!(updated.extra_cost(), fresh.extra_cost());
            assert_eq!(updated.module_raw(), fresh.module_raw());
        });
    }
}

#[test]
fn chained_updates_stay_close_for_real_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for powcc in [0.5, 3.0] {
        let dsm = random_real_dsm(&mut rng, 20);
        chase_moves(&dsm, &mut rng, powcc, 1000, |updated, fresh, step| {
            let rel = (updated.tcc() - fresh.tcc()).abs() / fresh.tcc().max(1e-12);
            assert!(rel < 1e-9, "relative error {rel} at step {step}");
        });
    }
}

#[test]
fn symmetric_extremes_for_random_dsms() {
    let mut rng = ChaCha8Rng::seed_from_u64(90);
    for _ in 0..20 {
        let n = rng.random_range(2..=30);
        let dsm = random_real_dsm(&mut rng, n);
        for powcc in [0.0, 1.0, 3.0, 5.0] {
            let singles =
                calc_coord_cost(&dsm, &Partition::singletons(n), powcc).unwrap();
            let lumped = calc_coord_cost(
                &dsm,
                &Partition::from_assignment(vec![0; n]),
                powcc,
            )
            .unwrap();
            assert_eq!(singles.tcc(), lumped.tcc());
            assert_eq!(
                singles.tcc(),
                singles.total_raw() * (n as f64).powi(powcc as i32)
            );
        }
    }
}
