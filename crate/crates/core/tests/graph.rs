mod common;

use std::collections::{BTreeSet, VecDeque};
use std::path::Path;

use losstopo::field::synth_wells;
use losstopo::graph::{
    connected_components, default_k, exact_knn, nn_descent, symmetrize_mutual, NnDescentParams,
};
use losstopo::{Execution, GridSpec, NeighborhoodGraph, ScalarField, Well};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Map;

fn flat_grid(n: usize, r: usize) -> ScalarField {
    let spec = GridSpec::new(n, r).unwrap();
    let count = spec.point_count().unwrap();
    ScalarField::from_grid(spec, vec![0.0; count], Map::new()).unwrap()
}

fn bfs_component_count(g: &NeighborhoodGraph) -> usize {
    let mut adj = vec![Vec::new(); g.vertex_count];
    for &(a, b) in &g.edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; g.vertex_count];
    let mut count = 0;
    for s in 0..g.vertex_count {
        if seen[s] {
            continue;
        }
        count += 1;
        seen[s] = true;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    q.push_back(u);
                }
            }
        }
    }
    count
}

#[test]
fn interior_grid_vertices_have_degree_eight() {
    let field = flat_grid(2, 9);
    let g = symmetrize_mutual(&exact_knn(&field, default_k(2), Execution::Sequential).unwrap());
    let spec = *field.grid().unwrap();
    let mut degree = vec![0; field.len()];
    for &(a, b) in &g.edges {
        degree[a] += 1;
        degree[b] += 1;
    }
    for v in 0..field.len() {
        let c = spec.coords_of(v);
        if c.iter().all(|&x| x > 0 && x < 8) {
            assert_eq!(degree[v], 8, "vertex {c:?}");
        }
    }
}

#[test]
fn three_d_grid_with_default_k_is_connected() {
    let field = flat_grid(3, 7);
    let g = symmetrize_mutual(&exact_knn(&field, default_k(3), Execution::Parallel).unwrap());
    assert_eq!(connected_components(&g).count, 1);
    assert_eq!(bfs_component_count(&g), 1);
}

#[test]
fn components_agree_with_bfs() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let field = common::uniform_points(&mut rng, 120, 2, 30.0);
        let g = symmetrize_mutual(&exact_knn(&field, 3, Execution::Sequential).unwrap());
        let comps = connected_components(&g);
        assert_eq!(comps.count, bfs_component_count(&g));
        for &(a, b) in &g.edges {
            assert_eq!(comps.labels[a], comps.labels[b]);
        }
    }
}

#[test]
fn execution_modes_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let field = common::uniform_points(&mut rng, 2500, 3, 1.0);
    let params = NnDescentParams { seed: 9, ..Default::default() };
    assert_eq!(
        exact_knn(&field, 7, Execution::Sequential).unwrap(),
        exact_knn(&field, 7, Execution::Parallel).unwrap()
    );
    assert_eq!(
        nn_descent(&field, 7, &params, Execution::Sequential).unwrap(),
        nn_descent(&field, 7, &params, Execution::Parallel).unwrap()
    );
}

#[test]
fn nn_descent_recall_on_small_cloud() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let field = common::uniform_points(&mut rng, 3000, 4, 1.0);
    let exact = symmetrize_mutual(&exact_knn(&field, 16, Execution::Parallel).unwrap());
    let approx = nn_descent(&field, 16, &NnDescentParams::default(), Execution::Parallel).unwrap();
    assert!(common::edge_recall(&symmetrize_mutual(&approx), &exact) >= 0.95);
}

#[test]
fn edge_list_round_trip_on_wells() {
    let wells = [Well { center: vec![4.0, 4.0], depth: 1.0, width: 2.0 }];
    let field = synth_wells(2, 9, &wells, 0.0).unwrap();
    let g = symmetrize_mutual(&exact_knn(&field, 8, Execution::Sequential).unwrap());
    let text = g.to_edge_list();
    let back = NeighborhoodGraph::parse_edge_list(text.as_bytes(), Path::new("mem")).unwrap();
    assert_eq!(back, g);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mutual_edges_survive_relabeling(seed in any::<u64>(), count in 2usize..80, dims in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let field = common::uniform_points(&mut rng, count, dims, 10.0);
        let k = (count - 1).min(5);
        let g = symmetrize_mutual(&exact_knn(&field, k, Execution::Sequential).unwrap());

        let mut perm: Vec<usize> = (0..count).collect();
        perm.shuffle(&mut rng);
        // New vertex perm[i] holds old point i.
        let mut coords = vec![0.0; count * dims];
        for (old, &new) in perm.iter().enumerate() {
            coords[new * dims..(new + 1) * dims].copy_from_slice(field.coord(old));
        }
        let relabeled = ScalarField::new(dims, coords, vec![0.0; count], None, Map::new()).unwrap();
        let h = symmetrize_mutual(&exact_knn(&relabeled, k, Execution::Sequential).unwrap());

        let mapped: BTreeSet<(usize, usize)> = g
            .edges
            .iter()
            .map(|&(a, b)| (perm[a].min(perm[b]), perm[a].max(perm[b])))
            .collect();
        prop_assert_eq!(mapped, h.edges.iter().copied().collect::<BTreeSet<_>>());
    }

    #[test]
    fn knn_lists_are_sorted_and_exclude_self(seed in any::<u64>(), count in 2usize..60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let field = common::uniform_points(&mut rng, count, 2, 5.0);
        let k = (count - 1).min(4);
        let knn = exact_knn(&field, k, Execution::Sequential).unwrap();
        for (v, list) in knn.lists.iter().enumerate() {
            prop_assert_eq!(list.len(), k);
            prop_assert!(!list.contains(&v));
            let d = |u: usize| -> f64 {
                field.coord(v).iter().zip(field.coord(u)).map(|(a, b)| (a - b) * (a - b)).sum()
            };
            for w in list.windows(2) {
                prop_assert!(d(w[0]) <= d(w[1]));
            }
            let worst = d(*list.last().unwrap());
            for u in (0..count).filter(|u| *u != v && !list.contains(u)) {
                prop_assert!(d(u) >= worst);
            }
        }
    }
}
