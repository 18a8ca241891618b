//! Sequential vs. parallel execution of the data-parallel stages.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use losstopo::field::{scatter_wells, synth_wells};
use losstopo::graph::{exact_knn, nn_descent, symmetrize_mutual, NnDescentParams};
use losstopo::merge_tree::compute_merge_tree;
use losstopo::{Execution, NeighborhoodGraph, ScalarField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn cloud(count: usize, dims: usize) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let coords = (0..count * dims).map(|_| rng.gen::<f64>()).collect();
    let values = (0..count).map(|_| rng.gen::<f64>()).collect();
    ScalarField::new(dims, coords, values, None, Default::default()).unwrap()
}

fn knn(c: &mut Criterion) {
    let field = cloud(4000, 3);
    let mut group = c.benchmark_group("exact_knn");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| exact_knn(black_box(&field), 12, exec).unwrap())
        });
    }
    group.finish();

    let field = cloud(20_000, 3);
    let params = NnDescentParams::default();
    let mut group = c.benchmark_group("nn_descent");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| nn_descent(black_box(&field), 12, &params, exec).unwrap())
        });
    }
    group.finish();
}

// Independent fields share nothing, so a batch of trees maps cleanly.
fn tree_batch(c: &mut Criterion) {
    let inputs: Vec<(ScalarField, NeighborhoodGraph)> = (0..16)
        .map(|seed| {
            let field = synth_wells(2, 41, &scatter_wells(2, 41, 4, seed).unwrap(), 0.0).unwrap();
            let graph = symmetrize_mutual(&exact_knn(&field, 8, Execution::Parallel).unwrap());
            (field, graph)
        })
        .collect();
    let mut group = c.benchmark_group("merge_tree_batch");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| exec.map(inputs.len(), |i| compute_merge_tree(&inputs[i].0, &inputs[i].1).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, knn, tree_batch);
criterion_main!(benches);
