//! NN-Descent: approximate kNN lists by iterated neighbor-of-neighbor joins.
//!
//! Every random draw is seeded from `(seed, iteration, vertex)` and proposals
//! are applied with set semantics (a list is the k best distinct candidates by
//! `(distance, index)`), so the result does not depend on thread scheduling.

use log::warn;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::exact::{closer, exact_knn, sq_dist};
use super::{KnnLists, KnnMethod};
use crate::{Error, Execution, Result, ScalarField};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NnDescentParams {
    pub max_iterations: usize,
    /// Fraction of k sampled from new / reverse candidates per round.
    pub sample_rate: f64,
    /// Stop once fewer than `delta · N · k` list entries change in a round.
    pub delta: f64,
    pub seed: u64,
    /// Fields this small go straight to the exact search.
    pub exact_below: usize,
}

impl Default for NnDescentParams {
    fn default() -> Self {
        Self {
            max_iterations: 20,
            sample_rate: 0.5,
            delta: 0.001,
            seed: 0,
            exact_below: 1024,
        }
    }
}

// Vertices per local-join batch; bounds the proposal buffer.
const JOIN_CHUNK: usize = 4096;

#[derive(Clone, Copy, Debug)]
struct Entry {
    dist: f64,
    id: usize,
    fresh: bool,
}

fn rng_for(seed: u64, round: u64, v: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ round.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(v as u64);
    rng
}

/// Inserts `(dist, id)` keeping the k best distinct entries. Returns true on change.
fn insert(list: &mut Vec<Entry>, k: usize, dist: f64, id: usize) -> bool {
    if list.len() == k && !closer((dist, id), (list[k - 1].dist, list[k - 1].id)) {
        return false;
    }
    if list.iter().any(|e| e.id == id) {
        return false;
    }
    let pos = list.partition_point(|e| closer((e.dist, e.id), (dist, id)));
    list.insert(pos, Entry { dist, id, fresh: true });
    list.truncate(k);
    true
}

fn worst(list: &[Entry], k: usize) -> (f64, usize) {
    if list.len() < k {
        (f64::INFINITY, usize::MAX)
    } else {
        (list[k - 1].dist, list[k - 1].id)
    }
}

pub fn nn_descent(field: &ScalarField, k: usize, params: &NnDescentParams, exec: Execution) -> Result<KnnLists> {
    let n = field.len();
    if k == 0 {
        return Err(Error::param("k must be at least 1"));
    }
    if k >= n {
        return Err(Error::param(format!("k = {k} must be smaller than the point count {n}")));
    }
    if !(params.sample_rate > 0.0 && params.sample_rate <= 1.0) {
        return Err(Error::param("sample_rate must lie in (0, 1]"));
    }
    if n <= params.exact_below {
        return exact_knn(field, k, exec);
    }
    let sample = ((params.sample_rate * k as f64).ceil() as usize).max(1);

    let mut graph: Vec<Vec<Entry>> = exec.map(n, |v| {
        let mut rng = rng_for(params.seed, 0, v);
        let mut list = Vec::with_capacity(k);
        while list.len() < k {
            let u = rng.gen_range(0..n);
            if u != v {
                insert(&mut list, k, sq_dist(field.coord(v), field.coord(u)), u);
            }
        }
        list
    });

    let mut converged = false;
    let mut rounds = 0;
    for round in 1..=params.max_iterations as u64 {
        rounds = round as usize;

        // Forward samples: every old entry, up to `sample` fresh ones.
        let forward: Vec<(Vec<usize>, Vec<usize>)> = exec.map(n, |v| {
            let mut fresh: Vec<usize> = graph[v].iter().filter(|e| e.fresh).map(|e| e.id).collect();
            let old = graph[v].iter().filter(|e| !e.fresh).map(|e| e.id).collect();
            if fresh.len() > sample {
                let mut rng = rng_for(params.seed, 2 * round, v);
                fresh.shuffle(&mut rng);
                fresh.truncate(sample);
                fresh.sort_unstable();
            }
            (old, fresh)
        });
        exec.for_each_mut(&mut graph, |v, list| {
            for e in list.iter_mut() {
                if e.fresh && forward[v].1.contains(&e.id) {
                    e.fresh = false;
                }
            }
        });

        let mut rev_old = vec![Vec::new(); n];
        let mut rev_new = vec![Vec::new(); n];
        for (v, (old, fresh)) in forward.iter().enumerate() {
            for &u in old {
                rev_old[u].push(v);
            }
            for &u in fresh {
                rev_new[u].push(v);
            }
        }

        let candidates: Vec<(Vec<usize>, Vec<usize>)> = exec.map(n, |v| {
            let mut rng = rng_for(params.seed, 2 * round + 1, v);
            let mut fresh = forward[v].1.clone();
            let mut old = forward[v].0.clone();
            for (src, dst) in [(&rev_new[v], &mut fresh), (&rev_old[v], &mut old)] {
                let mut extra = src.clone();
                if extra.len() > sample {
                    extra.shuffle(&mut rng);
                    extra.truncate(sample);
                }
                dst.extend(extra);
                dst.sort_unstable();
                dst.dedup();
            }
            old.retain(|u| fresh.binary_search(u).is_err());
            (fresh, old)
        });

        let mut updates = 0usize;
        for start in (0..n).step_by(JOIN_CHUNK) {
            let end = (start + JOIN_CHUNK).min(n);
            let graph_ref = &graph;
            let proposals: Vec<Vec<(usize, usize, f64)>> = exec.map(end - start, |i| {
                let (fresh, old) = &candidates[start + i];
                let mut out = Vec::new();
                let mut propose = |a: usize, b: usize| {
                    if a == b {
                        return;
                    }
                    let d = sq_dist(field.coord(a), field.coord(b));
                    if closer((d, b), worst(&graph_ref[a], k)) {
                        out.push((a, b, d));
                    }
                    if closer((d, a), worst(&graph_ref[b], k)) {
                        out.push((b, a, d));
                    }
                };
                for (x, &a) in fresh.iter().enumerate() {
                    for &b in &fresh[x + 1..] {
                        propose(a, b);
                    }
                    for &b in old {
                        propose(a, b);
                    }
                }
                out
            });

            // Bucket by target so each list is updated by exactly one task.
            let mut offsets = vec![0usize; n + 1];
            for &(t, _, _) in proposals.iter().flatten() {
                offsets[t + 1] += 1;
            }
            for i in 0..n {
                offsets[i + 1] += offsets[i];
            }
            let mut fill = offsets.clone();
            let mut bucket = vec![(0usize, 0.0f64); offsets[n]];
            for &(t, s, d) in proposals.iter().flatten() {
                bucket[fill[t]] = (s, d);
                fill[t] += 1;
            }
            let mut changed = vec![0usize; n];
            let changed_ptr = &mut changed;
            let mut work: Vec<(&mut Vec<Entry>, &mut usize)> =
                graph.iter_mut().zip(changed_ptr.iter_mut()).collect();
            exec.for_each_mut(&mut work, |t, (list, count)| {
                for &(s, d) in &bucket[offsets[t]..offsets[t + 1]] {
                    if insert(list, k, d, s) {
                        **count += 1;
                    }
                }
            });
            updates += changed.iter().sum::<usize>();
        }

        if (updates as f64) < params.delta * (n * k) as f64 {
            converged = true;
            break;
        }
    }
    if !converged {
        warn!(
            "nn_descent stopped after {} rounds without converging; returning best lists so far",
            params.max_iterations
        );
    }

    Ok(KnnLists {
        k,
        method: KnnMethod::NnDescent,
        lists: graph.into_iter().map(|l| l.into_iter().map(|e| e.id).collect()).collect(),
        seed: Some(params.seed),
        converged,
        iterations: rounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Map;

    fn random_field(n: usize, dims: usize, seed: u64) -> ScalarField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coords = (0..n * dims).map(|_| rng.gen::<f64>()).collect();
        ScalarField::new(dims, coords, vec![0.0; n], None, Map::new()).unwrap()
    }

    #[test]
    fn small_fields_use_exact_search() {
        let f = random_field(100, 3, 1);
        let approx = nn_descent(&f, 6, &NnDescentParams::default(), Execution::Sequential).unwrap();
        let exact = exact_knn(&f, 6, Execution::Sequential).unwrap();
        assert_eq!(approx.method, KnnMethod::Exact);
        assert_eq!(approx.recall_against(&exact), 1.0);
    }

    #[test]
    fn deterministic_and_schedule_independent() {
        let f = random_field(3000, 3, 2);
        let params = NnDescentParams { seed: 7, ..Default::default() };
        let a = nn_descent(&f, 8, &params, Execution::Parallel).unwrap();
        let b = nn_descent(&f, 8, &params, Execution::Parallel).unwrap();
        let c = nn_descent(&f, 8, &params, Execution::Sequential).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert_eq!(a.method, KnnMethod::NnDescent);
        for (v, l) in a.lists.iter().enumerate() {
            assert_eq!(l.len(), 8);
            assert!(!l.contains(&v));
        }
    }

    #[test]
    fn good_recall_on_moderate_field() {
        let f = random_field(3000, 3, 3);
        let approx = nn_descent(&f, 8, &NnDescentParams::default(), Execution::Parallel).unwrap();
        let exact = exact_knn(&f, 8, Execution::Parallel).unwrap();
        assert!(approx.recall_against(&exact) > 0.95);
    }

    #[test]
    fn iteration_cap_is_flagged() {
        let f = random_field(2000, 4, 4);
        let params = NnDescentParams { max_iterations: 1, ..Default::default() };
        let out = nn_descent(&f, 10, &params, Execution::Sequential).unwrap();
        assert!(!out.converged);
        assert_eq!(out.iterations, 1);
    }
}
