use super::{KnnLists, KnnMethod};
use crate::{Error, Execution, Result, ScalarField};

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Orders `(distance, index)` pairs: nearer first, then lower index.
pub(crate) fn closer(a: (f64, usize), b: (f64, usize)) -> bool {
    match a.0.total_cmp(&b.0) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Equal => a.1 < b.1,
        std::cmp::Ordering::Greater => false,
    }
}

/// Brute-force k nearest neighbors under Euclidean distance in grid units.
pub fn exact_knn(field: &ScalarField, k: usize, exec: Execution) -> Result<KnnLists> {
    let n = field.len();
    if k == 0 {
        return Err(Error::param("k must be at least 1"));
    }
    if k >= n {
        return Err(Error::param(format!("k = {k} must be smaller than the point count {n}")));
    }
    let lists = exec.map(n, |v| nearest(field, v, k));
    Ok(KnnLists {
        k,
        method: KnnMethod::Exact,
        lists,
        seed: None,
        converged: true,
        iterations: 0,
    })
}

fn nearest(field: &ScalarField, v: usize, k: usize) -> Vec<usize> {
    let x = field.coord(v);
    // Sorted ascending; candidates arrive in index order, so an equal distance
    // never displaces an earlier (lower) index.
    let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
    for u in 0..field.len() {
        if u == v {
            continue;
        }
        let d = sq_dist(x, field.coord(u));
        if best.len() == k && !closer((d, u), best[k - 1]) {
            continue;
        }
        let pos = best.partition_point(|&e| closer(e, (d, u)));
        best.insert(pos, (d, u));
        best.truncate(k);
    }
    best.into_iter().map(|(_, u)| u).collect()
}
