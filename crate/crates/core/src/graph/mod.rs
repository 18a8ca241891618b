//! Neighborhood graphs over sample points.
//!
//! Directed k-nearest-neighbor lists come from [`exact_knn`] or
//! [`nn_descent`]; [`symmetrize_mutual`] keeps an undirected edge only when each
//! endpoint is among the other's k nearest.

mod exact;
mod nndescent;

use std::fmt::Write as _;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::union_find::UnionFind;
use crate::{Error, Result};

pub use exact::exact_knn;
pub use nndescent::{nn_descent, NnDescentParams};

/// Field size above which automatic method selection switches to NN-Descent.
pub const DEFAULT_EXACT_THRESHOLD: usize = 50_000;

/// Default neighbor count for an n-dimensional field: `4 n`.
pub fn default_k(dims: usize) -> usize {
    4 * dims
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnnMethod {
    Exact,
    NnDescent,
}

impl KnnMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            KnnMethod::Exact => "exact",
            KnnMethod::NnDescent => "nn_descent",
        }
    }
}

impl std::str::FromStr for KnnMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(KnnMethod::Exact),
            "nn_descent" | "nn-descent" => Ok(KnnMethod::NnDescent),
            other => Err(Error::param(format!("unknown kNN method {other:?}"))),
        }
    }
}

/// Directed neighbor lists, each sorted nearest first (ties by lower index).
#[derive(Clone, Debug, PartialEq)]
pub struct KnnLists {
    pub k: usize,
    pub method: KnnMethod,
    pub lists: Vec<Vec<usize>>,
    pub seed: Option<u64>,
    /// False when NN-Descent hit its iteration cap before converging.
    pub converged: bool,
    pub iterations: usize,
}

impl KnnLists {
    /// Lists built by hand, mostly for tests.
    pub fn from_lists(k: usize, lists: Vec<Vec<usize>>) -> Self {
        Self {
            k,
            method: KnnMethod::Exact,
            lists,
            seed: None,
            converged: true,
            iterations: 0,
        }
    }

    /// Fraction of `reference` neighbor entries also present here.
    pub fn recall_against(&self, reference: &KnnLists) -> f64 {
        let mut hit = 0usize;
        let mut total = 0usize;
        for (mine, theirs) in self.lists.iter().zip(&reference.lists) {
            total += theirs.len();
            hit += theirs.iter().filter(|u| mine.contains(u)).count();
        }
        if total == 0 {
            1.0
        } else {
            hit as f64 / total as f64
        }
    }
}

/// Undirected graph with canonical edges `(u, v)`, `u < v`, sorted and unique.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodGraph {
    pub vertex_count: usize,
    pub edges: Vec<(usize, usize)>,
    pub k: usize,
    pub method: KnnMethod,
    pub symmetric: bool,
    pub seed: Option<u64>,
    pub converged: bool,
}

impl NeighborhoodGraph {
    /// Arbitrary undirected graph. Edges are canonicalized and deduplicated;
    /// self-loops and out-of-range endpoints are rejected.
    pub fn from_edges(vertex_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut out = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::param(format!("self-loop at vertex {a}")));
            }
            if a >= vertex_count || b >= vertex_count {
                return Err(Error::param(format!(
                    "edge ({a}, {b}) out of range for {vertex_count} vertices"
                )));
            }
            out.push((a.min(b), a.max(b)));
        }
        out.sort_unstable();
        out.dedup();
        Ok(Self {
            vertex_count,
            edges: out,
            k: 0,
            method: KnnMethod::Exact,
            symmetric: false,
            seed: None,
            converged: true,
        })
    }

    pub fn adjacency(&self) -> Adjacency {
        Adjacency::new(self.vertex_count, &self.edges)
    }

    pub fn max_degree(&self) -> usize {
        let mut deg = vec![0usize; self.vertex_count];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg.into_iter().max().unwrap_or(0)
    }

    /// Edge-list text: a header comment, then one `u v` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut s = String::with_capacity(self.edges.len() * 12 + 128);
        let seed = self.seed.map_or_else(|| "-".to_string(), |s| s.to_string());
        let _ = writeln!(
            s,
            "# losstopo edge list\n# vertices={} k={} method={} seed={} symmetric={} converged={}",
            self.vertex_count,
            self.k,
            self.method.as_str(),
            seed,
            self.symmetric,
            self.converged
        );
        for (a, b) in &self.edges {
            let _ = writeln!(s, "{a} {b}");
        }
        s
    }

    pub fn parse_edge_list<R: BufRead>(reader: R, origin: &Path) -> Result<Self> {
        let mut vertex_count = None;
        let mut k = 0;
        let mut method = KnnMethod::Exact;
        let mut seed = None;
        let mut symmetric = false;
        let mut converged = true;
        let mut edges = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(origin, e))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                for token in comment.split_whitespace() {
                    let Some((key, value)) = token.split_once('=') else { continue };
                    let bad = || Error::format(origin, format!("line {}: bad header value {token:?}", lineno + 1));
                    match key {
                        "vertices" => vertex_count = Some(value.parse().map_err(|_| bad())?),
                        "k" => k = value.parse().map_err(|_| bad())?,
                        "method" => method = value.parse()?,
                        "seed" if value != "-" => seed = Some(value.parse().map_err(|_| bad())?),
                        "symmetric" => symmetric = value.parse().map_err(|_| bad())?,
                        "converged" => converged = value.parse().map_err(|_| bad())?,
                        _ => {}
                    }
                }
                continue;
            }
            let mut parts = line.split_whitespace().map(str::parse::<usize>);
            match (parts.next(), parts.next(), parts.next()) {
                (Some(Ok(a)), Some(Ok(b)), None) => edges.push((a, b)),
                _ => {
                    return Err(Error::format(origin, format!("line {}: expected \"u v\"", lineno + 1)))
                }
            }
        }
        let vertex_count = vertex_count
            .ok_or_else(|| Error::format(origin, "missing vertices= header"))?;
        let mut g = Self::from_edges(vertex_count, edges)?;
        g.k = k;
        g.method = method;
        g.seed = seed;
        g.symmetric = symmetric;
        g.converged = converged;
        Ok(g)
    }
}

/// Compressed adjacency lists.
#[derive(Clone, Debug)]
pub struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl Adjacency {
    fn new(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut offsets = vec![0usize; n + 1];
        for &(a, b) in edges {
            offsets[a + 1] += 1;
            offsets[b + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0usize; offsets[n]];
        for &(a, b) in edges {
            targets[fill[a]] = b;
            fill[a] += 1;
            targets[fill[b]] = a;
            fill[b] += 1;
        }
        Self { offsets, targets }
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }
}

/// Keeps edge `(u, v)` only if `v` is in `u`'s list and `u` is in `v`'s list.
pub fn symmetrize_mutual(knn: &KnnLists) -> NeighborhoodGraph {
    let sorted: Vec<Vec<usize>> = knn
        .lists
        .iter()
        .map(|l| {
            let mut l = l.clone();
            l.sort_unstable();
            l
        })
        .collect();
    let mut edges = Vec::new();
    for (u, list) in sorted.iter().enumerate() {
        for &v in list {
            if v > u && sorted[v].binary_search(&u).is_ok() {
                edges.push((u, v));
            }
        }
    }
    edges.sort_unstable();
    NeighborhoodGraph {
        vertex_count: knn.lists.len(),
        edges,
        k: knn.k,
        method: knn.method,
        symmetric: true,
        seed: knn.seed,
        converged: knn.converged,
    }
}

/// Component label per vertex, numbered by first appearance in vertex order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Components {
    pub labels: Vec<usize>,
    pub count: usize,
}

pub fn connected_components(graph: &NeighborhoodGraph) -> Components {
    let n = graph.vertex_count;
    let mut uf = UnionFind::new(n);
    for &(a, b) in &graph.edges {
        uf.union(a, b);
    }
    let mut label_of_root = vec![usize::MAX; n];
    let mut labels = vec![0; n];
    let mut count = 0;
    for v in 0..n {
        let root = uf.find(v);
        if label_of_root[root] == usize::MAX {
            label_of_root[root] = count;
            count += 1;
        }
        labels[v] = label_of_root[root];
    }
    Components { labels, count }
}
