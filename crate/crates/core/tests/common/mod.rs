//! Shared generators and the brute-force merge-tree oracle.
//!
//! The oracle never uses union-find or incremental state: before inserting
//! each vertex it relabels the whole sublevel set by breadth-first search and
//! reads minima, merges and segmentation off those labels.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use losstopo::merge_tree::{branch_decomposition, compute_merge_tree, MergeTree, NodeKind};
use losstopo::{NeighborhoodGraph, ScalarField};
use rand::seq::SliceRandom;
use rand::Rng;

/// Random connected graph: a random spanning tree plus `extra` random edges.
pub fn connected_graph(rng: &mut impl Rng, n: usize, extra: usize) -> Vec<(usize, usize)> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut edges = Vec::with_capacity(n + extra);
    for i in 1..n {
        let j = rng.gen_range(0..i);
        edges.push((perm[i], perm[j]));
    }
    if n > 1 {
        for _ in 0..extra {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            if a != b {
                edges.push((a, b));
            }
        }
    }
    edges
}

/// Values drawn from a small alphabet so ties are common, or from a fine
/// dyadic grid (practically tie-free, and exact under integer shifts and
/// moderate scalings) when `levels` is zero.
pub fn values(rng: &mut impl Rng, n: usize, levels: u32) -> Vec<f64> {
    (0..n)
        .map(|_| {
            if levels == 0 {
                rng.gen_range(-(1i64 << 20)..(1i64 << 20)) as f64 / (1u64 << 20) as f64
            } else {
                rng.gen_range(0..levels) as f64 * 0.5 - 1.0
            }
        })
        .collect()
}

pub fn random_field(rng: &mut impl Rng, max_n: usize, levels: u32) -> (ScalarField, NeighborhoodGraph) {
    let n = rng.gen_range(1..=max_n);
    let extra = rng.gen_range(0..=n);
    let edges = connected_graph(rng, n, extra);
    let field = ScalarField::from_values(values(rng, n, levels)).unwrap();
    let graph = NeighborhoodGraph::from_edges(n, edges).unwrap();
    (field, graph)
}

/// Node identity that does not depend on id assignment: kind, vertex, and
/// position among the saddles created at that vertex.
pub type Key = (u8, usize, usize);

fn kind_tag(kind: NodeKind) -> u8 {
    match kind {
        NodeKind::Minimum => 0,
        NodeKind::Saddle => 1,
        NodeKind::Root => 2,
    }
}

#[derive(Debug, PartialEq, Eq)]
pub struct Shape {
    pub nodes: BTreeSet<Key>,
    pub arcs: BTreeSet<(Key, Key)>,
    /// `(birth vertex, death vertex)` of every finite pair.
    pub pairs: BTreeSet<(usize, usize)>,
    /// Vertex → minimum vertex of its branch.
    pub segmentation: Vec<usize>,
}

fn prefix_labels(adj: &[Vec<usize>], inside: &[bool], rank: &[usize]) -> Vec<Option<usize>> {
    let n = adj.len();
    let mut label = vec![None; n];
    for s in 0..n {
        if !inside[s] || label[s].is_some() {
            continue;
        }
        let mut comp = vec![s];
        let mut queue = VecDeque::from([s]);
        label[s] = Some(usize::MAX);
        while let Some(v) = queue.pop_front() {
            for &u in &adj[v] {
                if inside[u] && label[u].is_none() {
                    label[u] = Some(usize::MAX);
                    comp.push(u);
                    queue.push_back(u);
                }
            }
        }
        let eldest = *comp.iter().min_by_key(|&&v| rank[v]).unwrap();
        for v in comp {
            label[v] = Some(eldest);
        }
    }
    label
}

pub fn oracle(values: &[f64], edges: &[(usize, usize)]) -> Shape {
    let n = values.len();
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        if a != b {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap().then(a.cmp(&b)));
    let mut rank = vec![0; n];
    for (r, &v) in order.iter().enumerate() {
        rank[v] = r;
    }

    let mut shape = Shape {
        nodes: BTreeSet::new(),
        arcs: BTreeSet::new(),
        pairs: BTreeSet::new(),
        segmentation: vec![usize::MAX; n],
    };
    // Highest node so far of each component, keyed by its eldest vertex.
    let mut head: BTreeMap<usize, Key> = BTreeMap::new();
    let mut inside = vec![false; n];
    for &v in &order {
        let labels = prefix_labels(&adj, &inside, &rank);
        let mut comps: Vec<usize> = adj[v].iter().filter_map(|&u| labels[u]).collect();
        comps.sort_by_key(|&c| rank[c]);
        comps.dedup();
        if comps.is_empty() {
            let key = (0, v, 0);
            shape.nodes.insert(key);
            head.insert(v, key);
            shape.segmentation[v] = v;
        } else {
            let elder = comps[0];
            for (j, &young) in comps[1..].iter().enumerate() {
                let s = (1, v, j);
                shape.nodes.insert(s);
                shape.arcs.insert((head[&elder], s));
                shape.arcs.insert((head.remove(&young).unwrap(), s));
                head.insert(elder, s);
                shape.pairs.insert((young, v));
            }
            shape.segmentation[v] = elder;
        }
        inside[v] = true;
    }

    let labels = prefix_labels(&adj, &inside, &rank);
    let mut last: BTreeMap<usize, usize> = BTreeMap::new();
    for &v in &order {
        last.insert(labels[v].unwrap(), v);
    }
    for (eldest, top) in last {
        let root = (2, top, 0);
        shape.nodes.insert(root);
        shape.arcs.insert((head[&eldest], root));
    }
    shape
}

pub fn shape_of(tree: &MergeTree) -> Shape {
    let mut seen: BTreeMap<(u8, usize), usize> = BTreeMap::new();
    let keys: Vec<Key> = tree
        .nodes()
        .iter()
        .map(|node| {
            let tag = kind_tag(node.kind);
            let slot = seen.entry((tag, node.vertex)).or_insert(0);
            let key = (tag, node.vertex, *slot);
            *slot += 1;
            key
        })
        .collect();
    let decomp = branch_decomposition(tree);
    Shape {
        nodes: keys.iter().copied().collect(),
        arcs: tree.arcs().map(|(c, p)| (keys[c], keys[p])).collect(),
        pairs: decomp
            .branches
            .iter()
            .filter(|b| !b.is_master())
            .map(|b| (b.min_vertex, tree.node(b.terminal).vertex))
            .collect(),
        segmentation: tree.segmentation().iter().map(|&m| tree.node(m).vertex).collect(),
    }
}

pub fn tree_of(field: &ScalarField, graph: &NeighborhoodGraph) -> MergeTree {
    compute_merge_tree(field, graph).unwrap()
}

/// Direct count of vertices at or below `y`.
pub fn count_below(values: &[f64], y: f64) -> usize {
    values.iter().filter(|&&v| v <= y).count()
}

/// Fraction of `reference` edges also present in `graph`.
pub fn edge_recall(graph: &NeighborhoodGraph, reference: &NeighborhoodGraph) -> f64 {
    if reference.edges.is_empty() {
        return 1.0;
    }
    let mine: BTreeSet<_> = graph.edges.iter().collect();
    let hit = reference.edges.iter().filter(|e| mine.contains(e)).count();
    hit as f64 / reference.edges.len() as f64
}

pub fn uniform_points(rng: &mut impl Rng, count: usize, dims: usize, extent: f64) -> ScalarField {
    let coords = (0..count * dims).map(|_| rng.gen_range(0.0..extent)).collect();
    let values = (0..count).map(|_| rng.gen::<f64>()).collect();
    ScalarField::new(dims, coords, values, None, Default::default()).unwrap()
}
