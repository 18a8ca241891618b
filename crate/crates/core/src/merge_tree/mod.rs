//! Merge trees of sublevel-set filtrations.
//!
//! Vertices are swept in ascending `(value, index)` order while a union-find
//! tracks sublevel components. A vertex with no earlier neighbor starts a
//! component (a minimum); a vertex touching `m > 1` components is a saddle and
//! is split into `m - 1` degree-three saddle nodes at the same value. At each
//! merge the component whose minimum comes first in the sweep survives (the
//! elder rule) and the others die. Each component's tree ends in a root node
//! at its last swept vertex.

mod branches;
mod dump;
mod simplify;

use serde::{Deserialize, Serialize};

use crate::graph::NeighborhoodGraph;
use crate::union_find::UnionFind;
use crate::{Error, Result, ScalarField};

pub use branches::{branch_decomposition, persistence_pairs, Branch, BranchDecomposition, PersistenceDiagram};
pub use dump::{ArcRecord, BranchRecord, NodeRecord, TreeDump};
pub use simplify::simplify;

pub type NodeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Minimum,
    Saddle,
    Root,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TreeNode {
    pub id: NodeId,
    pub vertex: usize,
    pub value: f64,
    pub kind: NodeKind,
}

/// Merge tree (a forest when the graph is disconnected).
///
/// Node ids are assigned in creation order, so every node's id is larger
/// than the ids of its children.
#[derive(Clone, Debug, PartialEq)]
pub struct MergeTree {
    nodes: Vec<TreeNode>,
    parent: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
    /// Vertex → minimum node of the branch that owns it.
    segmentation: Vec<NodeId>,
    values: Vec<f64>,
}

/// Ascending sweep order of vertices: `(value, index)`.
pub fn sweep_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_unstable_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    order
}

#[derive(Clone, Copy)]
struct Component {
    eldest: usize,
    branch: NodeId,
    head: NodeId,
    last: usize,
}

pub fn compute_merge_tree(field: &ScalarField, graph: &NeighborhoodGraph) -> Result<MergeTree> {
    let n = field.len();
    if graph.vertex_count != n {
        return Err(Error::Dimension(format!(
            "graph has {} vertices, field has {n}",
            graph.vertex_count
        )));
    }
    let values = field.values();
    if let Some(row) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { row, value: values[row] });
    }

    let order = sweep_order(values);
    let mut rank = vec![0usize; n];
    for (r, &v) in order.iter().enumerate() {
        rank[v] = r;
    }
    let adj = graph.adjacency();
    let mut uf = UnionFind::new(n);
    let mut comps: Vec<Option<Component>> = vec![None; n];
    let mut builder = Builder::default();
    let mut segmentation = vec![0; n];
    let mut roots = Vec::new();

    for &v in &order {
        roots.clear();
        roots.extend(
            adj.neighbors(v)
                .iter()
                .filter(|&&u| rank[u] < rank[v])
                .map(|&u| uf.find(u)),
        );
        roots.sort_unstable();
        roots.dedup();

        let merged = match roots.len() {
            0 => {
                let id = builder.push(v, values[v], NodeKind::Minimum);
                Component { eldest: v, branch: id, head: id, last: v }
            }
            1 => {
                let mut c = comps[roots[0]].take().expect("component info for root");
                uf.union(roots[0], v);
                c.last = v;
                c
            }
            _ => {
                let mut cs: Vec<Component> = roots
                    .iter()
                    .map(|&r| comps[r].take().expect("component info for root"))
                    .collect();
                cs.sort_unstable_by_key(|c| rank[c.eldest]);
                let mut survivor = cs[0];
                for young in &cs[1..] {
                    let s = builder.push(v, values[v], NodeKind::Saddle);
                    builder.link(survivor.head, s);
                    builder.link(young.head, s);
                    survivor.head = s;
                }
                for &r in &roots {
                    uf.union(r, v);
                }
                survivor.last = v;
                survivor
            }
        };
        segmentation[v] = merged.branch;
        comps[uf.find(v)] = Some(merged);
    }

    let mut finished: Vec<Component> = comps.into_iter().flatten().collect();
    finished.sort_unstable_by_key(|c| rank[c.eldest]);
    for c in finished {
        let root = builder.push(c.last, values[c.last], NodeKind::Root);
        builder.link(c.head, root);
    }
    Ok(builder.finish(segmentation, values.to_vec()))
}

#[derive(Default)]
pub(crate) struct Builder {
    nodes: Vec<TreeNode>,
    parent: Vec<Option<NodeId>>,
}

impl Builder {
    pub(crate) fn push(&mut self, vertex: usize, value: f64, kind: NodeKind) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(TreeNode { id, vertex, value, kind });
        self.parent.push(None);
        id
    }

    pub(crate) fn link(&mut self, child: NodeId, parent: NodeId) {
        debug_assert!(self.parent[child].is_none());
        self.parent[child] = Some(parent);
    }

    pub(crate) fn finish(self, segmentation: Vec<NodeId>, values: Vec<f64>) -> MergeTree {
        let mut children = vec![Vec::new(); self.nodes.len()];
        for (c, p) in self.parent.iter().enumerate() {
            if let Some(p) = p {
                children[*p].push(c);
            }
        }
        MergeTree {
            nodes: self.nodes,
            parent: self.parent,
            children,
            segmentation,
            values,
        }
    }
}

impl MergeTree {
    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.parent[id]
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.children[id]
    }

    /// `(child, parent)` pairs.
    pub fn arcs(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.parent
            .iter()
            .enumerate()
            .filter_map(|(c, p)| p.map(|p| (c, p)))
    }

    pub fn degree(&self, id: NodeId) -> usize {
        self.children[id].len() + usize::from(self.parent[id].is_some())
    }

    /// Vertex → minimum node of its branch.
    pub fn segmentation(&self) -> &[NodeId] {
        &self.segmentation
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vertex_count(&self) -> usize {
        self.values.len()
    }

    pub fn roots(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes_of(NodeKind::Root)
    }

    pub fn minima(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes_of(NodeKind::Minimum)
    }

    pub fn saddles(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes_of(NodeKind::Saddle)
    }

    fn nodes_of(&self, kind: NodeKind) -> impl Iterator<Item = &TreeNode> {
        self.nodes.iter().filter(move |n| n.kind == kind)
    }

    pub fn component_count(&self) -> usize {
        self.roots().count()
    }

    /// Root node reached from `id`.
    pub fn root_of(&self, mut id: NodeId) -> NodeId {
        while let Some(p) = self.parent[id] {
            id = p;
        }
        id
    }

    /// Same structure with every value mapped through `f`. `f` must be strictly
    /// increasing for the result to be a valid merge tree of the mapped field.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> MergeTree {
        let mut out = self.clone();
        for node in &mut out.nodes {
            node.value = f(node.value);
        }
        for v in &mut out.values {
            *v = f(*v);
        }
        out
    }

    pub(crate) fn from_parts(
        nodes: Vec<TreeNode>,
        parent: Vec<Option<NodeId>>,
        segmentation: Vec<NodeId>,
        values: Vec<f64>,
    ) -> MergeTree {
        Builder { nodes, parent }.finish(segmentation, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn path_tree(values: &[f64]) -> MergeTree {
        let field = ScalarField::from_values(values.to_vec()).unwrap();
        let graph =
            NeighborhoodGraph::from_edges(values.len(), (1..values.len()).map(|i| (i - 1, i))).unwrap();
        compute_merge_tree(&field, &graph).unwrap()
    }

    #[test]
    fn path_example() {
        let t = path_tree(&[3.0, 1.0, 2.0, 0.0, 4.0]);
        let minima: Vec<(usize, f64)> = t.minima().map(|n| (n.vertex, n.value)).collect();
        assert_eq!(minima, vec![(3, 0.0), (1, 1.0)]);
        let saddles: Vec<usize> = t.saddles().map(|n| n.vertex).collect();
        assert_eq!(saddles, vec![2]);
        let roots: Vec<usize> = t.roots().map(|n| n.vertex).collect();
        assert_eq!(roots, vec![4]);

        let min3 = t.minima().find(|n| n.vertex == 3).unwrap().id;
        let min1 = t.minima().find(|n| n.vertex == 1).unwrap().id;
        assert_eq!(t.segmentation(), &[min3, min1, min3, min3, min3]);
        for m in t.minima() {
            assert_eq!(t.degree(m.id), 1);
        }
        for s in t.saddles() {
            assert_eq!(t.degree(s.id), 3);
        }
    }

    #[test]
    fn constant_field_single_minimum_at_vertex_zero() {
        let t = path_tree(&[2.0; 6]);
        let minima: Vec<usize> = t.minima().map(|n| n.vertex).collect();
        assert_eq!(minima, vec![0]);
        assert_eq!(t.saddles().count(), 0);
        assert_eq!(t.roots().next().unwrap().vertex, 5);
    }

    #[test]
    fn multiway_merge_is_binarized() {
        // Star: center 0 touches three earlier leaves.
        let field = ScalarField::from_values(vec![5.0, 1.0, 0.0, 2.0]).unwrap();
        let graph = NeighborhoodGraph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let t = compute_merge_tree(&field, &graph).unwrap();
        assert_eq!(t.minima().count(), 3);
        let saddles: Vec<&TreeNode> = t.saddles().collect();
        assert_eq!(saddles.len(), 2);
        assert!(saddles.iter().all(|s| s.vertex == 0 && s.value == 5.0));
        for s in &saddles {
            assert_eq!(t.degree(s.id), 3);
        }
        // Younger components merge in ascending order of their minima.
        let first_young = t.children(saddles[0].id).iter().map(|&c| t.node(c).vertex).collect::<Vec<_>>();
        assert!(first_young.contains(&1));
    }

    #[test]
    fn disconnected_graph_gives_forest() {
        let field = ScalarField::from_values(vec![1.0, 0.0, 3.0, 2.0]).unwrap();
        let graph = NeighborhoodGraph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let t = compute_merge_tree(&field, &graph).unwrap();
        assert_eq!(t.component_count(), 2);
        assert_eq!(t.saddles().count(), 0);
        let roots: Vec<usize> = t.roots().map(|n| n.vertex).collect();
        assert_eq!(roots, vec![0, 2]);
    }

    #[test]
    fn mismatched_graph_is_rejected() {
        let field = ScalarField::from_values(vec![1.0, 0.0]).unwrap();
        let graph = NeighborhoodGraph::from_edges(3, [(0, 1)]).unwrap();
        assert!(matches!(compute_merge_tree(&field, &graph), Err(Error::Dimension(_))));
    }
}
