use serde::{Deserialize, Serialize};

use super::{MergeTree, NodeId, NodeKind};

/// One minimum-to-saddle (or minimum-to-root) path of the merge tree.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub id: usize,
    pub minimum: NodeId,
    pub min_vertex: usize,
    pub birth: f64,
    /// Saddle where the branch dies, or the root for a master branch.
    pub terminal: NodeId,
    pub death: f64,
    pub persistence: f64,
    /// Branch that survives at `terminal`; `None` for master branches.
    pub parent: Option<usize>,
    /// Vertices owned by this branch, in sweep order.
    pub members: Vec<usize>,
    pub component: usize,
}

impl Branch {
    pub fn is_master(&self) -> bool {
        self.parent.is_none()
    }
}

/// Elder-rule branch decomposition. Branch ids follow minimum node order.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchDecomposition {
    pub branches: Vec<Branch>,
    /// Master branch of each component, in root order.
    pub masters: Vec<usize>,
}

impl BranchDecomposition {
    /// Branch id owning each vertex.
    pub fn branch_of_vertex(&self, vertex_count: usize) -> Vec<usize> {
        let mut out = vec![usize::MAX; vertex_count];
        for b in &self.branches {
            for &v in &b.members {
                out[v] = b.id;
            }
        }
        out
    }

    /// Direct children of each branch.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.branches.len()];
        for b in &self.branches {
            if let Some(p) = b.parent {
                out[p].push(b.id);
            }
        }
        out
    }

    pub fn max_persistence(&self) -> Option<f64> {
        self.branches
            .iter()
            .filter(|b| !b.is_master())
            .map(|b| b.persistence)
            .reduce(f64::max)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PersistenceDiagram {
    /// `(birth, death)` for every non-master branch.
    pub pairs: Vec<(f64, f64)>,
    /// Birth of each component's unpaired global minimum.
    pub essential: Vec<f64>,
}

fn elder(tree: &MergeTree, a: NodeId, b: NodeId) -> bool {
    let (na, nb) = (tree.node(a), tree.node(b));
    na.value
        .total_cmp(&nb.value)
        .then(na.vertex.cmp(&nb.vertex))
        .is_lt()
}

pub fn branch_decomposition(tree: &MergeTree) -> BranchDecomposition {
    let nodes = tree.nodes();
    let mut branch_of_min = vec![usize::MAX; nodes.len()];
    let mut branches = Vec::new();
    for node in nodes.iter().filter(|n| n.kind == NodeKind::Minimum) {
        branch_of_min[node.id] = branches.len();
        branches.push(Branch {
            id: branches.len(),
            minimum: node.id,
            min_vertex: node.vertex,
            birth: node.value,
            terminal: node.id,
            death: node.value,
            persistence: 0.0,
            parent: None,
            members: Vec::new(),
            component: 0,
        });
    }

    // Eldest minimum below each node; ids are topologically ordered.
    let mut eldest = vec![usize::MAX; nodes.len()];
    let mut root_index = 0;
    for node in nodes {
        match node.kind {
            NodeKind::Minimum => eldest[node.id] = node.id,
            NodeKind::Saddle | NodeKind::Root => {
                let kids = tree.children(node.id);
                let mut best = eldest[kids[0]];
                for &c in &kids[1..] {
                    if elder(tree, eldest[c], best) {
                        best = eldest[c];
                    }
                }
                eldest[node.id] = best;
                let survivor = branch_of_min[best];
                for &c in kids {
                    let m = eldest[c];
                    if m == best {
                        continue;
                    }
                    let b = &mut branches[branch_of_min[m]];
                    b.terminal = node.id;
                    b.death = node.value;
                    b.parent = Some(survivor);
                }
                if node.kind == NodeKind::Root {
                    let b = &mut branches[survivor];
                    b.terminal = node.id;
                    b.death = node.value;
                    b.component = root_index;
                    root_index += 1;
                }
            }
        }
    }

    let mut masters = Vec::new();
    for id in 0..branches.len() {
        if branches[id].parent.is_none() {
            masters.push(id);
        }
    }
    masters.sort_by_key(|&b| branches[b].component);
    // Children die before their parents in node order, so resolve components top-down.
    let mut component = vec![usize::MAX; branches.len()];
    for id in 0..branches.len() {
        let mut cur = id;
        while let Some(p) = branches[cur].parent {
            if component[cur] != usize::MAX {
                break;
            }
            cur = p;
        }
        let c = if component[cur] != usize::MAX { component[cur] } else { branches[cur].component };
        let mut walk = id;
        while component[walk] == usize::MAX {
            component[walk] = c;
            match branches[walk].parent {
                Some(p) => walk = p,
                None => break,
            }
        }
    }
    for b in &mut branches {
        b.component = component[b.id];
        b.persistence = b.death - b.birth;
    }

    let values = tree.values();
    for (v, &min) in tree.segmentation().iter().enumerate() {
        branches[branch_of_min[min]].members.push(v);
    }
    for b in &mut branches {
        b.members
            .sort_unstable_by(|&x, &y| values[x].total_cmp(&values[y]).then(x.cmp(&y)));
    }

    BranchDecomposition { branches, masters }
}

pub fn persistence_pairs(decomp: &BranchDecomposition) -> PersistenceDiagram {
    let mut diagram = PersistenceDiagram::default();
    for b in &decomp.branches {
        if b.is_master() {
            diagram.essential.push(b.birth);
        } else {
            diagram.pairs.push((b.birth, b.death));
        }
    }
    diagram
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::merge_tree::tests::path_tree;

    #[test]
    fn path_example_pairs() {
        let t = path_tree(&[3.0, 1.0, 2.0, 0.0, 4.0]);
        let d = branch_decomposition(&t);
        assert_eq!(d.branches.len(), 2);
        let master = &d.branches[d.masters[0]];
        assert_eq!(master.birth, 0.0);
        assert_eq!(master.members, vec![3, 2, 0, 4]);
        assert_eq!(master.persistence, 4.0);
        let young = d.branches.iter().find(|b| !b.is_master()).unwrap();
        assert_eq!((young.birth, young.death, young.persistence), (1.0, 2.0, 1.0));
        assert_eq!(young.members, vec![1]);
        assert_eq!(young.parent, Some(master.id));

        let diagram = persistence_pairs(&d);
        assert_eq!(diagram.pairs, vec![(1.0, 2.0)]);
        assert_eq!(diagram.essential, vec![0.0]);
    }

    #[test]
    fn single_minimum_has_only_master() {
        let t = path_tree(&[0.0, 1.0, 2.0, 3.0]);
        let d = branch_decomposition(&t);
        assert_eq!(d.branches.len(), 1);
        assert!(persistence_pairs(&d).pairs.is_empty());
        assert_eq!(d.max_persistence(), None);
    }

    #[test]
    fn constant_field_has_empty_diagram() {
        let d = branch_decomposition(&path_tree(&[1.5; 7]));
        let diagram = persistence_pairs(&d);
        assert!(diagram.pairs.is_empty());
        assert_eq!(diagram.essential, vec![1.5]);
    }

    #[test]
    fn equal_depth_wells_break_ties_by_index() {
        let t = path_tree(&[1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
        let d = branch_decomposition(&t);
        assert_eq!(d.branches.len(), 3);
        assert_eq!(d.branches[d.masters[0]].min_vertex, 1);
        let mut young: Vec<(usize, usize)> = d
            .branches
            .iter()
            .filter(|b| !b.is_master())
            .map(|b| (b.min_vertex, t.node(b.terminal).vertex))
            .collect();
        young.sort_unstable();
        assert_eq!(young, vec![(3, 2), (5, 4)]);
    }

    #[test]
    fn nested_components_propagate() {
        // Forest: two components, the second with a pair.
        let field = crate::ScalarField::from_values(vec![0.0, 5.0, 1.0, 3.0, 2.0, 9.0]).unwrap();
        let graph =
            crate::NeighborhoodGraph::from_edges(6, [(0, 1), (2, 3), (3, 4), (4, 5)]).unwrap();
        let t = crate::merge_tree::compute_merge_tree(&field, &graph).unwrap();
        let d = branch_decomposition(&t);
        assert_eq!(d.masters.len(), 2);
        let comps: Vec<usize> = d.branches.iter().map(|b| b.component).collect();
        let by_min: Vec<(usize, usize)> = d.branches.iter().map(|b| (b.min_vertex, b.component)).collect();
        assert_eq!(comps.iter().filter(|&&c| c == 1).count(), 2);
        assert!(by_min.contains(&(0, 0)));
    }
}
