use super::{BranchDecomposition, MergeTree, NodeId, NodeKind};
use crate::{Error, Result};

/// Removes every branch with persistence `<= epsilon`, handing its vertices to
/// the nearest surviving ancestor branch.
///
/// Parents always outlive their children (a parent's persistence is at least
/// its child's), so the surviving branches form a subtree and the result is the
/// merge tree of the coarsened field. Node ids keep their relative order.
pub fn simplify(tree: &MergeTree, decomp: &BranchDecomposition, epsilon: f64) -> Result<MergeTree> {
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::param(format!("epsilon must be non-negative, got {epsilon}")));
    }
    let branches = &decomp.branches;
    let keep: Vec<bool> = branches
        .iter()
        .map(|b| b.is_master() || b.persistence > epsilon)
        .collect();

    let mut target: Vec<usize> = (0..branches.len()).collect();
    for b in 0..branches.len() {
        let mut cur = b;
        while !keep[cur] {
            cur = branches[cur].parent.expect("pruned branch has a parent");
        }
        target[b] = cur;
    }

    let mut dies_at = vec![None; tree.nodes().len()];
    let mut branch_of_min = vec![None; tree.nodes().len()];
    for b in branches {
        branch_of_min[b.minimum] = Some(b.id);
        if !b.is_master() {
            dies_at[b.terminal] = Some(b.id);
        }
    }

    let mut new_id: Vec<Option<NodeId>> = vec![None; tree.nodes().len()];
    let mut nodes = Vec::new();
    for node in tree.nodes() {
        let retained = match node.kind {
            NodeKind::Minimum => branch_of_min[node.id].is_some_and(|b| keep[b]),
            NodeKind::Saddle => dies_at[node.id].is_some_and(|b| keep[b]),
            NodeKind::Root => true,
        };
        if retained {
            new_id[node.id] = Some(nodes.len());
            let mut n = node.clone();
            n.id = nodes.len();
            nodes.push(n);
        }
    }

    // Chain each surviving branch: minimum, saddles of surviving children in
    // node order, then its own terminal.
    let mut chain_saddles: Vec<Vec<NodeId>> = vec![Vec::new(); branches.len()];
    for b in branches {
        if let (true, Some(p)) = (keep[b.id], b.parent) {
            chain_saddles[p].push(b.terminal);
        }
    }
    let mut parent = vec![None; nodes.len()];
    for b in branches.iter().filter(|b| keep[b.id]) {
        let saddles = &mut chain_saddles[b.id];
        saddles.sort_unstable();
        let mut prev = new_id[b.minimum].expect("kept minimum");
        for &s in saddles.iter() {
            let s = new_id[s].expect("kept saddle");
            parent[prev] = Some(s);
            prev = s;
        }
        parent[prev] = Some(new_id[b.terminal].expect("kept terminal"));
    }

    let segmentation = tree
        .segmentation()
        .iter()
        .map(|&min| {
            let b = branch_of_min[min].expect("segmentation points at a minimum");
            new_id[branches[target[b]].minimum].expect("kept minimum")
        })
        .collect();

    Ok(MergeTree::from_parts(nodes, parent, segmentation, tree.values().to_vec()))
}
