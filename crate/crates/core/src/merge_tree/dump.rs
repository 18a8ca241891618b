//! Versioned JSON dump of a merge tree and its branch table.

use serde::{Deserialize, Serialize};

use super::{BranchDecomposition, MergeTree, NodeKind};

pub const TREE_FORMAT: &str = "losstopo-merge-tree";
pub const TREE_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct TreeDump {
    pub format: String,
    pub version: u32,
    pub vertex_count: usize,
    pub nodes: Vec<NodeRecord>,
    pub arcs: Vec<ArcRecord>,
    pub branches: Vec<BranchRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct NodeRecord {
    pub id: usize,
    pub vertex_id: usize,
    pub value: f64,
    pub kind: NodeKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ArcRecord {
    pub child: usize,
    pub parent: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct BranchRecord {
    pub id: usize,
    pub minimum_node: usize,
    pub terminal_node: usize,
    pub birth: f64,
    pub death: f64,
    pub persistence: f64,
    pub parent_branch: Option<usize>,
    pub component: usize,
    pub member_count: usize,
}

impl TreeDump {
    pub fn new(tree: &MergeTree, decomp: &BranchDecomposition) -> Self {
        Self {
            format: TREE_FORMAT.into(),
            version: TREE_VERSION,
            vertex_count: tree.vertex_count(),
            nodes: tree
                .nodes()
                .iter()
                .map(|n| NodeRecord { id: n.id, vertex_id: n.vertex, value: n.value, kind: n.kind })
                .collect(),
            arcs: tree.arcs().map(|(child, parent)| ArcRecord { child, parent }).collect(),
            branches: decomp
                .branches
                .iter()
                .map(|b| BranchRecord {
                    id: b.id,
                    minimum_node: b.minimum,
                    terminal_node: b.terminal,
                    birth: b.birth,
                    death: b.death,
                    persistence: b.persistence,
                    parent_branch: b.parent,
                    component: b.component,
                    member_count: b.members.len(),
                })
                .collect(),
        }
    }
}
