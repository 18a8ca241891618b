//! Basin-style landscape profiles.
//!
//! Every branch of the merge tree becomes a basin. A basin is a stack of
//! rectangles, one per vertex the branch owns, taken in sweep order: the
//! rectangle for the i-th owned vertex starts at that vertex's value, ends at
//! the next owned vertex's value (or the basin top), and is as wide as the
//! number of vertices swept so far in the branch and in every child basin
//! that has already merged into it. A child basin hangs below the slab that
//! starts at its merge saddle, directly beside the slab before it, so child
//! intervals are disjoint and nested inside the parent's top interval.
//!
//! Widths are counted in vertices; all x coordinates are multiples of 0.5.

pub(crate) mod color;

use serde::{Deserialize, Serialize};

use crate::merge_tree::{BranchDecomposition, MergeTree, NodeKind};
use crate::{Error, Result, ScalarField};

pub use color::{color_basins, color_basins_with, ColorRamp};

pub const PROFILE_FORMAT: &str = "losstopo-profile";
pub const PROFILE_VERSION: u32 = 1;

/// Horizontal gap between the profiles of separate components.
pub const COMPONENT_GAP: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
    /// Outermost basin of a component.
    Root,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarkerKind {
    Minimum,
    Saddle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Marker {
    pub x: f64,
    pub y: f64,
    pub kind: MarkerKind,
    pub node: usize,
    pub vertex: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Basin {
    /// Same as the branch id in the decomposition it was built from.
    pub id: usize,
    pub parent: Option<usize>,
    /// Descending persistence, ties by lower minimum vertex.
    pub children: Vec<usize>,
    pub side: Side,
    pub component: usize,
    pub min_vertex: usize,
    /// Minimum node in the tree the profile was built from.
    pub min_node: usize,
    /// Saddle node where this basin merges into its parent.
    pub saddle_node: Option<usize>,
    pub bottom: f64,
    pub top: f64,
    pub persistence: f64,
    /// Vertices owned by this branch alone.
    pub own_count: usize,
    /// Vertices in this basin and all nested basins.
    pub size: usize,
    pub x0: f64,
    pub x1: f64,
    /// x of the minimum marker.
    pub center_x: f64,
    /// x of the merge saddle on the parent's rim.
    pub attach_x: Option<f64>,
    pub rects: Vec<Rect>,
    pub avg_loss: Option<f64>,
    /// Position on the color ramp, 0 = darkest.
    pub shade: Option<f64>,
    pub color: Option<String>,
    #[serde(skip)]
    pub members: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandscapeProfile {
    pub format: String,
    pub version: u32,
    pub vertex_count: usize,
    /// `(min, max)` over all vertex values.
    pub value_range: (f64, f64),
    /// Outermost basin per component, left to right.
    pub roots: Vec<usize>,
    pub basins: Vec<Basin>,
    pub markers: Vec<Marker>,
}

pub fn build_profile(tree: &MergeTree, decomp: &BranchDecomposition) -> LandscapeProfile {
    let values = tree.values();
    let branches = &decomp.branches;
    let nb = branches.len();
    let children = decomp.children();

    let mut ordered_children = children.clone();
    let mut side = vec![Side::Root; nb];
    for kids in &mut ordered_children {
        kids.sort_by(|&a, &b| {
            branches[b]
                .persistence
                .total_cmp(&branches[a].persistence)
                .then(branches[a].min_vertex.cmp(&branches[b].min_vertex))
        });
        for (i, &c) in kids.iter().enumerate() {
            side[c] = if i % 2 == 0 { Side::Left } else { Side::Right };
        }
    }

    // Children before parents: a child's terminal saddle precedes its parent's terminal.
    let mut bottom_up: Vec<usize> = (0..nb).collect();
    bottom_up.sort_by_key(|&b| branches[b].terminal);

    let mut size = vec![0usize; nb];
    let mut local_rects: Vec<Vec<Rect>> = vec![Vec::new(); nb];
    let mut local_top = vec![(0.0f64, 0.0f64); nb];
    // Child's top-left corner and saddle x in its parent's local frame.
    let mut slot = vec![(0.0f64, 0.0f64); nb];

    for &b in &bottom_up {
        let branch = &branches[b];
        // Children attaching at each owned vertex, in node (merge) order.
        let mut attaching: Vec<usize> = children[b].clone();
        attaching.sort_by_key(|&c| branches[c].terminal);
        let mut next_child = attaching.iter().peekable();

        let (mut l, mut r) = (0.0f64, 0.0f64);
        let members = &branch.members;
        let mut rects = Vec::with_capacity(members.len());
        for (i, &u) in members.iter().enumerate() {
            while let Some(&&c) = next_child.peek() {
                if tree.node(branches[c].terminal).vertex != u {
                    break;
                }
                next_child.next();
                let w = size[c] as f64;
                match side[c] {
                    Side::Left => {
                        slot[c] = (l - w, l);
                        l -= w;
                    }
                    _ => {
                        slot[c] = (r, r);
                        r += w;
                    }
                }
            }
            l -= 0.5;
            r += 0.5;
            let y1 = members.get(i + 1).map_or(branch.death, |&next| values[next]);
            rects.push(Rect { x0: l, x1: r, y0: values[u], y1 });
        }
        debug_assert!(next_child.next().is_none(), "child saddle not owned by parent");
        size[b] = (r - l) as usize;
        local_top[b] = (l, r);
        local_rects[b] = rects;
    }

    // Absolute offsets, parents first.
    let mut offset = vec![0.0f64; nb];
    let mut masters = decomp.masters.clone();
    masters.sort_by(|&a, &b| {
        branches[a]
            .birth
            .total_cmp(&branches[b].birth)
            .then(branches[a].min_vertex.cmp(&branches[b].min_vertex))
    });
    let mut cursor = 0.0;
    for &m in &masters {
        offset[m] = cursor - local_top[m].0;
        cursor += size[m] as f64 + COMPONENT_GAP;
    }
    for &b in bottom_up.iter().rev() {
        if let Some(p) = branches[b].parent {
            offset[b] = offset[p] + slot[b].0 - local_top[b].0;
        }
    }

    let basins = (0..nb)
        .map(|b| {
            let branch = &branches[b];
            let dx = offset[b];
            Basin {
                id: b,
                parent: branch.parent,
                children: ordered_children[b].clone(),
                side: side[b],
                component: branch.component,
                min_vertex: branch.min_vertex,
                min_node: branch.minimum,
                saddle_node: branch.parent.map(|_| branch.terminal),
                bottom: branch.birth,
                top: branch.death,
                persistence: branch.persistence,
                own_count: branch.members.len(),
                size: size[b],
                x0: local_top[b].0 + dx,
                x1: local_top[b].1 + dx,
                center_x: dx,
                attach_x: branch.parent.map(|p| slot[b].1 + offset[p]),
                rects: local_rects[b]
                    .iter()
                    .map(|r| Rect { x0: r.x0 + dx, x1: r.x1 + dx, ..*r })
                    .collect(),
                avg_loss: None,
                shade: None,
                color: None,
                members: branch.members.clone(),
            }
        })
        .collect();

    let value_range = values
        .iter()
        .fold(None, |acc: Option<(f64, f64)>, &v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
        .unwrap_or((0.0, 0.0));

    LandscapeProfile {
        format: PROFILE_FORMAT.into(),
        version: PROFILE_VERSION,
        vertex_count: tree.vertex_count(),
        value_range,
        roots: masters,
        basins,
        markers: Vec::new(),
    }
}

/// One red marker per minimum at the basin center, one orange marker per
/// saddle where the dying basin meets its parent's rim.
pub fn annotate_critical_points(mut profile: LandscapeProfile, tree: &MergeTree) -> Result<LandscapeProfile> {
    let mut basin_of_node = vec![None; tree.nodes().len()];
    for basin in &profile.basins {
        for id in std::iter::once(basin.min_node).chain(basin.saddle_node) {
            let slot = basin_of_node
                .get_mut(id)
                .ok_or_else(|| Error::param("profile refers to a node outside the tree"))?;
            *slot = Some(basin.id);
        }
    }
    let mut markers = Vec::new();
    for node in tree.nodes() {
        let kind = match node.kind {
            NodeKind::Minimum => MarkerKind::Minimum,
            NodeKind::Saddle => MarkerKind::Saddle,
            NodeKind::Root => continue,
        };
        let basin = &profile.basins[basin_of_node[node.id]
            .ok_or_else(|| Error::param(format!("tree node {} has no basin", node.id)))?];
        let x = match kind {
            MarkerKind::Minimum => basin.center_x,
            MarkerKind::Saddle => basin.attach_x.unwrap_or(basin.center_x),
        };
        markers.push(Marker { x, y: node.value, kind, node: node.id, vertex: node.vertex });
    }
    profile.markers = markers;
    Ok(profile)
}

impl LandscapeProfile {
    /// Geometry, colors, and markers in one step.
    pub fn from_tree(tree: &MergeTree, decomp: &BranchDecomposition, field: &ScalarField) -> Result<Self> {
        let profile = color_basins(build_profile(tree, decomp), field)?;
        annotate_critical_points(profile, tree)
    }

    /// Total drawn width at height `y`: for every basin present at `y`, the
    /// width of its highest rectangle starting at or below `y`. Nested basins
    /// are present from their bottom up to (not including) their merge value.
    pub fn width_at(&self, y: f64) -> f64 {
        self.basins
            .iter()
            .filter(|b| b.bottom <= y && (b.parent.is_none() || y < b.top))
            .map(|b| {
                b.rects
                    .iter()
                    .rev()
                    .find(|r| r.y0 <= y)
                    .map_or(0.0, Rect::width)
            })
            .sum()
    }

    pub fn minimum_markers(&self) -> usize {
        self.markers.iter().filter(|m| m.kind == MarkerKind::Minimum).count()
    }

    pub fn saddle_markers(&self) -> usize {
        self.markers.iter().filter(|m| m.kind == MarkerKind::Saddle).count()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let profile: Self = serde_json::from_str(text)?;
        if profile.format != PROFILE_FORMAT || profile.version != PROFILE_VERSION {
            return Err(Error::param(format!(
                "unsupported profile document {} v{}",
                profile.format, profile.version
            )));
        }
        Ok(profile)
    }
}
