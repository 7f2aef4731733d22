//! Overlapped stencils: k-nearest-neighbor sets, retention balls and the
//! node ownership map.

use super::kdtree::KdTree;
use super::nodes::NodeSet;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Stencil {
    pub center: usize,
    /// Global indices sorted by distance from the center; `neighbors[0] == center`.
    pub neighbors: Vec<usize>,
    pub distances: Vec<f64>,
    /// Distance to the farthest neighbor.
    pub width: f64,
    pub retention_radius: f64,
    /// Local positions (into `neighbors`) of nodes within the retention radius.
    pub retained: Vec<usize>,
    /// Local positions of the nodes this stencil owns; a subset of `retained`.
    pub claimed: Vec<usize>,
}

impl Stencil {
    pub fn size(&self) -> usize {
        self.neighbors.len()
    }
}

#[derive(Clone, Debug)]
pub struct StencilSet {
    /// Surviving stencils in ascending center order.
    pub stencils: Vec<Stencil>,
    /// `owner[i]` is the position in `stencils` of the stencil that owns node `i`.
    pub owner: Vec<usize>,
    pub delta: f64,
    pub stencil_size: usize,
}

impl StencilSet {
    pub fn len(&self) -> usize {
        self.stencils.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stencils.is_empty()
    }
}

/// Builds the stencil of every node and keeps the ones needed to cover all
/// nodes: centers are visited in ascending index, a center that is already
/// owned by an earlier stencil is skipped, otherwise its stencil survives and
/// takes ownership of every still-unowned node in its retention ball.
pub fn build_stencils(nodes: &NodeSet, n: usize, delta: f64) -> Result<StencilSet> {
    let total = nodes.len();
    if n == 0 || n > total {
        return Err(Error::Config(format!(
            "stencil size {n} must be in 1..={total} (the node count)"
        )));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Config(format!(
            "overlap delta {delta} must lie in (0, 1]"
        )));
    }
    let tree = KdTree::new(&nodes.points);
    let mut owner = vec![usize::MAX; total];
    let mut stencils = Vec::new();
    for center in 0..total {
        if owner[center] != usize::MAX {
            continue;
        }
        let stencil = make_stencil(&tree, nodes, center, n, delta);
        let mut stencil = stencil?;
        let id = stencils.len();
        for &local in &stencil.retained {
            let g = stencil.neighbors[local];
            if owner[g] == usize::MAX {
                owner[g] = id;
                stencil.claimed.push(local);
            }
        }
        stencils.push(stencil);
    }
    Ok(StencilSet {
        stencils,
        owner,
        delta,
        stencil_size: n,
    })
}

/// The full stencil of one center, without ownership information.
pub fn make_stencil(
    tree: &KdTree,
    nodes: &NodeSet,
    center: usize,
    n: usize,
    delta: f64,
) -> Result<Stencil> {
    let nb = tree.knn_with_distances(nodes.points[center], n);
    if nb[0].0 != center {
        return Err(Error::DuplicatePoints {
            first: center.min(nb[0].0),
            second: center.max(nb[0].0),
        });
    }
    let width = nb.last().map_or(0.0, |&(_, d)| d);
    let retention_radius = (1.0 - delta) * width;
    let retained = nb
        .iter()
        .enumerate()
        .filter(|(_, (_, d))| *d <= retention_radius)
        .map(|(l, _)| l)
        .collect();
    Ok(Stencil {
        center,
        neighbors: nb.iter().map(|&(i, _)| i).collect(),
        distances: nb.iter().map(|&(_, d)| d).collect(),
        width,
        retention_radius,
        retained,
        claimed: Vec::new(),
    })
}
