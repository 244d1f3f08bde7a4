use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Graph, NodeId};

/// A center, its single non-branch neighbor (the root), and the degree-1
/// nodes hanging off the center.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BranchDescriptor {
    pub center: NodeId,
    pub root: NodeId,
    pub leaves: BTreeSet<NodeId>,
}

impl BranchDescriptor {
    /// Center followed by the leaves.
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        std::iter::once(self.center).chain(self.leaves.iter().copied())
    }

    pub fn is_valid_in(&self, g: &Graph) -> bool {
        let c = self.center;
        !self.leaves.is_empty()
            && g.has_edge(c, self.root)
            && !self.leaves.contains(&self.root)
            && self.leaves.iter().all(|&u| g.degree(u) == 1 && g.has_edge(c, u))
            && g.neighbors(c).iter().all(|&u| u == self.root || self.leaves.contains(&u))
    }
}

/// Every branch of `g`, ordered by (center, root).
pub fn find_branches(g: &Graph) -> Vec<BranchDescriptor> {
    let mut out = Vec::new();
    for v in 0..g.node_count() {
        let nbrs = g.neighbors(v);
        if nbrs.len() < 2 {
            continue;
        }
        let non_leaves: Vec<NodeId> = nbrs.iter().copied().filter(|&u| g.degree(u) != 1).collect();
        let roots: Vec<NodeId> = match non_leaves.len() {
            0 => nbrs.to_vec(),
            1 => non_leaves,
            _ => continue,
        };
        for w in roots {
            let leaves: BTreeSet<NodeId> = nbrs.iter().copied().filter(|&u| u != w).collect();
            out.push(BranchDescriptor { center: v, root: w, leaves });
        }
    }
    out
}

/// A branch is terminal if all but at most one neighbor of its root are
/// leaves or centers of branches rooted there.
pub fn is_terminal_branch(g: &Graph, b: &BranchDescriptor) -> bool {
    let centers: BTreeSet<NodeId> =
        find_branches(g).into_iter().filter(|o| o.root == b.root).map(|o| o.center).collect();
    let others = g.neighbors(b.root).iter().filter(|&&u| g.degree(u) != 1 && !centers.contains(&u)).count();
    others <= 1
}
