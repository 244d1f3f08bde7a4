use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{Graph, NodeId};

/// A self-stabilizing spanning-tree layer addressed through local colors.
/// A node sees its own state and color and, per neighbor, that neighbor's
/// color and broadcast state.
pub trait SpanningTreeLayer {
    type State: Clone + PartialEq + std::fmt::Debug;

    fn beat(&self, own: &Self::State, own_color: u32, neighbors: &[(u32, &Self::State)]) -> Self::State;

    /// Color of the parent, or `None` for a root.
    fn parent(&self, s: &Self::State) -> Option<u32>;

    fn arbitrary(&self, rng: &mut ChaCha8Rng, palette_max: u32) -> Self::State;
}

/// Root election by the largest `(token, color)` key, with BFS distances
/// capped at `dist_bound` so that keys of nonexistent roots die out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceTree {
    pub dist_bound: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TreeState {
    /// The node's own random token, drawn once.
    pub token: u64,
    pub root: (u64, u32),
    pub dist: u32,
    pub parent: Option<u32>,
}

impl SpanningTreeLayer for ReferenceTree {
    type State = TreeState;

    fn beat(&self, own: &TreeState, own_color: u32, neighbors: &[(u32, &TreeState)]) -> TreeState {
        // Largest key, then shortest distance, then smallest parent color.
        let rank = |root: (u64, u32), dist: u32, parent: Option<u32>| {
            (root, std::cmp::Reverse(dist), std::cmp::Reverse(parent.map_or(0, |p| p as u64 + 1)))
        };
        let mut best = (own.token, own_color);
        let (mut dist, mut parent) = (0, None);
        for &(c, s) in neighbors {
            let d = s.dist.saturating_add(1);
            if d <= self.dist_bound && rank(s.root, d, Some(c)) > rank(best, dist, parent) {
                best = s.root;
                dist = d;
                parent = Some(c);
            }
        }
        TreeState { token: own.token, root: best, dist, parent }
    }

    fn parent(&self, s: &TreeState) -> Option<u32> {
        s.parent
    }

    fn arbitrary(&self, rng: &mut ChaCha8Rng, palette_max: u32) -> TreeState {
        TreeState {
            token: rng.gen(),
            root: (rng.gen(), rng.gen_range(0..=palette_max)),
            dist: rng.gen_range(0..=self.dist_bound),
            parent: if rng.gen_bool(0.5) { Some(rng.gen_range(0..=palette_max)) } else { None },
        }
    }
}

/// The overlay defined by parent pointers, if it is a spanning tree: every
/// pointer resolves to exactly one neighbor and the result is a tree.
pub fn overlay_graph(g: &Graph, colors: &[u32], parents: &[Option<u32>]) -> Option<Graph> {
    let mut edges = BTreeSet::new();
    let mut roots = 0;
    for (v, parent) in parents.iter().enumerate() {
        let Some(p) = *parent else {
            roots += 1;
            continue;
        };
        let mut hits = g.neighbors(v).iter().filter(|&&u| colors[u] == p);
        let (Some(&u), None) = (hits.next(), hits.next()) else {
            return None;
        };
        edges.insert((u.min(v), u.max(v)));
    }
    if roots != 1 {
        return None;
    }
    let tree = Graph::from_edges(g.node_count(), edges).ok()?;
    tree.is_tree().then_some(tree)
}

/// Neighbors of `v` that `v` addresses with its pulses: its parent and the
/// neighbors pointing at it.
pub(crate) fn pulse_targets(g: &Graph, colors: &[u32], parents: &[Option<u32>], v: NodeId) -> Vec<NodeId> {
    g.neighbors(v).iter().copied().filter(|&u| parents[v] == Some(colors[u]) || parents[u] == Some(colors[v])).collect()
}
