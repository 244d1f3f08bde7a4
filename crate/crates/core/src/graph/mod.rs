//! Finite simple undirected graphs and the generators used by the experiments.

mod branch;
mod generators;
mod io;
mod ust;

use std::collections::{BTreeSet, VecDeque};

use crate::error::GraphError;

pub use branch::{find_branches, is_terminal_branch, BranchDescriptor};
pub use generators::{
    make_complete, make_cycle, make_path, make_random_connected, make_star, make_torus_moore, make_tree_random,
};
pub use io::{read_edge_list, write_edge_list};
pub use ust::uniform_spanning_tree;

pub type NodeId = usize;

/// Immutable simple graph on nodes `0..n` with cached metrics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<NodeId>>,
    edge_count: usize,
    max_degree: usize,
    diameter: Option<usize>,
}

impl Graph {
    /// Builds a graph, rejecting loops, duplicate edges and out-of-range ids.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (NodeId, NodeId)>) -> Result<Self, GraphError> {
        let mut adj = vec![Vec::new(); n];
        let mut seen = BTreeSet::new();
        for (u, v) in edges {
            for node in [u, v] {
                if node >= n {
                    return Err(GraphError::NodeOutOfRange { node, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(GraphError::DuplicateEdge(key.0, key.1));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let max_degree = adj.iter().map(Vec::len).max().unwrap_or(0);
        let mut g = Graph { adj, edge_count: seen.len(), max_degree, diameter: None };
        g.diameter = g.compute_diameter();
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adj[v]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| list.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    pub fn is_connected(&self) -> bool {
        self.diameter.is_some()
    }

    /// Graph distance diameter; errors on disconnected graphs.
    pub fn diameter(&self) -> Result<usize, GraphError> {
        self.diameter.ok_or(GraphError::Disconnected)
    }

    pub fn is_tree(&self) -> bool {
        self.is_connected() && self.edge_count + 1 == self.node_count()
    }

    pub fn bfs_distances(&self, source: NodeId) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.node_count()];
        let mut queue = VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap_or(0);
            for &w in &self.adj[u] {
                if dist[w].is_none() {
                    dist[w] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    fn compute_diameter(&self) -> Option<usize> {
        if self.node_count() == 0 {
            return Some(0);
        }
        let mut best = 0;
        for s in 0..self.node_count() {
            for d in self.bfs_distances(s) {
                best = best.max(d?);
            }
        }
        Some(best)
    }

    /// The graph with an extra edge between every pair at distance 2.
    pub fn square(&self) -> Result<Graph, GraphError> {
        let mut edges = BTreeSet::new();
        for u in 0..self.node_count() {
            for &v in &self.adj[u] {
                if u < v {
                    edges.insert((u, v));
                }
                for &w in &self.adj[v] {
                    if u < w {
                        edges.insert((u, w));
                    }
                }
            }
        }
        Graph::from_edges(self.node_count(), edges)
    }
}

/// BFS all-pairs diameter.
pub fn diameter(g: &Graph) -> Result<usize, GraphError> {
    g.diameter()
}

/// `G^2`; rejects disconnected input.
pub fn square_graph(g: &Graph) -> Result<Graph, GraphError> {
    g.diameter()?;
    g.square()
}
