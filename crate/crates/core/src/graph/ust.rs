use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Graph;
use crate::error::GraphError;

/// Uniform spanning tree via Wilson's loop-erased random walk algorithm.
pub fn uniform_spanning_tree(g: &Graph, seed: u64) -> Result<Graph, GraphError> {
    g.diameter()?;
    let n = g.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_tree = vec![false; n];
    let mut next = vec![usize::MAX; n];
    if n == 0 {
        return Graph::from_edges(0, []);
    }
    in_tree[0] = true;
    for start in 0..n {
        // Random walk until the tree is hit; overwriting `next` erases loops.
        let mut u = start;
        while !in_tree[u] {
            next[u] = *g.neighbors(u).choose(&mut rng).expect("connected graph has no isolated nodes");
            u = next[u];
        }
        let mut u = start;
        while !in_tree[u] {
            in_tree[u] = true;
            u = next[u];
        }
    }
    Graph::from_edges(n, (1..n).map(|v| (v, next[v])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{make_complete, make_torus_moore, make_tree_random};
    use std::collections::HashMap;

    #[test]
    fn tree_input_is_returned() {
        let t = make_tree_random(20, 4, 3).unwrap();
        assert_eq!(uniform_spanning_tree(&t, 11).unwrap(), t);
    }

    #[test]
    fn torus_tree_has_n_minus_one_edges() {
        let g = make_torus_moore(5, 5).unwrap();
        let t = uniform_spanning_tree(&g, 1).unwrap();
        assert_eq!(t.edge_count(), 24);
        assert!(t.is_tree());
        assert!(t.edges().all(|(u, v)| g.has_edge(u, v)));
    }

    #[test]
    fn disconnected_rejected() {
        let g = Graph::from_edges(3, [(0, 1)]).unwrap();
        assert_eq!(uniform_spanning_tree(&g, 0), Err(GraphError::Disconnected));
    }

    fn all_spanning_trees(g: &Graph) -> Vec<Vec<(usize, usize)>> {
        // Exhaustive oracle: every (n-1)-subset of edges that forms a tree.
        let edges: Vec<_> = g.edges().collect();
        let n = g.node_count();
        let mut out = Vec::new();
        for mask in 0u32..(1 << edges.len()) {
            if mask.count_ones() as usize != n - 1 {
                continue;
            }
            let chosen: Vec<_> =
                edges.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, e)| *e).collect();
            if Graph::from_edges(n, chosen.iter().copied()).unwrap().is_tree() {
                out.push(chosen);
            }
        }
        out
    }

    #[test]
    fn triangle_trees_are_uniform() {
        let g = make_complete(3).unwrap();
        let trees = all_spanning_trees(&g);
        assert_eq!(trees.len(), 3);
        let mut freq: HashMap<Vec<(usize, usize)>, usize> = HashMap::new();
        for seed in 0..10_000 {
            let t = uniform_spanning_tree(&g, seed).unwrap();
            *freq.entry(t.edges().collect()).or_default() += 1;
        }
        for t in &trees {
            let p = freq[t] as f64 / 10_000.0;
            assert!((p - 1.0 / 3.0).abs() <= 0.02, "frequency {p}");
        }
    }

    #[test]
    fn k4_trees_are_uniform() {
        let g = make_complete(4).unwrap();
        let trees = all_spanning_trees(&g);
        assert_eq!(trees.len(), 16);
        let mut freq: HashMap<Vec<(usize, usize)>, usize> = HashMap::new();
        for seed in 0..32_000 {
            let t = uniform_spanning_tree(&g, seed).unwrap();
            *freq.entry(t.edges().collect()).or_default() += 1;
        }
        for t in &trees {
            let p = freq[t] as f64 / 32_000.0;
            assert!((p - 1.0 / 16.0).abs() <= 0.01, "frequency {p}");
        }
    }
}
