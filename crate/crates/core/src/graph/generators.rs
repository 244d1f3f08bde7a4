use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Graph, NodeId};
use crate::error::GraphError;

pub fn make_path(n: usize) -> Result<Graph, GraphError> {
    if n == 0 {
        return Err(GraphError::InvalidSize("path needs n >= 1".into()));
    }
    Graph::from_edges(n, (1..n).map(|i| (i - 1, i)))
}

pub fn make_cycle(n: usize) -> Result<Graph, GraphError> {
    if n < 3 {
        return Err(GraphError::InvalidSize("cycle needs n >= 3".into()));
    }
    Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
}

/// Star with `k` leaves; node 0 is the center.
pub fn make_star(k: usize) -> Result<Graph, GraphError> {
    if k == 0 {
        return Err(GraphError::InvalidSize("star needs k >= 1".into()));
    }
    Graph::from_edges(k + 1, (1..=k).map(|i| (0, i)))
}

pub fn make_complete(n: usize) -> Result<Graph, GraphError> {
    if n == 0 {
        return Err(GraphError::InvalidSize("complete graph needs n >= 1".into()));
    }
    Graph::from_edges(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
}

/// `w x h` wrap-around lattice where each site touches its 8 Moore neighbors.
/// Node id of site `(x, y)` is `y * w + x`.
pub fn make_torus_moore(w: usize, h: usize) -> Result<Graph, GraphError> {
    if w < 3 || h < 3 {
        return Err(GraphError::InvalidSize(format!("torus needs w, h >= 3, got {w}x{h}")));
    }
    let id = |x: usize, y: usize| y * w + x;
    let mut edges = std::collections::BTreeSet::new();
    for y in 0..h {
        for x in 0..w {
            for (dx, dy) in [(1, 0), (0, 1), (1, 1), (w - 1, 1)] {
                let (a, b) = (id(x, y), id((x + dx) % w, (y + dy) % h));
                edges.insert((a.min(b), a.max(b)));
            }
        }
    }
    Graph::from_edges(w * h, edges)
}

/// Decodes a Prüfer sequence into the edge list of the corresponding labeled tree.
fn prufer_decode(n: usize, seq: &[NodeId]) -> Vec<(NodeId, NodeId)> {
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut leaves: BinaryHeap<Reverse<NodeId>> = (0..n).filter(|&v| degree[v] == 1).map(Reverse).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &s in seq {
        let Reverse(leaf) = leaves.pop().expect("Prüfer decoding always has a leaf");
        edges.push((leaf, s));
        degree[s] -= 1;
        if degree[s] == 1 {
            leaves.push(Reverse(s));
        }
    }
    let Reverse(a) = leaves.pop().expect("two leaves remain");
    let Reverse(b) = leaves.pop().expect("two leaves remain");
    edges.push((a, b));
    edges
}

/// Uniform labeled tree on `n` nodes conditioned on maximum degree `<= max_degree`
/// (Prüfer sequences with rejection; uniform random paths when the cap is 2).
pub fn make_tree_random(n: usize, max_degree: usize, seed: u64) -> Result<Graph, GraphError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_tree_with(&mut rng, n, max_degree)
}

pub(crate) fn random_tree_with<R: Rng>(rng: &mut R, n: usize, max_degree: usize) -> Result<Graph, GraphError> {
    if n == 0 {
        return Err(GraphError::InvalidSize("tree needs n >= 1".into()));
    }
    if n == 1 {
        return Graph::from_edges(1, []);
    }
    if n == 2 {
        if max_degree == 0 {
            return Err(GraphError::InfeasibleDegreeCap { n, max_degree });
        }
        return Graph::from_edges(2, [(0, 1)]);
    }
    if max_degree < 2 {
        return Err(GraphError::InfeasibleDegreeCap { n, max_degree });
    }
    if max_degree == 2 {
        let mut order: Vec<NodeId> = (0..n).collect();
        order.shuffle(rng);
        return Graph::from_edges(n, order.windows(2).map(|w| (w[0], w[1])));
    }
    let mut counts = vec![0usize; n];
    let mut seq = Vec::with_capacity(n - 2);
    'attempt: loop {
        counts.iter_mut().for_each(|c| *c = 0);
        seq.clear();
        for _ in 0..n - 2 {
            let s = rng.gen_range(0..n);
            counts[s] += 1;
            if counts[s] + 1 > max_degree {
                continue 'attempt;
            }
            seq.push(s);
        }
        return Graph::from_edges(n, prufer_decode(n, &seq));
    }
}

/// Random connected graph: a degree-capped random tree plus up to `extra_edges`
/// random chords that keep every degree `<= max_degree`.
pub fn make_random_connected(n: usize, extra_edges: usize, max_degree: usize, seed: u64) -> Result<Graph, GraphError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tree = random_tree_with(&mut rng, n, max_degree.max(2).min(n.saturating_sub(1).max(1)))?;
    let mut edges: std::collections::BTreeSet<(NodeId, NodeId)> = tree.edges().collect();
    let mut degree: Vec<usize> = (0..n).map(|v| tree.degree(v)).collect();
    let mut added = 0;
    let mut attempts = 0;
    while added < extra_edges && attempts < 50 * (extra_edges + 1) && n >= 2 {
        attempts += 1;
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        let key = (u.min(v), u.max(v));
        if u == v || edges.contains(&key) || degree[u] >= max_degree || degree[v] >= max_degree {
            continue;
        }
        edges.insert(key);
        degree[u] += 1;
        degree[v] += 1;
        added += 1;
    }
    Graph::from_edges(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn structure_examples() {
        let s = make_star(4).unwrap();
        assert_eq!((s.node_count(), s.diameter().unwrap(), s.max_degree()), (5, 2, 4));
        let p = make_path(5).unwrap();
        assert_eq!((p.diameter().unwrap(), p.max_degree()), (4, 2));
        let k = make_complete(3).unwrap();
        assert_eq!((k.edge_count(), k.diameter().unwrap()), (3, 1));
        assert_eq!(make_path(1).unwrap().node_count(), 1);
        assert!(make_star(0).is_err());
    }

    #[test]
    fn torus_examples() {
        let t = make_torus_moore(3, 3).unwrap();
        assert_eq!(t.node_count(), 9);
        assert!((0..9).all(|v| t.degree(v) == 8));
        let t = make_torus_moore(4, 3).unwrap();
        // 12 sites with 8 neighbours each, every edge counted twice.
        assert_eq!((t.node_count(), t.edge_count()), (12, 8 * 12 / 2));
        assert!(make_torus_moore(2, 5).is_err());
    }

    #[test]
    fn prufer_decodes_known_sequence() {
        // Sequence [3, 3, 3, 4] on 6 nodes: star around 3 with 4-5 tail.
        let mut e = prufer_decode(6, &[3, 3, 3, 4]);
        e.iter_mut().for_each(|p| *p = (p.0.min(p.1), p.0.max(p.1)));
        e.sort();
        assert_eq!(e, vec![(0, 3), (1, 3), (2, 3), (3, 4), (4, 5)]);
    }

    #[test]
    fn random_tree_respects_cap() {
        for seed in 0..50 {
            let t = make_tree_random(40, 3, seed).unwrap();
            assert!(t.is_tree());
            assert!(t.max_degree() <= 3);
        }
        let p = make_tree_random(12, 2, 7).unwrap();
        assert!(p.is_tree() && p.max_degree() == 2);
        assert!(matches!(make_tree_random(5, 1, 0), Err(GraphError::InfeasibleDegreeCap { .. })));
    }

    #[test]
    fn random_tree_uniform_on_four_nodes() {
        // 4^2 = 16 labeled trees on 4 nodes; each should appear ~1/16 of the time.
        let mut freq: HashMap<Vec<(usize, usize)>, usize> = HashMap::new();
        let samples = 16_000;
        for seed in 0..samples {
            let t = make_tree_random(4, 3, seed).unwrap();
            *freq.entry(t.edges().collect()).or_default() += 1;
        }
        assert_eq!(freq.len(), 16);
        for &c in freq.values() {
            let p = c as f64 / samples as f64;
            assert!((p - 1.0 / 16.0).abs() < 0.012, "frequency {p}");
        }
    }

    #[test]
    fn random_connected_is_connected_and_capped() {
        for seed in 0..30 {
            let g = make_random_connected(30, 20, 5, seed).unwrap();
            assert!(g.is_connected());
            assert!(g.max_degree() <= 5);
        }
    }
}
