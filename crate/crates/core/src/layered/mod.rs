//! The composite self-stabilizing stack: distance-2 coloring as local
//! identifiers, a spanning-tree overlay built on them, and A4C/M pulses
//! routed along the overlay.

mod coloring;
mod composite;
mod tree;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use coloring::{
    coloring_beat, is_distance2_proper, run_coloring, wants_to_move, ColoringRule, ColoringRun, ColoringState,
};
pub use composite::{composite_run, CompositeConfig, CompositeInit, ConvergenceReport, LayeredRun};
pub use tree::{overlay_graph, ReferenceTree, SpanningTreeLayer, TreeState};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub(crate) enum Layer {
    Coloring = 1,
    Init = 3,
}

/// One independent stream per node and layer.
pub(crate) fn node_rngs(seed: u64, layer: Layer, n: usize) -> Vec<ChaCha8Rng> {
    (0..n)
        .map(|v| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(((layer as u64) << 32) | v as u64);
            rng
        })
        .collect()
}

#[cfg(test)]
mod tests;
