use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{node_rngs, Layer};
use crate::graph::{Graph, NodeId};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ColoringRule {
    /// Move only when the current color is below the largest color absent
    /// from the neighbors' neighbor-color sets. Can stall on improper
    /// colorings: those sets never reveal an adjacent clash.
    Verbatim,
    /// Also exclude the node's own neighbor colors, and move whenever a node
    /// within distance 2 shares the color (detected through multiplicities).
    #[default]
    ConflictAware,
}

/// `color` is `R_v`; `nr[c]` counts neighbors of color `c` (`NR_v` with
/// multiplicities).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoringState {
    pub color: u32,
    pub nr: Vec<u16>,
}

impl ColoringState {
    pub fn new(color: u32, palette_max: u32) -> Self {
        ColoringState { color, nr: vec![0; palette_max as usize + 1] }
    }

    pub fn arbitrary(rng: &mut ChaCha8Rng, palette_max: u32, max_count: u16) -> Self {
        ColoringState {
            color: rng.gen_range(0..=palette_max),
            nr: (0..=palette_max).map(|_| rng.gen_range(0..=max_count)).collect(),
        }
    }

    pub fn refresh_nr(&mut self, neighbor_colors: impl IntoIterator<Item = u32>) {
        self.nr.iter_mut().for_each(|c| *c = 0);
        for c in neighbor_colors {
            self.nr[c as usize] += 1;
        }
    }

    pub fn nr_set(&self) -> impl Iterator<Item = u32> + '_ {
        self.nr.iter().enumerate().filter(|(_, &k)| k > 0).map(|(c, _)| c as u32)
    }
}

fn max_free(own: &ColoringState, received: &[&[u16]], rule: ColoringRule) -> Option<u32> {
    let taken =
        |c: usize| received.iter().any(|nr| nr[c] > 0) || (rule == ColoringRule::ConflictAware && own.nr[c] > 0);
    (0..own.nr.len()).rev().find(|&c| !taken(c)).map(|c| c as u32)
}

/// Whether the node would move if its coin came up 1.
pub fn wants_to_move(own: &ColoringState, received: &[&[u16]], rule: ColoringRule) -> Option<u32> {
    let target = max_free(own, received, rule);
    let c = own.color as usize;
    let conflict = rule == ColoringRule::ConflictAware && (own.nr[c] > 0 || received.iter().any(|nr| nr[c] >= 2));
    match target {
        Some(t) if conflict || own.color < t => Some(t),
        _ => None,
    }
}

/// Color decision of one beat given the neighbors' `NR` tables. The caller
/// refreshes `NR_v` from the neighbors' new colors afterwards.
pub fn coloring_beat(
    own: &ColoringState,
    received: &[&[u16]],
    rule: ColoringRule,
    rng: &mut ChaCha8Rng,
) -> ColoringState {
    let mut next = own.clone();
    if let Some(t) = wants_to_move(own, received, rule) {
        if rng.gen_bool(0.5) {
            next.color = t;
        }
    }
    next
}

pub fn is_distance2_proper(g: &Graph, colors: &[u32]) -> bool {
    (0..g.node_count()).all(|v| {
        g.neighbors(v)
            .iter()
            .all(|&u| colors[u] != colors[v] && g.neighbors(u).iter().all(|&w| w == v || colors[w] != colors[v]))
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoringRun {
    /// Beat after which nobody ever moves again.
    pub silent_at: Option<u64>,
    pub beats_run: u64,
    pub colors: Vec<u32>,
    pub history: Vec<Vec<u32>>,
}

/// Synchronous rounds: every node decides from the previous round's `NR`
/// tables, then all tables are refreshed.
pub(crate) struct ColoringLayer {
    pub states: Vec<ColoringState>,
    pub rule: ColoringRule,
    rngs: Vec<ChaCha8Rng>,
}

impl ColoringLayer {
    pub fn new(states: Vec<ColoringState>, rule: ColoringRule, seed: u64) -> Self {
        let rngs = node_rngs(seed, Layer::Coloring, states.len());
        ColoringLayer { states, rule, rngs }
    }

    fn received<'a>(&'a self, g: &Graph, v: NodeId) -> Vec<&'a [u16]> {
        g.neighbors(v).iter().map(|&u| self.states[u].nr.as_slice()).collect()
    }

    /// Tables consistent with the actual colors and nobody willing to move:
    /// nothing can change any more.
    pub fn is_silent(&self, g: &Graph) -> bool {
        (0..self.states.len()).all(|v| {
            let mut fresh = self.states[v].clone();
            fresh.refresh_nr(g.neighbors(v).iter().map(|&u| self.states[u].color));
            fresh.nr == self.states[v].nr && wants_to_move(&self.states[v], &self.received(g, v), self.rule).is_none()
        })
    }

    /// Beats the nodes of `batch`; returns whether any color changed.
    pub fn beat(&mut self, g: &Graph, batch: &[NodeId]) -> bool {
        let next: Vec<ColoringState> = batch
            .iter()
            .map(|&v| {
                let recv: Vec<&[u16]> = g.neighbors(v).iter().map(|&u| self.states[u].nr.as_slice()).collect();
                coloring_beat(&self.states[v], &recv, self.rule, &mut self.rngs[v])
            })
            .collect();
        let mut changed = false;
        for (&v, s) in batch.iter().zip(next) {
            changed |= s.color != self.states[v].color;
            self.states[v] = s;
        }
        for &v in batch {
            let colors: Vec<u32> = g.neighbors(v).iter().map(|&u| self.states[u].color).collect();
            let before = self.states[v].nr.clone();
            self.states[v].refresh_nr(colors);
            changed |= before != self.states[v].nr;
        }
        changed
    }

    pub fn colors(&self) -> Vec<u32> {
        self.states.iter().map(|s| s.color).collect()
    }
}

/// Runs the coloring layer alone until it falls silent or `horizon` beats.
pub fn run_coloring(
    g: &Graph,
    init: Vec<ColoringState>,
    rule: ColoringRule,
    seed: u64,
    horizon: u64,
    keep_history: bool,
) -> ColoringRun {
    let all: Vec<NodeId> = (0..g.node_count()).collect();
    let mut layer = ColoringLayer::new(init, rule, seed);
    let mut history = Vec::new();
    let mut k = 0;
    let mut silent_at = None;
    while k < horizon {
        if layer.is_silent(g) {
            silent_at = Some(k);
            break;
        }
        layer.beat(g, &all);
        if keep_history {
            history.push(layer.colors());
        }
        k += 1;
    }
    if silent_at.is_none() && layer.is_silent(g) {
        silent_at = Some(k);
    }
    ColoringRun { silent_at, beats_run: k, colors: layer.colors(), history }
}
