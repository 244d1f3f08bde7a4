use serde::{Deserialize, Serialize};
use serde_json::json;

use super::coloring::{ColoringLayer, ColoringRule, ColoringState};
use super::tree::{overlay_graph, pulse_targets, SpanningTreeLayer};
use super::{node_rngs, Layer};
use crate::discrete::{
    a4cm_beat, check_modulus, offset, random_discrete_states, BeatSchedule, DiscreteNodeState, DiscreteRule,
};
use crate::error::{GraphError, SimError};
use crate::graph::{Graph, NodeId};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompositeConfig {
    pub m: u32,
    /// Maximum degree known to every node; colors range over `0..=delta^2`.
    pub delta: u32,
    pub schedule: BeatSchedule,
    pub horizon_beats: u64,
    pub coloring_rule: ColoringRule,
    pub clock_rule: DiscreteRule,
    /// Rounds to keep running once every layer has converged.
    pub extra_beats: u64,
    pub record_trace: bool,
}

impl CompositeConfig {
    pub fn new(g: &Graph, m: u32, schedule: BeatSchedule, horizon_beats: u64) -> Self {
        CompositeConfig {
            m,
            delta: g.max_degree() as u32,
            schedule,
            horizon_beats,
            coloring_rule: ColoringRule::default(),
            clock_rule: DiscreteRule::default(),
            extra_beats: 3 * m as u64 + 2,
            record_trace: false,
        }
    }

    pub fn palette_max(&self) -> u32 {
        self.delta * self.delta
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompositeInit<S> {
    pub coloring: Vec<ColoringState>,
    pub tree: Vec<S>,
    pub clock: Vec<DiscreteNodeState>,
}

impl<S> CompositeInit<S> {
    /// Every layer in an arbitrary state.
    pub fn arbitrary<T: SpanningTreeLayer<State = S>>(g: &Graph, cfg: &CompositeConfig, tree: &T, seed: u64) -> Self {
        let n = g.node_count();
        let p = cfg.palette_max();
        let mut rngs = node_rngs(seed, Layer::Init, n);
        let coloring = rngs.iter_mut().map(|r| ColoringState::arbitrary(r, p, cfg.delta as u16)).collect();
        let tree = rngs.iter_mut().map(|r| tree.arbitrary(r, p)).collect();
        let clock = random_discrete_states(g, cfg.m, seed);
        CompositeInit { coloring, tree, clock }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// Beats until the coloring is silent (proper and frozen).
    pub coloring_beats: Option<u64>,
    /// Beats until the overlay is a fixed spanning tree.
    pub tree_beats: Option<u64>,
    /// First beat from which every clock advances by one per beat on the
    /// final overlay.
    pub a4cm_beats: Option<u64>,
    pub overlay_diameter: Option<usize>,
    /// Offset over the overlay edges at the end of the run.
    pub final_offset: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayeredRun {
    pub report: ConvergenceReport,
    pub beats_run: u64,
    /// Per round, the largest overlay offset seen (`None` while the
    /// pointers do not form a spanning tree).
    pub overlay_offsets: Vec<Option<u32>>,
    /// Per round, the largest offset over all edges of the graph.
    pub graph_offsets: Vec<u32>,
    pub colors: Vec<u32>,
    pub overlay: Option<Graph>,
    pub trace: Vec<String>,
}

impl LayeredRun {
    /// Largest overlay offset from round `from` on.
    pub fn offset_after(&self, from: u64) -> Option<u32> {
        self.overlay_offsets.iter().skip(from as usize).map(|o| o.unwrap_or(u32::MAX)).max()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = self.trace.join("\n");
        if !out.is_empty() {
            out.push('\n');
        }
        out
    }
}

/// Runs coloring, spanning tree and A4C/M side by side. At each beat a node
/// updates its color, then its tree state from its neighbors' colors and
/// tree states, then its clock; a clock pulse is taken up only by the
/// sender's parent and children.
pub fn composite_run<T>(
    g: &Graph,
    tree: &T,
    cfg: &CompositeConfig,
    init: CompositeInit<T::State>,
    seed: u64,
) -> Result<LayeredRun, SimError>
where
    T: SpanningTreeLayer,
    T::State: Serialize,
{
    let n = g.node_count();
    let m = cfg.m;
    check_modulus(m)?;
    if !g.is_connected() {
        return Err(GraphError::Disconnected.into());
    }
    if (g.max_degree() as u32) > cfg.delta {
        return Err(SimError::BadSchedule(format!("delta {} below the maximum degree", cfg.delta)));
    }
    for len in [init.coloring.len(), init.tree.len(), init.clock.len()] {
        if len != n {
            return Err(SimError::ConfigSize { expected: n, got: len });
        }
    }
    for s in &init.clock {
        s.validate(m)?;
    }
    cfg.schedule.validate(n)?;
    let batches = cfg.schedule.batches()?;
    let adaptive = matches!(cfg.clock_rule, DiscreteRule::Adaptive(_));

    let mut coloring = ColoringLayer::new(init.coloring, cfg.coloring_rule, seed);
    let mut trees = init.tree;
    let mut clocks = init.clock;

    let mut report = ConvergenceReport::default();
    let (mut last_perturbed, mut last_lower_change): (Option<u64>, Option<u64>) = (None, None);
    let mut last_disturbed: Option<u64> = None;
    let mut overlay_offsets = Vec::new();
    let mut graph_offsets = Vec::new();
    let mut trace = Vec::new();
    let mut stop_at = cfg.horizon_beats;
    let mut emitters: Vec<NodeId> = Vec::new();

    let mut k = 0;
    while k < stop_at {
        let mut round_overlay: Option<u32> = Some(0);
        let mut round_graph = 0;
        for batch in &batches {
            let mut lower_changed = coloring.beat(g, batch);
            let colors = coloring.colors();

            let next: Vec<T::State> = batch
                .iter()
                .map(|&v| {
                    let nb: Vec<(u32, &T::State)> = g.neighbors(v).iter().map(|&u| (colors[u], &trees[u])).collect();
                    tree.beat(&trees[v], colors[v], &nb)
                })
                .collect();
            for (&v, s) in batch.iter().zip(next) {
                lower_changed |= s != trees[v];
                trees[v] = s;
            }
            let parents: Vec<Option<u32>> = trees.iter().map(|s| tree.parent(s)).collect();

            emitters.clear();
            for &v in batch {
                let pre = clocks[v];
                let (post, emit) = a4cm_beat(&pre, m, cfg.clock_rule);
                let perturbed = post.phi != (pre.phi + 1) % m;
                if perturbed {
                    last_perturbed = Some(k);
                }
                if perturbed || (adaptive && pre.sigma != 0) {
                    last_disturbed = Some(k);
                }
                clocks[v] = post;
                if emit {
                    emitters.push(v);
                }
                if cfg.record_trace {
                    trace.push(json!({"beat": k, "node": v, "layer": "coloring", "color": colors[v]}).to_string());
                    trace.push(json!({"beat": k, "node": v, "layer": "tree", "state": &trees[v]}).to_string());
                    trace.push(
                        json!({"beat": k, "node": v, "layer": "a4cm", "phi": post.phi, "sigma": post.sigma, "emitted": emit})
                            .to_string(),
                    );
                }
            }
            for &v in &emitters {
                for u in pulse_targets(g, &colors, &parents, v) {
                    clocks[u].pulse = true;
                }
            }
            if lower_changed {
                last_lower_change = Some(k);
                last_disturbed = Some(k);
            }

            let phis: Vec<u32> = clocks.iter().map(|s| s.phi).collect();
            round_graph = round_graph.max(offset(&phis, g, m));
            round_overlay = match (round_overlay, overlay_graph(g, &colors, &parents)) {
                (Some(a), Some(o)) => Some(a.max(offset(&phis, &o, m))),
                _ => None,
            };
        }
        overlay_offsets.push(round_overlay);
        graph_offsets.push(round_graph);
        k += 1;

        if report.coloring_beats.is_none() && coloring.is_silent(g) {
            report.coloring_beats = Some(k);
        }
        if report.coloring_beats.is_some() && report.a4cm_beats.is_none() {
            let colors = coloring.colors();
            let fixed = (0..n).all(|v| {
                let nb: Vec<(u32, &T::State)> = g.neighbors(v).iter().map(|&u| (colors[u], &trees[u])).collect();
                tree.beat(&trees[v], colors[v], &nb) == trees[v]
            });
            let quiet = k - last_disturbed.map_or(0, |d| d + 1);
            if fixed && quiet >= m as u64 {
                let tree_at = last_lower_change.map_or(0, |c| c + 1);
                report.tree_beats = Some(tree_at);
                report.a4cm_beats = Some(tree_at.max(last_perturbed.map_or(0, |p| p + 1)));
                stop_at = stop_at.min(k.saturating_add(cfg.extra_beats));
            }
        }
    }

    let colors = coloring.colors();
    let parents: Vec<Option<u32>> = trees.iter().map(|s| tree.parent(s)).collect();
    let overlay = overlay_graph(g, &colors, &parents);
    if let Some(o) = &overlay {
        report.overlay_diameter = o.diameter().ok();
        let phis: Vec<u32> = clocks.iter().map(|s| s.phi).collect();
        report.final_offset = Some(offset(&phis, o, m));
    }
    if overlay.is_none() {
        report.tree_beats = None;
        report.a4cm_beats = None;
    }
    Ok(LayeredRun { report, beats_run: k, overlay_offsets, graph_offsets, colors, overlay, trace })
}
