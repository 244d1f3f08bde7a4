use super::*;
use crate::discrete::{BeatSchedule, DiscreteNodeState};
use crate::graph::{
    make_complete, make_cycle, make_path, make_random_connected, make_torus_moore, make_tree_random, Graph,
};
use crate::phase::Rat;
use proptest::prelude::*;

const M: u32 = 64;

fn fresh(colors: &[u32], g: &Graph, p: u32) -> Vec<ColoringState> {
    (0..g.node_count())
        .map(|v| {
            let mut s = ColoringState::new(colors[v], p);
            s.refresh_nr(g.neighbors(v).iter().map(|&u| colors[u]));
            s
        })
        .collect()
}

/// Properness checked against the explicit square graph.
fn proper_on_square(g: &Graph, colors: &[u32]) -> bool {
    g.square().unwrap().edges().all(|(u, v)| colors[u] != colors[v])
}

#[test]
fn isolated_node_takes_top_color() {
    let g = make_path(1).unwrap();
    let run = run_coloring(&g, fresh(&[2], &g, 9), ColoringRule::default(), 1, 1000, false);
    assert_eq!(run.colors, vec![9]);
    assert!(run.silent_at.is_some());
}

#[test]
fn triangle_from_all_zero() {
    let g = make_complete(3).unwrap();
    for seed in 0..20 {
        let run = run_coloring(&g, fresh(&[0, 0, 0], &g, 4), ColoringRule::default(), seed, 10_000, false);
        assert!(run.silent_at.is_some());
        let mut c = run.colors.clone();
        c.sort();
        c.dedup();
        assert_eq!(c.len(), 3);
        assert!(is_distance2_proper(&g, &run.colors));
    }
}

#[test]
fn verbatim_rule_stalls_on_adjacent_clash() {
    // Each endpoint only sees the other's view of itself.
    let g = make_path(2).unwrap();
    let stuck = run_coloring(&g, fresh(&[1, 1], &g, 1), ColoringRule::Verbatim, 0, 1000, false);
    assert_eq!(stuck.silent_at, Some(0));
    assert_eq!(stuck.colors, vec![1, 1]);
    let fixed = run_coloring(&g, fresh(&[1, 1], &g, 1), ColoringRule::ConflictAware, 0, 1000, false);
    assert!(fixed.silent_at.is_some());
    assert!(is_distance2_proper(&g, &fixed.colors));
}

#[test]
fn distance_two_clash_is_detected() {
    // 0 - 1 - 2 with both ends colored 3: only the middle table sees it twice.
    let g = make_path(3).unwrap();
    let init = fresh(&[3, 0, 3], &g, 4);
    let recv: Vec<&[u16]> = vec![init[1].nr.as_slice()];
    assert_eq!(wants_to_move(&init[0], &recv, ColoringRule::Verbatim), Some(4));
    let init = fresh(&[4, 0, 4], &g, 4);
    let recv: Vec<&[u16]> = vec![init[1].nr.as_slice()];
    assert_eq!(wants_to_move(&init[0], &recv, ColoringRule::Verbatim), None);
    assert_eq!(wants_to_move(&init[0], &recv, ColoringRule::ConflictAware), Some(3));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn coloring_converges_properly(seed in 0u64..100_000) {
        let g = make_random_connected(30, 15, 5, seed).unwrap();
        let delta = g.max_degree() as u32;
        let mut rngs = node_rngs(seed, Layer::Init, 30);
        let init = rngs.iter_mut().map(|r| ColoringState::arbitrary(r, delta * delta, 3)).collect();
        let run = run_coloring(&g, init, ColoringRule::default(), seed, 20_000, false);
        prop_assert!(run.silent_at.is_some());
        prop_assert!(proper_on_square(&g, &run.colors));
        prop_assert_eq!(is_distance2_proper(&g, &run.colors), true);
        prop_assert!(run.colors.iter().all(|&c| c <= delta * delta));
    }
}

fn clean_tree_states(g: &Graph, colors: &[u32]) -> Vec<TreeState> {
    (0..g.node_count())
        .map(|v| TreeState { token: v as u64 + 1, root: (v as u64 + 1, colors[v]), dist: 0, parent: None })
        .collect()
}

fn run_tree(g: &Graph, colors: &[u32], init: Vec<TreeState>, bound: u32, beats: usize) -> Vec<TreeState> {
    let t = ReferenceTree { dist_bound: bound };
    let mut states = init;
    for _ in 0..beats {
        states = (0..g.node_count())
            .map(|v| {
                let nb: Vec<(u32, &TreeState)> = g.neighbors(v).iter().map(|&u| (colors[u], &states[u])).collect();
                t.beat(&states[v], colors[v], &nb)
            })
            .collect();
    }
    states
}

fn proper_colors(g: &Graph, seed: u64) -> Vec<u32> {
    let d = g.max_degree() as u32;
    let init = fresh(&vec![0; g.node_count()], g, d * d);
    let run = run_coloring(g, init, ColoringRule::default(), seed, 100_000, false);
    assert!(run.silent_at.is_some());
    run.colors
}

#[test]
fn overlay_examples() {
    let g = make_tree_random(20, 4, 3).unwrap();
    let colors = proper_colors(&g, 1);
    let s = run_tree(&g, &colors, clean_tree_states(&g, &colors), 20, 60);
    let o = overlay_graph(&g, &colors, &s.iter().map(|s| s.parent).collect::<Vec<_>>()).unwrap();
    assert_eq!(o.edges().collect::<Vec<_>>(), g.edges().collect::<Vec<_>>());

    let g = make_cycle(5).unwrap();
    let colors = proper_colors(&g, 2);
    let s = run_tree(&g, &colors, clean_tree_states(&g, &colors), 5, 30);
    let o = overlay_graph(&g, &colors, &s.iter().map(|s| s.parent).collect::<Vec<_>>()).unwrap();
    assert_eq!(o.edge_count(), 4);
    assert_eq!(o.max_degree(), 2);

    let g = make_torus_moore(8, 8).unwrap();
    let colors = proper_colors(&g, 3);
    let s = run_tree(&g, &colors, clean_tree_states(&g, &colors), 64, 200);
    let o = overlay_graph(&g, &colors, &s.iter().map(|s| s.parent).collect::<Vec<_>>()).unwrap();
    assert_eq!(o.edge_count(), 63);
    assert!(o.diameter().unwrap() <= 64);
}

#[test]
fn cyclic_pointers_and_phantom_roots_die_out() {
    // Every node claims a huge phantom root through a cycle of parent
    // pointers around C6.
    let g = make_cycle(6).unwrap();
    let colors = proper_colors(&g, 4);
    let init: Vec<TreeState> = (0..6)
        .map(|v| TreeState { token: v as u64, root: (u64::MAX, 0), dist: v as u32, parent: Some(colors[(v + 1) % 6]) })
        .collect();
    let parents: Vec<_> = init.iter().map(|s| s.parent).collect();
    assert!(overlay_graph(&g, &colors, &parents).is_none());
    let s = run_tree(&g, &colors, init, 6, 40);
    assert!(s.iter().all(|x| x.root.0 != u64::MAX));
    let parents: Vec<_> = s.iter().map(|s| s.parent).collect();
    assert!(overlay_graph(&g, &colors, &parents).is_some());
}

fn arbitrary_run(g: &Graph, seed: u64, schedule: BeatSchedule) -> LayeredRun {
    let tree = ReferenceTree { dist_bound: g.node_count() as u32 };
    let mut cfg = CompositeConfig::new(g, M, schedule, 400_000);
    cfg.extra_beats = 4 * M as u64;
    let init = CompositeInit::arbitrary(g, &cfg, &tree, seed);
    composite_run(g, &tree, &cfg, init, seed).unwrap()
}

#[test]
fn composite_on_tree_with_settled_layers() {
    let g = make_tree_random(16, 3, 9).unwrap();
    let colors = proper_colors(&g, 5);
    let tree = ReferenceTree { dist_bound: 16 };
    let settled = run_tree(&g, &colors, clean_tree_states(&g, &colors), 16, 40);
    let cfg = CompositeConfig::new(&g, M, BeatSchedule::synchronous(16, Rat::new(1, 64)), 50_000);
    let d = g.max_degree() as u32;
    let clock: Vec<DiscreteNodeState> = crate::discrete::random_discrete_states(&g, M, 3);
    let init = CompositeInit { coloring: fresh(&colors, &g, d * d), tree: settled, clock: clock.clone() };
    let run = composite_run(&g, &tree, &cfg, init, 0).unwrap();
    assert_eq!(run.report.coloring_beats, Some(1));
    assert_eq!(run.report.tree_beats, Some(0));
    assert_eq!(run.overlay.as_ref().unwrap().edges().collect::<Vec<_>>(), g.edges().collect::<Vec<_>>());

    // Same clocks as a plain A4C/M run on the tree.
    let mut sys = crate::discrete::SystemConfig::new(M, BeatSchedule::synchronous(16, Rat::new(1, 64)), run.beats_run);
    sys.record.offsets = true;
    let plain = crate::discrete::run_system(&g, &sys, &clock).unwrap();
    assert_eq!(run.graph_offsets, plain.offsets);
    assert_eq!(run.report.a4cm_beats, plain.last_perturbed.map(|k| k + 1).or(Some(0)));
}

#[test]
fn composite_converges_from_arbitrary_states() {
    for seed in 0..6 {
        let g = make_random_connected(25, 10, 5, seed).unwrap();
        let run = arbitrary_run(&g, seed, BeatSchedule::synchronous(25, Rat::new(1, 64)));
        let r = &run.report;
        assert!(r.coloring_beats.is_some() && r.tree_beats.is_some(), "{r:?}");
        let t0 = r.a4cm_beats.unwrap();
        assert!(is_distance2_proper(&g, &run.colors));
        assert_eq!(run.overlay.as_ref().unwrap().edge_count(), 24);
        assert!(r.overlay_diameter.unwrap() <= 25);
        assert_eq!(run.offset_after(t0 + 3 * M as u64 + 1), Some(0));
        assert_eq!(r.final_offset, Some(0));
    }
}

#[test]
fn composite_asynchronous_offsets() {
    for seed in 0..4 {
        let g = make_random_connected(20, 8, 5, seed).unwrap();
        let run = arbitrary_run(&g, seed, BeatSchedule::asynchronous(20, Rat::new(1, 64), 16, seed));
        let t0 = run.report.a4cm_beats.expect("converged");
        assert!(run.offset_after(t0 + 3 * M as u64 + 1).unwrap() <= 1);
    }
}

#[test]
fn layers_are_isolated() {
    let g = make_random_connected(15, 6, 4, 77).unwrap();
    let tree = ReferenceTree { dist_bound: 15 };
    let mut cfg = CompositeConfig::new(&g, M, BeatSchedule::synchronous(15, Rat::new(1, 64)), 300);
    cfg.record_trace = true;
    let init = CompositeInit::arbitrary(&g, &cfg, &tree, 5);
    let mut other = init.clone();
    other.clock = crate::discrete::random_discrete_states(&g, M, 999);
    let a = composite_run(&g, &tree, &cfg, init.clone(), 5).unwrap();
    let b = composite_run(&g, &tree, &cfg, other, 5).unwrap();
    let lower =
        |r: &LayeredRun| -> Vec<String> { r.trace.iter().filter(|l| !l.contains("\"a4cm\"")).cloned().collect() };
    assert_eq!(lower(&a), lower(&b));
    assert_ne!(a.trace, b.trace);

    // The coloring inside the stack is the standalone coloring.
    let alone = run_coloring(&g, init.coloring.clone(), ColoringRule::default(), 5, 300, true);
    for (k, colors) in alone.history.iter().enumerate() {
        for (v, c) in colors.iter().enumerate() {
            let line = format!("{{\"beat\":{k},\"color\":{c},\"layer\":\"coloring\",\"node\":{v}}}");
            assert!(a.trace.contains(&line), "{line}");
        }
    }
    assert!(a.to_jsonl().lines().all(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["layer"].is_string()));
}

#[test]
fn composite_rejects_bad_input() {
    let g = Graph::from_edges(3, [(0, 1)]).unwrap();
    let tree = ReferenceTree { dist_bound: 3 };
    let cfg = CompositeConfig::new(&g, M, BeatSchedule::synchronous(3, Rat::new(1, 64)), 10);
    let init = CompositeInit::arbitrary(&g, &cfg, &tree, 0);
    assert!(composite_run(&g, &tree, &cfg, init, 0).is_err());
}

#[test]
fn composite_is_deterministic() {
    let g = make_random_connected(12, 5, 4, 8).unwrap();
    let s = BeatSchedule::asynchronous(12, Rat::new(1, 64), 4, 1);
    assert_eq!(arbitrary_run(&g, 3, s.clone()), arbitrary_run(&g, 3, s));
}
