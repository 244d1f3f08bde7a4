use super::*;
use crate::continuous::{initial_standard, random_phases, simulate, Coupling, LogLevel, SimOptions};
use crate::graph::{find_branches, make_complete, make_path, make_star, make_tree_random};
use proptest::prelude::*;

fn r(n: i64, d: i64) -> Rat {
    Rat::new(n, d)
}

fn ph(v: &[(i64, i64)]) -> Vec<Phase> {
    v.iter().map(|&(n, d)| Phase::from_frac(n, d)).collect()
}

/// Brute force over all pairs.
fn width_oracle(config: &[Phase]) -> Rat {
    let mut best = Rat::zero();
    for x in config {
        for y in config {
            let a = crate::phase::ccw_displacement(x, y);
            let b = crate::phase::ccw_displacement(y, x);
            best = best.max(a.min(b));
        }
    }
    best
}

/// Brute force over arcs starting at each phase.
fn covering_oracle(config: &[Phase]) -> Rat {
    config
        .iter()
        .map(|start| config.iter().map(|p| crate::phase::ccw_displacement(p, start)).max().unwrap())
        .min()
        .unwrap()
}

#[test]
fn width_examples() {
    assert_eq!(width(&ph(&[(1, 3), (1, 3), (1, 3)])).width, Rat::zero());
    assert_eq!(width(&ph(&[(0, 1), (3, 10)])).width, r(3, 10));
    let split = ph(&[(0, 1), (2, 5), (4, 5)]);
    assert_eq!(width(&split).width, r(2, 5));
    // Gaps are 2/5, 2/5, 1/5, so the shortest covering arc is 3/5.
    assert_eq!(covering_arc_width(&split), r(3, 5));
    assert_eq!(covering_oracle(&split), r(3, 5));
    let w = width(&ph(&[(0, 1), (1, 8), (1, 2)]));
    assert_eq!((w.width, w.arg_pair), (r(1, 2), (0, 2)));
}

#[test]
fn widths_split_below_one_half() {
    // Pairwise width 3/8 < 1/2 while no arc shorter than 5/8 covers the
    // phases: the two notions only agree when the covering arc is < 1/2.
    let cfg = ph(&[(0, 1), (1, 4), (5, 8)]);
    assert_eq!(width(&cfg).width, r(3, 8));
    assert_eq!(covering_arc_width(&cfg), r(5, 8));
}

proptest! {
    #[test]
    fn width_matches_pair_oracle(raw in prop::collection::vec(0i64..48, 1..12)) {
        let cfg: Vec<Phase> = raw.iter().map(|&x| Phase::from_frac(x, 48)).collect();
        prop_assert_eq!(width(&cfg).width, width_oracle(&cfg));
        prop_assert_eq!(covering_arc_width(&cfg), covering_oracle(&cfg));
        let c = covering_arc_width(&cfg);
        if c < r(1, 2) {
            prop_assert_eq!(width(&cfg).width, c);
        }
    }
}

#[test]
fn branch_width_examples() {
    // Path 0-1-2-3: branch with center 1, leaf 0, root 2.
    let g = make_path(4).unwrap();
    let b = find_branches(&g).into_iter().find(|b| b.center == 1).unwrap();
    let opts = SimOptions::new(Coupling::FourCoupling).with_log(LogLevel::Phase);
    let init = initial_standard(&ph(&[(1, 8), (1, 8), (1, 2), (3, 4)]));
    let traj = simulate(&g, &init, &opts, &r(1, 1), &[]).unwrap();
    assert_eq!(branch_width(&traj, &b, &Rat::zero()), Rat::zero());

    // A 2-branch with phases {0, 1/4, 1/2}: center 0, leaves 1 and 2 on the star,
    // root 3 hanging further out.
    let g = crate::graph::Graph::from_edges(5, [(0, 1), (0, 2), (0, 3), (3, 4)]).unwrap();
    let b = find_branches(&g).into_iter().find(|b| b.center == 0).unwrap();
    let init = initial_standard(&ph(&[(0, 1), (1, 4), (1, 2), (0, 1), (0, 1)]));
    let traj = simulate(&g, &init, &opts, &r(1, 1), &[]).unwrap();
    assert_eq!(branch_width(&traj, &b, &Rat::zero()), r(1, 2));

    // Center 0, leaves at relative phases {0, lambda}: width lambda.
    let lambda = r(3, 8);
    let init =
        initial_standard(&[Phase::zero(), Phase::zero(), Phase::new(lambda.clone()), Phase::zero(), Phase::zero()]);
    let traj = simulate(&g, &init, &opts, &r(1, 1), &[]).unwrap();
    assert_eq!(branch_width(&traj, &b, &Rat::zero()), lambda);
}

#[test]
fn total_inhibition_examples() {
    let g = make_complete(2).unwrap();
    let opts = SimOptions::new(Coupling::FourCoupling).with_log(LogLevel::Phase);
    // No pulls at all before the first blink.
    let traj = simulate(&g, &initial_standard(&ph(&[(0, 1), (3, 5)])), &opts, &r(3, 1), &[]).unwrap();
    assert_eq!(total_phase_inhibition(&traj, 0, &Rat::zero(), &r(1, 5)), Rat::zero());
    // 2/5 -> 3/20 (-1/4) at 2/5, then 3/20 -> 0 (-3/20) at 7/5.
    assert_eq!(total_phase_inhibition(&traj, 0, &Rat::zero(), &r(2, 5)), r(-1, 4));
    assert_eq!(total_phase_inhibition(&traj, 0, &Rat::zero(), &r(3, 1)), r(-2, 5));
    // Half-open: the pull at 2/5 is excluded from (2/5, 3].
    assert_eq!(total_phase_inhibition(&traj, 0, &r(2, 5), &r(3, 1)), r(-3, 20));

    // Pulls 3/8 -> 1/8 and 1/5 -> 0 sum to -9/20. Star with center 0:
    // leaf 1 blinks at 1/8 (center reads 3/8), leaf 2 at 1/8 + 3/40 (center reads 1/5).
    let g = make_star(2).unwrap();
    let init =
        initial_standard(&[Phase::from_frac(1, 4), Phase::from_frac(7, 8), Phase::new(r(1, 1) - r(1, 8) - r(3, 40))]);
    let traj = simulate(&g, &init, &opts, &r(1, 2), &[]).unwrap();
    assert_eq!(total_phase_inhibition(&traj, 0, &Rat::zero(), &r(1, 2)), r(-9, 20));
}

#[test]
fn sync_time_examples() {
    let opts = SimOptions::new(Coupling::FourCoupling).with_log(LogLevel::Phase);
    let g = make_path(3).unwrap();
    let traj = simulate(&g, &initial_standard(&ph(&[(1, 3), (1, 3), (1, 3)])), &opts, &r(3, 1), &[]).unwrap();
    assert_eq!(sync_time(&traj), Some(Rat::zero()));

    let g = make_complete(2).unwrap();
    let traj = simulate(&g, &initial_standard(&ph(&[(0, 1), (3, 5)])), &opts, &r(5, 1), &[]).unwrap();
    assert_eq!(sync_time(&traj), Some(r(7, 5)));

    let g = make_star(4).unwrap();
    let init = initial_standard(&ph(&[(1, 4), (1, 4), (1, 2), (3, 4), (0, 1)]));
    let traj = simulate(&g, &init, &opts, &r(30, 1), &[]).unwrap();
    assert_eq!(sync_time(&traj), None);
}

#[test]
fn relative_view_examples() {
    let g = make_path(3).unwrap();
    let init = initial_standard(&ph(&[(1, 8), (1, 2), (7, 8)]));
    let opts = SimOptions::new(Coupling::FourCoupling).with_log(LogLevel::Phase);
    let probes: Vec<Rat> = (0..=16).map(|k| r(k, 8)).collect();
    let traj = simulate(&g, &init, &opts, &r(2, 1), &probes).unwrap();
    let view = relative_view(&traj, &Phase::zero());
    let (t0, a0, l0) = &view.samples[0];
    assert_eq!((t0, a0), (&Rat::zero(), &Phase::zero()));
    assert_eq!(l0, &ph(&[(1, 8), (1, 2), (7, 8)]));
    // Every blink happens exactly when the activator sits on the node's
    // pre-jump relative phase.
    for e in traj.phase_events().filter(|e| e.kind == crate::continuous::EventKind::Blink) {
        let t = traj.time(e.tick);
        let lambda = Phase::new(traj.time(e.before.phi) - &t);
        assert_eq!(lambda, Phase::new(-t));
    }
}

fn engine_vs_replay(g: &crate::graph::Graph, phases: &[Phase], horizon: i64) {
    let opts = SimOptions::new(Coupling::FourCoupling).with_log(LogLevel::Phase);
    let traj = simulate(g, &initial_standard(phases), &opts, &Rat::integer(horizon), &[]).unwrap();
    let got: Vec<ReplayEvent> = traj
        .phase_events()
        .map(|e| ReplayEvent {
            time: traj.time(e.tick),
            node: e.node,
            blink: e.kind == crate::continuous::EventKind::Blink,
            phi_before: traj.time(e.before.phi),
            phi_after: traj.time(e.after.phi),
        })
        .collect();
    let alpha0 = Phase::from_frac(3, 7);
    assert_eq!(got, relative_replay(g, phases, &alpha0, &Rat::integer(horizon)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn relative_replay_reproduces_engine(seed in 0u64..10_000, n in 2usize..12) {
        let g = make_tree_random(n, 4, seed).unwrap();
        engine_vs_replay(&g, &random_phases(n, 24, seed + 1), 15);
    }

    #[test]
    fn replayed_sync_time_matches_engine(seed in 0u64..10_000) {
        let g = make_tree_random(12, 3, seed).unwrap();
        let opts = SimOptions::new(Coupling::FourCoupling).with_log(LogLevel::Phase);
        let traj = simulate(&g, &initial_standard(&random_phases(12, 16, seed)), &opts, &Rat::integer(80), &[]).unwrap();
        prop_assert_eq!(sync_time(&traj), traj.sync_time());
    }
}

#[test]
fn export_helpers() {
    let series = vec![WidthReading { time: Some(r(1, 2)), width: r(1, 4), arg_pair: (0, 1) }];
    assert_eq!(width_csv(&series), "t,width\n1/2,1/4\n");
    assert_eq!(branch_width_csv(&[(r(1, 1), 3, Rat::zero())]), "t,branch_id,branch_width\n1/1,3,0/1\n");
    assert_eq!(frame_pgm(&[0, 1, 2, 3], 2, 2, 63), "P2\n2 2\n63\n0 1\n2 3\n");
    assert_eq!(frame_csv(&[0, 1, 2, 3], 2), "0,1\n2,3\n");
}
