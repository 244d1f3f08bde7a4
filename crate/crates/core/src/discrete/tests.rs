use super::*;
use crate::continuous::{initial_standard, simulate, Coupling, EventKind, LogLevel, SimOptions};
use crate::graph::{make_complete, make_path, make_star, make_tree_random};
use crate::phase::{Phase, Rat};
use proptest::prelude::*;

const M: u32 = 64;

fn sync_cfg(n: usize, horizon: u64) -> SystemConfig {
    SystemConfig::new(M, BeatSchedule::synchronous(n, Rat::new(1, M as i64)), horizon)
}

fn with_pulse(phi: u32, sigma: u8) -> DiscreteNodeState {
    DiscreteNodeState { pulse: true, sigma, ..DiscreteNodeState::standard(phi) }
}

#[test]
fn beat_examples() {
    for sigma in 0..3 {
        for mu3 in 0..4 {
            let s = DiscreteNodeState { mu3, sigma, mu2: 1, ..DiscreteNodeState::standard(63) };
            let (t, emit) = a4cm_beat(&s, M, DiscreteRule::default());
            assert!(emit);
            assert_eq!(t.phi, 0);
            assert_eq!(t.mu1.value(), if sigma == 2 { 1 } else { 3 });
            assert_eq!((t.mu2, t.mu3), (0, 0));
            assert_eq!(t.sigma, if sigma == 0 { 0 } else { (sigma + 1) % 3 });
            assert_eq!(t.beta, 0);
        }
    }
    // mu1 = 3 differs from mu3 = 0.
    let (t, emit) = a4cm_beat(&with_pulse(20, 0), M, DiscreteRule::default());
    assert!(!emit);
    assert_eq!((t.phi, t.sigma, t.pulse), (5, 0, false));

    let s = DiscreteNodeState { beta: 7, ..DiscreteNodeState::standard(40) };
    let (t, emit) = a4cm_beat(&s, M, DiscreteRule::default());
    assert!(!emit);
    assert_eq!(t, DiscreteNodeState { phi: 41, beta: 8, ..s });
    let s = DiscreteNodeState { beta: 16, ..s };
    assert_eq!(a4cm_beat(&s, M, DiscreteRule::default()).0.mu2, 1);
}

#[test]
fn beat_pull_shapes() {
    let rule = DiscreteRule::Plain;
    let phi_after = |phi| a4cm_beat(&with_pulse(phi, 0), M, rule).0.phi;
    // Not pulled at 0 or above M/2.
    assert_eq!(phi_after(0), 1);
    assert_eq!(phi_after(33), 34);
    // Pulled to 0 on (0, M/4], shifted by M/4 on (M/4, M/2].
    assert_eq!(phi_after(1), 1);
    assert_eq!(phi_after(16), 1);
    assert_eq!(phi_after(17), 2);
    assert_eq!(phi_after(32), 17);
    // Refractory nodes keep their phase.
    let (t, _) = a4cm_beat(&with_pulse(20, 1), M, DiscreteRule::default());
    assert_eq!(t.phi, 21);
}

#[test]
fn excitation_and_pull_counting() {
    let rule = DiscreteRule::Adaptive(PullCountRule::RunningCount);
    // Third counted pull matches mu1 = 3 only on the fourth pull.
    let mut s = DiscreteNodeState { mu2: 1, beta: 30, ..DiscreteNodeState::standard(40) };
    for expect in [1, 2, 3] {
        s.phi = 30;
        s.pulse = true;
        s = a4cm_beat(&s, M, rule).0;
        assert_eq!((s.mu3, s.sigma), (expect, 0));
    }
    s.phi = 30;
    s.pulse = true;
    s = a4cm_beat(&s, M, rule).0;
    assert_eq!((s.mu3, s.sigma), (3, 1));
    // The counter is cleared on the last beat of the beta cycle.
    let s = DiscreteNodeState { mu2: 1, mu3: 2, beta: M - 1, ..DiscreteNodeState::standard(40) };
    assert_eq!(a4cm_beat(&s, M, rule).0.mu3, 0);
    // Pulls while mu2 = 0 (early in the cycle) are not counted.
    let s = DiscreteNodeState { beta: 3, ..with_pulse(10, 0) };
    let t = a4cm_beat(&s, M, rule).0;
    assert_eq!((t.mu2, t.mu3), (0, 0));
    // The literal gating keeps the count only at beta = M - 1.
    let s = DiscreteNodeState { mu2: 1, mu3: 1, beta: 30, ..with_pulse(10, 0) };
    assert_eq!(a4cm_beat(&s, M, DiscreteRule::Adaptive(PullCountRule::AsWritten)).0.mu3, 0);
    let s = DiscreteNodeState { beta: M - 1, ..s };
    assert_eq!(a4cm_beat(&s, M, DiscreteRule::Adaptive(PullCountRule::AsWritten)).0.mu3, 2);
}

#[test]
fn bad_modulus_rejected() {
    let g = make_path(2).unwrap();
    let mut cfg = sync_cfg(2, 10);
    cfg.m = 30;
    let init = vec![DiscreteNodeState::standard(0); 2];
    assert!(run_system(&g, &cfg, &init).is_err());
    let mut cfg = sync_cfg(2, 10);
    cfg.schedule.offsets[1] = Rat::new(1, 1);
    assert!(run_system(&g, &cfg, &init).is_err());
}

#[test]
fn offset_examples() {
    let g = make_path(2).unwrap();
    assert_eq!(offset(&[7, 7], &g, M), 0);
    assert_eq!(offset(&[5, 4], &g, M), 1);
    assert_eq!(offset(&[63, 0], &g, M), 1);
    assert_eq!(offset_plain(&[63, 0], &g, M), 63);
    assert_eq!(offset_plain(&[5, 4], &g, M), 63);
    assert_eq!(offset_plain(&[5, 5], &g, M), 0);
}

#[test]
fn free_running_examples() {
    let g = make_path(1).unwrap();
    let trace = run_system(&g, &sync_cfg(1, 200), &[DiscreteNodeState::standard(9)]).unwrap();
    assert_eq!(detect_free_running(&trace), Some(0));

    // Star with four leaves started like the continuous counterexample.
    let g = make_star(4).unwrap();
    let init: Vec<_> = [16, 16, 32, 48, 0].into_iter().map(DiscreteNodeState::standard).collect();
    let mut cfg = sync_cfg(5, 100 * M as u64);
    cfg.rule = DiscreteRule::Plain;
    cfg.record.blinks = true;
    let plain = run_system(&g, &cfg, &init).unwrap();
    assert!(plain.blink_beats[0].is_empty());
    assert_eq!(detect_free_running(&plain), None);
    cfg.rule = DiscreteRule::default();
    let adaptive = run_system(&g, &cfg, &init).unwrap();
    assert!(detect_free_running(&adaptive).is_some());

    // Already synchronized: never perturbed.
    let g = make_tree_random(10, 3, 5).unwrap();
    let trace = run_system(&g, &sync_cfg(10, 3 * M as u64), &[DiscreteNodeState::standard(3); 10]).unwrap();
    assert_eq!(detect_free_running(&trace), Some(0));
}

#[test]
fn stop_rule_and_exports() {
    let g = make_complete(2).unwrap();
    let init = vec![DiscreteNodeState::standard(0), DiscreteNodeState::standard(10)];
    let mut cfg = sync_cfg(2, 10_000);
    cfg.stop = StopRule::AfterFreeRunning { extra_beats: 5 };
    cfg.record = Recording { trace: true, blinks: true, offsets: true, frames: vec![0, 3] };
    let t = run_system(&g, &cfg, &init).unwrap();
    assert_eq!(t.beats_run, t.certified_at.unwrap() + 5);
    assert_eq!(t.records.len() as u64, 2 * t.beats_run);
    assert_eq!(t.frames, vec![(0, vec![1, 11]), (3, vec![4, 14])]);
    let first = t.to_jsonl().lines().next().unwrap().to_string();
    assert_eq!(first, r#"{"beat":0,"node":0,"phi":1,"sigma":0,"emitted":false}"#);
    assert!(t.offset_csv().starts_with("beat,offset,offset_plain\n0,10,54\n"));
    assert_eq!(*t.offsets.last().unwrap(), 0);
}

#[test]
fn packing_uses_logarithmic_bits() {
    for m in [4, 8, 64, 256, 1000, 1 << 16] {
        let b = DiscreteNodeState::bit_width(m);
        assert_eq!(b, 2 * (m as f64).log2().ceil() as u32 + 7);
    }
}

proptest! {
    #[test]
    fn pack_roundtrip(seed in 0u64..1000, m_quarter in 1u32..64) {
        let m = 4 * m_quarter;
        let g = make_path(8).unwrap();
        for s in random_discrete_states(&g, m, seed) {
            let x = s.pack(m);
            prop_assert!(x < 1u64 << DiscreteNodeState::bit_width(m));
            prop_assert_eq!(DiscreteNodeState::unpack(x, m), s);
        }
    }

    #[test]
    fn beat_preserves_ranges(seed in 0u64..1000) {
        let g = make_path(16).unwrap();
        for rule in [DiscreteRule::Plain, DiscreteRule::Adaptive(PullCountRule::AsWritten), DiscreteRule::Adaptive(PullCountRule::RunningCount)] {
            for s in random_discrete_states(&g, M, seed) {
                let (t, emit) = a4cm_beat(&s, M, rule);
                prop_assert!(t.validate(M).is_ok());
                prop_assert_eq!(emit, t.phi == 0);
                // Either a free-running step or a jump backwards.
                prop_assert!(t.phi == (s.phi + 1) % M || (t.phi >= 1 && t.phi <= s.phi));
            }
        }
    }
}

/// Blink times of the continuous adaptive coupling against the discrete
/// ones, where a blink at beat `j` happens at continuous time `(j+1)/M`.
fn compare_with_continuous(g: &crate::graph::Graph, grid_phases: &[u32], horizon: i64) {
    let n = g.node_count();
    let phases: Vec<Phase> = grid_phases.iter().map(|&p| Phase::from_frac(p as i64, M as i64)).collect();
    let opts = SimOptions::new(Coupling::AdaptiveFourCoupling).with_log(LogLevel::Phase);
    let traj = simulate(g, &initial_standard(&phases), &opts, &Rat::integer(horizon), &[]).unwrap();
    let mut expected: Vec<(Rat, usize)> =
        traj.phase_events().filter(|e| e.kind == EventKind::Blink).map(|e| (traj.time(e.tick), e.node)).collect();
    expected.sort();

    let mut cfg = sync_cfg(n, horizon as u64 * M as u64);
    cfg.record.blinks = true;
    let init: Vec<_> = grid_phases.iter().map(|&p| DiscreteNodeState::standard(p)).collect();
    let trace = run_system(g, &cfg, &init).unwrap();
    let mut got: Vec<(Rat, usize)> = trace
        .blink_beats
        .iter()
        .enumerate()
        .flat_map(|(v, beats)| beats.iter().map(move |&j| (Rat::new(j as i64 + 1, M as i64), v)))
        .collect();
    got.sort();
    assert_eq!(got, expected);
}

#[test]
fn continuous_consistency_examples() {
    compare_with_continuous(&make_complete(2).unwrap(), &[0, 38], 6);
    compare_with_continuous(&make_path(4).unwrap(), &[8, 40, 16, 63], 20);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn discrete_matches_continuous_on_trees(seed in 0u64..100_000, n in 2usize..14) {
        let g = make_tree_random(n, 3, seed).unwrap();
        let phases: Vec<u32> = crate::continuous::random_phases(n, M as i64, seed ^ 0x5eed)
            .iter()
            .map(|p| p.value().to_ticks(M as i64).unwrap() as u32)
            .collect();
        compare_with_continuous(&g, &phases, 40);
    }

    #[test]
    fn runs_are_deterministic_and_respect_pulse_budget(seed in 0u64..100_000, n in 2usize..20, asynchronous: bool) {
        let g = make_tree_random(n, 5, seed).unwrap();
        let eps = Rat::new(1, M as i64);
        let schedule = if asynchronous { BeatSchedule::asynchronous(n, eps, 8, seed) } else { BeatSchedule::synchronous(n, eps) };
        let mut cfg = SystemConfig::new(M, schedule, 40 * M as u64);
        cfg.record = Recording { trace: false, blinks: true, offsets: true, frames: vec![] };
        let init = random_discrete_states(&g, M, seed);
        let a = run_system(&g, &cfg, &init).unwrap();
        let b = run_system(&g, &cfg, &init).unwrap();
        prop_assert_eq!(&a, &b);
        for beats in &a.blink_beats {
            for w in beats.windows(2) {
                prop_assert!(w[1] - w[0] >= M as u64);
            }
        }
        if let Some(t0) = detect_free_running(&a) {
            for (k, &off) in a.offsets.iter().enumerate().skip((t0 + 3 * M as u64 + 1) as usize) {
                prop_assert!(off <= 1, "offset {} at round {}", off, k);
                if !asynchronous {
                    prop_assert_eq!(off, 0);
                }
            }
        }
    }
}
