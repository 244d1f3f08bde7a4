//! Width, branch width, total phase inhibition, relative phases and
//! synchronization time, all computed exactly from trajectories.

mod relative;

use std::fmt::Write as _;

use crate::continuous::{EventKind, Trajectory};
use crate::graph::{BranchDescriptor, NodeId};
use crate::phase::{lcm_denominators, Phase, Rat};

pub use relative::{relative_replay, relative_view, RelativeView, ReplayEvent};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WidthReading {
    pub time: Option<Rat>,
    pub width: Rat,
    /// A pair of nodes attaining the maximum.
    pub arg_pair: (NodeId, NodeId),
}

/// `max_{u,v} min(delta(u,v), delta(v,u))` on the lattice `Z_L`, with an
/// attaining pair. `L` must be even.
pub fn width_ticks(values: &[i64], l: i64) -> (i64, (NodeId, NodeId)) {
    debug_assert!(l % 2 == 0);
    if values.is_empty() {
        return (0, (0, 0));
    }
    let mut sorted: Vec<(i64, NodeId)> = values.iter().enumerate().map(|(i, &v)| (v.rem_euclid(l), i)).collect();
    sorted.sort_unstable();
    let circ = |a: i64, b: i64| {
        let d = (a - b).rem_euclid(l);
        d.min(l - d)
    };
    let n = sorted.len();
    let mut best = (0, (sorted[0].1, sorted[0].1));
    for &(x, i) in &sorted {
        // The farthest point from x is the one nearest to its antipode.
        let target = (x + l / 2) % l;
        let pos = sorted.partition_point(|&(y, _)| y < target);
        for j in [pos % n, (pos + n - 1) % n] {
            let (y, k) = sorted[j];
            let d = circ(x, y);
            if d > best.0 {
                best = (d, (i.min(k), i.max(k)));
            }
        }
    }
    best
}

/// `1 - (largest gap between consecutive phases)`: the length of the
/// shortest arc containing every value.
pub fn covering_arc_ticks(values: &[i64], l: i64) -> i64 {
    let mut sorted: Vec<i64> = values.iter().map(|v| v.rem_euclid(l)).collect();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() <= 1 {
        return 0;
    }
    let wrap = sorted[0] + l - sorted[sorted.len() - 1];
    let max_gap = sorted.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0).max(wrap);
    l - max_gap
}

fn to_ticks(config: &[Phase]) -> (Vec<i64>, i64) {
    let l = lcm_denominators(4, config.iter().map(Phase::value)).expect("phase denominators fit in i64");
    (config.iter().map(|p| p.value().to_ticks(l).expect("scale covers phase")).collect(), l)
}

/// Pairwise-maximum width of a phase configuration.
pub fn width(config: &[Phase]) -> WidthReading {
    let (ticks, l) = to_ticks(config);
    let (w, pair) = width_ticks(&ticks, l);
    WidthReading { time: None, width: Rat::from_ticks(w, l), arg_pair: pair }
}

/// Length of the shortest arc containing all phases.
pub fn covering_arc_width(config: &[Phase]) -> Rat {
    let (ticks, l) = to_ticks(config);
    Rat::from_ticks(covering_arc_ticks(&ticks, l), l)
}

/// Phase values on the trajectory's tick lattice at tick `t`, reconstructed
/// from the initial state and the blink/pull log (left-continuous: jumps at
/// `t` itself are not yet applied). Needs a log level of at least `Phase`.
pub fn phases_at_tick(traj: &Trajectory, t: i64) -> Vec<i64> {
    let l = traj.scale();
    let mut origin: Vec<i64> = traj.initial_snaps().iter().map(|s| -s.phi).collect();
    for e in traj.phase_events() {
        if e.tick >= t {
            break;
        }
        origin[e.node] = e.tick - e.after.phi;
    }
    origin.iter().map(|o| (t - o).rem_euclid(l)).collect()
}

pub fn phases_at(traj: &Trajectory, t: &Rat) -> Vec<Phase> {
    let tick = t.to_ticks(traj.scale()).expect("time on the trajectory lattice");
    phases_at_tick(traj, tick).into_iter().map(|x| Phase::new(traj.time(x))).collect()
}

/// Width series at every probe time.
pub fn width_series(traj: &Trajectory) -> Vec<WidthReading> {
    let l = traj.scale();
    traj.probe_snaps()
        .iter()
        .map(|(t, snaps)| {
            let vals: Vec<i64> = snaps.iter().map(|s| s.phi).collect();
            let (w, pair) = width_ticks(&vals, l);
            WidthReading { time: Some(traj.time(*t)), width: Rat::from_ticks(w, l), arg_pair: pair }
        })
        .collect()
}

/// Width of the configuration restricted to the center and leaves of `b`.
pub fn branch_width(traj: &Trajectory, b: &BranchDescriptor, t: &Rat) -> Rat {
    let all = phases_at(traj, t);
    let restricted: Vec<Phase> = b.nodes().map(|v| all[v].clone()).collect();
    width(&restricted).width
}

/// Sum of the phase jumps `phi(s+) - phi(s)` of `v` over pull instants
/// `s` in `(a, b]`.
pub fn total_phase_inhibition(traj: &Trajectory, v: NodeId, a: &Rat, b: &Rat) -> Rat {
    let l = traj.scale();
    let (a, b) = (a.to_ticks(l).expect("lattice time"), b.to_ticks(l).expect("lattice time"));
    let ticks = total_phase_inhibition_ticks(traj, v, a, b);
    Rat::from_ticks(ticks, l)
}

pub fn total_phase_inhibition_ticks(traj: &Trajectory, v: NodeId, a: i64, b: i64) -> i64 {
    traj.events()
        .iter()
        .filter(|e| e.node == v && e.kind == EventKind::Pulled && a < e.tick && e.tick <= b)
        .map(|e| e.after.phi - e.before.phi)
        .sum()
}

/// Earliest instant from which all phases coincide through the end of the
/// trajectory, recomputed by replaying the blink/pull log.
pub fn sync_time(traj: &Trajectory) -> Option<Rat> {
    sync_tick_replayed(traj).map(|t| traj.time(t))
}

pub fn sync_tick_replayed(traj: &Trajectory) -> Option<i64> {
    let mut origin: Vec<i64> = traj.initial_snaps().iter().map(|s| -s.phi).collect();
    let l = traj.scale();
    let all_equal = |o: &[i64]| o.iter().all(|x| (x - o[0]).rem_euclid(l) == 0);
    let mut since = if all_equal(&origin) { Some(0) } else { None };
    let events: Vec<_> = traj.phase_events().collect();
    let mut i = 0;
    while i < events.len() {
        let t = events[i].tick;
        while i < events.len() && events[i].tick == t {
            origin[events[i].node] = t - events[i].after.phi;
            i += 1;
        }
        match (all_equal(&origin), since) {
            (true, None) => since = Some(t),
            (false, Some(_)) => since = None,
            _ => {}
        }
    }
    since
}

/// Checks that every node blinks at most once in any `(t, t+1]` and at
/// least once in any `(t, t+5]` inside the simulated window. Returns the
/// first offending node with a description.
pub fn blink_frequency_violation(traj: &Trajectory) -> Option<(NodeId, String)> {
    let l = traj.scale();
    let end = traj.end_tick();
    let mut blinks: Vec<Vec<i64>> = vec![Vec::new(); traj.node_count()];
    for e in traj.events().iter().filter(|e| e.kind == EventKind::Blink) {
        blinks[e.node].push(e.tick);
    }
    for (v, b) in blinks.iter().enumerate() {
        let mut prev = 0;
        for &t in b {
            if t - prev > 5 * l {
                return Some((v, format!("no blink in ({}, {}]", traj.time(prev), traj.time(t))));
            }
            if t - prev < l && prev > 0 {
                return Some((v, format!("blinks at {} and {}", traj.time(prev), traj.time(t))));
            }
            prev = t;
        }
        if end - prev >= 5 * l {
            return Some((v, format!("no blink after {}", traj.time(prev))));
        }
    }
    None
}

/// CSV `t,width` over the probe series.
pub fn width_csv(series: &[WidthReading]) -> String {
    let mut out = String::from("t,width\n");
    for r in series {
        let t = r.time.as_ref().map(Rat::to_string).unwrap_or_default();
        let _ = writeln!(out, "{t},{}", r.width);
    }
    out
}

/// CSV `t,branch_id,branch_width`.
pub fn branch_width_csv(rows: &[(Rat, usize, Rat)]) -> String {
    let mut out = String::from("t,branch_id,branch_width\n");
    for (t, id, w) in rows {
        let _ = writeln!(out, "{t},{id},{w}");
    }
    out
}

/// Plain (ASCII) PGM image of a `w x h` row-major matrix.
pub fn frame_pgm(values: &[u32], w: usize, h: usize, maxval: u32) -> String {
    assert_eq!(values.len(), w * h, "frame size mismatch");
    let mut out = format!("P2\n{w} {h}\n{maxval}\n");
    for row in values.chunks(w) {
        let line: Vec<String> = row.iter().map(u32::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// The same matrix as comma-separated rows.
pub fn frame_csv(values: &[u32], w: usize) -> String {
    let mut out = String::new();
    for row in values.chunks(w) {
        let line: Vec<String> = row.iter().map(u32::to_string).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests;
