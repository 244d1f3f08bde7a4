use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use super::{lattice_scale, Coupling, EventKind, LogLevel, NodeSnap, PullCountRule, SimEvent, SimOptions, Trajectory};
use crate::error::SimError;
use crate::graph::{Graph, NodeId};
use crate::phase::{JointState, Mu1, Rat};

/// Internal per-node state: `phi(t) = t - phi_origin`, `beta(t) = t - beta_origin`.
#[derive(Clone, Copy, Debug)]
struct Node {
    phi_origin: i64,
    beta_origin: i64,
    mu1: Mu1,
    mu2: u8,
    mu3: u8,
    sigma: u8,
}

/// The events of one instant, before they are applied.
#[derive(Clone, Debug, Default)]
pub struct Instant {
    pub tick: i64,
    pub blinkers: Vec<NodeId>,
    /// Non-blinking nodes with a blinking neighbor.
    pub receivers: Vec<NodeId>,
    pub beta_events: Vec<NodeId>,
}

/// Mutable simulation world. [`World::peek`] computes the next instant and
/// [`World::apply`] performs its jumps.
pub struct World<'g> {
    g: &'g Graph,
    opts: SimOptions,
    scale: i64,
    now: i64,
    horizon: i64,
    nodes: Vec<Node>,
    version: Vec<u32>,
    heap: BinaryHeap<Reverse<(i64, NodeId, u32)>>,
    origins: BTreeMap<i64, usize>,
    probes: Vec<i64>,
    next_probe: usize,
    initial: Vec<NodeSnap>,
    events: Vec<SimEvent>,
    samples: Vec<(i64, Vec<NodeSnap>)>,
    sync_tick: Option<i64>,
    blink_counts: Vec<u64>,
    mark: Vec<u8>,
}

const BLINK: u8 = 1;
const RECEIVED: u8 = 2;
const CANDIDATE: u8 = 4;

impl<'g> World<'g> {
    pub fn new(
        g: &'g Graph,
        initial: &[JointState],
        opts: &SimOptions,
        horizon: &Rat,
        probes: &[Rat],
    ) -> Result<Self, SimError> {
        if initial.len() != g.node_count() {
            return Err(SimError::ConfigSize { expected: g.node_count(), got: initial.len() });
        }
        for s in initial {
            s.validate()?;
        }
        let extra: Vec<&Rat> = std::iter::once(horizon).chain(probes).collect();
        let scale = lattice_scale(initial, &extra)?;
        let ticks = |r: &Rat| r.to_ticks(scale).ok_or(SimError::LatticeTooFine);
        let horizon = ticks(horizon)?;
        horizon.checked_add(2 * scale).ok_or(SimError::LatticeTooFine)?;
        let mut probe_ticks = probes.iter().map(ticks).collect::<Result<Vec<_>, _>>()?;
        probe_ticks.sort_unstable();
        let nodes: Vec<Node> = initial
            .iter()
            .map(|s| Node {
                phi_origin: -ticks(s.phi.value()).expect("scale covers phi"),
                beta_origin: -ticks(s.beta.value()).expect("scale covers beta"),
                mu1: s.mu1,
                mu2: s.mu2,
                mu3: s.mu3,
                sigma: s.sigma,
            })
            .collect();
        let n = nodes.len();
        let mut w = World {
            g,
            opts: *opts,
            scale,
            now: 0,
            horizon,
            nodes,
            version: vec![0; n],
            heap: BinaryHeap::with_capacity(2 * n),
            origins: BTreeMap::new(),
            probes: probe_ticks,
            next_probe: 0,
            initial: Vec::new(),
            events: Vec::new(),
            samples: Vec::new(),
            sync_tick: None,
            blink_counts: vec![0; n],
            mark: vec![0; n],
        };
        w.initial = (0..n).map(|v| w.snap(v)).collect();
        for v in 0..n {
            *w.origins.entry(w.nodes[v].phi_origin).or_default() += 1;
            w.schedule(v);
        }
        if w.origins.len() <= 1 {
            w.sync_tick = Some(0);
        }
        Ok(w)
    }

    pub fn scale(&self) -> i64 {
        self.scale
    }

    pub fn now(&self) -> Rat {
        Rat::from_ticks(self.now, self.scale)
    }

    /// Left-continuous state of `v` at the current instant.
    pub fn snap(&self, v: NodeId) -> NodeSnap {
        let n = &self.nodes[v];
        NodeSnap {
            phi: self.now - n.phi_origin,
            // The plain 4-coupling carries the auxiliary variables along unchanged.
            beta: if self.adaptive() { self.now - n.beta_origin } else { -n.beta_origin },
            mu1: n.mu1,
            mu2: n.mu2,
            mu3: n.mu3,
            sigma: n.sigma,
        }
    }

    pub fn state(&self) -> Vec<JointState> {
        (0..self.nodes.len()).map(|v| self.snap(v).to_joint(self.scale)).collect()
    }

    pub fn is_synchronized(&self) -> bool {
        self.origins.len() <= 1
    }

    fn adaptive(&self) -> bool {
        self.opts.coupling == Coupling::AdaptiveFourCoupling
    }

    fn next_tick(&self, v: NodeId) -> i64 {
        let n = &self.nodes[v];
        let phi_next = n.phi_origin + self.scale;
        if !self.adaptive() {
            return phi_next;
        }
        let quarter = n.beta_origin + self.scale / 4;
        let beta_next = if quarter > self.now { quarter } else { n.beta_origin + self.scale };
        phi_next.min(beta_next)
    }

    fn schedule(&mut self, v: NodeId) {
        self.version[v] = self.version[v].wrapping_add(1);
        let t = self.next_tick(v);
        self.heap.push(Reverse((t, v, self.version[v])));
    }

    fn peek_tick(&mut self) -> Option<i64> {
        while let Some(&Reverse((t, v, ver))) = self.heap.peek() {
            if ver == self.version[v] {
                return Some(t);
            }
            self.heap.pop();
        }
        None
    }

    /// The next instant's events, without applying them.
    pub fn peek(&mut self) -> Option<Instant> {
        let t = self.peek_tick()?;
        let mut candidates: Vec<NodeId> = self
            .heap
            .iter()
            .filter(|Reverse((et, v, ver))| *et == t && *ver == self.version[*v])
            .map(|Reverse((_, v, _))| *v)
            .collect();
        candidates.sort_unstable();
        Some(self.classify(t, &candidates))
    }

    fn classify(&mut self, t: i64, candidates: &[NodeId]) -> Instant {
        let mut inst = Instant { tick: t, ..Default::default() };
        for &v in candidates {
            let n = self.nodes[v];
            if n.phi_origin + self.scale == t {
                inst.blinkers.push(v);
                self.mark[v] |= BLINK;
            }
            if self.adaptive() {
                let b = t - n.beta_origin;
                if b == self.scale || b == self.scale / 4 {
                    inst.beta_events.push(v);
                }
            }
        }
        for &b in &inst.blinkers {
            for &u in self.g.neighbors(b) {
                if self.mark[u] & (BLINK | RECEIVED) == 0 {
                    self.mark[u] |= RECEIVED;
                    inst.receivers.push(u);
                }
            }
        }
        inst.receivers.sort_unstable();
        for &v in inst.blinkers.iter().chain(&inst.receivers) {
            self.mark[v] = 0;
        }
        inst
    }

    /// Pops and applies the next instant if it is within the horizon.
    pub fn step(&mut self) -> Option<Instant> {
        let t = self.peek_tick()?;
        if t > self.horizon {
            return None;
        }
        let mut candidates = Vec::new();
        while let Some(&Reverse((et, v, ver))) = self.heap.peek() {
            if et != t {
                break;
            }
            self.heap.pop();
            if ver == self.version[v] && self.mark[v] & CANDIDATE == 0 {
                self.mark[v] |= CANDIDATE;
                candidates.push(v);
            }
        }
        for &v in &candidates {
            self.mark[v] = 0;
        }
        candidates.sort_unstable();
        self.sample_probes_through(t);
        let inst = self.classify(t, &candidates);
        self.apply(&inst);
        Some(inst)
    }

    fn sample_probes_through(&mut self, t: i64) {
        while self.next_probe < self.probes.len() && self.probes[self.next_probe] <= t {
            let p = self.probes[self.next_probe];
            let saved = self.now;
            self.now = p;
            let snaps = (0..self.nodes.len()).map(|v| self.snap(v)).collect();
            self.now = saved;
            self.samples.push((p, snaps));
            self.next_probe += 1;
        }
    }

    /// Applies the jumps of one instant. All decisions use the pre-instant
    /// state, so the per-node updates are independent.
    pub fn apply(&mut self, inst: &Instant) {
        let t = inst.tick;
        debug_assert!(t >= self.now);
        self.now = t;
        let was_synced = self.is_synchronized();
        let mut touched: Vec<NodeId> =
            inst.blinkers.iter().chain(&inst.receivers).chain(&inst.beta_events).copied().collect();
        touched.sort_unstable();
        touched.dedup();
        for &v in &inst.blinkers {
            self.mark[v] |= BLINK;
        }
        for &v in &inst.receivers {
            self.mark[v] |= RECEIVED;
        }
        let mut pending: Vec<SimEvent> = Vec::new();
        for &v in &touched {
            let blink = self.mark[v] & BLINK != 0;
            let received = self.mark[v] & RECEIVED != 0;
            self.mark[v] = 0;
            self.update_node(v, blink, received, &mut pending);
        }
        // Blinks first within an instant, then everything else by node id.
        pending.sort_by_key(|e| (e.kind != EventKind::Blink, e.node));
        self.events.extend(pending);
        let synced = self.is_synchronized();
        assert!(!was_synced || synced, "synchrony was lost at tick {t}");
        if synced && !was_synced {
            self.sync_tick = Some(t);
        }
    }

    fn update_node(&mut self, v: NodeId, blink: bool, received: bool, log: &mut Vec<SimEvent>) {
        let l = self.scale;
        let t = self.now;
        let before = self.snap(v);
        let x = before.phi;
        let b = before.beta;
        debug_assert!((0..=l).contains(&x));
        let pulled = received && 0 < x && x <= l / 2;
        assert!(!(blink && pulled), "node {v} both blinks and is pulled");
        let adaptive = self.adaptive();
        debug_assert!(!adaptive || (0..=l).contains(&b));
        let beta_one = adaptive && b == l;
        let beta_quarter = adaptive && b == l / 4;
        let rule = self.opts.pull_rule;
        let old_origin = self.nodes[v].phi_origin;
        let mut excited = false;
        let node = &mut self.nodes[v];
        let f0 = |x: i64| {
            if x <= l / 4 {
                0
            } else if x <= l / 2 {
                x - l / 4
            } else {
                x
            }
        };

        let primary = if blink {
            node.phi_origin = t;
            if adaptive {
                node.beta_origin = t;
                node.mu1 = if node.sigma == 2 { Mu1::One } else { Mu1::Three };
                node.mu2 = 0;
                node.mu3 = 0;
                node.sigma = (node.sigma + u8::from(node.sigma != 0)) % 3;
            }
            Some(EventKind::Blink)
        } else if beta_one && !pulled {
            node.beta_origin = t;
            node.mu2 = 1;
            node.mu3 = 0;
            None
        } else if beta_quarter && !pulled {
            node.mu2 = 1;
            None
        } else if pulled {
            if !adaptive {
                node.phi_origin = t - f0(x);
            } else {
                let new_x = if node.sigma != 0 { x } else { f0(x) };
                node.phi_origin = t - new_x;
                if node.sigma == 0 && node.mu1.value() == node.mu3 {
                    node.sigma = 1;
                    excited = true;
                }
                if node.mu2 == 0 {
                    node.mu2 = u8::from(beta_quarter);
                    node.mu3 = u8::from(beta_quarter);
                } else {
                    node.mu3 = match rule {
                        PullCountRule::AsWritten => (node.mu3 + u8::from(node.mu3 != 3)) * u8::from(beta_one),
                        PullCountRule::RunningCount if beta_one => 0,
                        PullCountRule::RunningCount => (node.mu3 + 1).min(3),
                    };
                }
                if beta_one {
                    node.beta_origin = t;
                }
            }
            Some(EventKind::Pulled)
        } else {
            None
        };
        let new_origin = node.phi_origin;

        if new_origin != old_origin {
            let c = self.origins.get_mut(&old_origin).expect("origin tracked");
            *c -= 1;
            if *c == 0 {
                self.origins.remove(&old_origin);
            }
            *self.origins.entry(new_origin).or_default() += 1;
        }
        if blink {
            self.blink_counts[v] += 1;
        }
        self.schedule(v);

        let level = self.opts.log;
        if level == LogLevel::Off {
            return;
        }
        let after = self.snap(v);
        let mut push = |kind| log.push(SimEvent { tick: t, node: v, kind, before, after });
        if let Some(kind) = primary {
            push(kind);
        }
        if excited {
            push(EventKind::Excited);
        }
        if level == LogLevel::Full {
            if received && !pulled {
                push(EventKind::PulseReceived);
            }
            if !blink && !pulled {
                if beta_one {
                    push(EventKind::BetaOne);
                } else if beta_quarter {
                    push(EventKind::BetaQuarter);
                }
            }
        }
    }

    fn stop_tick(&self) -> i64 {
        match (self.opts.stop_after_sync, self.sync_tick) {
            (true, Some(s)) => {
                let last_probe = self.probes.last().copied().unwrap_or(0);
                (s + self.scale).max(last_probe).min(self.horizon)
            }
            _ => self.horizon,
        }
    }

    pub fn run(&mut self) {
        loop {
            match self.peek_tick() {
                Some(t) if t <= self.stop_tick() => {
                    self.step();
                }
                _ => break,
            }
        }
        let end = self.stop_tick();
        self.sample_probes_through(end);
        self.now = end;
    }

    pub fn into_trajectory(self) -> Trajectory {
        Trajectory {
            scale: self.scale,
            options: self.opts,
            initial: self.initial,
            events: self.events,
            probes: self.samples,
            sync_tick: self.sync_tick,
            end_tick: self.now,
            horizon_tick: self.horizon,
            blink_counts: self.blink_counts,
        }
    }
}
