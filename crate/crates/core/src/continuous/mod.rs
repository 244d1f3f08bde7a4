//! Exact event-driven simulation of the 4-coupling and the adaptive
//! 4-coupling.
//!
//! Every quantity the dynamics can produce lies on the lattice `(1/L)Z`, where
//! `L` is the lcm of 4 and the denominators of the inputs: pulls subtract
//! exactly 1/4, everything else copies or resets values. The engine therefore
//! runs on `i64` ticks and converts to [`Rat`] only at the API boundary.

mod engine;
mod export;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::graph::{Graph, NodeId};
use crate::phase::{lcm_denominators, JointState, Mu1, Phase, Rat};

pub use engine::{Instant, World};
pub use export::{events_to_jsonl, snapshot_to_csv};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Coupling {
    FourCoupling,
    AdaptiveFourCoupling,
}

/// How a pull with `mu2 = 1` updates the pull counter `mu3`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PullCountRule {
    /// `mu3 <- [mu3 + 1(mu3 != 3)] * 1(beta = 1)`, literally.
    AsWritten,
    /// `mu3 <- min(mu3 + 1, 3)`, reset to 0 when the pull coincides with
    /// `beta = 1`: a running count of pulls since `beta` last wrapped.
    #[default]
    RunningCount,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LogLevel {
    /// No per-event log; only sync time and probes.
    Off,
    /// Blinks, pulls and excitations.
    Phase,
    /// Everything, including pulse receptions without pull and `beta` events.
    #[default]
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimOptions {
    pub coupling: Coupling,
    pub pull_rule: PullCountRule,
    pub log: LogLevel,
    /// Stop one time unit after synchrony (and after the last probe) instead
    /// of running to the horizon.
    pub stop_after_sync: bool,
}

impl SimOptions {
    pub fn new(coupling: Coupling) -> Self {
        SimOptions { coupling, pull_rule: PullCountRule::default(), log: LogLevel::default(), stop_after_sync: false }
    }

    pub fn with_log(mut self, log: LogLevel) -> Self {
        self.log = log;
        self
    }

    pub fn with_rule(mut self, rule: PullCountRule) -> Self {
        self.pull_rule = rule;
        self
    }

    pub fn stopping_after_sync(mut self) -> Self {
        self.stop_after_sync = true;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    Blink,
    PulseReceived,
    Pulled,
    Excited,
    BetaQuarter,
    BetaOne,
}

/// Node state on the tick lattice. `phi` and `beta` lie in `[0, L]`; the
/// value `L` (= 1) only appears as the left limit at a blink or wrap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NodeSnap {
    pub phi: i64,
    pub beta: i64,
    pub mu1: Mu1,
    pub mu2: u8,
    pub mu3: u8,
    pub sigma: u8,
}

impl NodeSnap {
    pub fn to_joint(&self, scale: i64) -> JointState {
        JointState {
            phi: Phase::new(Rat::from_ticks(self.phi, scale)),
            beta: Phase::new(Rat::from_ticks(self.beta, scale)),
            mu1: self.mu1,
            mu2: self.mu2,
            mu3: self.mu3,
            sigma: self.sigma,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SimEvent {
    pub tick: i64,
    pub node: NodeId,
    pub kind: EventKind,
    pub before: NodeSnap,
    pub after: NodeSnap,
}

/// Result of [`simulate`]: the event log, probe samples and synchrony data,
/// all on the tick lattice of scale [`Trajectory::scale`].
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub(crate) scale: i64,
    pub(crate) options: SimOptions,
    pub(crate) initial: Vec<NodeSnap>,
    pub(crate) events: Vec<SimEvent>,
    pub(crate) probes: Vec<(i64, Vec<NodeSnap>)>,
    pub(crate) sync_tick: Option<i64>,
    pub(crate) end_tick: i64,
    pub(crate) horizon_tick: i64,
    pub(crate) blink_counts: Vec<u64>,
}

impl Trajectory {
    pub fn scale(&self) -> i64 {
        self.scale
    }

    pub fn options(&self) -> &SimOptions {
        &self.options
    }

    pub fn node_count(&self) -> usize {
        self.initial.len()
    }

    pub fn time(&self, tick: i64) -> Rat {
        Rat::from_ticks(tick, self.scale)
    }

    pub fn initial(&self) -> Vec<JointState> {
        self.initial.iter().map(|s| s.to_joint(self.scale)).collect()
    }

    pub fn initial_snaps(&self) -> &[NodeSnap] {
        &self.initial
    }

    pub fn events(&self) -> &[SimEvent] {
        &self.events
    }

    /// `(time, configuration)` at each probe, left-continuous.
    pub fn probes(&self) -> impl Iterator<Item = (Rat, Vec<JointState>)> + '_ {
        self.probes.iter().map(|(t, snaps)| (self.time(*t), snaps.iter().map(|s| s.to_joint(self.scale)).collect()))
    }

    pub fn probe_snaps(&self) -> &[(i64, Vec<NodeSnap>)] {
        &self.probes
    }

    /// Earliest instant from which all phases coincide, as recorded by the
    /// engine.
    pub fn sync_time(&self) -> Option<Rat> {
        self.sync_tick.map(|t| self.time(t))
    }

    pub fn sync_tick(&self) -> Option<i64> {
        self.sync_tick
    }

    /// Last instant actually simulated (the horizon unless stopped early).
    pub fn end_tick(&self) -> i64 {
        self.end_tick
    }

    pub fn horizon_tick(&self) -> i64 {
        self.horizon_tick
    }

    pub fn blink_count(&self, v: NodeId) -> u64 {
        self.blink_counts[v]
    }

    /// Blink instants of `v` in increasing order (needs a phase-level log).
    pub fn blink_ticks(&self, v: NodeId) -> Vec<i64> {
        self.events.iter().filter(|e| e.node == v && e.kind == EventKind::Blink).map(|e| e.tick).collect()
    }

    /// Blink and pull events only, the part of the log that determines the
    /// phase trajectory.
    pub fn phase_events(&self) -> impl Iterator<Item = &SimEvent> + '_ {
        self.events.iter().filter(|e| matches!(e.kind, EventKind::Blink | EventKind::Pulled))
    }
}

/// Runs the dynamics on `g` up to `horizon`, sampling at `probes`.
pub fn simulate(
    g: &Graph,
    initial: &[JointState],
    options: &SimOptions,
    horizon: &Rat,
    probes: &[Rat],
) -> Result<Trajectory, SimError> {
    if !(horizon > &Rat::zero()) {
        return Err(SimError::NonPositiveHorizon);
    }
    let mut world = World::new(g, initial, options, horizon, probes)?;
    world.run();
    Ok(world.into_trajectory())
}

/// `beta = 0`, `mu = (3, 0, 0)`, `sigma = 0` at every node.
pub fn initial_standard(phases: &[Phase]) -> Vec<JointState> {
    phases.iter().cloned().map(JointState::standard).collect()
}

/// Uniform random joint configuration with `phi`, `beta` on the `1/grid`
/// lattice.
pub fn random_joint_config(g: &Graph, grid: i64, seed: u64) -> Result<Vec<JointState>, SimError> {
    if grid <= 0 || grid % 4 != 0 {
        return Err(SimError::BadGrid(grid));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..g.node_count())
        .map(|_| JointState {
            phi: Phase::from_frac(rng.gen_range(0..grid), grid),
            beta: Phase::from_frac(rng.gen_range(0..grid), grid),
            mu1: if rng.gen_bool(0.5) { Mu1::One } else { Mu1::Three },
            mu2: rng.gen_range(0..=1),
            mu3: rng.gen_range(0..=3),
            sigma: rng.gen_range(0..=2),
        })
        .collect())
}

/// Uniform random phases on the `1/grid` lattice.
pub fn random_phases(n: usize, grid: i64, seed: u64) -> Vec<Phase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| Phase::from_frac(rng.gen_range(0..grid), grid)).collect()
}

pub(crate) fn lattice_scale(initial: &[JointState], extra: &[&Rat]) -> Result<i64, SimError> {
    let values = initial.iter().flat_map(|s| [s.phi.value(), s.beta.value()]).chain(extra.iter().copied());
    lcm_denominators(4, values).ok_or(SimError::LatticeTooFine)
}
