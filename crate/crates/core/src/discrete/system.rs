use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{a4cm_beat, check_modulus, DiscreteNodeState, DiscreteRule};
use crate::error::SimError;
use crate::graph::{Graph, NodeId};
use crate::phase::{lcm_denominators, Rat};

/// Node `v` beats at times `offsets[v] + k * epsilon`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeatSchedule {
    pub epsilon: Rat,
    pub offsets: Vec<Rat>,
}

impl BeatSchedule {
    pub fn synchronous(n: usize, epsilon: Rat) -> Self {
        BeatSchedule { epsilon, offsets: vec![Rat::zero(); n] }
    }

    /// Offsets drawn uniformly from `{0, 1/grid, ..., (grid-1)/grid} * epsilon`.
    pub fn asynchronous(n: usize, epsilon: Rat, grid: u32, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let offsets =
            (0..n).map(|_| &Rat::new(rng.gen_range(0..grid.max(1)) as i64, grid.max(1) as i64) * &epsilon).collect();
        BeatSchedule { epsilon, offsets }
    }

    pub fn is_synchronous(&self) -> bool {
        self.offsets.windows(2).all(|w| w[0] == w[1])
    }

    pub fn validate(&self, n: usize) -> Result<(), SimError> {
        if self.epsilon <= Rat::zero() {
            return Err(SimError::BadSchedule("epsilon must be positive".into()));
        }
        if self.offsets.len() != n {
            return Err(SimError::ConfigSize { expected: n, got: self.offsets.len() });
        }
        if let Some(o) = self.offsets.iter().find(|o| o.is_negative() || **o >= self.epsilon) {
            return Err(SimError::BadSchedule(format!("offset {o} outside [0, epsilon)")));
        }
        Ok(())
    }

    /// Groups of nodes beating at the same instant, in time order within
    /// one round; ties are listed by ascending node id.
    pub(crate) fn batches(&self) -> Result<Vec<Vec<NodeId>>, SimError> {
        let scale = lcm_denominators(1, self.offsets.iter()).ok_or(SimError::LatticeTooFine)?;
        let mut keyed: Vec<(i64, NodeId)> = self
            .offsets
            .iter()
            .enumerate()
            .map(|(v, o)| o.to_ticks(scale).map(|t| (t, v)).ok_or(SimError::LatticeTooFine))
            .collect::<Result<_, _>>()?;
        keyed.sort_unstable();
        let mut out: Vec<Vec<NodeId>> = Vec::new();
        let mut last = None;
        for (t, v) in keyed {
            if last != Some(t) {
                out.push(Vec::new());
                last = Some(t);
            }
            out.last_mut().expect("pushed").push(v);
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopRule {
    /// Run all `horizon_beats` rounds.
    #[default]
    Horizon,
    /// Stop `extra_beats` rounds after the free-running condition is
    /// certified, or at the horizon.
    AfterFreeRunning { extra_beats: u64 },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recording {
    pub trace: bool,
    pub blinks: bool,
    pub offsets: bool,
    /// Rounds after which the phase vector is saved.
    pub frames: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub m: u32,
    pub rule: DiscreteRule,
    pub schedule: BeatSchedule,
    pub horizon_beats: u64,
    pub stop: StopRule,
    pub record: Recording,
}

impl SystemConfig {
    pub fn new(m: u32, schedule: BeatSchedule, horizon_beats: u64) -> Self {
        SystemConfig {
            m,
            rule: DiscreteRule::default(),
            schedule,
            horizon_beats,
            stop: StopRule::Horizon,
            record: Recording::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub beat: u64,
    pub node: NodeId,
    pub phi: u32,
    pub sigma: u8,
    pub emitted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscreteTrace {
    pub m: u32,
    /// Number of completed rounds (every node beat once per round).
    pub beats_run: u64,
    /// Last round in which some node's phase did not advance by exactly one.
    pub last_perturbed: Option<u64>,
    /// Round at which the free-running condition was certified: no node
    /// perturbed and no node refractory for `M` consecutive rounds.
    pub certified_at: Option<u64>,
    pub pulses: Vec<u64>,
    pub blink_beats: Vec<Vec<u64>>,
    /// Per round, the largest circular offset seen after any beat instant.
    pub offsets: Vec<u32>,
    pub offsets_plain: Vec<u32>,
    pub records: Vec<TraceRecord>,
    pub frames: Vec<(u64, Vec<u32>)>,
    pub final_states: Vec<DiscreteNodeState>,
}

impl DiscreteTrace {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("plain record"));
            out.push('\n');
        }
        out
    }

    /// CSV `beat,offset,offset_plain`.
    pub fn offset_csv(&self) -> String {
        let mut out = String::from("beat,offset,offset_plain\n");
        for (k, (a, b)) in self.offsets.iter().zip(&self.offsets_plain).enumerate() {
            let _ = writeln!(out, "{k},{a},{b}");
        }
        out
    }
}

/// Maximum over edges of the circular distance `min(r, M - r)`,
/// `r = (phi_u - phi_v) mod M`.
pub fn offset(phis: &[u32], g: &Graph, m: u32) -> u32 {
    g.edges()
        .map(|(u, v)| {
            let r = (phis[u] + m - phis[v]) % m;
            r.min(m - r)
        })
        .max()
        .unwrap_or(0)
}

/// Maximum over ordered neighbor pairs of the plain residue
/// `(phi_u - phi_v) mod M`.
pub fn offset_plain(phis: &[u32], g: &Graph, m: u32) -> u32 {
    g.edges().map(|(u, v)| ((phis[u] + m - phis[v]) % m).max((phis[v] + m - phis[u]) % m)).max().unwrap_or(0)
}

/// First round from which every node advances by exactly one each beat,
/// provided the run certified that this lasts forever.
pub fn detect_free_running(trace: &DiscreteTrace) -> Option<u64> {
    trace.certified_at?;
    Some(trace.last_perturbed.map_or(0, |k| k + 1))
}

/// Runs the beat-driven system. Pulses emitted at an instant are delivered
/// to every neighbor at once and read at the receiver's next beat.
pub fn run_system(g: &Graph, cfg: &SystemConfig, init: &[DiscreteNodeState]) -> Result<DiscreteTrace, SimError> {
    let n = g.node_count();
    let m = cfg.m;
    check_modulus(m)?;
    if init.len() != n {
        return Err(SimError::ConfigSize { expected: n, got: init.len() });
    }
    for s in init {
        s.validate(m)?;
    }
    cfg.schedule.validate(n)?;
    let batches = cfg.schedule.batches()?;
    let rec = &cfg.record;
    let adaptive = matches!(cfg.rule, DiscreteRule::Adaptive(_));

    let mut states = init.to_vec();
    let mut trace = DiscreteTrace {
        m,
        beats_run: 0,
        last_perturbed: None,
        certified_at: None,
        pulses: vec![0; n],
        blink_beats: vec![Vec::new(); n],
        offsets: Vec::new(),
        offsets_plain: Vec::new(),
        records: Vec::new(),
        frames: Vec::new(),
        final_states: Vec::new(),
    };
    let mut last_disturbed: Option<u64> = None;
    let mut emitters = Vec::new();
    let mut phis = vec![0u32; n];
    let mut stop_at = cfg.horizon_beats;

    let mut k = 0;
    while k < stop_at {
        let (mut off, mut off_plain) = (0, 0);
        for batch in &batches {
            emitters.clear();
            for &v in batch {
                let pre = states[v];
                let (post, emit) = a4cm_beat(&pre, m, cfg.rule);
                let perturbed = post.phi != (pre.phi + 1) % m;
                if perturbed {
                    trace.last_perturbed = Some(k);
                }
                if perturbed || (adaptive && pre.sigma != 0) {
                    last_disturbed = Some(k);
                }
                if emit {
                    emitters.push(v);
                    trace.pulses[v] += 1;
                    if rec.blinks {
                        trace.blink_beats[v].push(k);
                    }
                }
                if rec.trace {
                    trace.records.push(TraceRecord {
                        beat: k,
                        node: v,
                        phi: post.phi,
                        sigma: post.sigma,
                        emitted: emit,
                    });
                }
                states[v] = post;
            }
            for &v in &emitters {
                for &u in g.neighbors(v) {
                    states[u].pulse = true;
                }
            }
            if rec.offsets {
                for (p, s) in phis.iter_mut().zip(&states) {
                    *p = s.phi;
                }
                off = off.max(offset(&phis, g, m));
                off_plain = off_plain.max(offset_plain(&phis, g, m));
            }
        }
        if rec.offsets {
            trace.offsets.push(off);
            trace.offsets_plain.push(off_plain);
        }
        if rec.frames.contains(&k) {
            trace.frames.push((k, states.iter().map(|s| s.phi).collect()));
        }
        k += 1;
        // With everyone rested and unperturbed for a whole period, the
        // pulse pattern repeats every M rounds and never pulls anyone again.
        let quiet = k - last_disturbed.map_or(0, |d| d + 1);
        if trace.certified_at.is_none() && quiet >= m as u64 {
            trace.certified_at = Some(k);
            if let StopRule::AfterFreeRunning { extra_beats } = cfg.stop {
                stop_at = stop_at.min(k.saturating_add(extra_beats));
            }
        }
    }
    trace.beats_run = k;
    trace.final_states = states;
    Ok(trace)
}
