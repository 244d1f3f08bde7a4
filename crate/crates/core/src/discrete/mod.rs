//! The adaptive 4-coupling modulo `M` as a beat-driven automaton, and a
//! deterministic simulator of the autonomous distributed system running it.

mod system;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::continuous::PullCountRule;
use crate::error::DomainError;
use crate::graph::Graph;
use crate::phase::Mu1;

pub use system::{
    detect_free_running, offset, offset_plain, run_system, BeatSchedule, DiscreteTrace, Recording, StopRule,
    SystemConfig, TraceRecord,
};

/// Which automaton the nodes run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DiscreteRule {
    /// A4C/M with the given pull-count reading.
    Adaptive(PullCountRule),
    /// The discrete 4-coupling: phase rules only, auxiliary state ignored.
    Plain,
}

impl Default for DiscreteRule {
    fn default() -> Self {
        DiscreteRule::Adaptive(PullCountRule::default())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiscreteNodeState {
    pub phi: u32,
    pub beta: u32,
    pub mu1: Mu1,
    pub mu2: u8,
    pub mu3: u8,
    pub sigma: u8,
    pub pulse: bool,
}

pub fn check_modulus(m: u32) -> Result<(), DomainError> {
    if m == 0 || !m.is_multiple_of(4) {
        Err(DomainError::InvalidModulus(m))
    } else {
        Ok(())
    }
}

impl DiscreteNodeState {
    /// `beta = 0`, `mu = (3, 0, 0)`, `sigma = 0`, no pending pulse.
    pub fn standard(phi: u32) -> Self {
        DiscreteNodeState { phi, beta: 0, mu1: Mu1::Three, mu2: 0, mu3: 0, sigma: 0, pulse: false }
    }

    pub fn validate(&self, m: u32) -> Result<(), DomainError> {
        check_modulus(m)?;
        let checks = [
            ("phi", self.phi as i64, m as i64 - 1),
            ("beta", self.beta as i64, m as i64 - 1),
            ("mu2", self.mu2 as i64, 1),
            ("mu3", self.mu3 as i64, 3),
            ("sigma", self.sigma as i64, 2),
        ];
        for (field, value, max) in checks {
            if value > max {
                return Err(DomainError::Field { field, value });
            }
        }
        Ok(())
    }

    /// Bits used by [`DiscreteNodeState::pack`]: two `Z_M` counters plus
    /// seven bits of flags.
    pub fn bit_width(m: u32) -> u32 {
        2 * phase_bits(m) + 7
    }

    pub fn pack(&self, m: u32) -> u64 {
        let b = phase_bits(m);
        let mut x = self.phi as u64;
        x |= (self.beta as u64) << b;
        let mut shift = 2 * b;
        for (v, w) in [
            (u64::from(self.mu1 == Mu1::Three), 1),
            (self.mu2 as u64, 1),
            (self.mu3 as u64, 2),
            (self.sigma as u64, 2),
            (u64::from(self.pulse), 1),
        ] {
            x |= v << shift;
            shift += w;
        }
        x
    }

    pub fn unpack(x: u64, m: u32) -> Self {
        let b = phase_bits(m);
        let mask = |w: u32| (1u64 << w) - 1;
        let field = |shift: u32, w: u32| (x >> shift) & mask(w);
        let s = 2 * b;
        DiscreteNodeState {
            phi: field(0, b) as u32,
            beta: field(b, b) as u32,
            mu1: if field(s, 1) == 1 { Mu1::Three } else { Mu1::One },
            mu2: field(s + 1, 1) as u8,
            mu3: field(s + 2, 2) as u8,
            sigma: field(s + 4, 2) as u8,
            pulse: field(s + 6, 1) == 1,
        }
    }
}

fn phase_bits(m: u32) -> u32 {
    32 - (m - 1).leading_zeros()
}

/// One beat of the automaton. Returns the new state and whether a pulse is
/// sent to all neighbors.
///
/// `beta` advances by one per beat and is zeroed on a blink, and the
/// pull counter `mu3` is reset on the last beat of each `beta` cycle
/// (`beta = M - 1`) when using [`PullCountRule::RunningCount`].
pub fn a4cm_beat(s: &DiscreteNodeState, m: u32, rule: DiscreteRule) -> (DiscreteNodeState, bool) {
    let mut n = *s;
    let (quarter, half, last) = (m / 4, m / 2, m - 1);
    let f0 = |x: u32| {
        if x <= quarter {
            0
        } else if x <= half {
            x - quarter
        } else {
            x
        }
    };
    let pulled = s.pulse && 0 < s.phi && s.phi <= half;
    match rule {
        DiscreteRule::Plain => {
            if pulled {
                n.phi = f0(s.phi);
            }
        }
        DiscreteRule::Adaptive(count) => {
            n.mu2 = 1 - u8::from(s.mu2 == 0 && s.beta < quarter);
            let wrap = s.beta == last;
            if pulled {
                if s.sigma == 0 {
                    n.phi = f0(s.phi);
                }
                if s.sigma == 0 && s.mu1.value() == s.mu3 {
                    n.sigma = 1;
                }
                let inc = u8::from(n.mu2 == 1);
                n.mu3 = match count {
                    PullCountRule::AsWritten => (s.mu3 + u8::from(s.mu3 != 3) * inc) * u8::from(wrap),
                    PullCountRule::RunningCount if wrap => 0,
                    PullCountRule::RunningCount => (s.mu3 + inc).min(3),
                };
            } else if wrap && count == PullCountRule::RunningCount {
                n.mu3 = 0;
            }
        }
    }
    let blink = n.phi == last;
    if blink {
        if let DiscreteRule::Adaptive(_) = rule {
            n.mu1 = if n.sigma == 2 { Mu1::One } else { Mu1::Three };
            n.mu2 = 0;
            n.mu3 = 0;
            n.sigma = (n.sigma + u8::from(n.sigma != 0)) % 3;
        }
        n.beta = 0;
    } else {
        n.beta = (n.beta + 1) % m;
    }
    n.phi = (n.phi + 1) % m;
    n.pulse = false;
    (n, blink)
}

/// Uniformly random automaton states, pulse flags included.
pub fn random_discrete_states(g: &Graph, m: u32, seed: u64) -> Vec<DiscreteNodeState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..g.node_count())
        .map(|_| DiscreteNodeState {
            phi: rng.gen_range(0..m),
            beta: rng.gen_range(0..m),
            mu1: if rng.gen_bool(0.5) { Mu1::One } else { Mu1::Three },
            mu2: rng.gen_range(0..=1),
            mu3: rng.gen_range(0..=3),
            sigma: rng.gen_range(0..=2),
            pulse: rng.gen_bool(0.5),
        })
        .collect()
}

#[cfg(test)]
mod tests;
