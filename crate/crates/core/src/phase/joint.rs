use serde::{Deserialize, Serialize};

use super::Phase;
use crate::error::DomainError;

/// Dynamic excitation threshold; only 1 and 3 are admissible.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Mu1 {
    One,
    Three,
}

impl Mu1 {
    pub fn value(self) -> u8 {
        match self {
            Mu1::One => 1,
            Mu1::Three => 3,
        }
    }
}

impl From<Mu1> for u8 {
    fn from(m: Mu1) -> u8 {
        m.value()
    }
}

impl TryFrom<u8> for Mu1 {
    type Error = DomainError;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            1 => Ok(Mu1::One),
            3 => Ok(Mu1::Three),
            _ => Err(DomainError::Field { field: "mu1", value: v as i64 }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeStatus {
    Rested,
    Refractory,
}

/// Joint state of one node under the adaptive 4-coupling:
/// phase, time since last blink, the memory triple, and the rest state.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JointState {
    pub phi: Phase,
    pub beta: Phase,
    pub mu1: Mu1,
    pub mu2: u8,
    pub mu3: u8,
    pub sigma: u8,
}

impl JointState {
    pub fn new(phi: Phase, beta: Phase, mu1: u8, mu2: u8, mu3: u8, sigma: u8) -> Result<Self, DomainError> {
        let s = JointState { phi, beta, mu1: Mu1::try_from(mu1)?, mu2, mu3, sigma };
        s.validate()?;
        Ok(s)
    }

    /// `beta = 0`, `mu = (3, 0, 0)`, `sigma = 0`.
    pub fn standard(phi: Phase) -> Self {
        JointState { phi, beta: Phase::zero(), mu1: Mu1::Three, mu2: 0, mu3: 0, sigma: 0 }
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        if self.mu2 > 1 {
            return Err(DomainError::Field { field: "mu2", value: self.mu2 as i64 });
        }
        if self.mu3 > 3 {
            return Err(DomainError::Field { field: "mu3", value: self.mu3 as i64 });
        }
        if self.sigma > 2 {
            return Err(DomainError::Field { field: "sigma", value: self.sigma as i64 });
        }
        Ok(())
    }

    pub fn status(&self) -> NodeStatus {
        if self.sigma == 0 {
            NodeStatus::Rested
        } else {
            NodeStatus::Refractory
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_fields() {
        assert!(JointState::new(Phase::zero(), Phase::zero(), 2, 0, 0, 0).is_err());
        assert!(JointState::new(Phase::zero(), Phase::zero(), 3, 2, 0, 0).is_err());
        assert!(JointState::new(Phase::zero(), Phase::zero(), 3, 0, 4, 0).is_err());
        assert!(JointState::new(Phase::zero(), Phase::zero(), 3, 0, 0, 3).is_err());
        let s = JointState::new(Phase::zero(), Phase::zero(), 1, 1, 3, 2).unwrap();
        assert_eq!(s.status(), NodeStatus::Refractory);
    }

    #[test]
    fn standard_state_is_rested() {
        let s = JointState::standard(Phase::from_frac(1, 3));
        assert_eq!(s.status(), NodeStatus::Rested);
        assert_eq!((s.mu1.value(), s.mu2, s.mu3), (3, 0, 0));
    }
}
