//! Exact circle phases, phase response curves, and the per-node joint state.

mod joint;
mod rat;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{DomainError, ParseError};

pub use joint::{JointState, Mu1, NodeStatus};
pub use rat::{lcm_denominators, Rat};

/// A point of the circle `R/Z`, represented by its exact value in `[0, 1)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Phase(Rat);

impl Phase {
    /// Reduces `value` mod 1.
    pub fn new(value: Rat) -> Self {
        Phase(value.fract_pos())
    }

    pub fn from_frac(numer: i64, denom: i64) -> Self {
        Phase::new(Rat::new(numer, denom))
    }

    pub fn zero() -> Self {
        Phase(Rat::zero())
    }

    pub fn value(&self) -> &Rat {
        &self.0
    }

    pub fn into_rat(self) -> Rat {
        self.0
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl fmt::Debug for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl FromStr for Phase {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(Phase::new(s.parse()?))
    }
}

impl Serialize for Phase {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Phase {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Ok(Phase::new(Rat::deserialize(deserializer)?))
    }
}

/// `(p + d) mod 1`.
pub fn phase_add(p: &Phase, d: &Rat) -> Phase {
    Phase::new(p.value() + d)
}

/// Length of the counterclockwise arc from `x` to `y`: `(x - y) mod 1`.
pub fn ccw_displacement(x: &Phase, y: &Phase) -> Rat {
    (x.value() - y.value()).fract_pos()
}

fn check_unit_interval(x: &Rat) -> Result<(), DomainError> {
    if x.is_negative() || *x > Rat::one() {
        Err(DomainError::OutsideUnitInterval(x.clone()))
    } else {
        Ok(())
    }
}

/// Phase response curve of the 4-coupling:
/// `0` on `[0, 1/4]`, `x - 1/4` on `(1/4, 1/2]`, identity on `(1/2, 1]`.
pub fn prc_f0(x: &Rat) -> Result<Rat, DomainError> {
    check_unit_interval(x)?;
    let quarter = Rat::new(1, 4);
    let half = Rat::new(1, 2);
    Ok(if *x <= quarter {
        Rat::zero()
    } else if *x <= half {
        x - &quarter
    } else {
        x.clone()
    })
}

/// Rested nodes (`sigma = 0`) respond with `f0`, refractory nodes ignore the
/// pulse.
pub fn adaptive_prc(x: &Rat, sigma: u8) -> Result<Rat, DomainError> {
    if sigma == 0 {
        prc_f0(x)
    } else {
        check_unit_interval(x)?;
        Ok(x.clone())
    }
}
