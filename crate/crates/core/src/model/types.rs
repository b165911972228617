use std::f64::consts::TAU as TWO_PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Reduces an angle to the canonical representative in `[0, 2pi)`.
#[inline]
pub fn reduce_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TWO_PI);
    // rem_euclid rounds tiny negative inputs up to exactly 2pi
    if r >= TWO_PI {
        0.0
    } else {
        r
    }
}

/// Lifetime `tau` and mass splitting `delta_m` of the neutral B system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    tau: f64,
    delta_m: f64,
}

impl ModelParams {
    pub fn new(tau: f64, delta_m: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::param("tau", tau, "lifetime must be finite and > 0"));
        }
        if !(delta_m.is_finite() && delta_m > 0.0) {
            return Err(Error::param(
                "delta_m",
                delta_m,
                "mass difference must be finite and > 0 (the Q-law normaliser degenerates at delta_m = 0)",
            ));
        }
        Ok(Self { tau, delta_m })
    }

    /// Dimensionless parametrisation: `tau = 1`, `delta_m = x`.
    pub fn from_mixing(x: f64) -> Result<Self> {
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::param("x", x, "mixing parameter delta_m * tau must be finite and > 0"));
        }
        Self::new(1.0, x)
    }

    #[inline]
    pub fn tau(&self) -> f64 {
        self.tau
    }

    #[inline]
    pub fn delta_m(&self) -> f64 {
        self.delta_m
    }

    /// Mixing parameter `x = delta_m * tau`, the only shape parameter.
    #[inline]
    pub fn mixing(&self) -> f64 {
        self.delta_m * self.tau
    }
}

/// Flavour tag of a flavour-specific decay. `B0` is index 1, `B0bar` index 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Flavour {
    B0,
    B0bar,
}

impl Flavour {
    pub const ALL: [Flavour; 2] = [Flavour::B0, Flavour::B0bar];

    #[inline]
    pub fn index(self) -> u8 {
        match self {
            Flavour::B0 => 1,
            Flavour::B0bar => 2,
        }
    }

    pub fn from_index(i: u8) -> Option<Self> {
        match i {
            1 => Some(Flavour::B0),
            2 => Some(Flavour::B0bar),
            _ => None,
        }
    }

    #[inline]
    pub fn opposite(self) -> Self {
        match self {
            Flavour::B0 => Flavour::B0bar,
            Flavour::B0bar => Flavour::B0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Flavour::B0 => "B0",
            Flavour::B0bar => "B0bar",
        }
    }
}

impl fmt::Display for Flavour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Flavour {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "B0" => Ok(Flavour::B0),
            "B0bar" => Ok(Flavour::B0bar),
            other => Err(format!("unknown flavour `{other}` (expected B0 or B0bar)")),
        }
    }
}

/// Same-flavour (`i = 1`) or opposite-flavour (`i = 2`) pair class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairClass {
    Same,
    Opposite,
}

impl PairClass {
    pub const ALL: [PairClass; 2] = [PairClass::Same, PairClass::Opposite];

    pub fn of(a: Flavour, b: Flavour) -> Self {
        if a == b {
            PairClass::Same
        } else {
            PairClass::Opposite
        }
    }

    #[inline]
    pub fn index(self) -> u8 {
        match self {
            PairClass::Same => 1,
            PairClass::Opposite => 2,
        }
    }

    /// `(-1)^i`: `-1` for same flavour, `+1` for opposite.
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            PairClass::Same => -1.0,
            PairClass::Opposite => 1.0,
        }
    }
}

/// The common hidden variable `lambda`, kept in `[0, 2pi)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct HiddenVariable(f64);

impl HiddenVariable {
    pub fn new(lambda: f64) -> Self {
        HiddenVariable(reduce_angle(lambda))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<f64> for HiddenVariable {
    fn from(v: f64) -> Self {
        HiddenVariable::new(v)
    }
}

/// One simulated pair decay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairEvent {
    pub lambda: HiddenVariable,
    pub t1: f64,
    pub t2: f64,
    pub flavour1: Flavour,
    pub flavour2: Flavour,
    /// Symmetrised mode: side 1 received the Q-law and side 2 the P-law.
    pub swapped: bool,
}

impl PairEvent {
    #[inline]
    pub fn delta_t(&self) -> f64 {
        (self.t1 - self.t2).abs()
    }

    #[inline]
    pub fn class(&self) -> PairClass {
        PairClass::of(self.flavour1, self.flavour2)
    }
}
