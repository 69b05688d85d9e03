use std::fmt;
use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

/// A voltage on the integer millivolt grid used by every sweep.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Millivolts(pub i32);

impl Millivolts {
    pub const ZERO: Millivolts = Millivolts(0);

    pub const fn new(mv: i32) -> Self {
        Millivolts(mv)
    }

    pub const fn get(self) -> i32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0)
    }

    pub fn volts(self) -> f64 {
        f64::from(self.0) / 1000.0
    }
}

impl fmt::Display for Millivolts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mV", self.0)
    }
}

impl Add for Millivolts {
    type Output = Millivolts;
    fn add(self, rhs: Self) -> Self {
        Millivolts(self.0 + rhs.0)
    }
}

impl Sub for Millivolts {
    type Output = Millivolts;
    fn sub(self, rhs: Self) -> Self {
        Millivolts(self.0 - rhs.0)
    }
}

impl From<i32> for Millivolts {
    fn from(mv: i32) -> Self {
        Millivolts(mv)
    }
}
