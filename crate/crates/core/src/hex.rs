//! The six bearings of a triangular tag lattice.
//!
//! The lattice is oriented so that every tag's neighbors lie due North or
//! South, or 60° either side of those axes. There is no East/West bearing.
//! `+y` is North.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

const HALF_SQRT_3: f64 = 0.866_025_403_784_438_6;

/// A lattice bearing, indexed clockwise from North.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum HexDirection {
    N,
    NE,
    SE,
    S,
    SW,
    NW,
}

impl HexDirection {
    pub const ALL: [HexDirection; 6] = [
        HexDirection::N,
        HexDirection::NE,
        HexDirection::SE,
        HexDirection::S,
        HexDirection::SW,
        HexDirection::NW,
    ];

    pub fn index(self) -> u8 {
        self as u8
    }

    /// Direction for a clockwise index; wraps modulo 6.
    pub fn from_index(index: u8) -> Self {
        Self::ALL[(index % 6) as usize]
    }

    pub fn opposite(self) -> Self {
        self.rotate(3)
    }

    /// Advance clockwise by `steps` sixths of a turn.
    pub fn rotate(self, steps: u8) -> Self {
        Self::from_index(self.index() + steps % 6)
    }

    pub fn unit_vector(self) -> (f64, f64) {
        match self {
            HexDirection::N => (0.0, 1.0),
            HexDirection::NE => (HALF_SQRT_3, 0.5),
            HexDirection::SE => (HALF_SQRT_3, -0.5),
            HexDirection::S => (0.0, -1.0),
            HexDirection::SW => (-HALF_SQRT_3, -0.5),
            HexDirection::NW => (-HALF_SQRT_3, 0.5),
        }
    }

    /// Compass bearing in degrees, clockwise from North.
    pub fn bearing_deg(self) -> f64 {
        match self {
            HexDirection::N => 0.0,
            HexDirection::NE => 60.0,
            HexDirection::SE => 120.0,
            HexDirection::S => 180.0,
            HexDirection::SW => 240.0,
            HexDirection::NW => 300.0,
        }
    }

    /// The bearing whose unit vector lies within `tolerance_deg` of the
    /// displacement `(dx, dy)`, if any.
    pub fn from_displacement(dx: f64, dy: f64, tolerance_deg: f64) -> Option<Self> {
        if dx == 0.0 && dy == 0.0 {
            return None;
        }
        // atan2(dx, dy) measures clockwise from +y.
        let bearing = dx.atan2(dy).to_degrees().rem_euclid(360.0);
        Self::ALL.into_iter().find(|d| {
            let diff = (bearing - d.bearing_deg()).rem_euclid(360.0);
            diff.min(360.0 - diff) <= tolerance_deg
        })
    }

    pub fn label(self) -> &'static str {
        match self {
            HexDirection::N => "N",
            HexDirection::NE => "NE",
            HexDirection::SE => "SE",
            HexDirection::S => "S",
            HexDirection::SW => "SW",
            HexDirection::NW => "NW",
        }
    }
}

impl fmt::Display for HexDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for HexDirection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|d| d.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown direction {s:?}; expected one of N, NE, SE, S, SW, NW"))
    }
}
