//! Sensor grid geometry and the closed enumerations used across the crate.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Cells per side of the pressure sheet.
pub const GRID_SIDE: usize = 48;
/// Total number of cells (flat pixel indices are `0..GRID_CELLS`).
pub const GRID_CELLS: usize = GRID_SIDE * GRID_SIDE;
/// Physical edge length of one cell in millimetres.
pub const CELL_MM: f64 = 10.0;

/// Row-major flat index of cell `(row, col)`.
#[inline]
pub fn flat_index(row: usize, col: usize) -> usize {
    debug_assert!(row < GRID_SIDE && col < GRID_SIDE);
    row * GRID_SIDE + col
}

/// Inverse of [`flat_index`].
#[inline]
pub fn cell_of(index: usize) -> (usize, usize) {
    debug_assert!(index < GRID_CELLS);
    (index / GRID_SIDE, index % GRID_SIDE)
}

/// Ground-contact setting of a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    /// Bare sensor.
    Nothing,
    /// Silicone rubber plate between sole and sensor.
    Rubber,
    /// Rigid plastic plate between sole and sensor.
    Plastic,
}

impl Condition {
    pub const ALL: [Condition; 3] = [Condition::Nothing, Condition::Rubber, Condition::Plastic];

    /// Single-letter label (`A`, `B`, `C`).
    pub fn letter(self) -> char {
        match self {
            Condition::Nothing => 'A',
            Condition::Rubber => 'B',
            Condition::Plastic => 'C',
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" | "nothing" | "a_nothing" => Ok(Condition::Nothing),
            "b" | "rubber" | "b_rubber" => Ok(Condition::Rubber),
            "c" | "plastic" | "c_plastic" => Ok(Condition::Plastic),
            other => Err(Error::InvalidArgument(format!("unknown condition `{other}`"))),
        }
    }
}

/// One of the four estimated angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AngleChannel {
    Ankle,
    Knee,
    Hip,
    /// Upper-body posture (trunk inclination).
    Upper,
}

impl AngleChannel {
    pub const ALL: [AngleChannel; 4] =
        [AngleChannel::Ankle, AngleChannel::Knee, AngleChannel::Hip, AngleChannel::Upper];

    /// Position of the channel in `ALL` and in the angle file columns.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            AngleChannel::Ankle => "ankle",
            AngleChannel::Knee => "knee",
            AngleChannel::Hip => "hip",
            AngleChannel::Upper => "upper",
        }
    }
}

impl fmt::Display for AngleChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AngleChannel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ankle" => Ok(AngleChannel::Ankle),
            "knee" => Ok(AngleChannel::Knee),
            "hip" => Ok(AngleChannel::Hip),
            "upper" | "posture" => Ok(AngleChannel::Upper),
            other => Err(Error::InvalidArgument(format!("unknown angle channel `{other}`"))),
        }
    }
}
