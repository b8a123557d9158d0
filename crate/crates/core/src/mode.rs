//! Equation family selector shared by the scattering, energy and flow layers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Sign convention of the scattering system and the associated flows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Defocusing NLS/mKdV, `v = u`.
    Defocusing,
    /// Focusing NLS/mKdV, `v = −u`.
    Focusing,
    /// KdV, real potential.
    Kdv,
}

impl Mode {
    /// `+1` for defocusing, `−1` for focusing and KdV.
    pub fn sigma(self) -> f64 {
        match self {
            Mode::Defocusing => 1.0,
            Mode::Focusing | Mode::Kdv => -1.0,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Defocusing => "defocusing",
            Mode::Focusing => "focusing",
            Mode::Kdv => "kdv",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "defocusing" => Ok(Mode::Defocusing),
            "focusing" => Ok(Mode::Focusing),
            "kdv" => Ok(Mode::Kdv),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}
