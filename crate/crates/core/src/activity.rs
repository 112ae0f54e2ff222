use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Binary activity class of a segment.
///
/// `Major` is value-adding work (digging, drilling); `Minor` is the
/// supporting motion around it (cabin rotation, maneuvering).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activity {
    Major,
    Minor,
}

impl Activity {
    pub const ALL: [Activity; 2] = [Activity::Major, Activity::Minor];

    /// SVM target: `Major` is the positive class.
    pub fn sign(self) -> f64 {
        match self {
            Activity::Major => 1.0,
            Activity::Minor => -1.0,
        }
    }

    pub fn from_sign(value: f64) -> Self {
        if value >= 0.0 {
            Activity::Major
        } else {
            Activity::Minor
        }
    }

    /// Row/column index used by 2×2 tables (Major = 0).
    pub fn index(self) -> usize {
        match self {
            Activity::Major => 0,
            Activity::Minor => 1,
        }
    }

    pub fn from_index(i: usize) -> Self {
        if i == 0 {
            Activity::Major
        } else {
            Activity::Minor
        }
    }

    pub fn other(self) -> Self {
        match self {
            Activity::Major => Activity::Minor,
            Activity::Minor => Activity::Major,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Activity::Major => "major",
            Activity::Minor => "minor",
        }
    }
}

impl fmt::Display for Activity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Activity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "major" => Ok(Activity::Major),
            "minor" => Ok(Activity::Minor),
            other => Err(Error::invalid(format!(
                "unknown activity label {other:?} (expected major or minor)"
            ))),
        }
    }
}
