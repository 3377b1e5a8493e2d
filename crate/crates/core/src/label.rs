use core::fmt;
use core::str::FromStr;

use alloc::string::ToString;
use serde::{Deserialize, Serialize};

use crate::Error;

/// Binary bias label. `Biased` is the positive class throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Biased,
    Unbiased,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Biased, Label::Unbiased];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Biased => "biased",
            Label::Unbiased => "unbiased",
        }
    }

    pub fn is_biased(self) -> bool {
        self == Label::Biased
    }

    /// Position used by per-class tables (biased = 0, unbiased = 1).
    pub(crate) fn slot(self) -> usize {
        match self {
            Label::Biased => 0,
            Label::Unbiased => 1,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    /// Accepts exactly `biased` or `unbiased`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "biased" => Ok(Label::Biased),
            "unbiased" => Ok(Label::Unbiased),
            other => Err(Error::UnknownLabel(other.to_string())),
        }
    }
}
