use std::fmt;

use serde::{Deserialize, Serialize};

/// Window label: did the speaker change between the third and fourth word?
///
/// `Split` is the positive class everywhere in this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Same,
    Split,
}

impl Label {
    /// Class index used by the classifier output: 0 = Same, 1 = Split.
    pub fn index(self) -> usize {
        match self {
            Label::Same => 0,
            Label::Split => 1,
        }
    }

    pub fn from_index(i: usize) -> Option<Label> {
        match i {
            0 => Some(Label::Same),
            1 => Some(Label::Split),
            _ => None,
        }
    }

    pub fn is_split(self) -> bool {
        self == Label::Split
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Same => f.write_str("Same"),
            Label::Split => f.write_str("Split"),
        }
    }
}
