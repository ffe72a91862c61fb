//! The 16-label behavior vocabulary.

use core::fmt;
use core::str::FromStr;

/// Behavioral label attached to a method. `BSC1`/`BSC2`/`BSC3` are the
/// mutually exclusive biometric strength classes; all other labels may
/// co-occur freely.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Bsc1,
    Bsc2,
    Bsc3,
    Source,
    Sink,
    Checker,
    Permission,
    Authenticate,
    Crypto,
    Termination,
    Interaction,
    Transfer,
    Acquisition,
    Deletion,
    Storage,
    Database,
}

impl Label {
    pub const ALL: [Label; 16] = [
        Label::Bsc1,
        Label::Bsc2,
        Label::Bsc3,
        Label::Source,
        Label::Sink,
        Label::Checker,
        Label::Permission,
        Label::Authenticate,
        Label::Crypto,
        Label::Termination,
        Label::Interaction,
        Label::Transfer,
        Label::Acquisition,
        Label::Deletion,
        Label::Storage,
        Label::Database,
    ];

    pub const BSC: [Label; 3] = [Label::Bsc1, Label::Bsc2, Label::Bsc3];

    pub fn is_bsc(self) -> bool {
        matches!(self, Label::Bsc1 | Label::Bsc2 | Label::Bsc3)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Bsc1 => "BSC1",
            Label::Bsc2 => "BSC2",
            Label::Bsc3 => "BSC3",
            Label::Source => "SOURCE",
            Label::Sink => "SINK",
            Label::Checker => "CHECKER",
            Label::Permission => "PERMISSION",
            Label::Authenticate => "AUTHENTICATE",
            Label::Crypto => "CRYPTO",
            Label::Termination => "TERMINATION",
            Label::Interaction => "INTERACTION",
            Label::Transfer => "TRANSFER",
            Label::Acquisition => "ACQUISITION",
            Label::Deletion => "DELETION",
            Label::Storage => "STORAGE",
            Label::Database => "DATABASE",
        }
    }

    /// Dense index into per-label arrays.
    pub fn index(self) -> usize {
        Label::ALL.iter().position(|&l| l == self).expect("label is in ALL")
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownLabel;

impl fmt::Display for UnknownLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("unknown label")
    }
}

#[cfg(feature = "std")]
impl std::error::Error for UnknownLabel {}

impl FromStr for Label {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Label::ALL.iter().copied().find(|l| l.as_str() == s).ok_or(UnknownLabel)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sixteen_labels_with_disjoint_bsc_group() {
        assert_eq!(Label::ALL.len(), 16);
        assert_eq!(Label::BSC.len(), 3);
        assert!(Label::BSC.iter().all(|l| l.is_bsc()));
        assert_eq!(Label::ALL.iter().filter(|l| l.is_bsc()).count(), 3);
    }

    #[test]
    fn round_trip_names() {
        for l in Label::ALL {
            assert_eq!(l.as_str().parse::<Label>().unwrap(), l);
        }
        assert!("BSC4".parse::<Label>().is_err());
    }
}
