//! Mode labels, occupation vectors and truncation limits.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::H, Polarization::V];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    Optical,
    Memory,
}

/// A single bosonic mode: a path label, a polarization and a kind.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeId {
    pub path: String,
    pub polarization: Polarization,
    pub kind: ModeKind,
}

impl ModeId {
    pub fn optical(path: impl Into<String>, polarization: Polarization) -> Self {
        Self {
            path: path.into(),
            polarization,
            kind: ModeKind::Optical,
        }
    }

    pub fn memory(path: impl Into<String>, polarization: Polarization) -> Self {
        Self {
            path: path.into(),
            polarization,
            kind: ModeKind::Memory,
        }
    }

    /// The `H` and `V` modes of one optical path.
    pub fn optical_pair(path: &str) -> [ModeId; 2] {
        Polarization::BOTH.map(|p| ModeId::optical(path, p))
    }

    pub fn memory_pair(path: &str) -> [ModeId; 2] {
        Polarization::BOTH.map(|p| ModeId::memory(path, p))
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let suffix = match self.kind {
            ModeKind::Optical => "",
            ModeKind::Memory => "_M",
        };
        write!(f, "{}:{:?}{}", self.path, self.polarization, suffix)
    }
}

/// Photon or excitation count per mode, in the owning state's mode order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct OccupationVector(pub Vec<u8>);

impl OccupationVector {
    pub fn vacuum(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn total(&self) -> u32 {
        self.0.iter().map(|&n| n as u32).sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, "]")
    }
}

/// Per-mode and global photon-number limits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    pub per_mode: u8,
    pub total: u8,
}

impl Truncation {
    pub const fn new(per_mode: u8, total: u8) -> Self {
        Self { per_mode, total }
    }

    pub fn admits(&self, occ: &OccupationVector) -> bool {
        occ.0.iter().all(|&n| n <= self.per_mode) && occ.total() <= self.total as u32
    }

    pub fn combine(&self, other: &Truncation) -> Truncation {
        Truncation {
            per_mode: self.per_mode.max(other.per_mode),
            total: self.total.max(other.total),
        }
    }
}

impl Default for Truncation {
    /// Two sources with up to two pairs each: eight photons, all of which
    /// may bunch into one output mode of the Bell-state analyzer.
    fn default() -> Self {
        Self::new(8, 8)
    }
}
