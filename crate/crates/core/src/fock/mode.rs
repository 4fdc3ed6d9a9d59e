use std::fmt;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};

/// Linear polarization label of a mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pol {
    H,
    V,
}

impl Pol {
    pub const BOTH: [Pol; 2] = [Pol::H, Pol::V];

    pub fn flipped(self) -> Pol {
        match self {
            Pol::H => Pol::V,
            Pol::V => Pol::H,
        }
    }
}

/// The two sources / end nodes of the link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Alice,
    Bob,
}

/// Output arm of the central 50/50 beam splitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arm {
    E,
    F,
}

/// Spatial path label.
///
/// `A`/`APrime` (`B`/`BPrime`) are the two paths after Alice's (Bob's)
/// splitting PBS, `Alice`/`Bob` the distributed outputs (a, b), `C`/`D` the
/// paths sent to the central station and `E`/`F` the outputs of the central
/// beam splitter. `Detector(arm, pol)` is the output of the projection PBS in
/// `arm` that feeds the detector for `pol`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Path {
    Source(Side),
    A,
    APrime,
    B,
    BPrime,
    Alice,
    Bob,
    C,
    D,
    E,
    F,
    Detector(Arm, Pol),
    /// Free-standing path, used for unused PBS input ports and ad-hoc circuits.
    Port(u16),
    /// Environment mode receiving photons removed by a loss channel.
    Loss(u16),
}

impl Path {
    /// Side of the link a path belongs to, if any.
    pub fn side(self) -> Option<Side> {
        match self {
            Path::Source(s) => Some(s),
            Path::A | Path::APrime | Path::Alice | Path::C => Some(Side::Alice),
            Path::B | Path::BPrime | Path::Bob | Path::D => Some(Side::Bob),
            _ => None,
        }
    }

    pub fn is_loss(self) -> bool {
        matches!(self, Path::Loss(_))
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Path::Source(Side::Alice) => write!(f, "srcA"),
            Path::Source(Side::Bob) => write!(f, "srcB"),
            Path::A => write!(f, "A"),
            Path::APrime => write!(f, "A'"),
            Path::B => write!(f, "B"),
            Path::BPrime => write!(f, "B'"),
            Path::Alice => write!(f, "a"),
            Path::Bob => write!(f, "b"),
            Path::C => write!(f, "c"),
            Path::D => write!(f, "d"),
            Path::E => write!(f, "e"),
            Path::F => write!(f, "f"),
            Path::Detector(arm, pol) => write!(f, "det[{pol:?}{}]", if *arm == Arm::E { "e" } else { "f" }),
            Path::Port(k) => write!(f, "port{k}"),
            Path::Loss(k) => write!(f, "loss{k}"),
        }
    }
}

/// A bosonic mode: spatial path, polarization and wavepacket index.
///
/// The wavepacket (`internal`) index distinguishes otherwise identical modes
/// that do not interfere, e.g. photons arriving at different times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeId {
    pub path: Path,
    pub pol: Pol,
    pub internal: u8,
}

impl ModeId {
    pub const fn new(path: Path, pol: Pol) -> Self {
        ModeId { path, pol, internal: 0 }
    }

    pub const fn h(path: Path) -> Self {
        ModeId::new(path, Pol::H)
    }

    pub const fn v(path: Path) -> Self {
        ModeId::new(path, Pol::V)
    }

    pub const fn with_internal(self, internal: u8) -> Self {
        ModeId { internal, ..self }
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}_{}", self.pol, self.path)?;
        if self.internal != 0 {
            write!(f, "#{}", self.internal)?;
        }
        Ok(())
    }
}

/// Ordered list of modes with stable positions.
#[derive(Debug, Clone, Default)]
pub struct ModeRegister {
    modes: Vec<ModeId>,
    index: FxHashMap<ModeId, usize>,
}

impl ModeRegister {
    pub fn new(modes: impl IntoIterator<Item = ModeId>) -> Result<Self> {
        let mut reg = ModeRegister::default();
        for m in modes {
            reg.push(m)?;
        }
        Ok(reg)
    }

    /// Both polarizations of each path, wavepacket 0.
    pub fn from_paths(paths: &[Path]) -> Result<Self> {
        ModeRegister::new(paths.iter().flat_map(|&p| Pol::BOTH.map(|pol| ModeId::new(p, pol))))
    }

    /// Appends a mode and returns its position.
    pub fn push(&mut self, mode: ModeId) -> Result<usize> {
        if self.index.contains_key(&mode) {
            return Err(Error::DuplicateMode(mode));
        }
        self.index.insert(mode, self.modes.len());
        self.modes.push(mode);
        Ok(self.modes.len() - 1)
    }

    pub fn position(&self, mode: &ModeId) -> Option<usize> {
        self.index.get(mode).copied()
    }

    pub fn contains(&self, mode: &ModeId) -> bool {
        self.index.contains_key(mode)
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[ModeId] {
        &self.modes
    }

    pub fn iter(&self) -> impl Iterator<Item = &ModeId> {
        self.modes.iter()
    }

    /// True when both registers hold the same modes, in any order.
    pub fn same_modes(&self, other: &ModeRegister) -> bool {
        self.len() == other.len() && self.modes.iter().all(|m| other.contains(m))
    }
}

impl PartialEq for ModeRegister {
    fn eq(&self, other: &Self) -> bool {
        self.modes == other.modes
    }
}

impl Eq for ModeRegister {}
