//! Exact win/draw/loss and distance-to-mate tables for small material
//! classes, built by retrograde fixpoint iteration.
//!
//! Values are from the side to move's point of view. Distance to mate is
//! counted in plies, with a checkmated side to move at 0. Unbounded play is
//! a draw; there is no fifty-move or repetition rule.

mod file;
mod index;
mod solve;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rules::{Position, RulesError};

pub use file::{load, read_from, save, write_to, FORMAT_MAGIC, FORMAT_VERSION};
pub use index::{canonical_squares, index, unindex, MaterialClass, MAX_PIECES};
pub use solve::{solve, solve_with, SolveOptions, DEFAULT_MEM_BUDGET_MB, MEM_BUDGET_ENV};

pub(crate) use index::MaterialKey;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Wdl {
    Win,
    Draw,
    Loss,
}

impl Wdl {
    pub fn flipped(self) -> Wdl {
        match self {
            Wdl::Win => Wdl::Loss,
            Wdl::Draw => Wdl::Draw,
            Wdl::Loss => Wdl::Win,
        }
    }

    pub fn is_decisive(self) -> bool {
        self != Wdl::Draw
    }
}

impl fmt::Display for Wdl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Wdl::Win => "win",
            Wdl::Draw => "draw",
            Wdl::Loss => "loss",
        })
    }
}

/// Solved value of a legal position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WdlDtm {
    pub wdl: Wdl,
    /// Plies to mate under optimal play; `None` for draws.
    pub dtm: Option<u16>,
}

impl WdlDtm {
    pub fn win(dtm: u16) -> WdlDtm {
        WdlDtm { wdl: Wdl::Win, dtm: Some(dtm) }
    }

    pub fn loss(dtm: u16) -> WdlDtm {
        WdlDtm { wdl: Wdl::Loss, dtm: Some(dtm) }
    }

    pub fn draw() -> WdlDtm {
        WdlDtm { wdl: Wdl::Draw, dtm: None }
    }

    pub fn is_decisive(&self) -> bool {
        self.wdl.is_decisive()
    }
}

impl fmt::Display for WdlDtm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.dtm {
            Some(d) => write!(f, "{} in {d}", self.wdl),
            None => write!(f, "{}", self.wdl),
        }
    }
}

/// One slot of the dense table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Entry {
    /// The index does not name a legal position.
    Invalid,
    Win(u16),
    Draw,
    Loss(u16),
}

impl Entry {
    pub fn value(self) -> Option<WdlDtm> {
        match self {
            Entry::Invalid => None,
            Entry::Win(d) => Some(WdlDtm::win(d)),
            Entry::Draw => Some(WdlDtm::draw()),
            Entry::Loss(d) => Some(WdlDtm::loss(d)),
        }
    }

    pub fn is_decisive(self) -> bool {
        matches!(self, Entry::Win(_) | Entry::Loss(_))
    }

    pub(crate) fn dtm(self) -> Option<u16> {
        match self {
            Entry::Win(d) | Entry::Loss(d) => Some(d),
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum TablebaseError {
    #[error("invalid material class: {0}")]
    Material(String),
    #[error("material mismatch: table is {expected}, got {found}")]
    MaterialMismatch { expected: String, found: String },
    #[error("position outside the index space: {0}")]
    Unindexable(&'static str),
    #[error("index {0} does not name a legal position")]
    InvalidIndex(u64),
    #[error("memory budget exceeded: need about {needed_mb} MiB, budget is {budget_mb} MiB")]
    BudgetExceeded { needed_mb: u64, budget_mb: u64 },
    #[error("no solved table for reachable class {0}")]
    MissingSubtable(String),
    #[error(transparent)]
    Position(#[from] RulesError),
    #[error("not a tablebase file (bad magic)")]
    BadMagic,
    #[error("unsupported tablebase format version {0} (this build reads version {FORMAT_VERSION})")]
    UnsupportedVersion(u8),
    #[error("tablebase file truncated")]
    Truncated,
    #[error("tablebase checksum mismatch: stored {stored:08x}, computed {computed:08x}")]
    Checksum { stored: u32, computed: u32 },
    #[error("corrupt tablebase: {0}")]
    Corrupt(String),
    #[error("tablebase I/O: {0}")]
    Io(#[from] std::io::Error),
}

/// Solved table for one material class, together with the tables of every
/// class reachable from it by captures or promotions.
#[derive(Clone)]
pub struct Tablebase {
    material: MaterialClass,
    entries: Vec<Entry>,
    subtables: BTreeMap<MaterialKey, Arc<Tablebase>>,
}

/// Tallies over the valid entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct TableStats {
    pub valid: u64,
    pub wins: u64,
    pub draws: u64,
    pub losses: u64,
    pub max_dtm: u16,
}

impl Tablebase {
    pub fn material(&self) -> &MaterialClass {
        &self.material
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn entry(&self, index: u64) -> Entry {
        self.entries.get(index as usize).copied().unwrap_or(Entry::Invalid)
    }

    pub fn stats(&self) -> TableStats {
        let mut s = TableStats::default();
        for e in &self.entries {
            match *e {
                Entry::Invalid => continue,
                Entry::Win(d) => {
                    s.wins += 1;
                    s.max_dtm = s.max_dtm.max(d);
                }
                Entry::Draw => s.draws += 1,
                Entry::Loss(d) => {
                    s.losses += 1;
                    s.max_dtm = s.max_dtm.max(d);
                }
            }
            s.valid += 1;
        }
        s
    }

    /// Indices of every win or loss entry, ascending.
    pub fn decisive_indices(&self) -> Vec<u64> {
        self.entries.iter().enumerate().filter(|(_, e)| e.is_decisive()).map(|(i, _)| i as u64).collect()
    }

    /// Position at `index`, or an error for the invalid marker.
    pub fn position(&self, index: u64) -> Result<Position, TablebaseError> {
        unindex(index, &self.material).ok_or(TablebaseError::InvalidIndex(index))
    }

    /// CRC32 of the serialized body; identical to the file trailer.
    pub fn checksum(&self) -> u32 {
        file::body_checksum(&self.entries)
    }

    /// Subtable names in piece-count order.
    pub fn subtable_names(&self) -> Vec<String> {
        let mut v: Vec<_> = self.subtables.values().map(|t| t.material.name()).collect();
        v.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        v
    }

    pub fn has_subtables(&self) -> bool {
        self.material.descendants().iter().all(|d| self.subtables.contains_key(&d.key()))
    }

    /// Solves and attaches the tables of every reachable class. Tables read
    /// from disk carry only their own class until this is called.
    pub fn attach_subtables(&mut self, opts: &SolveOptions) -> Result<(), TablebaseError> {
        if self.has_subtables() {
            return Ok(());
        }
        self.subtables = solve::solve_descendants(&self.material, opts)?;
        Ok(())
    }

    /// Constant-time lookup for a position of this table's class.
    ///
    /// Positions with a live en-passant capture are not in the index space;
    /// their value is derived from their successors.
    pub fn probe(&self, pos: &Position) -> Result<WdlDtm, TablebaseError> {
        if !self.material.matches(pos) {
            return Err(TablebaseError::MaterialMismatch {
                expected: self.material.to_string(),
                found: crate::rules::format_fen(pos),
            });
        }
        pos.validate().map_err(RulesError::from)?;
        if !pos.castle_rights().is_empty() {
            return Err(TablebaseError::Unindexable("position carries castling rights"));
        }
        solve::final_value(self, pos)
    }

    /// Value of any position reachable from this class.
    pub fn value(&self, pos: &Position) -> Result<WdlDtm, TablebaseError> {
        let key = MaterialKey::of_position(pos);
        if key == self.material.key() {
            return self.probe(pos);
        }
        match self.subtables.get(&key) {
            Some(t) => t.probe(pos),
            None => Err(TablebaseError::MissingSubtable(crate::rules::format_fen(pos))),
        }
    }
}

impl PartialEq for Tablebase {
    fn eq(&self, other: &Self) -> bool {
        self.material == other.material && self.entries == other.entries
    }
}

impl fmt::Debug for Tablebase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tablebase")
            .field("material", &self.material.to_string())
            .field("entries", &self.entries.len())
            .field("subtables", &self.subtable_names())
            .finish()
    }
}
