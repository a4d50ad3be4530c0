use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InputError {
    #[error("keymask {0:#04x} has reserved bits 6-7 set")]
    InvalidKeymask(u8),
    #[error("frame {t} does not follow frame {prev}")]
    NotIncreasing { prev: u32, t: u32 },
    #[error("malformed input log: {0}")]
    Parse(String),
}

/// Pressed subset of the playable keys, one bit per key.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Keymask(u8);

impl Keymask {
    pub const NONE: Keymask = Keymask(0);
    pub const LEFT: Keymask = Keymask(1 << 0);
    pub const RIGHT: Keymask = Keymask(1 << 1);
    pub const JUMP: Keymask = Keymask(1 << 2);
    pub const SPRINT: Keymask = Keymask(1 << 3);
    pub const UP: Keymask = Keymask(1 << 4);
    pub const DOWN: Keymask = Keymask(1 << 5);

    pub const fn new(bits: u8) -> Result<Keymask, InputError> {
        if bits >= 64 {
            return Err(InputError::InvalidKeymask(bits));
        }
        Ok(Keymask(bits))
    }

    pub const fn bits(self) -> u8 {
        self.0
    }

    pub const fn union(self, other: Keymask) -> Keymask {
        Keymask(self.0 | other.0)
    }

    pub const fn contains(self, other: Keymask) -> bool {
        self.0 & other.0 == other.0
    }
}

impl std::ops::BitOr for Keymask {
    type Output = Keymask;

    fn bitor(self, rhs: Keymask) -> Keymask {
        Keymask(self.0 | rhs.0)
    }
}

impl TryFrom<u8> for Keymask {
    type Error = InputError;

    fn try_from(bits: u8) -> Result<Self, Self::Error> {
        Keymask::new(bits)
    }
}

impl fmt::Display for Keymask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const NAMES: [&str; 6] = ["left", "right", "jump", "sprint", "up", "down"];
        if self.0 == 0 {
            return f.write_str("none");
        }
        let mut first = true;
        for (bit, name) in NAMES.iter().enumerate() {
            if self.0 & (1 << bit) != 0 {
                if !first {
                    f.write_str("+")?;
                }
                f.write_str(name)?;
                first = false;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
struct RawEntry {
    t: u32,
    mask: u8,
}

/// Timestamped keystrokes, strictly increasing in frame number. Frames with
/// no entry are played with an empty keymask.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InputLog {
    entries: Vec<(u32, Keymask)>,
}

impl InputLog {
    pub fn new(entries: Vec<(u32, Keymask)>) -> Result<InputLog, InputError> {
        for pair in entries.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(InputError::NotIncreasing {
                    prev: pair[0].0,
                    t: pair[1].0,
                });
            }
        }
        Ok(InputLog { entries })
    }

    /// A log holding `masks[i]` at frame `i`.
    pub fn dense(masks: impl IntoIterator<Item = Keymask>) -> InputLog {
        InputLog {
            entries: masks
                .into_iter()
                .enumerate()
                .map(|(t, k)| (t as u32, k))
                .collect(),
        }
    }

    pub fn entries(&self) -> &[(u32, Keymask)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of frames the log drives: one past the last entry.
    pub fn frames(&self) -> u32 {
        self.entries.last().map_or(0, |&(t, _)| t + 1)
    }

    pub fn mask_at(&self, t: u32) -> Keymask {
        match self.entries.binary_search_by_key(&t, |&(ft, _)| ft) {
            Ok(i) => self.entries[i].1,
            Err(_) => Keymask::NONE,
        }
    }

    /// Parses the JSON form: an array of `{"t": .., "mask": ..}` objects.
    /// Entries are sorted by frame; duplicate frames are rejected.
    pub fn from_json(text: &str) -> Result<InputLog, InputError> {
        let mut raw: Vec<RawEntry> =
            serde_json::from_str(text).map_err(|e| InputError::Parse(e.to_string()))?;
        raw.sort_by_key(|e| e.t);
        let entries = raw
            .into_iter()
            .map(|e| Ok((e.t, Keymask::new(e.mask)?)))
            .collect::<Result<Vec<_>, InputError>>()?;
        InputLog::new(entries)
    }

    /// Canonical JSON form, one entry per line.
    pub fn to_json(&self) -> String {
        let mut out = String::from("[\n");
        for (i, &(t, k)) in self.entries.iter().enumerate() {
            let sep = if i + 1 == self.entries.len() { "" } else { "," };
            out.push_str(&format!("  {{\"t\": {t}, \"mask\": {}}}{sep}\n", k.bits()));
        }
        out.push_str("]\n");
        out
    }
}
