//! Input-log edit scripts.
//!
//! JSON schema, version 1:
//!
//! ```json
//! {"version": 1, "edits": [
//!   {"op": "remove", "from": 0, "to": 19},
//!   {"op": "insert", "from": 40, "to": 42, "mask": 6},
//!   {"op": "shift", "from": 100, "to": 120, "delta": -3}
//! ]}
//! ```
//!
//! Ranges are inclusive frame numbers. `remove` drops the entries in the
//! range and pulls later entries back by its length; `insert` adds `mask`
//! on every frame of the range and pushes entries at or after `from`
//! forward; `shift` moves the entries in the range by `delta`. After each
//! directive the log is re-sorted and colliding frames are pushed forward
//! so the frame numbers stay strictly increasing.

use serde::{Deserialize, Serialize};

use crate::game::{InputLog, Keymask};

use super::AdversaryError;

pub const EDIT_SCRIPT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase", deny_unknown_fields)]
pub enum Edit {
    Remove { from: u32, to: u32 },
    Insert { from: u32, to: u32, mask: u8 },
    Shift { from: u32, to: u32, delta: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EditScript {
    pub version: u32,
    pub edits: Vec<Edit>,
}

impl EditScript {
    pub fn new(edits: Vec<Edit>) -> EditScript {
        EditScript {
            version: EDIT_SCRIPT_VERSION,
            edits,
        }
    }

    pub fn from_json(text: &str) -> Result<EditScript, AdversaryError> {
        let script: EditScript = serde_json::from_str(text).map_err(|e| AdversaryError::BadDirective {
            index: 0,
            reason: e.to_string(),
        })?;
        if script.version != EDIT_SCRIPT_VERSION {
            return Err(AdversaryError::BadDirective {
                index: 0,
                reason: format!("unsupported script version {}", script.version),
            });
        }
        Ok(script)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("edit script serializes")
    }
}

/// Applies `edits` in order.
pub fn edit_input_log(log: &InputLog, edits: &[Edit]) -> Result<InputLog, AdversaryError> {
    let mut entries: Vec<(i64, Keymask)> = log.entries().iter().map(|&(t, k)| (t as i64, k)).collect();
    for (index, edit) in edits.iter().enumerate() {
        let bad = |reason: String| AdversaryError::BadDirective { index, reason };
        let frames = entries.last().map_or(0, |&(t, _)| t + 1);
        let (from, to) = match *edit {
            Edit::Remove { from, to } | Edit::Insert { from, to, .. } | Edit::Shift { from, to, .. } => {
                (from as i64, to as i64)
            }
        };
        if from > to {
            return Err(bad(format!("range {from}..={to} is reversed")));
        }
        let len = to - from + 1;
        match *edit {
            Edit::Remove { .. } => {
                if to >= frames {
                    return Err(bad(format!("removal {from}..={to} runs past the last frame {}", frames - 1)));
                }
                entries.retain(|&(t, _)| t < from || t > to);
                for e in entries.iter_mut().filter(|e| e.0 > to) {
                    e.0 -= len;
                }
            }
            Edit::Insert { mask, .. } => {
                let mask = Keymask::new(mask).map_err(|e| bad(e.to_string()))?;
                if from > frames {
                    return Err(bad(format!("insertion at {from} leaves a gap after frame {frames}")));
                }
                for e in entries.iter_mut().filter(|e| e.0 >= from) {
                    e.0 += len;
                }
                entries.extend((from..=to).map(|t| (t, mask)));
            }
            Edit::Shift { delta, .. } => {
                for e in entries.iter_mut().filter(|e| e.0 >= from && e.0 <= to) {
                    e.0 = (e.0 + delta).max(0);
                }
            }
        }
        entries.sort_by_key(|e| e.0);
        for i in 1..entries.len() {
            if entries[i].0 <= entries[i - 1].0 {
                entries[i].0 = entries[i - 1].0 + 1;
            }
        }
        if entries.last().is_some_and(|e| e.0 > u32::MAX as i64) {
            return Err(bad("frame numbers overflow".into()));
        }
    }
    Ok(InputLog::new(entries.into_iter().map(|(t, k)| (t as u32, k)).collect())
        .expect("entries are strictly increasing"))
}
