//! The bundled demo level and input logs.
//!
//! `misstep.json` walks left for ten frames and back before playing the
//! level; `misstep-edits.json` removes that detour. `optimal.json` is a
//! separate run that takes the direct path from the start.

use crate::adversary::EditScript;
use crate::game::{InputLog, Level};

pub const LEVEL_ID: &str = "demo";
pub const LEVEL: &str = include_str!("../../../demo/level.txt");
pub const OPTIMAL_LOG: &str = include_str!("../../../demo/optimal.json");
pub const MISSTEP_LOG: &str = include_str!("../../../demo/misstep.json");
pub const MISSTEP_EDITS: &str = include_str!("../../../demo/misstep-edits.json");

pub fn level() -> Level {
    Level::parse(LEVEL).expect("bundled level parses")
}

pub fn optimal_log() -> InputLog {
    InputLog::from_json(OPTIMAL_LOG).expect("bundled log parses")
}

pub fn misstep_log() -> InputLog {
    InputLog::from_json(MISSTEP_LOG).expect("bundled log parses")
}

pub fn misstep_edits() -> EditScript {
    EditScript::from_json(MISSTEP_EDITS).expect("bundled edit script parses")
}
