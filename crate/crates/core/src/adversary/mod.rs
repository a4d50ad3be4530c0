//! The four speedrun-fraud techniques, as executable transformations, plus
//! the input-stream statistics a reviewer might use to spot tool-assisted
//! runs.

mod edit;
mod splice;
mod stats;
mod thick;

use thiserror::Error;

pub use edit::{edit_input_log, Edit, EditScript, EDIT_SCRIPT_VERSION};
pub use splice::splice;
pub use stats::{interarrival_stats, InputStats};
pub use thick::{
    extract_key, patch_constants, patched_game, skew_run, ConstantsOverride, SecretKey, SkewFactor,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdversaryError {
    #[error("bundles disagree on {0}")]
    IncompatibleBundles(&'static str),
    #[error("selection contains no frames")]
    EmptySelection,
    #[error("{bundles} bundles but {cuts} cuts")]
    CutCount { bundles: usize, cuts: usize },
    #[error("cut {start}..{end} exceeds bundle {bundle} with {frames} frames")]
    CutOutOfRange {
        bundle: usize,
        start: u32,
        end: u32,
        frames: usize,
    },
    #[error("unknown physics constant {0:?}")]
    UnknownField(String),
    #[error("bad edit directive {index}: {reason}")]
    BadDirective { index: usize, reason: String },
    #[error("bad skew factor: {0}")]
    BadFactor(String),
}
