use crate::game::{frame_timestamp, Game, GameState, InputLog, Keymask, Level};
use crate::raster::{render, HEIGHT, PIXEL_DEPTH, WIDTH};

use super::bundle::{BundleHeader, FrameRecord, SpeedrunBundle, FORMAT_VERSION};
use super::embed::embed_in_place;
use super::keys::KeyPair;

/// Signed message for one frame: `t_s (u64 LE) ‖ t (u32 LE) ‖ keymask (u8) ‖ state`.
pub fn build_message(t_s: u64, t: u32, keymask: u8, state: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(13 + state.len());
    out.extend_from_slice(&t_s.to_le_bytes());
    out.extend_from_slice(&t.to_le_bytes());
    out.push(keymask);
    out.extend_from_slice(state);
    out
}

/// Produces one authenticated frame from `σ_t`: signs the log entry, steps
/// the game, renders `σ_{t+1}` and embeds the signature.
pub fn authenticate_frame(
    game: &Game<'_>,
    keys: &KeyPair,
    t_s: u64,
    t: u32,
    state: &GameState,
    keymask: Keymask,
) -> (FrameRecord, GameState) {
    let state_bytes = state.to_bytes();
    let signature = keys.sign(&build_message(t_s, t, keymask.bits(), &state_bytes));
    let next = game.advance(state, keymask);
    let mut screenshot = render(&next, game.level());
    embed_in_place(&mut screenshot, &signature).expect("512-bit signature fits in 320x240");
    (
        FrameRecord {
            t,
            t_s,
            keymask: keymask.bits(),
            state: state_bytes,
            signature: signature.to_vec(),
            screenshot,
        },
        next,
    )
}

pub fn bundle_header(level: &Level, keys: &KeyPair, t_s0: u64) -> BundleHeader {
    BundleHeader {
        version: FORMAT_VERSION,
        level_digest: *level.digest(),
        public_key: keys.public_key().to_bytes().to_vec(),
        signature_bits: keys.signature_bits(),
        width: WIDTH,
        height: HEIGHT,
        pixel_depth: PIXEL_DEPTH,
        t_s0,
    }
}

/// Incremental producer of authenticated frames: the modified transition
/// function plus the modified screenshotting function.
pub struct Recorder<'a> {
    game: Game<'a>,
    keys: &'a KeyPair,
    t_s0: u64,
    state: GameState,
    frames: Vec<FrameRecord>,
}

impl<'a> Recorder<'a> {
    pub fn new(level: &'a Level, keys: &'a KeyPair, t_s0: u64) -> Recorder<'a> {
        Self::with_game(Game::new(level), keys, t_s0)
    }

    /// A recorder driving an arbitrary game variant (e.g. patched constants).
    pub fn with_game(game: Game<'a>, keys: &'a KeyPair, t_s0: u64) -> Recorder<'a> {
        Recorder {
            state: game.initial_state(),
            game,
            keys,
            t_s0,
            frames: Vec::new(),
        }
    }

    pub fn next_frame(&self) -> u32 {
        self.frames.len() as u32
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn frames(&self) -> &[FrameRecord] {
        &self.frames
    }

    /// Records the next frame stamped at the logical time `t_s0 + 20 t`.
    pub fn push(&mut self, keymask: Keymask) -> &FrameRecord {
        let t_s = frame_timestamp(self.t_s0, self.next_frame());
        self.push_at(t_s, keymask)
    }

    /// Records the next frame with an explicit wall-clock stamp.
    pub fn push_at(&mut self, t_s: u64, keymask: Keymask) -> &FrameRecord {
        let t = self.next_frame();
        let (record, next) =
            authenticate_frame(&self.game, self.keys, t_s, t, &self.state, keymask);
        self.state = next;
        self.frames.push(record);
        self.frames.last().unwrap()
    }

    pub fn finish(self) -> SpeedrunBundle {
        SpeedrunBundle {
            header: bundle_header(self.game.level(), self.keys, self.t_s0),
            frames: self.frames,
        }
    }
}

/// Records `log` on `level`, stopping at the end of the log or on completion.
pub fn record(level: &Level, log: &InputLog, keys: &KeyPair, t_s0: u64) -> SpeedrunBundle {
    record_frames(level, log, keys, t_s0, log.frames())
}

/// Records exactly `frames` frames (idle where the log is silent) unless the
/// level completes first.
pub fn record_frames(
    level: &Level,
    log: &InputLog,
    keys: &KeyPair,
    t_s0: u64,
    frames: u32,
) -> SpeedrunBundle {
    let mut rec = Recorder::new(level, keys, t_s0);
    for t in 0..frames {
        if rec.state().complete {
            break;
        }
        rec.push(log.mask_at(t));
    }
    rec.finish()
}
