//! The verifier.
//!
//! Checks run in a fixed order and the first failure is reported:
//!
//! 1. header: well formed, matching key / scheme / dimensions, level digest
//! 2. every frame signature over its log entry
//! 3. frame numbers `0, 1, 2, ...` and strictly increasing wall time
//! 4. per-frame and cumulative timing tolerance
//! 5. the state chain replays under the honest transition function
//! 6. every screenshot equals the re-rendered successor with its signature
//!
//! Each check runs over all frames before the next check starts.

use std::fmt;

use rayon::prelude::*;

use crate::game::{Game, GameState, Level, FRAME_TIME_MS};
use crate::raster::{render, HEIGHT, PIXEL_DEPTH, WIDTH};

use super::bundle::SpeedrunBundle;
use super::embed::embed_in_place;
use super::keys::{PublicKey, SIGNATURE_BITS};
use super::record::build_message;

/// Largest accepted deviation of one frame interval from 20 ms.
pub const FRAME_TOLERANCE_MS: u64 = 5;
/// Largest accepted drift of `t_s(n) - t_s(0)` from `20 n`.
pub const DRIFT_TOLERANCE_MS: u64 = 250;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Reason {
    Ok,
    MalformedBundle,
    LevelMismatch,
    BadSignature,
    NonMonotoneTime,
    TimingViolation,
    ChainBreak,
    RenderMismatch,
}

impl Reason {
    pub fn as_str(self) -> &'static str {
        match self {
            Reason::Ok => "Ok",
            Reason::MalformedBundle => "MalformedBundle",
            Reason::LevelMismatch => "LevelMismatch",
            Reason::BadSignature => "BadSignature",
            Reason::NonMonotoneTime => "NonMonotoneTime",
            Reason::TimingViolation => "TimingViolation",
            Reason::ChainBreak => "ChainBreak",
            Reason::RenderMismatch => "RenderMismatch",
        }
    }
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Verdict {
    pub reason: Reason,
    /// First offending frame, when the failure is tied to one.
    pub frame: Option<u32>,
}

impl Verdict {
    pub const ACCEPT: Verdict = Verdict {
        reason: Reason::Ok,
        frame: None,
    };

    pub fn reject(reason: Reason, frame: Option<u32>) -> Verdict {
        debug_assert_ne!(reason, Reason::Ok);
        Verdict { reason, frame }
    }

    pub fn accept(&self) -> bool {
        self.reason == Reason::Ok
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.accept() {
            return f.write_str("ACCEPT");
        }
        write!(f, "REJECT {}", self.reason)?;
        if let Some(frame) = self.frame {
            write!(f, " frame={frame}")?;
        }
        Ok(())
    }
}

/// Decodes and verifies an encoded bundle. Undecodable input is
/// `MalformedBundle`.
pub fn verify_bytes(public_key: &PublicKey, level: &Level, bytes: &[u8]) -> Verdict {
    match SpeedrunBundle::decode(bytes) {
        Ok(bundle) => verify_bundle(public_key, level, &bundle),
        Err(_) => Verdict::reject(Reason::MalformedBundle, None),
    }
}

pub fn verify_bundle(public_key: &PublicKey, level: &Level, bundle: &SpeedrunBundle) -> Verdict {
    let checks: [fn(&PublicKey, &Level, &SpeedrunBundle) -> Result<(), Verdict>; 3] =
        [check_header, check_signatures, check_time];
    for check in checks {
        if let Err(v) = check(public_key, level, bundle) {
            return v;
        }
    }
    let successors = match check_chain(level, bundle) {
        Ok(s) => s,
        Err(v) => return v,
    };
    if let Err(v) = check_render(level, bundle, &successors) {
        return v;
    }
    Verdict::ACCEPT
}

fn reject_at(reason: Reason, frame: usize) -> Verdict {
    Verdict::reject(reason, Some(frame as u32))
}

fn check_header(pk: &PublicKey, level: &Level, b: &SpeedrunBundle) -> Result<(), Verdict> {
    let h = &b.header;
    let malformed = Verdict::reject(Reason::MalformedBundle, None);
    if h.public_key.as_slice() != pk.as_bytes()
        || h.signature_bits != SIGNATURE_BITS
        || (h.width, h.height, h.pixel_depth) != (WIDTH, HEIGHT, PIXEL_DEPTH)
    {
        return Err(malformed);
    }
    if let Some(first) = b.frames.first() {
        if first.t_s != h.t_s0 {
            return Err(malformed);
        }
    }
    let state_len = GameState::serialized_len(level.sprites().len());
    for (i, f) in b.frames.iter().enumerate() {
        if f.signature.len() != h.signature_len()
            || (f.screenshot.width(), f.screenshot.height()) != (h.width, h.height)
            || f.state.len() != state_len
        {
            return Err(Verdict::reject(Reason::MalformedBundle, Some(i as u32)));
        }
    }
    if &h.level_digest != level.digest() {
        return Err(Verdict::reject(Reason::LevelMismatch, None));
    }
    Ok(())
}

fn check_signatures(pk: &PublicKey, _: &Level, b: &SpeedrunBundle) -> Result<(), Verdict> {
    let bad = b.frames.par_iter().position_first(|f| {
        !pk.verify(&build_message(f.t_s, f.t, f.keymask, &f.state), &f.signature)
    });
    match bad {
        Some(i) => Err(reject_at(Reason::BadSignature, i)),
        None => Ok(()),
    }
}

fn check_time(_: &PublicKey, _: &Level, b: &SpeedrunBundle) -> Result<(), Verdict> {
    for (i, f) in b.frames.iter().enumerate() {
        if f.t as usize != i || (i > 0 && f.t_s <= b.frames[i - 1].t_s) {
            return Err(reject_at(Reason::NonMonotoneTime, i));
        }
    }
    let Some(first) = b.frames.first() else {
        return Ok(());
    };
    for i in 1..b.frames.len() {
        let delta = b.frames[i].t_s - b.frames[i - 1].t_s;
        let elapsed = b.frames[i].t_s - first.t_s;
        let nominal = i as u64 * FRAME_TIME_MS;
        if delta.abs_diff(FRAME_TIME_MS) > FRAME_TOLERANCE_MS
            || elapsed.abs_diff(nominal) > DRIFT_TOLERANCE_MS
        {
            return Err(reject_at(Reason::TimingViolation, i));
        }
    }
    Ok(())
}

/// Replays the chain and returns `σ_{i+1}` for every frame `i`.
fn check_chain(level: &Level, b: &SpeedrunBundle) -> Result<Vec<GameState>, Verdict> {
    let game = Game::new(level);
    if let Some(first) = b.frames.first() {
        if first.state != game.initial_state().to_bytes() {
            return Err(reject_at(Reason::ChainBreak, 0));
        }
    }
    let mut successors = Vec::with_capacity(b.frames.len());
    for (i, f) in b.frames.iter().enumerate() {
        let state =
            GameState::from_bytes_for(level, &f.state).map_err(|_| reject_at(Reason::ChainBreak, i))?;
        let next = game
            .step(f.t_s, f.t, &state, f.keymask)
            .map_err(|_| reject_at(Reason::ChainBreak, i))?;
        if let Some(following) = b.frames.get(i + 1) {
            if following.state != next.to_bytes() {
                return Err(reject_at(Reason::ChainBreak, i + 1));
            }
        }
        successors.push(next);
    }
    Ok(successors)
}

fn check_render(level: &Level, b: &SpeedrunBundle, successors: &[GameState]) -> Result<(), Verdict> {
    let bad = b
        .frames
        .par_iter()
        .zip(successors.par_iter())
        .position_first(|(f, next)| {
            let mut expected = render(next, level);
            embed_in_place(&mut expected, &f.signature).is_err() || expected != f.screenshot
        });
    match bad {
        Some(i) => Err(reject_at(Reason::RenderMismatch, i)),
        None => Ok(()),
    }
}
