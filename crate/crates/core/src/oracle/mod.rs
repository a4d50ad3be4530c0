//! Oracles that produce authenticated frames.
//!
//! In the thin-client setting the game, the key and the clock live on a
//! server ([`server`]); the player only sends `(t, keymask)` and receives
//! finished frames. [`ThinOracle`] is the same thing in-process. In the
//! thick-client setting the player runs [`thick_step`] themselves and holds
//! the key.

mod client;
mod server;
mod session;
pub mod wire;

use thiserror::Error;

use crate::game::{Game, GameError, GameState};

pub use client::ThinClient;
pub use server::{Server, ServerHandle, MAX_CLIENT_MESSAGE};
pub use session::{Session, ThinOracle};
pub use wire::{ErrorCode, Message, Transport, Welcome, WireError, PROTOCOL_VERSION};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("frame {got} is out of order, expected {expected}")]
    OutOfOrderFrame { expected: u32, got: u32 },
    #[error("session is closed")]
    SessionClosed,
    #[error("invalid keymask {0:#04x}")]
    InvalidKeymask(u8),
    #[error("unknown session {0}")]
    UnknownSession(u64),
    #[error("server error {code:?}: {message}")]
    Remote { code: ErrorCode, message: String },
    #[error("protocol: {0}")]
    Protocol(String),
}

impl OracleError {
    pub fn code(&self) -> ErrorCode {
        match self {
            OracleError::OutOfOrderFrame { .. } => ErrorCode::OutOfOrderFrame,
            OracleError::InvalidKeymask(_) => ErrorCode::InvalidKeymask,
            OracleError::SessionClosed | OracleError::Protocol(_) => ErrorCode::ProtocolViolation,
            OracleError::UnknownSession(_) => ErrorCode::Internal,
            OracleError::Remote { code, .. } => *code,
        }
    }
}

impl From<WireError> for OracleError {
    fn from(e: WireError) -> Self {
        OracleError::Protocol(e.to_string())
    }
}

/// Thick-client step: the plain game step, run wherever the player likes.
pub fn thick_step(
    game: &Game<'_>,
    t_s: u64,
    t: u32,
    state: &GameState,
    keymask: u8,
) -> Result<GameState, GameError> {
    game.step(t_s, t, state, keymask)
}
