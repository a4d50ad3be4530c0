//! Deterministic integer reimplementation of the platformer: levels, input,
//! state, and the per-frame transition function.

mod input;
mod level;
mod physics;
mod state;
mod units;

pub use input::{InputError, InputLog, Keymask};
pub use level::{Level, LevelError, Sprite, SpriteKind, Tile};
pub use physics::{frame_timestamp, Game, GameError};
pub use state::{GameState, PlayerState, SpriteState, StateError, HEADER_LEN, SPRITE_LEN, STARTING_LIVES};
pub use units::{
    to_vel, PhysicsConstants, FRAME_RATE, FRAME_TIME_MS, POS_PER_PX, TILE, TILE_PX, VEL_PER_PX_S,
};
