use thiserror::Error;

use super::level::Level;
use super::units::TILE;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StateError {
    #[error("state is {got} bytes, expected {expected}")]
    Length { expected: usize, got: usize },
    #[error("byte {offset} is not a boolean ({value:#04x})")]
    NotBool { offset: usize, value: u8 },
    #[error("state has {got} sprites, level has {expected}")]
    SpriteCount { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct PlayerState {
    pub x: i64,
    pub y: i64,
    pub vx: i64,
    pub vy: i64,
    pub air: bool,
    pub ladder: bool,
    pub sprint: bool,
    pub jump: bool,
    pub lives: u32,
    pub coins: u32,
    /// Respawn tile column.
    pub respawn_x: u32,
    /// Respawn tile row.
    pub respawn_y: u32,
}

/// Mutable part of a level sprite. Index `i` refers to `level.sprites()[i]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct SpriteState {
    pub x: i64,
    pub y: i64,
    pub vx: i64,
    pub vy: i64,
    pub removed: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct GameState {
    pub player: PlayerState,
    pub sprites: Vec<SpriteState>,
    pub complete: bool,
}

pub const STARTING_LIVES: u32 = 3;

/// Byte length of the fixed-size part of a serialized state.
pub const HEADER_LEN: usize = 57;
/// Byte length of each serialized sprite.
pub const SPRITE_LEN: usize = 33;

impl GameState {
    /// The state at frame 0: player on the spawn tile, sprites as placed.
    pub fn initial(level: &Level) -> GameState {
        let (sx, sy) = level.spawn();
        let mut player = PlayerState {
            x: sx as i64 * TILE,
            y: sy as i64 * TILE,
            lives: STARTING_LIVES,
            respawn_x: sx,
            respawn_y: sy,
            ..PlayerState::default()
        };
        player.air = !super::physics::supported(level, player.x, player.y);
        GameState {
            player,
            sprites: level
                .sprites()
                .iter()
                .map(|s| SpriteState {
                    x: s.x,
                    y: s.y,
                    vx: s.vx,
                    vy: s.vy,
                    removed: false,
                })
                .collect(),
            complete: false,
        }
    }

    pub fn serialized_len(sprites: usize) -> usize {
        HEADER_LEN + SPRITE_LEN * sprites
    }

    /// Canonical byte form: fixed field order, little-endian fixed-width
    /// integers, one byte per boolean, sprites in index order.
    pub fn to_bytes(&self) -> Vec<u8> {
        let p = &self.player;
        let mut out = Vec::with_capacity(Self::serialized_len(self.sprites.len()));
        for v in [p.x, p.y, p.vx, p.vy] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&[p.air as u8, p.ladder as u8, p.sprint as u8, p.jump as u8]);
        for v in [p.lives, p.coins, p.respawn_x, p.respawn_y] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.push(self.complete as u8);
        out.extend_from_slice(&(self.sprites.len() as u32).to_le_bytes());
        for s in &self.sprites {
            for v in [s.x, s.y, s.vx, s.vy] {
                out.extend_from_slice(&v.to_le_bytes());
            }
            out.push(s.removed as u8);
        }
        debug_assert_eq!(out.len(), Self::serialized_len(self.sprites.len()));
        out
    }

    /// Inverse of [`GameState::to_bytes`]. Rejects any byte string that
    /// `to_bytes` could not have produced.
    pub fn from_bytes(bytes: &[u8]) -> Result<GameState, StateError> {
        if bytes.len() < HEADER_LEN {
            return Err(StateError::Length {
                expected: HEADER_LEN,
                got: bytes.len(),
            });
        }
        let mut r = Reader { bytes, pos: 0 };
        let mut player = PlayerState {
            x: r.i64(),
            y: r.i64(),
            vx: r.i64(),
            vy: r.i64(),
            ..PlayerState::default()
        };
        player.air = r.bool()?;
        player.ladder = r.bool()?;
        player.sprint = r.bool()?;
        player.jump = r.bool()?;
        player.lives = r.u32();
        player.coins = r.u32();
        player.respawn_x = r.u32();
        player.respawn_y = r.u32();
        let complete = r.bool()?;
        let count = r.u32() as usize;

        let expected = HEADER_LEN
            .checked_add(count.saturating_mul(SPRITE_LEN))
            .unwrap_or(usize::MAX);
        if bytes.len() != expected {
            return Err(StateError::Length {
                expected,
                got: bytes.len(),
            });
        }
        let mut sprites = Vec::with_capacity(count);
        for _ in 0..count {
            sprites.push(SpriteState {
                x: r.i64(),
                y: r.i64(),
                vx: r.i64(),
                vy: r.i64(),
                removed: r.bool()?,
            });
        }
        Ok(GameState {
            player,
            sprites,
            complete,
        })
    }

    /// Like [`GameState::from_bytes`] but also checks the sprite count
    /// against `level`.
    pub fn from_bytes_for(level: &Level, bytes: &[u8]) -> Result<GameState, StateError> {
        let state = Self::from_bytes(bytes)?;
        if state.sprites.len() != level.sprites().len() {
            return Err(StateError::SpriteCount {
                expected: level.sprites().len(),
                got: state.sprites.len(),
            });
        }
        Ok(state)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> [u8; N] {
        let out = self.bytes[self.pos..self.pos + N].try_into().unwrap();
        self.pos += N;
        out
    }

    fn i64(&mut self) -> i64 {
        i64::from_le_bytes(self.take())
    }

    fn u32(&mut self) -> u32 {
        u32::from_le_bytes(self.take())
    }

    fn bool(&mut self) -> Result<bool, StateError> {
        let offset = self.pos;
        match self.take::<1>()[0] {
            0 => Ok(false),
            1 => Ok(true),
            value => Err(StateError::NotBool { offset, value }),
        }
    }
}
