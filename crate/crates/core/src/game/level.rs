//! Level text parsing.
//!
//! A level is a rectangular grid of single-character tiles, one row per line,
//! top row first. Every line (including the last) is terminated by `\n`.
//!
//! | char | meaning |
//! |------|---------|
//! | `.`  | empty   |
//! | `#`  | solid   |
//! | `=`  | ladder  |
//! | `~`  | water   |
//! | `L`  | lava    |
//! | `C`  | coin    |
//! | `B`  | bug     |
//! | `G`  | ghost   |
//! | `M`  | spawn   |
//! | `F`  | finish  |

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::units::{TILE, TILE_PX};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LevelError {
    #[error("level has no spawn tile 'M'")]
    MissingSpawn,
    #[error("level has more than one spawn tile (second at column {col}, row {row})")]
    MultipleSpawn { col: u32, row: u32 },
    #[error("level has no finish tile 'F'")]
    MissingFinish,
    #[error("row {row} has length {len}, expected {expected}")]
    RaggedGrid { row: u32, len: usize, expected: usize },
    #[error("unknown tile {ch:?} at column {col}, row {row}")]
    UnknownTile { ch: char, col: u32, row: u32 },
    #[error("level text is empty")]
    Empty,
    #[error("level text must end with a newline")]
    MissingTrailingNewline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tile {
    Empty,
    Solid,
    Ladder,
    Water,
    Lava,
}

impl Tile {
    pub fn is_hazard(self) -> bool {
        matches!(self, Tile::Water | Tile::Lava)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpriteKind {
    Coin,
    Bug,
    Ghost,
}

impl SpriteKind {
    pub fn is_enemy(self) -> bool {
        matches!(self, SpriteKind::Bug | SpriteKind::Ghost)
    }
}

/// Initial placement of a sprite. Positions are in position units, velocities
/// in velocity units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sprite {
    pub kind: SpriteKind,
    pub x: i64,
    pub y: i64,
    pub vx: i64,
    pub vy: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Level {
    width: u32,
    height: u32,
    tiles: Vec<Tile>,
    sprites: Vec<Sprite>,
    spawn: (u32, u32),
    finish: Vec<(u32, u32)>,
    digest: [u8; 32],
}

impl Level {
    pub fn parse(text: &str) -> Result<Level, LevelError> {
        if text.is_empty() {
            return Err(LevelError::Empty);
        }
        let body = text
            .strip_suffix('\n')
            .ok_or(LevelError::MissingTrailingNewline)?;

        let rows: Vec<&str> = body.split('\n').collect();
        let expected = rows[0].chars().count();
        if expected == 0 {
            return Err(LevelError::Empty);
        }

        let mut tiles = Vec::with_capacity(expected * rows.len());
        let mut sprites = Vec::new();
        let mut spawn = None;
        let mut finish = Vec::new();

        for (row, line) in rows.iter().enumerate() {
            let row = row as u32;
            let len = line.chars().count();
            if len != expected {
                return Err(LevelError::RaggedGrid { row, len, expected });
            }
            for (col, ch) in line.chars().enumerate() {
                let col = col as u32;
                let tile = match ch {
                    '.' => Tile::Empty,
                    '#' => Tile::Solid,
                    '=' => Tile::Ladder,
                    '~' => Tile::Water,
                    'L' => Tile::Lava,
                    'C' | 'B' | 'G' => {
                        let kind = match ch {
                            'C' => SpriteKind::Coin,
                            'B' => SpriteKind::Bug,
                            _ => SpriteKind::Ghost,
                        };
                        sprites.push(Sprite::spawn(kind, col, row));
                        Tile::Empty
                    }
                    'M' => {
                        if spawn.is_some() {
                            return Err(LevelError::MultipleSpawn { col, row });
                        }
                        spawn = Some((col, row));
                        Tile::Empty
                    }
                    'F' => {
                        finish.push((col, row));
                        Tile::Empty
                    }
                    ch => return Err(LevelError::UnknownTile { ch, col, row }),
                };
                tiles.push(tile);
            }
        }

        let spawn = spawn.ok_or(LevelError::MissingSpawn)?;
        if finish.is_empty() {
            return Err(LevelError::MissingFinish);
        }

        Ok(Level {
            width: expected as u32,
            height: rows.len() as u32,
            tiles,
            sprites,
            spawn,
            finish,
            digest: Sha256::digest(text.as_bytes()).into(),
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn width_px(&self) -> i64 {
        self.width as i64 * TILE_PX
    }

    pub fn height_px(&self) -> i64 {
        self.height as i64 * TILE_PX
    }

    /// Tile at (col, row). Anything outside the grid reads as solid.
    pub fn tile(&self, col: i64, row: i64) -> Tile {
        if col < 0 || row < 0 || col >= self.width as i64 || row >= self.height as i64 {
            return Tile::Solid;
        }
        self.tiles[row as usize * self.width as usize + col as usize]
    }

    pub fn sprites(&self) -> &[Sprite] {
        &self.sprites
    }

    pub fn spawn(&self) -> (u32, u32) {
        self.spawn
    }

    pub fn finish(&self) -> &[(u32, u32)] {
        &self.finish
    }

    pub fn is_finish(&self, col: i64, row: i64) -> bool {
        self.finish
            .iter()
            .any(|&(c, r)| c as i64 == col && r as i64 == row)
    }

    /// SHA-256 of the exact level text.
    pub fn digest(&self) -> &[u8; 32] {
        &self.digest
    }

    /// Largest legal x for a box's top-left corner.
    pub(crate) fn max_x(&self) -> i64 {
        (self.width as i64 - 1) * TILE
    }
}

impl std::str::FromStr for Level {
    type Err = LevelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Level::parse(s)
    }
}

impl Sprite {
    fn spawn(kind: SpriteKind, col: u32, row: u32) -> Sprite {
        use super::units::{to_vel, PhysicsConstants};
        let patrol = to_vel(PhysicsConstants::LILYPOND.ladder);
        let (vx, vy) = match kind {
            SpriteKind::Coin => (0, 0),
            SpriteKind::Bug => (patrol, 0),
            SpriteKind::Ghost => (0, -patrol),
        };
        Sprite {
            kind,
            x: col as i64 * TILE,
            y: row as i64 * TILE,
            vx,
            vy,
        }
    }
}
