//! The screenshotting function: flat-colour rendering of a game state.

use thiserror::Error;

use crate::game::{GameState, Level, SpriteKind, Tile, POS_PER_PX, TILE_PX};

pub const WIDTH: u16 = 320;
pub const HEIGHT: u16 = 240;
/// Bits per pixel.
pub const PIXEL_DEPTH: u8 = 32;

/// Palette, `0xRRGGBBAA`.
pub mod palette {
    pub const SKY: u32 = 0x87CE_EBFF;
    pub const GROUND: u32 = 0x5C40_33FF;
    pub const LADDER: u32 = 0xC8A0_50FF;
    pub const WATER: u32 = 0x1E64_C8FF;
    pub const LAVA: u32 = 0xE650_14FF;
    pub const FINISH: u32 = 0xF0F0_F0FF;
    pub const COIN: u32 = 0xFFD7_00FF;
    pub const BUG: u32 = 0x2E8B_57FF;
    pub const GHOST: u32 = 0xDCDC_FFFF;
    pub const PLAYER: u32 = 0xD0_3070FF;
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RasterError {
    #[error("screenshot dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(u16, u16, u16, u16),
    #[error("raw buffer is {got} bytes, expected {expected}")]
    RawLength { expected: usize, got: usize },
}

/// A `width x height` raster of 32-bit pixels in row-major order. Each pixel
/// is `0xRRGGBBAA`; the raw byte form is R, G, B, A per pixel.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Screenshot {
    width: u16,
    height: u16,
    pixels: Vec<u32>,
}

impl std::fmt::Debug for Screenshot {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Screenshot")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl Screenshot {
    pub fn filled(width: u16, height: u16, color: u32) -> Screenshot {
        Screenshot {
            width,
            height,
            pixels: vec![color; width as usize * height as usize],
        }
    }

    pub fn width(&self) -> u16 {
        self.width
    }

    pub fn height(&self) -> u16 {
        self.height
    }

    pub fn pixels(&self) -> &[u32] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u32] {
        &mut self.pixels
    }

    pub fn pixel(&self, x: u16, y: u16) -> u32 {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    pub fn raw_len(width: u16, height: u16) -> usize {
        width as usize * height as usize * 4
    }

    pub fn to_raw(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.pixels.len() * 4);
        self.write_raw(&mut out);
        out
    }

    pub fn write_raw(&self, out: &mut Vec<u8>) {
        for p in &self.pixels {
            out.extend_from_slice(&p.to_be_bytes());
        }
    }

    pub fn from_raw(width: u16, height: u16, raw: &[u8]) -> Result<Screenshot, RasterError> {
        let expected = Self::raw_len(width, height);
        if raw.len() != expected {
            return Err(RasterError::RawLength {
                expected,
                got: raw.len(),
            });
        }
        Ok(Screenshot {
            width,
            height,
            pixels: raw
                .chunks_exact(4)
                .map(|c| u32::from_be_bytes([c[0], c[1], c[2], c[3]]))
                .collect(),
        })
    }

    fn fill_rect(&mut self, x: i64, y: i64, w: i64, h: i64, color: u32) {
        let x0 = x.max(0);
        let y0 = y.max(0);
        let x1 = (x + w).min(self.width as i64);
        let y1 = (y + h).min(self.height as i64);
        if x0 >= x1 || y0 >= y1 {
            return;
        }
        let stride = self.width as usize;
        for row in y0..y1 {
            let start = row as usize * stride;
            self.pixels[start + x0 as usize..start + x1 as usize].fill(color);
        }
    }
}

/// Top-left corner of the camera in level pixels: centred on the player and
/// clamped so it never shows beyond the level's right or bottom edge.
pub fn camera(state: &GameState, level: &Level) -> (i64, i64) {
    let px = state.player.x.div_euclid(POS_PER_PX) + TILE_PX / 2;
    let py = state.player.y.div_euclid(POS_PER_PX) + TILE_PX / 2;
    let max_x = (level.width_px() - WIDTH as i64).max(0);
    let max_y = (level.height_px() - HEIGHT as i64).max(0);
    (
        (px - WIDTH as i64 / 2).clamp(0, max_x),
        (py - HEIGHT as i64 / 2).clamp(0, max_y),
    )
}

pub fn render(state: &GameState, level: &Level) -> Screenshot {
    let mut shot = Screenshot::filled(WIDTH, HEIGHT, palette::SKY);
    let (cam_x, cam_y) = camera(state, level);

    let first_col = cam_x / TILE_PX;
    let first_row = cam_y / TILE_PX;
    let last_col = ((cam_x + WIDTH as i64 - 1) / TILE_PX).min(level.width() as i64 - 1);
    let last_row = ((cam_y + HEIGHT as i64 - 1) / TILE_PX).min(level.height() as i64 - 1);
    for row in first_row..=last_row {
        for col in first_col..=last_col {
            let color = match level.tile(col, row) {
                Tile::Empty => continue,
                Tile::Solid => palette::GROUND,
                Tile::Ladder => palette::LADDER,
                Tile::Water => palette::WATER,
                Tile::Lava => palette::LAVA,
            };
            shot.fill_rect(
                col * TILE_PX - cam_x,
                row * TILE_PX - cam_y,
                TILE_PX,
                TILE_PX,
                color,
            );
        }
    }
    for &(col, row) in level.finish() {
        shot.fill_rect(
            col as i64 * TILE_PX - cam_x,
            row as i64 * TILE_PX - cam_y,
            TILE_PX,
            TILE_PX,
            palette::FINISH,
        );
    }

    for (placed, s) in level.sprites().iter().zip(&state.sprites) {
        if s.removed {
            continue;
        }
        let color = match placed.kind {
            SpriteKind::Coin => palette::COIN,
            SpriteKind::Bug => palette::BUG,
            SpriteKind::Ghost => palette::GHOST,
        };
        shot.fill_rect(
            s.x.div_euclid(POS_PER_PX) - cam_x,
            s.y.div_euclid(POS_PER_PX) - cam_y,
            TILE_PX,
            TILE_PX,
            color,
        );
    }

    shot.fill_rect(
        state.player.x.div_euclid(POS_PER_PX) - cam_x,
        state.player.y.div_euclid(POS_PER_PX) - cam_y,
        TILE_PX,
        TILE_PX,
        palette::PLAYER,
    );
    shot
}

/// Indices of pixels that differ, ascending.
pub fn pixel_diff(a: &Screenshot, b: &Screenshot) -> Result<Vec<usize>, RasterError> {
    if (a.width, a.height) != (b.width, b.height) {
        return Err(RasterError::DimensionMismatch(
            a.width, a.height, b.width, b.height,
        ));
    }
    Ok(a.pixels
        .iter()
        .zip(&b.pixels)
        .enumerate()
        .filter_map(|(i, (pa, pb))| (pa != pb).then_some(i))
        .collect())
}
