//! The transition function.
//!
//! Per frame, in order: enemies move, horizontal intent is applied, ladder /
//! jump / gravity set the vertical speed, fall speed is clamped, the player is
//! moved through the tile grid, then sprite contacts, hazards and the finish
//! are resolved. The wall-clock argument of [`Game::step`] is accepted and
//! ignored; only logical frames drive physics.

use thiserror::Error;

use super::input::{InputError, InputLog, Keymask};
use super::level::{Level, SpriteKind, Tile};
use super::state::GameState;
use super::units::{to_vel, PhysicsConstants, FRAME_TIME_MS, TILE};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error(transparent)]
    Input(#[from] InputError),
    #[error("state carries {got} sprites but the level has {expected}")]
    StateMismatch { expected: usize, got: usize },
}

/// Ghosts hover over a 64 px vertical loop above their placement.
const GHOST_RANGE: i64 = 4 * TILE;

/// A level bound to a set of physics constants.
#[derive(Debug, Clone, Copy)]
pub struct Game<'a> {
    level: &'a Level,
    constants: PhysicsConstants,
}

impl<'a> Game<'a> {
    pub fn new(level: &'a Level) -> Game<'a> {
        Game {
            level,
            constants: PhysicsConstants::LILYPOND,
        }
    }

    pub fn with_constants(level: &'a Level, constants: PhysicsConstants) -> Game<'a> {
        Game { level, constants }
    }

    pub fn level(&self) -> &'a Level {
        self.level
    }

    pub fn constants(&self) -> &PhysicsConstants {
        &self.constants
    }

    pub fn initial_state(&self) -> GameState {
        GameState::initial(self.level)
    }

    /// `σ_{t+1} = T(t_s, t, σ_t, k_t)`.
    pub fn step(
        &self,
        _t_s: u64,
        _t: u32,
        state: &GameState,
        keymask: u8,
    ) -> Result<GameState, GameError> {
        let k = Keymask::new(keymask)?;
        if state.sprites.len() != self.level.sprites().len() {
            return Err(GameError::StateMismatch {
                expected: self.level.sprites().len(),
                got: state.sprites.len(),
            });
        }
        Ok(self.advance(state, k))
    }

    /// Plays `log` from the spawn state until the log ends or the level is
    /// completed. Returns `σ_0..=σ_n`.
    pub fn run(&self, log: &InputLog) -> Vec<GameState> {
        self.run_frames(log, log.frames())
    }

    /// Like [`Game::run`] but plays exactly `frames` frames unless the level
    /// completes first.
    pub fn run_frames(&self, log: &InputLog, frames: u32) -> Vec<GameState> {
        let mut states = vec![self.initial_state()];
        for t in 0..frames {
            let current = states.last().unwrap();
            if current.complete {
                break;
            }
            let next = self.advance(current, log.mask_at(t));
            states.push(next);
        }
        states
    }

    pub(crate) fn advance(&self, state: &GameState, k: Keymask) -> GameState {
        if state.complete {
            return state.clone();
        }
        let level = self.level;
        let c = &self.constants;
        let mut next = state.clone();
        self.move_sprites(&mut next);

        let left = k.contains(Keymask::LEFT);
        let right = k.contains(Keymask::RIGHT);
        let jump = k.contains(Keymask::JUMP);
        let up = k.contains(Keymask::UP);
        let down = k.contains(Keymask::DOWN);

        let p = &mut next.player;
        p.sprint = k.contains(Keymask::SPRINT);
        let speed = to_vel(if p.sprint { c.sprint } else { c.walk });
        p.vx = (right as i64 - left as i64) * speed;

        if !overlaps_tile(level, p.x, p.y, |t| t == Tile::Ladder) {
            p.ladder = false;
        } else if up || down {
            p.ladder = true;
        }

        if p.ladder {
            if jump {
                p.ladder = false;
                p.vy = -to_vel(c.jump);
            } else {
                p.vy = (down as i64 - up as i64) * to_vel(c.ladder);
            }
        } else if !p.air {
            p.vy = if jump { -to_vel(c.jump) } else { 0 };
        } else {
            let short = to_vel(c.short_jump);
            if !jump && p.vy < -short {
                p.vy = -short;
            }
            // Acceleration in px/s² is exactly its value in velocity units per frame.
            p.vy = p.vy.saturating_add(c.gravity);
        }
        p.jump = jump;
        p.vy = p.vy.min(to_vel(c.fall_max));

        let (x, vx) = move_axis(level, p.x, p.y, p.vx, Axis::X);
        p.x = x;
        p.vx = vx;
        let (y, vy) = move_axis(level, p.x, p.y, p.vy, Axis::Y);
        p.y = y;
        p.vy = vy;
        p.air = !p.ladder && !supported(level, p.x, p.y);

        self.resolve_contacts(&mut next);
        next
    }

    fn move_sprites(&self, state: &mut GameState) {
        let level = self.level;
        for (placed, s) in level.sprites().iter().zip(state.sprites.iter_mut()) {
            if s.removed {
                continue;
            }
            match placed.kind {
                SpriteKind::Coin => {}
                SpriteKind::Bug => {
                    if s.vx == 0 {
                        continue;
                    }
                    let nx = s.x + s.vx;
                    let lead = if s.vx > 0 {
                        (nx + TILE - 1).div_euclid(TILE)
                    } else {
                        nx.div_euclid(TILE)
                    };
                    let blocked = nx < 0
                        || nx > level.max_x()
                        || rows_spanned(s.y).any(|r| level.tile(lead, r) == Tile::Solid);
                    let ledge = supported(level, s.x, s.y)
                        && level.tile(lead, (s.y + TILE).div_euclid(TILE)) != Tile::Solid;
                    if blocked || ledge {
                        s.vx = -s.vx;
                    } else {
                        s.x = nx;
                    }
                }
                SpriteKind::Ghost => {
                    let bottom = placed.y;
                    let top = (bottom - GHOST_RANGE).max(0);
                    s.y += s.vy;
                    if s.y <= top {
                        s.y = top;
                        s.vy = s.vy.abs();
                    } else if s.y >= bottom {
                        s.y = bottom;
                        s.vy = -s.vy.abs();
                    }
                }
            }
        }
    }

    fn resolve_contacts(&self, state: &mut GameState) {
        let level = self.level;
        let mut harmed = false;
        for (placed, s) in level.sprites().iter().zip(state.sprites.iter_mut()) {
            let p = &mut state.player;
            if s.removed || (p.x - s.x).abs() >= TILE || (p.y - s.y).abs() >= TILE {
                continue;
            }
            match placed.kind {
                SpriteKind::Coin => {
                    s.removed = true;
                    p.coins = p.coins.saturating_add(1);
                }
                SpriteKind::Bug | SpriteKind::Ghost => {
                    // Falling with the player's bottom edge above the enemy's midpoint.
                    if p.vy > 0 && p.y + TILE < s.y + TILE / 2 {
                        s.removed = true;
                        p.vy = -to_vel(self.constants.short_jump);
                        p.air = true;
                        p.ladder = false;
                    } else {
                        harmed = true;
                        break;
                    }
                }
            }
        }

        let p = &mut state.player;
        if harmed || overlaps_tile(level, p.x, p.y, Tile::is_hazard) {
            p.x = p.respawn_x as i64 * TILE;
            p.y = p.respawn_y as i64 * TILE;
            p.vx = 0;
            p.vy = 0;
            p.ladder = false;
            p.air = !supported(level, p.x, p.y);
            p.lives = p.lives.saturating_sub(1);
            return;
        }

        let cols = cols_spanned(p.x);
        if rows_spanned(p.y).any(|r| cols.clone().any(|c| level.is_finish(c, r))) {
            state.complete = true;
        }
    }
}

/// Wall-clock stamp of frame `t` in a run started at `t_s0`.
pub fn frame_timestamp(t_s0: u64, t: u32) -> u64 {
    t_s0 + t as u64 * FRAME_TIME_MS
}

#[derive(Clone, Copy)]
enum Axis {
    X,
    Y,
}

fn cols_spanned(x: i64) -> std::ops::RangeInclusive<i64> {
    x.div_euclid(TILE)..=(x + TILE - 1).div_euclid(TILE)
}

fn rows_spanned(y: i64) -> std::ops::RangeInclusive<i64> {
    cols_spanned(y)
}

fn overlaps_tile(level: &Level, x: i64, y: i64, pred: impl Fn(Tile) -> bool) -> bool {
    let cols = cols_spanned(x);
    rows_spanned(y).any(|r| cols.clone().any(|c| pred(level.tile(c, r))))
}

/// True when a box at (x, y) rests on a solid tile or the level floor.
pub(crate) fn supported(level: &Level, x: i64, y: i64) -> bool {
    if (y + TILE).rem_euclid(TILE) != 0 {
        return false;
    }
    let below = (y + TILE).div_euclid(TILE);
    cols_spanned(x).any(|c| level.tile(c, below) == Tile::Solid)
}

/// Moves a player box along one axis, stopping flush against solid tiles.
/// Motion is split into sub-tile steps so no speed can tunnel through a wall.
fn move_axis(level: &Level, x: i64, y: i64, velocity: i64, axis: Axis) -> (i64, i64) {
    let span = match axis {
        Axis::X => level.width_px(),
        Axis::Y => level.height_px(),
    } * super::units::POS_PER_PX;
    let mut remaining = velocity.clamp(-span, span);
    let (mut x, mut y) = (x, y);
    while remaining != 0 {
        let d = remaining.clamp(-(TILE - 1), TILE - 1);
        remaining -= d;
        let (pos, other) = match axis {
            Axis::X => (&mut x, y),
            Axis::Y => (&mut y, x),
        };
        *pos += d;
        let lead = if d > 0 {
            (*pos + TILE - 1).div_euclid(TILE)
        } else {
            pos.div_euclid(TILE)
        };
        let hit = cols_spanned(other).any(|o| {
            let tile = match axis {
                Axis::X => level.tile(lead, o),
                Axis::Y => level.tile(o, lead),
            };
            tile == Tile::Solid
        });
        if hit {
            *pos = if d > 0 { lead * TILE - TILE } else { (lead + 1) * TILE };
            let pos = *pos;
            return (pos, 0);
        }
    }
    match axis {
        Axis::X => (x, velocity),
        Axis::Y => (y, velocity),
    }
}
