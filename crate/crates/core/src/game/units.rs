//! Fixed-point units and physics constants.
//!
//! Positions are stored in 1/2304 px and velocities in 1/48 px/s. With a
//! 48 Hz logical frame rate a velocity of `v` velocity units moves an object
//! exactly `v` position units per frame, and an acceleration of `a` px/s²
//! changes velocity by exactly `a` velocity units per frame. Every update is
//! an integer addition.

/// Position units per pixel.
pub const POS_PER_PX: i64 = 2304;
/// Velocity units per px/s.
pub const VEL_PER_PX_S: i64 = 48;

pub const TILE_PX: i64 = 16;
/// One tile edge in position units.
pub const TILE: i64 = TILE_PX * POS_PER_PX;

pub const FRAME_RATE: u32 = 48;
pub const FRAME_TIME_MS: u64 = 1000 / FRAME_RATE as u64;

/// Converts a speed in px/s into velocity units.
pub const fn to_vel(px_per_s: i64) -> i64 {
    px_per_s * VEL_PER_PX_S
}

/// Speeds in px/s, accelerations in px/s².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PhysicsConstants {
    pub gravity: i64,
    pub walk: i64,
    pub sprint: i64,
    pub ladder: i64,
    pub fall_max: i64,
    pub jump: i64,
    pub short_jump: i64,
}

impl PhysicsConstants {
    pub const LILYPOND: PhysicsConstants = PhysicsConstants {
        gravity: 600,
        walk: 72,
        sprint: 96,
        ladder: 64,
        fall_max: 128,
        jump: 256,
        short_jump: 192,
    };

    pub const FIELD_NAMES: [&'static str; 7] = [
        "gravity",
        "walk",
        "sprint",
        "ladder",
        "fall_max",
        "jump",
        "short_jump",
    ];

    pub fn field_mut(&mut self, name: &str) -> Option<&mut i64> {
        Some(match name {
            "gravity" => &mut self.gravity,
            "walk" => &mut self.walk,
            "sprint" => &mut self.sprint,
            "ladder" => &mut self.ladder,
            "fall_max" => &mut self.fall_max,
            "jump" => &mut self.jump,
            "short_jump" => &mut self.short_jump,
            _ => return None,
        })
    }
}

impl Default for PhysicsConstants {
    fn default() -> Self {
        Self::LILYPOND
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_time_is_floor_of_rate() {
        assert_eq!(FRAME_TIME_MS, 20);
        assert_eq!(FRAME_TIME_MS, (1000.0f64 / FRAME_RATE as f64).floor() as u64);
    }

    #[test]
    fn velocity_moves_position_units_per_frame() {
        // v px/s for 1/48 s = v/48 px = v * 2304 / 48 position units = v * 48.
        for px_s in [1i64, 72, 96, 256] {
            assert_eq!(to_vel(px_s), px_s * POS_PER_PX / FRAME_RATE as i64);
        }
        assert_eq!(to_vel(72), 3456);
        assert_eq!(3456 * 2, 3 * POS_PER_PX);
        assert_eq!(to_vel(128), 6144);
    }
}
