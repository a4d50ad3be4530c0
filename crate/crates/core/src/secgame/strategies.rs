use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;

use crate::adversary::{extract_key, patched_game, splice, ConstantsOverride, SkewFactor};
use crate::authstamp::{
    authenticate_frame, bundle_header, embed_in_place, FrameRecord, Recorder, SpeedrunBundle, SIGNATURE_LEN,
};
use crate::game::{frame_timestamp, Game, GameState, InputLog, Keymask};
use crate::oracle::ThinOracle;
use crate::raster::render;

use super::{StrategyFailure, ThickChallenge, ThickEnv, ThickStrategy, ThinStrategy};

/// Inputs a platformer player plausibly holds.
const ALPHABET: [Keymask; 6] = [
    Keymask::NONE,
    Keymask::RIGHT,
    Keymask::RIGHT.union(Keymask::JUMP),
    Keymask::RIGHT.union(Keymask::SPRINT),
    Keymask::LEFT,
    Keymask::JUMP,
];

fn random_mask(rng: &mut ChaCha8Rng) -> Keymask {
    ALPHABET[rng.gen_range(0..ALPHABET.len())]
}

/// `base` for frames before a random cut, random inputs from there to `t`.
fn variant(base: &InputLog, t: u32, rng: &mut ChaCha8Rng) -> InputLog {
    let cut = rng.gen_range(0..t);
    InputLog::dense((0..t).map(|i| if i < cut { base.mask_at(i) } else { random_mask(rng) }))
}

fn play_session(oracle: &mut ThinOracle, log: &InputLog, t: u32, name: &str) -> Result<SpeedrunBundle, StrategyFailure> {
    let id = oracle.open();
    for i in 0..t {
        oracle
            .input(id, i, log.mask_at(i).bits())
            .map_err(|e| StrategyFailure::new(name, e.to_string()))?;
    }
    oracle.end(id).map_err(|e| StrategyFailure::new(name, e.to_string()))
}

/// Plays `log` and submits the server's bundle unchanged.
pub struct HonestThin {
    pub log: InputLog,
}

impl ThinStrategy for HonestThin {
    fn name(&self) -> &str {
        "honest"
    }

    fn play(&self, oracle: &mut ThinOracle, t: u32, _: &mut ChaCha8Rng) -> Result<SpeedrunBundle, StrategyFailure> {
        play_session(oracle, &self.log, t, self.name())
    }
}

/// Plays honestly, then submits a locally simulated run of random inputs
/// carrying random signatures under the server's public key.
pub struct RandomForger {
    pub log: InputLog,
}

impl ThinStrategy for RandomForger {
    fn name(&self) -> &str {
        "forger"
    }

    fn play(&self, oracle: &mut ThinOracle, t: u32, rng: &mut ChaCha8Rng) -> Result<SpeedrunBundle, StrategyFailure> {
        let honest = play_session(oracle, &self.log, t, self.name())?;
        let fake = variant(&self.log, t, rng);
        let game = Game::new(oracle.level());
        let states = game.run_frames(&fake, t);
        let mut frames = Vec::with_capacity(t as usize);
        for (i, pair) in states.windows(2).enumerate() {
            let mut signature = vec![0u8; SIGNATURE_LEN];
            rng.fill_bytes(&mut signature);
            let mut screenshot = render(&pair[1], oracle.level());
            embed_in_place(&mut screenshot, &signature).expect("signature fits");
            frames.push(FrameRecord {
                t: i as u32,
                t_s: frame_timestamp(honest.header.t_s0, i as u32),
                keymask: fake.mask_at(i as u32).bits(),
                state: pair[0].to_bytes(),
                signature,
                screenshot,
            });
        }
        Ok(SpeedrunBundle {
            header: honest.header,
            frames,
        })
    }
}

/// Plays two sessions, the second diverging from the first at a random
/// frame, and splices them at a random frame where their states differ.
pub struct Splicer {
    pub log: InputLog,
}

impl ThinStrategy for Splicer {
    fn name(&self) -> &str {
        "splice"
    }

    fn play(&self, oracle: &mut ThinOracle, t: u32, rng: &mut ChaCha8Rng) -> Result<SpeedrunBundle, StrategyFailure> {
        let a = play_session(oracle, &self.log, t, self.name())?;
        let b = play_session(oracle, &variant(&self.log, t, rng), t, self.name())?;
        let seams: Vec<u32> = (0..t)
            .filter(|&i| a.frames[i as usize].state != b.frames[i as usize].state)
            .collect();
        if seams.is_empty() {
            return Ok(a);
        }
        let seam = seams[rng.gen_range(0..seams.len())];
        splice(&[a, b], &[0..seam, seam..t]).map_err(|e| StrategyFailure::new(self.name(), e.to_string()))
    }
}

/// Plays honestly, then swaps in the states and screenshots of a patched
/// game while keeping the server's signatures.
pub struct PatchThin {
    pub log: InputLog,
    pub patch: ConstantsOverride,
}

impl ThinStrategy for PatchThin {
    fn name(&self) -> &str {
        "patch"
    }

    fn play(&self, oracle: &mut ThinOracle, t: u32, _: &mut ChaCha8Rng) -> Result<SpeedrunBundle, StrategyFailure> {
        let mut bundle = play_session(oracle, &self.log, t, self.name())?;
        let game = patched_game(oracle.level(), &self.patch).map_err(|e| StrategyFailure::new(self.name(), e.to_string()))?;
        let states: Vec<GameState> = game.run_frames(&self.log, t);
        for (i, f) in bundle.frames.iter_mut().enumerate() {
            f.state = states[i].to_bytes();
            let mut shot = render(&states[i + 1], oracle.level());
            embed_in_place(&mut shot, &f.signature).expect("signature fits");
            f.screenshot = shot;
        }
        Ok(bundle)
    }
}

/// Plays honestly, then restamps the frames as if the clock ran `factor`
/// times slower. The server owns the stamps, so only the bundle can change.
pub struct SkewThin {
    pub log: InputLog,
    pub factor: SkewFactor,
}

impl ThinStrategy for SkewThin {
    fn name(&self) -> &str {
        "skew"
    }

    fn play(&self, oracle: &mut ThinOracle, t: u32, _: &mut ChaCha8Rng) -> Result<SpeedrunBundle, StrategyFailure> {
        let mut bundle = play_session(oracle, &self.log, t, self.name())?;
        let t_s0 = bundle.header.t_s0;
        for (i, f) in bundle.frames.iter_mut().enumerate() {
            f.t_s = t_s0 + self.factor.offset_ms(i as u32);
        }
        Ok(bundle)
    }
}

fn record_exact(game: Game<'_>, env: &ThickEnv<'_>, log: &InputLog, t: u32) -> SpeedrunBundle {
    let mut rec = Recorder::with_game(game, env.keys, env.t_s0);
    for i in 0..t {
        rec.push(log.mask_at(i));
    }
    rec.finish()
}

pub struct HonestThick {
    pub log: InputLog,
}

impl ThickStrategy for HonestThick {
    fn name(&self) -> &str {
        "honest"
    }

    fn play(&self, env: &ThickEnv<'_>, t: u32, _: &mut ChaCha8Rng) -> Result<ThickChallenge, StrategyFailure> {
        Ok(ThickChallenge {
            declared: self.log.clone(),
            bundle: record_exact(Game::new(env.level), env, &self.log, t),
        })
    }
}

/// Lifts the key out of the client and signs a run that was never played:
/// the declared log is `log`, the bundle shows sprinting from frame 0 on
/// and random inputs after a random frame.
pub struct KeyExtractor {
    pub log: InputLog,
}

impl ThickStrategy for KeyExtractor {
    fn name(&self) -> &str {
        "extract"
    }

    fn play(&self, env: &ThickEnv<'_>, t: u32, rng: &mut ChaCha8Rng) -> Result<ThickChallenge, StrategyFailure> {
        let sk = extract_key(env.keys).to_keypair();
        let fake = variant(&self.log, t, rng);
        let fake = InputLog::dense((0..t).map(|i| fake.mask_at(i).union(Keymask::SPRINT)));
        let game = Game::new(env.level);
        let mut state = game.initial_state();
        let mut frames = Vec::with_capacity(t as usize);
        for i in 0..t {
            let (record, next) =
                authenticate_frame(&game, &sk, frame_timestamp(env.t_s0, i), i, &state, fake.mask_at(i));
            frames.push(record);
            state = next;
        }
        Ok(ThickChallenge {
            declared: self.log.clone(),
            bundle: SpeedrunBundle {
                header: bundle_header(env.level, &sk, env.t_s0),
                frames,
            },
        })
    }
}

/// Records through a patched binary that signs with the real key.
pub struct PatchThick {
    pub log: InputLog,
    pub patch: ConstantsOverride,
}

impl ThickStrategy for PatchThick {
    fn name(&self) -> &str {
        "patch"
    }

    fn play(&self, env: &ThickEnv<'_>, t: u32, _: &mut ChaCha8Rng) -> Result<ThickChallenge, StrategyFailure> {
        let game = patched_game(env.level, &self.patch).map_err(|e| StrategyFailure::new(self.name(), e.to_string()))?;
        Ok(ThickChallenge {
            declared: self.log.clone(),
            bundle: record_exact(game, env, &self.log, t),
        })
    }
}

/// Records with the game clock slowed by `factor`.
pub struct SkewThick {
    pub log: InputLog,
    pub factor: SkewFactor,
}

impl ThickStrategy for SkewThick {
    fn name(&self) -> &str {
        "skew"
    }

    fn play(&self, env: &ThickEnv<'_>, t: u32, _: &mut ChaCha8Rng) -> Result<ThickChallenge, StrategyFailure> {
        let mut rec = Recorder::new(env.level, env.keys, env.t_s0);
        for i in 0..t {
            rec.push_at(env.t_s0 + self.factor.offset_ms(i), self.log.mask_at(i));
        }
        Ok(ThickChallenge {
            declared: self.log.clone(),
            bundle: rec.finish(),
        })
    }
}
