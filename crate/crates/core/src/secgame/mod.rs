//! Executable security games.
//!
//! Thin-client game: the adversary plays through a [`ThinOracle`] (session
//! 0 is the run under attack) up to frame `t`, which fixes the honest
//! screenshot `s_t`, then submits a challenge bundle. It wins if the
//! verifier accepts and the challenge's frame-`t` screenshot differs from
//! `s_t` in any bit.
//!
//! Thick-client game: the adversary holds the key pair and the game. It
//! declares an input log and submits a challenge; the reference screenshot
//! is what honest recording of the declared log shows at frame `t`.
//!
//! The frame-`t` screenshot of a bundle is that of frame record `t - 1`,
//! which shows `σ_t`.

mod strategies;

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{Beta, ContinuousCDF};
use thiserror::Error;

use crate::adversary::{ConstantsOverride, SkewFactor};
use crate::authstamp::{verify_bundle, KeyPair, Recorder, SpeedrunBundle, Verdict};
use crate::game::{InputLog, Level};
use crate::oracle::ThinOracle;
use crate::raster::Screenshot;

pub use strategies::{
    HonestThick, HonestThin, KeyExtractor, PatchThick, PatchThin, RandomForger, SkewThick, SkewThin,
    Splicer,
};

/// Wall-clock start of every trial's run.
pub const EPOCH_MS: u64 = 1_700_000_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("strategy {strategy} failed: {reason}")]
pub struct StrategyFailure {
    pub strategy: String,
    pub reason: String,
}

impl StrategyFailure {
    pub fn new(strategy: &str, reason: impl Into<String>) -> StrategyFailure {
        StrategyFailure {
            strategy: strategy.to_owned(),
            reason: reason.into(),
        }
    }
}

/// Adversary against the thin-client construction. Deterministic given the
/// RNG it is handed.
pub trait ThinStrategy: Send + Sync {
    fn name(&self) -> &str;

    /// Plays session 0 (and any others it likes) to at least frame `t` and
    /// returns the challenge bundle.
    fn play(&self, oracle: &mut ThinOracle, t: u32, rng: &mut ChaCha8Rng) -> Result<SpeedrunBundle, StrategyFailure>;
}

/// What a thick-client adversary submits.
pub struct ThickChallenge {
    /// The input log the adversary claims produced the run.
    pub declared: InputLog,
    pub bundle: SpeedrunBundle,
}

/// The adversary's whole environment in the thick-client setting.
pub struct ThickEnv<'a> {
    pub level: &'a Level,
    pub keys: &'a KeyPair,
    pub t_s0: u64,
}

pub trait ThickStrategy: Send + Sync {
    fn name(&self) -> &str;

    fn play(&self, env: &ThickEnv<'_>, t: u32, rng: &mut ChaCha8Rng) -> Result<ThickChallenge, StrategyFailure>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameOutcome {
    pub win: bool,
    pub honest: Screenshot,
    /// `None` when the challenge stops before frame `t`.
    pub challenge: Option<Screenshot>,
    pub verdict: Verdict,
}

fn outcome(honest: Screenshot, challenge: &SpeedrunBundle, verdict: Verdict, t: u32) -> GameOutcome {
    let shot = challenge.frames.get(t as usize - 1).map(|f| f.screenshot.clone());
    let win = verdict.accept() && shot.as_ref().is_some_and(|s| *s != honest);
    GameOutcome {
        win,
        honest,
        challenge: shot,
        verdict,
    }
}

/// Fresh key pair and strategy RNG for one trial.
fn trial_setup(seed: u64) -> (KeyPair, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut key_seed = [0u8; 32];
    rng.fill_bytes(&mut key_seed);
    (KeyPair::from_seed(&key_seed), rng)
}

pub fn thin_client_game(
    strategy: &dyn ThinStrategy,
    level: &Arc<Level>,
    t: u32,
    seed: u64,
) -> Result<GameOutcome, StrategyFailure> {
    assert!(t >= 1, "target frame must be at least 1");
    let (keys, mut rng) = trial_setup(seed);
    let keys = Arc::new(keys);
    let pk = keys.public_key();
    let mut oracle = ThinOracle::new(level.clone(), keys, EPOCH_MS);
    let challenge = strategy.play(&mut oracle, t, &mut rng)?;
    let honest = oracle
        .transcript(0)
        .and_then(|frames| frames.get(t as usize - 1))
        .map(|f| f.screenshot.clone())
        .ok_or_else(|| StrategyFailure::new(strategy.name(), format!("session 0 did not reach frame {t}")))?;
    let verdict = verify_bundle(&pk, level, &challenge);
    Ok(outcome(honest, &challenge, verdict, t))
}

/// Screenshot at frame `t` of an honest recording of `log`.
pub fn honest_reference(level: &Level, log: &InputLog, keys: &KeyPair, t_s0: u64, t: u32) -> Screenshot {
    let mut rec = Recorder::new(level, keys, t_s0);
    for i in 0..t {
        rec.push(log.mask_at(i));
    }
    rec.frames()[t as usize - 1].screenshot.clone()
}

pub fn thick_client_game(
    strategy: &dyn ThickStrategy,
    level: &Level,
    t: u32,
    seed: u64,
) -> Result<GameOutcome, StrategyFailure> {
    assert!(t >= 1, "target frame must be at least 1");
    let (keys, mut rng) = trial_setup(seed);
    let env = ThickEnv {
        level,
        keys: &keys,
        t_s0: EPOCH_MS,
    };
    let challenge = strategy.play(&env, t, &mut rng)?;
    let honest = honest_reference(level, &challenge.declared, &keys, EPOCH_MS, t);
    let verdict = verify_bundle(&keys.public_key(), level, &challenge.bundle);
    Ok(outcome(honest, &challenge.bundle, verdict, t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Setting {
    Thin,
    Thick,
}

pub enum Adversary {
    Thin(Box<dyn ThinStrategy>),
    Thick(Box<dyn ThickStrategy>),
}

impl Adversary {
    pub fn name(&self) -> &str {
        match self {
            Adversary::Thin(s) => s.name(),
            Adversary::Thick(s) => s.name(),
        }
    }

    pub fn setting(&self) -> Setting {
        match self {
            Adversary::Thin(_) => Setting::Thin,
            Adversary::Thick(_) => Setting::Thick,
        }
    }

    /// Strategy `name` in `setting`, playing `log`. Patches default to
    /// doubled walking speed and jump, skews to a doubled clock period.
    pub fn by_name(setting: Setting, name: &str, log: InputLog) -> Option<Adversary> {
        let mut patch = ConstantsOverride::new();
        patch.set("jump", 512).expect("known field");
        patch.set("walk", 144).expect("known field");
        let factor = SkewFactor::new(2, 1).expect("valid factor");
        Some(match (setting, name) {
            (Setting::Thin, "honest") => Adversary::Thin(Box::new(HonestThin { log })),
            (Setting::Thin, "forger") => Adversary::Thin(Box::new(RandomForger { log })),
            (Setting::Thin, "splice") => Adversary::Thin(Box::new(Splicer { log })),
            (Setting::Thin, "patch") => Adversary::Thin(Box::new(PatchThin { log, patch })),
            (Setting::Thin, "skew") => Adversary::Thin(Box::new(SkewThin { log, factor })),
            (Setting::Thick, "honest") => Adversary::Thick(Box::new(HonestThick { log })),
            (Setting::Thick, "extract") => Adversary::Thick(Box::new(KeyExtractor { log })),
            (Setting::Thick, "patch") => Adversary::Thick(Box::new(PatchThick { log, patch })),
            (Setting::Thick, "skew") => Adversary::Thick(Box::new(SkewThick { log, factor })),
            _ => return None,
        })
    }

    pub const THIN_NAMES: [&'static str; 5] = ["honest", "forger", "splice", "patch", "skew"];
    pub const THICK_NAMES: [&'static str; 4] = ["honest", "extract", "patch", "skew"];

    pub fn play(&self, level: &Arc<Level>, t: u32, seed: u64) -> Result<GameOutcome, StrategyFailure> {
        match self {
            Adversary::Thin(s) => thin_client_game(s.as_ref(), level, t, seed),
            Adversary::Thick(s) => thick_client_game(s.as_ref(), level, t, seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WinRate {
    pub strategy: String,
    pub game: Setting,
    pub target_frame: u32,
    pub trials: u64,
    pub base_seed: u64,
    pub wins: u64,
    pub rate: f64,
    /// Clopper-Pearson 95% upper confidence bound on the win probability.
    pub upper95: f64,
    /// Verdict reasons over all trials.
    pub reasons: BTreeMap<String, u64>,
}

/// Exact (Clopper-Pearson) two-sided 95% upper bound for `wins` out of `n`.
pub fn clopper_pearson_upper(wins: u64, n: u64) -> f64 {
    assert!(n >= 1 && wins <= n);
    if wins == n {
        return 1.0;
    }
    if wins == 0 {
        return 1.0 - 0.025f64.powf(1.0 / n as f64);
    }
    Beta::new((wins + 1) as f64, (n - wins) as f64)
        .expect("positive shape parameters")
        .inverse_cdf(0.975)
}

/// Runs trials with seeds `base_seed .. base_seed + trials` in parallel.
pub fn estimate_win_rate(
    adversary: &Adversary,
    level: &Arc<Level>,
    t: u32,
    trials: u64,
    base_seed: u64,
) -> Result<WinRate, StrategyFailure> {
    assert!(trials >= 1, "at least one trial");
    let results: Vec<(bool, Verdict)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            adversary
                .play(level, t, base_seed.wrapping_add(i))
                .map(|o| (o.win, o.verdict))
        })
        .collect::<Result<_, _>>()?;
    let wins = results.iter().filter(|(w, _)| *w).count() as u64;
    let mut reasons = BTreeMap::new();
    for (_, v) in &results {
        *reasons.entry(v.reason.to_string()).or_insert(0) += 1;
    }
    Ok(WinRate {
        strategy: adversary.name().to_owned(),
        game: adversary.setting(),
        target_frame: t,
        trials,
        base_seed,
        wins,
        rate: wins as f64 / trials as f64,
        upper95: clopper_pearson_upper(wins, trials),
        reasons,
    })
}
