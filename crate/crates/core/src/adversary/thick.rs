//! Attacks that need control of the client: patched physics, skewed clocks
//! and key extraction.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::authstamp::{KeyPair, PublicKey, Recorder, SpeedrunBundle, SIGNATURE_LEN};
use crate::game::{Game, InputLog, Level, PhysicsConstants, FRAME_TIME_MS};

use super::AdversaryError;

/// Replacement values for named physics constants (px/s or px/s²).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConstantsOverride {
    fields: BTreeMap<String, i64>,
}

impl ConstantsOverride {
    pub fn new() -> ConstantsOverride {
        ConstantsOverride::default()
    }

    pub fn set(&mut self, name: &str, value: i64) -> Result<&mut Self, AdversaryError> {
        if !PhysicsConstants::FIELD_NAMES.contains(&name) {
            return Err(AdversaryError::UnknownField(name.to_owned()));
        }
        self.fields.insert(name.to_owned(), value);
        Ok(self)
    }

    /// Parses `NAME=VALUE`.
    pub fn set_assignment(&mut self, assignment: &str) -> Result<&mut Self, AdversaryError> {
        let (name, value) = assignment
            .split_once('=')
            .ok_or_else(|| AdversaryError::UnknownField(assignment.to_owned()))?;
        let value = value
            .trim()
            .parse()
            .map_err(|_| AdversaryError::UnknownField(assignment.to_owned()))?;
        self.set(name.trim(), value)
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, i64)> {
        self.fields.iter().map(|(k, &v)| (k.as_str(), v))
    }
}

/// The stock constants with `patch` applied.
pub fn patch_constants(patch: &ConstantsOverride) -> Result<PhysicsConstants, AdversaryError> {
    let mut c = PhysicsConstants::LILYPOND;
    for (name, value) in patch.iter() {
        *c.field_mut(name)
            .ok_or_else(|| AdversaryError::UnknownField(name.to_owned()))? = value;
    }
    Ok(c)
}

/// A modified game binary: `level` played under patched constants.
pub fn patched_game<'a>(level: &'a Level, patch: &ConstantsOverride) -> Result<Game<'a>, AdversaryError> {
    Ok(Game::with_constants(level, patch_constants(patch)?))
}

/// Slow-down factor `num/den ≥ 1` applied to the game clock.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SkewFactor {
    num: u64,
    den: u64,
}

impl SkewFactor {
    pub const ONE: SkewFactor = SkewFactor { num: 1, den: 1 };

    pub fn new(num: u64, den: u64) -> Result<SkewFactor, AdversaryError> {
        if den == 0 || num < den {
            return Err(AdversaryError::BadFactor(format!("{num}/{den} is not at least 1")));
        }
        let g = gcd(num, den);
        Ok(SkewFactor {
            num: num / g,
            den: den / g,
        })
    }

    pub fn num(self) -> u64 {
        self.num
    }

    pub fn den(self) -> u64 {
        self.den
    }

    /// Offset of frame `i` from the start, `round(i · 20 · factor)` ms.
    pub fn offset_ms(self, i: u32) -> u64 {
        let scaled = i as u128 * FRAME_TIME_MS as u128 * self.num as u128;
        ((2 * scaled + self.den as u128) / (2 * self.den as u128)) as u64
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl FromStr for SkewFactor {
    type Err = AdversaryError;

    /// Accepts `2`, `1.05` or `21/20`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AdversaryError::BadFactor(format!("cannot parse {s:?}"));
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            return SkewFactor::new(n.trim().parse().map_err(|_| bad())?, d.trim().parse().map_err(|_| bad())?);
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if int.is_empty() || frac.len() > 12 || !(int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit())) {
            return Err(bad());
        }
        let den = 10u64.pow(frac.len() as u32);
        let int: u64 = int.parse().map_err(|_| bad())?;
        let frac: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let num = int.checked_mul(den).and_then(|v| v.checked_add(frac)).ok_or_else(bad)?;
        SkewFactor::new(num, den)
    }
}

impl fmt::Display for SkewFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Records `log` with the game clock slowed by `factor`: frame `i` carries
/// `t_s0 + round(i · 20 · factor)`. Without re-signing, the skewed stamps are
/// what a sped-up recording is left with.
pub fn skew_run(level: &Level, log: &InputLog, factor: SkewFactor, keys: &KeyPair, t_s0: u64) -> SpeedrunBundle {
    let mut rec = Recorder::new(level, keys, t_s0);
    for t in 0..log.frames() {
        if rec.state().complete {
            break;
        }
        rec.push_at(t_s0 + factor.offset_ms(t), log.mask_at(t));
    }
    rec.finish()
}

/// A signing key lifted out of a client binary.
#[derive(Clone)]
pub struct SecretKey([u8; 32]);

impl fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SecretKey(..)")
    }
}

impl SecretKey {
    pub fn from_bytes(bytes: [u8; 32]) -> SecretKey {
        SecretKey(bytes)
    }

    pub fn to_bytes(&self) -> [u8; 32] {
        self.0
    }

    pub fn to_keypair(&self) -> KeyPair {
        KeyPair::from_seed(&self.0)
    }

    pub fn public_key(&self) -> PublicKey {
        self.to_keypair().public_key()
    }

    pub fn sign(&self, message: &[u8]) -> [u8; SIGNATURE_LEN] {
        self.to_keypair().sign(message)
    }
}

/// Reads the secret key out of a key pair the caller holds. A thick client
/// ships its key pair; the thin-client oracle never hands one out.
pub fn extract_key(keys: &KeyPair) -> SecretKey {
    SecretKey(keys.seed())
}
