//! Authenticated speedrun recording and verification.
//!
//! A run of the bundled platformer is recorded frame by frame. Every frame
//! carries a signature over `(wall time, frame number, keymask, state)` and
//! that signature is written into the first pixels of the frame's screenshot.
//! The verifier checks signatures, timing, the replayed state chain and the
//! re-rendered screenshots. The [`adversary`] and [`secgame`] modules run the
//! usual speedrun-fraud techniques against this construction and measure how
//! often they succeed.

pub mod game;
pub mod authstamp;
pub mod raster;
pub mod demo;
pub mod oracle;
pub mod adversary;
pub mod secgame;

mod codec;

pub use codec::Truncated;
