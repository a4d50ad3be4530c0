//! Per-frame signatures embedded in screenshots.
//!
//! Recording signs `t_s ‖ t ‖ keymask ‖ σ_t` for every frame and writes the
//! 512-bit signature into the first 16 pixels of the screenshot of `σ_{t+1}`.
//! The bundle carries the signed fields in the clear so the verifier can
//! rebuild each message, replay the chain and re-render every frame.

mod bundle;
mod embed;
mod keys;
mod record;
mod verify;

pub use bundle::{
    BundleError, BundleHeader, BundleLayout, FrameLayout, FrameRecord, SpeedrunBundle,
    FORMAT_VERSION, MAGIC,
};
pub use embed::{embed, embed_in_place, extract, signature_pixels, SignatureTooLarge};
pub use keys::{keygen, KeyError, KeyPair, PublicKey, PUBLIC_KEY_LEN, SIGNATURE_BITS, SIGNATURE_LEN};
pub use record::{
    authenticate_frame, build_message, bundle_header, record, record_frames, Recorder,
};
pub use verify::{
    verify_bundle, verify_bytes, Reason, Verdict, DRIFT_TOLERANCE_MS, FRAME_TOLERANCE_MS,
};
