use std::ops::Range;

use crate::authstamp::SpeedrunBundle;
use crate::game::frame_timestamp;

use super::AdversaryError;

fn check_compatible(bundles: &[SpeedrunBundle]) -> Result<(), AdversaryError> {
    let first = &bundles[0].header;
    for b in &bundles[1..] {
        let h = &b.header;
        if h.level_digest != first.level_digest {
            return Err(AdversaryError::IncompatibleBundles("level digest"));
        }
        if h.public_key != first.public_key {
            return Err(AdversaryError::IncompatibleBundles("public key"));
        }
        if h.signature_bits != first.signature_bits {
            return Err(AdversaryError::IncompatibleBundles("signature length"));
        }
        if (h.width, h.height, h.pixel_depth) != (first.width, first.height, first.pixel_depth) {
            return Err(AdversaryError::IncompatibleBundles("screenshot dimensions"));
        }
        if h.version != first.version {
            return Err(AdversaryError::IncompatibleBundles("format version"));
        }
    }
    Ok(())
}

/// Concatenates `cuts[i]` of `bundles[i]` in order, renumbering frames from
/// zero and re-spacing wall time at exactly one frame from the first
/// bundle's start. States, signatures and screenshots are copied as they are.
pub fn splice(bundles: &[SpeedrunBundle], cuts: &[Range<u32>]) -> Result<SpeedrunBundle, AdversaryError> {
    if bundles.is_empty() {
        return Err(AdversaryError::EmptySelection);
    }
    if cuts.len() != bundles.len() {
        return Err(AdversaryError::CutCount {
            bundles: bundles.len(),
            cuts: cuts.len(),
        });
    }
    check_compatible(bundles)?;

    let header = bundles[0].header.clone();
    let mut frames = Vec::new();
    for (i, (bundle, cut)) in bundles.iter().zip(cuts).enumerate() {
        if cut.start > cut.end || cut.end as usize > bundle.frames.len() {
            return Err(AdversaryError::CutOutOfRange {
                bundle: i,
                start: cut.start,
                end: cut.end,
                frames: bundle.frames.len(),
            });
        }
        for f in &bundle.frames[cut.start as usize..cut.end as usize] {
            let mut f = f.clone();
            let t = frames.len() as u32;
            f.t = t;
            f.t_s = frame_timestamp(header.t_s0, t);
            frames.push(f);
        }
    }
    if frames.is_empty() {
        return Err(AdversaryError::EmptySelection);
    }
    Ok(SpeedrunBundle { header, frames })
}
