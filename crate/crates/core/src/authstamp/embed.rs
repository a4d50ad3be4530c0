//! Writing signatures into screenshot pixels.
//!
//! The signature occupies the first `ceil(bits / 32)` pixels in row-major
//! order. Signature bit `j` lands in pixel `j / 32` at bit `31 - j % 32`, so a
//! pixel's raw R,G,B,A bytes are exactly the corresponding signature bytes.
//! When the signature does not fill its last pixel, that pixel's low bits are
//! left as rendered.

use thiserror::Error;

use crate::raster::{Screenshot, PIXEL_DEPTH};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("signature of {bits} bits does not fit in a screenshot of {capacity} bits")]
pub struct SignatureTooLarge {
    pub bits: usize,
    pub capacity: usize,
}

/// Number of pixels a signature of `bits` bits overwrites.
pub fn signature_pixels(bits: usize) -> usize {
    bits.div_ceil(PIXEL_DEPTH as usize)
}

pub fn embed(shot: &Screenshot, signature: &[u8]) -> Result<Screenshot, SignatureTooLarge> {
    let mut out = shot.clone();
    embed_in_place(&mut out, signature)?;
    Ok(out)
}

pub fn embed_in_place(shot: &mut Screenshot, signature: &[u8]) -> Result<(), SignatureTooLarge> {
    let bits = signature.len() * 8;
    let capacity = shot.pixels().len() * PIXEL_DEPTH as usize;
    if bits > capacity {
        return Err(SignatureTooLarge { bits, capacity });
    }
    let pixels = shot.pixels_mut();
    for (i, chunk) in signature.chunks(4).enumerate() {
        let mut bytes = pixels[i].to_be_bytes();
        bytes[..chunk.len()].copy_from_slice(chunk);
        pixels[i] = u32::from_be_bytes(bytes);
    }
    Ok(())
}

/// Reads `len` signature bytes back out of the designated pixels.
pub fn extract(shot: &Screenshot, len: usize) -> Option<Vec<u8>> {
    if signature_pixels(len * 8) > shot.pixels().len() {
        return None;
    }
    let mut out = Vec::with_capacity(len);
    for p in shot.pixels() {
        if out.len() == len {
            break;
        }
        let bytes = p.to_be_bytes();
        let take = (len - out.len()).min(4);
        out.extend_from_slice(&bytes[..take]);
    }
    Some(out)
}
