//! The `SPDB` bundle file.
//!
//! ```text
//! "SPDB" | version u16 | level_digest [32] | pk_len u16 | pk | sig_bits u32
//!        | width u16 | height u16 | pixel_depth u8 | frame_count u32 | t_s0 u64
//! frame* : t u32 | t_s u64 | keymask u8 | state_len u32 | state
//!        | signature [sig_bits / 8] | pixels [width * height * 4]
//! ```
//!
//! All integers are little-endian. Pixels are raw R,G,B,A bytes, row-major.

use thiserror::Error;

use crate::codec::{put_u16, put_u32, put_u64, Cursor, Truncated};
use crate::raster::{Screenshot, PIXEL_DEPTH};

pub const MAGIC: [u8; 4] = *b"SPDB";
pub const FORMAT_VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BundleError {
    #[error("bad magic {0:02x?}")]
    BadMagic([u8; 4]),
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),
    #[error("signature length {0} bits is not a whole number of bytes")]
    SignatureBits(u32),
    #[error("unsupported pixel depth {0}")]
    PixelDepth(u8),
    #[error(transparent)]
    Truncated(#[from] Truncated),
    #[error("{0} trailing bytes after the last frame")]
    TrailingBytes(usize),
    #[error("header declares {declared} frames but only {possible} fit in the remaining input")]
    FrameCount { declared: u32, possible: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleHeader {
    pub version: u16,
    pub level_digest: [u8; 32],
    pub public_key: Vec<u8>,
    pub signature_bits: u32,
    pub width: u16,
    pub height: u16,
    pub pixel_depth: u8,
    pub t_s0: u64,
}

impl BundleHeader {
    pub fn signature_len(&self) -> usize {
        self.signature_bits as usize / 8
    }
}

/// One authenticated frame: the signed log entry `(t_s, t, keymask, σ_t)`,
/// its signature, and the screenshot of `σ_{t+1}` with the signature embedded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameRecord {
    pub t: u32,
    pub t_s: u64,
    /// Raw keymask byte as transported.
    pub keymask: u8,
    pub state: Vec<u8>,
    pub signature: Vec<u8>,
    pub screenshot: Screenshot,
}

impl FrameRecord {
    pub fn encoded_len(&self) -> usize {
        4 + 8 + 1 + 4 + self.state.len() + self.signature.len() + self.screenshot.pixels().len() * 4
    }

    pub fn encode_into(&self, out: &mut Vec<u8>) {
        put_u32(out, self.t);
        put_u64(out, self.t_s);
        out.push(self.keymask);
        put_u32(out, self.state.len() as u32);
        out.extend_from_slice(&self.state);
        out.extend_from_slice(&self.signature);
        self.screenshot.write_raw(out);
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        self.encode_into(&mut out);
        out
    }

    /// Decodes one record; the signature length and screenshot dimensions
    /// come from the enclosing header (or the session's WELCOME message).
    pub fn decode(
        bytes: &[u8],
        signature_len: usize,
        width: u16,
        height: u16,
    ) -> Result<FrameRecord, BundleError> {
        let mut cur = Cursor::new(bytes);
        let record = Self::read(&mut cur, signature_len, width, height)?;
        if cur.remaining() != 0 {
            return Err(BundleError::TrailingBytes(cur.remaining()));
        }
        Ok(record)
    }

    pub(crate) fn read(
        cur: &mut Cursor<'_>,
        signature_len: usize,
        width: u16,
        height: u16,
    ) -> Result<FrameRecord, BundleError> {
        let t = cur.u32()?;
        let t_s = cur.u64()?;
        let keymask = cur.u8()?;
        let state_len = cur.u32()? as usize;
        let state = cur.take(state_len)?.to_vec();
        let signature = cur.take(signature_len)?.to_vec();
        let raw = cur.take(Screenshot::raw_len(width, height))?;
        let screenshot = Screenshot::from_raw(width, height, raw).expect("length checked by take");
        Ok(FrameRecord {
            t,
            t_s,
            keymask,
            state,
            signature,
            screenshot,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpeedrunBundle {
    pub header: BundleHeader,
    pub frames: Vec<FrameRecord>,
}

/// Fixed-size part of the header, excluding the public key bytes.
const HEADER_FIXED: usize = 4 + 2 + 32 + 2 + 4 + 2 + 2 + 1 + 4 + 8;
/// Smallest possible frame record (empty state, no signature, no pixels).
const FRAME_FIXED: usize = 4 + 8 + 1 + 4;

impl SpeedrunBundle {
    pub fn encoded_len(&self) -> usize {
        HEADER_FIXED
            + self.header.public_key.len()
            + self.frames.iter().map(FrameRecord::encoded_len).sum::<usize>()
    }

    pub fn encode(&self) -> Vec<u8> {
        let h = &self.header;
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(&MAGIC);
        put_u16(&mut out, h.version);
        out.extend_from_slice(&h.level_digest);
        put_u16(&mut out, h.public_key.len() as u16);
        out.extend_from_slice(&h.public_key);
        put_u32(&mut out, h.signature_bits);
        put_u16(&mut out, h.width);
        put_u16(&mut out, h.height);
        out.push(h.pixel_depth);
        put_u32(&mut out, self.frames.len() as u32);
        put_u64(&mut out, h.t_s0);
        for f in &self.frames {
            f.encode_into(&mut out);
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<SpeedrunBundle, BundleError> {
        let mut cur = Cursor::new(bytes);
        let magic = cur.array::<4>()?;
        if magic != MAGIC {
            return Err(BundleError::BadMagic(magic));
        }
        let version = cur.u16()?;
        if version != FORMAT_VERSION {
            return Err(BundleError::UnsupportedVersion(version));
        }
        let level_digest = cur.array::<32>()?;
        let pk_len = cur.u16()? as usize;
        let public_key = cur.take(pk_len)?.to_vec();
        let signature_bits = cur.u32()?;
        if signature_bits % 8 != 0 {
            return Err(BundleError::SignatureBits(signature_bits));
        }
        let width = cur.u16()?;
        let height = cur.u16()?;
        let pixel_depth = cur.u8()?;
        if pixel_depth != PIXEL_DEPTH {
            return Err(BundleError::PixelDepth(pixel_depth));
        }
        let frame_count = cur.u32()?;
        let t_s0 = cur.u64()?;

        let header = BundleHeader {
            version,
            level_digest,
            public_key,
            signature_bits,
            width,
            height,
            pixel_depth,
            t_s0,
        };
        let min_frame =
            FRAME_FIXED + header.signature_len() + Screenshot::raw_len(width, height);
        let possible = cur.remaining() / min_frame;
        if frame_count as usize > possible {
            return Err(BundleError::FrameCount {
                declared: frame_count,
                possible,
            });
        }
        let mut frames = Vec::with_capacity(frame_count as usize);
        for _ in 0..frame_count {
            frames.push(FrameRecord::read(
                &mut cur,
                header.signature_len(),
                width,
                height,
            )?);
        }
        if cur.remaining() != 0 {
            return Err(BundleError::TrailingBytes(cur.remaining()));
        }
        Ok(SpeedrunBundle { header, frames })
    }

    /// Byte offsets of the regions of an encoded bundle, for targeted
    /// tampering and diagnostics.
    pub fn layout(&self) -> BundleLayout {
        let header_len = HEADER_FIXED + self.header.public_key.len();
        let mut frames = Vec::with_capacity(self.frames.len());
        let mut offset = header_len;
        for f in &self.frames {
            let state = offset + FRAME_FIXED;
            let signature = state + f.state.len();
            let pixels = signature + f.signature.len();
            let end = offset + f.encoded_len();
            frames.push(FrameLayout {
                start: offset,
                state,
                signature,
                pixels,
                end,
            });
            offset = end;
        }
        BundleLayout { header_len, frames }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleLayout {
    pub header_len: usize,
    pub frames: Vec<FrameLayout>,
}

/// Offsets within the encoded bundle. Fields before `state` are
/// `t` (4), `t_s` (8), `keymask` (1) and the state length (4).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameLayout {
    pub start: usize,
    pub state: usize,
    pub signature: usize,
    pub pixels: usize,
    pub end: usize,
}
