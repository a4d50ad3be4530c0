//! Thin-client wire protocol.
//!
//! Every message is a type byte followed by its payload; integers are
//! little-endian.
//!
//! | type | direction | payload |
//! |------|-----------|---------|
//! | 0x01 HELLO   | c→s | version u16, level-id len u16, level-id |
//! | 0x02 WELCOME | s→c | w u16, h u16, n_p u8, sig bits u32, pk len u16, pk, level digest [32] |
//! | 0x03 INPUT   | c→s | t u32, keymask u8 |
//! | 0x04 FRAME   | s→c | frame record in bundle encoding |
//! | 0x05 END     | c→s | (empty) |
//! | 0x06 BUNDLE  | s→c | bundle len u64, bundle |
//! | 0x07 ERROR   | s→c | code u8, message len u16, message |
//!
//! On a byte stream each message is preceded by its length as a u32. Over a
//! WebSocket each binary message carries exactly one protocol message.

use std::io::{Read, Write};

use thiserror::Error;

use crate::codec::{put_u16, put_u32, put_u64, Cursor, Truncated};

pub const PROTOCOL_VERSION: u16 = 1;

pub const HELLO: u8 = 0x01;
pub const WELCOME: u8 = 0x02;
pub const INPUT: u8 = 0x03;
pub const FRAME: u8 = 0x04;
pub const END: u8 = 0x05;
pub const BUNDLE: u8 = 0x06;
pub const ERROR: u8 = 0x07;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum ErrorCode {
    BadVersion = 1,
    UnknownLevel = 2,
    OutOfOrderFrame = 3,
    InvalidKeymask = 4,
    ProtocolViolation = 5,
    Internal = 6,
}

impl ErrorCode {
    pub fn from_u8(v: u8) -> Option<ErrorCode> {
        Some(match v {
            1 => ErrorCode::BadVersion,
            2 => ErrorCode::UnknownLevel,
            3 => ErrorCode::OutOfOrderFrame,
            4 => ErrorCode::InvalidKeymask,
            5 => ErrorCode::ProtocolViolation,
            6 => ErrorCode::Internal,
            _ => return None,
        })
    }
}

#[derive(Debug, Error)]
pub enum WireError {
    #[error("empty message")]
    Empty,
    #[error("unknown message type {0:#04x}")]
    UnknownType(u8),
    #[error(transparent)]
    Truncated(#[from] Truncated),
    #[error("{0} unexpected bytes after message payload")]
    TrailingBytes(usize),
    #[error("text field is not UTF-8")]
    Utf8,
    #[error("unknown error code {0}")]
    UnknownErrorCode(u8),
    #[error("message of {len} bytes exceeds limit of {limit}")]
    TooLarge { len: usize, limit: usize },
    #[error("connection closed")]
    Closed,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("websocket: {0}")]
    WebSocket(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Welcome {
    pub width: u16,
    pub height: u16,
    pub pixel_depth: u8,
    pub signature_bits: u32,
    pub public_key: Vec<u8>,
    pub level_digest: [u8; 32],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    Hello { version: u16, level_id: String },
    Welcome(Welcome),
    Input { t: u32, keymask: u8 },
    /// Encoded [`crate::authstamp::FrameRecord`]; decoding needs the
    /// signature length and dimensions from WELCOME.
    Frame(Vec<u8>),
    End,
    /// Encoded [`crate::authstamp::SpeedrunBundle`].
    Bundle(Vec<u8>),
    Error { code: ErrorCode, message: String },
}

fn put_text(out: &mut Vec<u8>, s: &str) {
    let bytes = &s.as_bytes()[..s.len().min(u16::MAX as usize)];
    put_u16(out, bytes.len() as u16);
    out.extend_from_slice(bytes);
}

fn read_text(cur: &mut Cursor<'_>) -> Result<String, WireError> {
    let len = cur.u16()? as usize;
    String::from_utf8(cur.take(len)?.to_vec()).map_err(|_| WireError::Utf8)
}

impl Message {
    pub fn type_byte(&self) -> u8 {
        match self {
            Message::Hello { .. } => HELLO,
            Message::Welcome(_) => WELCOME,
            Message::Input { .. } => INPUT,
            Message::Frame(_) => FRAME,
            Message::End => END,
            Message::Bundle(_) => BUNDLE,
            Message::Error { .. } => ERROR,
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = vec![self.type_byte()];
        match self {
            Message::Hello { version, level_id } => {
                put_u16(&mut out, *version);
                put_text(&mut out, level_id);
            }
            Message::Welcome(w) => {
                put_u16(&mut out, w.width);
                put_u16(&mut out, w.height);
                out.push(w.pixel_depth);
                put_u32(&mut out, w.signature_bits);
                put_u16(&mut out, w.public_key.len() as u16);
                out.extend_from_slice(&w.public_key);
                out.extend_from_slice(&w.level_digest);
            }
            Message::Input { t, keymask } => {
                put_u32(&mut out, *t);
                out.push(*keymask);
            }
            Message::Frame(record) => out.extend_from_slice(record),
            Message::End => {}
            Message::Bundle(bundle) => {
                put_u64(&mut out, bundle.len() as u64);
                out.extend_from_slice(bundle);
            }
            Message::Error { code, message } => {
                out.push(*code as u8);
                put_text(&mut out, message);
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Message, WireError> {
        let (&ty, payload) = bytes.split_first().ok_or(WireError::Empty)?;
        let mut cur = Cursor::new(payload);
        let msg = match ty {
            HELLO => Message::Hello {
                version: cur.u16()?,
                level_id: read_text(&mut cur)?,
            },
            WELCOME => {
                let width = cur.u16()?;
                let height = cur.u16()?;
                let pixel_depth = cur.u8()?;
                let signature_bits = cur.u32()?;
                let pk_len = cur.u16()? as usize;
                let public_key = cur.take(pk_len)?.to_vec();
                let level_digest = cur.array::<32>()?;
                Message::Welcome(Welcome {
                    width,
                    height,
                    pixel_depth,
                    signature_bits,
                    public_key,
                    level_digest,
                })
            }
            INPUT => Message::Input {
                t: cur.u32()?,
                keymask: cur.u8()?,
            },
            FRAME => Message::Frame(cur.take(cur.remaining())?.to_vec()),
            END => Message::End,
            BUNDLE => {
                let len = cur.u64()?;
                let len = usize::try_from(len).map_err(|_| WireError::TooLarge {
                    len: usize::MAX,
                    limit: cur.remaining(),
                })?;
                Message::Bundle(cur.take(len)?.to_vec())
            }
            ERROR => {
                let raw = cur.u8()?;
                let code = ErrorCode::from_u8(raw).ok_or(WireError::UnknownErrorCode(raw))?;
                Message::Error {
                    code,
                    message: read_text(&mut cur)?,
                }
            }
            other => return Err(WireError::UnknownType(other)),
        };
        if cur.remaining() != 0 {
            return Err(WireError::TrailingBytes(cur.remaining()));
        }
        Ok(msg)
    }
}

/// A bidirectional message channel.
pub trait Transport {
    fn send(&mut self, msg: &Message) -> Result<(), WireError>;
    fn recv(&mut self) -> Result<Message, WireError>;
}

/// u32-length-prefixed framing over any byte stream.
pub struct Framed<S> {
    stream: S,
    max_len: usize,
}

impl<S: Read + Write> Framed<S> {
    pub fn new(stream: S, max_len: usize) -> Framed<S> {
        Framed { stream, max_len }
    }

    pub fn get_ref(&self) -> &S {
        &self.stream
    }

    pub fn into_inner(self) -> S {
        self.stream
    }
}

impl<S: Read + Write> Transport for Framed<S> {
    fn send(&mut self, msg: &Message) -> Result<(), WireError> {
        let body = msg.encode();
        let len = u32::try_from(body.len()).map_err(|_| WireError::TooLarge {
            len: body.len(),
            limit: u32::MAX as usize,
        })?;
        self.stream.write_all(&len.to_le_bytes())?;
        self.stream.write_all(&body)?;
        self.stream.flush()?;
        Ok(())
    }

    fn recv(&mut self) -> Result<Message, WireError> {
        let mut len = [0u8; 4];
        match self.stream.read_exact(&mut len) {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => return Err(WireError::Closed),
            Err(e) => return Err(e.into()),
        }
        let len = u32::from_le_bytes(len) as usize;
        if len > self.max_len {
            return Err(WireError::TooLarge {
                len,
                limit: self.max_len,
            });
        }
        let mut body = vec![0u8; len];
        self.stream.read_exact(&mut body)?;
        Message::decode(&body)
    }
}

/// One protocol message per binary WebSocket message.
pub struct WsTransport<S> {
    socket: tungstenite::WebSocket<S>,
}

impl<S: Read + Write> WsTransport<S> {
    pub fn new(socket: tungstenite::WebSocket<S>) -> WsTransport<S> {
        WsTransport { socket }
    }
}

fn ws_err(e: tungstenite::Error) -> WireError {
    match e {
        tungstenite::Error::ConnectionClosed | tungstenite::Error::AlreadyClosed => WireError::Closed,
        tungstenite::Error::Io(io) => WireError::Io(io),
        other => WireError::WebSocket(other.to_string()),
    }
}

impl<S: Read + Write> Transport for WsTransport<S> {
    fn send(&mut self, msg: &Message) -> Result<(), WireError> {
        self.socket
            .send(tungstenite::Message::Binary(msg.encode()))
            .map_err(ws_err)
    }

    fn recv(&mut self) -> Result<Message, WireError> {
        loop {
            match self.socket.read().map_err(ws_err)? {
                tungstenite::Message::Binary(data) => return Message::decode(&data),
                tungstenite::Message::Close(_) => return Err(WireError::Closed),
                // Pings are answered by tungstenite on the next write or read.
                _ => continue,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn message_round_trips() {
        let msgs = vec![
            Message::Hello {
                version: 1,
                level_id: "demo".into(),
            },
            Message::Welcome(Welcome {
                width: 320,
                height: 240,
                pixel_depth: 32,
                signature_bits: 512,
                public_key: vec![7; 32],
                level_digest: [3; 32],
            }),
            Message::Input { t: 9, keymask: 6 },
            Message::Frame(vec![1, 2, 3]),
            Message::End,
            Message::Bundle(vec![9; 10]),
            Message::Error {
                code: ErrorCode::BadVersion,
                message: "nope".into(),
            },
        ];
        for m in msgs {
            assert_eq!(Message::decode(&m.encode()).unwrap(), m);
        }
    }

    #[test]
    fn exact_layouts() {
        assert_eq!(
            Message::Hello {
                version: 1,
                level_id: "ab".into()
            }
            .encode(),
            vec![0x01, 1, 0, 2, 0, b'a', b'b']
        );
        assert_eq!(
            Message::Input {
                t: 0x0102,
                keymask: 6
            }
            .encode(),
            vec![0x03, 2, 1, 0, 0, 6]
        );
        assert_eq!(Message::End.encode(), vec![0x05]);
        assert_eq!(
            Message::Bundle(vec![0xAA]).encode(),
            vec![0x06, 1, 0, 0, 0, 0, 0, 0, 0, 0xAA]
        );
    }

    #[test]
    fn decode_rejects_garbage() {
        assert!(matches!(Message::decode(&[]), Err(WireError::Empty)));
        assert!(matches!(Message::decode(&[0x99]), Err(WireError::UnknownType(0x99))));
        assert!(matches!(Message::decode(&[0x03, 1, 2]), Err(WireError::Truncated(_))));
        assert!(matches!(
            Message::decode(&[0x05, 0]),
            Err(WireError::TrailingBytes(1))
        ));
        assert!(matches!(
            Message::decode(&[0x07, 42, 0, 0]),
            Err(WireError::UnknownErrorCode(42))
        ));
    }

    #[test]
    fn framed_over_buffer() {
        let mut buf = Vec::new();
        {
            let mut f = Framed::new(std::io::Cursor::new(&mut buf), 1024);
            f.send(&Message::End).unwrap();
            f.send(&Message::Input { t: 1, keymask: 2 }).unwrap();
        }
        assert_eq!(&buf[..5], &[1, 0, 0, 0, 0x05]);
        let mut f = Framed::new(std::io::Cursor::new(buf), 1024);
        assert_eq!(f.recv().unwrap(), Message::End);
        assert_eq!(f.recv().unwrap(), Message::Input { t: 1, keymask: 2 });
        assert!(matches!(f.recv(), Err(WireError::Closed)));

        let mut big = Vec::new();
        Framed::new(std::io::Cursor::new(&mut big), 1 << 20)
            .send(&Message::Frame(vec![0; 100]))
            .unwrap();
        let mut f = Framed::new(std::io::Cursor::new(big), 10);
        assert!(matches!(f.recv(), Err(WireError::TooLarge { len: 101, limit: 10 })));
    }
}
