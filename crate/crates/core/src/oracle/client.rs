use std::net::{TcpStream, ToSocketAddrs};

use tungstenite::stream::MaybeTlsStream;

use crate::authstamp::{FrameRecord, SpeedrunBundle};
use crate::game::{InputLog, Keymask};

use super::wire::{Framed, Message, Transport, Welcome, WsTransport, PROTOCOL_VERSION};
use super::OracleError;

/// Largest message the client accepts: a whole bundle arrives as one.
const MAX_SERVER_MESSAGE: usize = 1 << 30;

/// Client side of a thin-client session.
pub struct ThinClient<T> {
    conn: T,
    welcome: Welcome,
    next: u32,
}

impl ThinClient<Framed<TcpStream>> {
    pub fn connect(addr: impl ToSocketAddrs, level_id: &str) -> Result<Self, OracleError> {
        let stream = TcpStream::connect(addr).map_err(|e| OracleError::Protocol(e.to_string()))?;
        stream.set_nodelay(true).map_err(|e| OracleError::Protocol(e.to_string()))?;
        ThinClient::handshake(Framed::new(stream, MAX_SERVER_MESSAGE), level_id)
    }
}

impl ThinClient<WsTransport<MaybeTlsStream<TcpStream>>> {
    /// Connects over a WebSocket, e.g. `ws://127.0.0.1:7878/`.
    pub fn connect_ws(url: &str, level_id: &str) -> Result<Self, OracleError> {
        let (socket, _) = tungstenite::connect(url).map_err(|e| OracleError::Protocol(e.to_string()))?;
        ThinClient::handshake(WsTransport::new(socket), level_id)
    }
}

fn expect_ok(msg: Message) -> Result<Message, OracleError> {
    match msg {
        Message::Error { code, message } => Err(OracleError::Remote { code, message }),
        other => Ok(other),
    }
}

impl<T: Transport> ThinClient<T> {
    pub fn handshake(mut conn: T, level_id: &str) -> Result<Self, OracleError> {
        conn.send(&Message::Hello {
            version: PROTOCOL_VERSION,
            level_id: level_id.to_owned(),
        })?;
        match expect_ok(conn.recv()?)? {
            Message::Welcome(welcome) => Ok(ThinClient {
                conn,
                welcome,
                next: 0,
            }),
            other => Err(OracleError::Protocol(format!(
                "expected WELCOME, got message type {:#04x}",
                other.type_byte()
            ))),
        }
    }

    pub fn welcome(&self) -> &Welcome {
        &self.welcome
    }

    pub fn next_frame(&self) -> u32 {
        self.next
    }

    /// Sends one input and waits for the frame. The frame number is sent as
    /// given, so out-of-order requests reach the server unchanged.
    pub fn input(&mut self, t: u32, keymask: u8) -> Result<FrameRecord, OracleError> {
        self.conn.send(&Message::Input { t, keymask })?;
        match expect_ok(self.conn.recv()?)? {
            Message::Frame(bytes) => {
                let record = FrameRecord::decode(
                    &bytes,
                    self.welcome.signature_bits as usize / 8,
                    self.welcome.width,
                    self.welcome.height,
                )
                .map_err(|e| OracleError::Protocol(e.to_string()))?;
                self.next = record.t + 1;
                Ok(record)
            }
            other => Err(OracleError::Protocol(format!(
                "expected FRAME, got message type {:#04x}",
                other.type_byte()
            ))),
        }
    }

    /// Plays `frames` frames of `log` starting at the next frame number.
    pub fn play(&mut self, log: &InputLog, frames: u32) -> Result<(), OracleError> {
        for _ in 0..frames {
            let t = self.next;
            self.input(t, log.mask_at(t).bits())?;
        }
        Ok(())
    }

    pub fn step(&mut self, keymask: Keymask) -> Result<FrameRecord, OracleError> {
        self.input(self.next, keymask.bits())
    }

    /// Ends the session; returns the decoded bundle and its exact bytes.
    pub fn end(mut self) -> Result<(SpeedrunBundle, Vec<u8>), OracleError> {
        self.conn.send(&Message::End)?;
        match expect_ok(self.conn.recv()?)? {
            Message::Bundle(bytes) => {
                let bundle = SpeedrunBundle::decode(&bytes).map_err(|e| OracleError::Protocol(e.to_string()))?;
                Ok((bundle, bytes))
            }
            other => Err(OracleError::Protocol(format!(
                "expected BUNDLE, got message type {:#04x}",
                other.type_byte()
            ))),
        }
    }
}
