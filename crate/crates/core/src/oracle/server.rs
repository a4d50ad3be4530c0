use std::io;
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use crate::authstamp::KeyPair;
use crate::game::Level;
use crate::raster::{HEIGHT, PIXEL_DEPTH, WIDTH};

use super::session::Session;
use super::wire::{ErrorCode, Framed, Message, Transport, Welcome, WireError, WsTransport, PROTOCOL_VERSION};

/// Largest message the server accepts from a client. Clients only send
/// HELLO, INPUT and END, all of which are tiny.
pub const MAX_CLIENT_MESSAGE: usize = 64 * 1024;

/// Thin-client oracle server. Each connection is one session; a connection
/// that starts with an HTTP `GET` is upgraded to a WebSocket, anything else
/// speaks the length-prefixed framing.
pub struct Server {
    level: Arc<Level>,
    level_id: String,
    keys: Arc<KeyPair>,
    epoch: Option<u64>,
}

impl Server {
    pub fn new(level: Arc<Level>, level_id: impl Into<String>, keys: Arc<KeyPair>) -> Server {
        Server {
            level,
            level_id: level_id.into(),
            keys,
            epoch: None,
        }
    }

    /// Fixes every session's start time instead of reading the system clock.
    pub fn with_epoch(mut self, t_s0: u64) -> Server {
        self.epoch = Some(t_s0);
        self
    }

    pub fn bind(self, addr: impl ToSocketAddrs) -> io::Result<ServerHandle> {
        let listener = TcpListener::bind(addr)?;
        let local_addr = listener.local_addr()?;
        let stop = Arc::new(AtomicBool::new(false));
        let shared = Arc::new(self);
        let accept_stop = stop.clone();
        let thread = thread::spawn(move || accept_loop(listener, shared, accept_stop));
        Ok(ServerHandle {
            local_addr,
            stop,
            thread: Some(thread),
        })
    }

    fn start_time(&self) -> u64 {
        self.epoch.unwrap_or_else(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_millis() as u64)
                .unwrap_or(0)
        })
    }

    fn welcome(&self) -> Welcome {
        Welcome {
            width: WIDTH,
            height: HEIGHT,
            pixel_depth: PIXEL_DEPTH,
            signature_bits: self.keys.signature_bits(),
            public_key: self.keys.public_key().to_bytes().to_vec(),
            level_digest: *self.level.digest(),
        }
    }
}

pub struct ServerHandle {
    local_addr: SocketAddr,
    stop: Arc<AtomicBool>,
    thread: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.local_addr
    }

    /// Stops accepting connections. Sessions already running finish on
    /// their own threads.
    pub fn shutdown(mut self) {
        self.stop_accepting();
    }

    /// Blocks the caller for as long as the server keeps accepting.
    pub fn wait(mut self) {
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }

    fn stop_accepting(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        // Wake the blocking accept.
        let _ = TcpStream::connect_timeout(&self.local_addr, Duration::from_secs(1));
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        if self.thread.is_some() {
            self.stop_accepting();
        }
    }
}

fn accept_loop(listener: TcpListener, server: Arc<Server>, stop: Arc<AtomicBool>) {
    let ids = AtomicU64::new(0);
    for stream in listener.incoming() {
        if stop.load(Ordering::SeqCst) {
            break;
        }
        let Ok(stream) = stream else { continue };
        let id = ids.fetch_add(1, Ordering::Relaxed);
        let server = server.clone();
        thread::spawn(move || {
            let _ = handle_connection(stream, &server, id);
        });
    }
}

fn handle_connection(stream: TcpStream, server: &Server, id: u64) -> Result<(), WireError> {
    stream.set_nodelay(true)?;
    if is_http(&stream)? {
        let ws = tungstenite::accept(stream).map_err(|e| WireError::WebSocket(e.to_string()))?;
        let mut ws = WsTransport::new(ws);
        run_session(&mut ws, server, id)
    } else {
        let mut framed = Framed::new(stream, MAX_CLIENT_MESSAGE);
        run_session(&mut framed, server, id)
    }
}

fn is_http(stream: &TcpStream) -> io::Result<bool> {
    let mut buf = [0u8; 4];
    loop {
        let n = stream.peek(&mut buf)?;
        if n == 0 {
            return Ok(false);
        }
        if n < buf.len() && buf[..n] == b"GET "[..n] {
            thread::sleep(Duration::from_millis(1));
            continue;
        }
        return Ok(&buf[..n] == b"GET ");
    }
}

fn send_error<T: Transport>(conn: &mut T, code: ErrorCode, message: impl Into<String>) -> Result<(), WireError> {
    conn.send(&Message::Error {
        code,
        message: message.into(),
    })
}

/// Drives one session over any transport. Out-of-order frames and invalid
/// keymasks are answered with ERROR and the session carries on; anything
/// else unexpected closes the connection.
fn run_session<T: Transport>(conn: &mut T, server: &Server, id: u64) -> Result<(), WireError> {
    match conn.recv() {
        Ok(Message::Hello { version, level_id }) => {
            if version != PROTOCOL_VERSION {
                return send_error(
                    conn,
                    ErrorCode::BadVersion,
                    format!("protocol version {version} not supported, expected {PROTOCOL_VERSION}"),
                );
            }
            if level_id != server.level_id {
                return send_error(conn, ErrorCode::UnknownLevel, format!("unknown level {level_id:?}"));
            }
        }
        Ok(other) => {
            return send_error(
                conn,
                ErrorCode::ProtocolViolation,
                format!("expected HELLO, got message type {:#04x}", other.type_byte()),
            )
        }
        Err(WireError::Closed) => return Ok(()),
        Err(e) => return send_error(conn, ErrorCode::ProtocolViolation, e.to_string()),
    }
    conn.send(&Message::Welcome(server.welcome()))?;

    let mut session = Session::new(id, server.level.clone(), server.keys.clone(), server.start_time());
    loop {
        match conn.recv() {
            Ok(Message::Input { t, keymask }) => match session.thin_step(t, keymask) {
                Ok(record) => {
                    let bytes = record.encode();
                    conn.send(&Message::Frame(bytes))?;
                }
                Err(e) => send_error(conn, e.code(), e.to_string())?,
            },
            Ok(Message::End) => {
                let bundle = session.end().expect("session open until END");
                return conn.send(&Message::Bundle(bundle.encode()));
            }
            Ok(other) => {
                return send_error(
                    conn,
                    ErrorCode::ProtocolViolation,
                    format!("unexpected message type {:#04x}", other.type_byte()),
                )
            }
            Err(WireError::Closed) => return Ok(()),
            Err(e) => return send_error(conn, ErrorCode::ProtocolViolation, e.to_string()),
        }
    }
}
