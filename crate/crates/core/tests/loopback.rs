//! Thin-client server over real sockets.

use std::io::Write;
use std::net::TcpStream;
use std::sync::Arc;
use std::thread;

use framestamp::authstamp::{build_message, record_frames, verify_bundle, verify_bytes, KeyPair, SpeedrunBundle};
use framestamp::demo;
use framestamp::game::{InputLog, Keymask, Level};
use framestamp::oracle::wire::{Framed, Message, Transport, WireError};
use framestamp::oracle::{ErrorCode, OracleError, Server, ServerHandle, ThinClient, PROTOCOL_VERSION};

const EPOCH: u64 = 1_000_000;

fn start(keys: &Arc<KeyPair>) -> ServerHandle {
    Server::new(Arc::new(demo::level()), demo::LEVEL_ID, keys.clone())
        .with_epoch(EPOCH)
        .bind("127.0.0.1:0")
        .unwrap()
}

fn keys() -> Arc<KeyPair> {
    Arc::new(KeyPair::from_seed(&[21; 32]))
}

#[test]
fn tcp_session_matches_local_recording() {
    let keys = keys();
    let server = start(&keys);
    let log = demo::optimal_log();
    let mut client = ThinClient::connect(server.local_addr(), demo::LEVEL_ID).unwrap();
    let welcome = client.welcome().clone();
    assert_eq!((welcome.width, welcome.height, welcome.pixel_depth), (320, 240, 32));
    assert_eq!(welcome.signature_bits, 512);
    assert_eq!(welcome.public_key, keys.public_key().to_bytes().to_vec());
    assert_eq!(&welcome.level_digest, demo::level().digest());

    for t in 0..10 {
        let rec = client.input(t, log.mask_at(t).bits()).unwrap();
        assert_eq!(rec.t, t);
        assert_eq!(rec.t_s, EPOCH + 20 * t as u64);
        assert!(keys
            .public_key()
            .verify(&build_message(rec.t_s, rec.t, rec.keymask, &rec.state), &rec.signature));
    }
    let (bundle, bytes) = client.end().unwrap();
    assert_eq!(bytes, bundle.encode());
    let level = demo::level();
    assert_eq!(bundle, record_frames(&level, &log, &keys, EPOCH, 10));
    assert!(verify_bytes(&keys.public_key(), &level, &bytes).accept());
    server.shutdown();
}

#[test]
fn websocket_session() {
    let keys = keys();
    let server = start(&keys);
    let url = format!("ws://{}/", server.local_addr());
    let mut client = ThinClient::connect_ws(&url, demo::LEVEL_ID).unwrap();
    for _ in 0..5 {
        client.step(Keymask::RIGHT).unwrap();
    }
    let (bundle, _) = client.end().unwrap();
    assert_eq!(bundle.frames.len(), 5);
    assert!(verify_bundle(&keys.public_key(), &demo::level(), &bundle).accept());
}

#[test]
fn concurrent_sessions_are_independent() {
    let keys = keys();
    let server = start(&keys);
    let addr = server.local_addr();
    let handles: Vec<_> = [Keymask::RIGHT, Keymask::LEFT]
        .into_iter()
        .map(|k| {
            thread::spawn(move || {
                let mut client = ThinClient::connect(addr, demo::LEVEL_ID).unwrap();
                for _ in 0..20 {
                    client.step(k).unwrap();
                }
                client.end().unwrap().0
            })
        })
        .collect();
    let bundles: Vec<SpeedrunBundle> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    let level = demo::level();
    for (b, k) in bundles.iter().zip([Keymask::RIGHT, Keymask::LEFT]) {
        assert!(verify_bundle(&keys.public_key(), &level, b).accept());
        assert_eq!(*b, record_frames(&level, &InputLog::dense(vec![k; 20]), &keys, EPOCH, 20));
    }
    assert_ne!(bundles[0], bundles[1]);
}

#[test]
fn out_of_order_and_bad_mask_are_recoverable() {
    let keys = keys();
    let server = start(&keys);
    let mut client = ThinClient::connect(server.local_addr(), demo::LEVEL_ID).unwrap();
    client.input(0, 0).unwrap();
    match client.input(5, 0) {
        Err(OracleError::Remote { code, .. }) => assert_eq!(code, ErrorCode::OutOfOrderFrame),
        other => panic!("{other:?}"),
    }
    match client.input(1, 0x40) {
        Err(OracleError::Remote { code, .. }) => assert_eq!(code, ErrorCode::InvalidKeymask),
        other => panic!("{other:?}"),
    }
    assert_eq!(client.input(1, 2).unwrap().t, 1);
    assert_eq!(client.end().unwrap().0.frames.len(), 2);
}

#[test]
fn empty_session_verifies() {
    let keys = keys();
    let server = start(&keys);
    let client = ThinClient::connect(server.local_addr(), demo::LEVEL_ID).unwrap();
    let (bundle, bytes) = client.end().unwrap();
    assert!(bundle.frames.is_empty());
    assert!(verify_bytes(&keys.public_key(), &demo::level(), &bytes).accept());
}

fn raw(server: &ServerHandle) -> Framed<TcpStream> {
    Framed::new(TcpStream::connect(server.local_addr()).unwrap(), 1 << 30)
}

#[test]
fn handshake_errors() {
    let keys = keys();
    let server = start(&keys);

    let mut conn = raw(&server);
    conn.send(&Message::Hello {
        version: PROTOCOL_VERSION + 1,
        level_id: demo::LEVEL_ID.into(),
    })
    .unwrap();
    assert!(matches!(conn.recv().unwrap(), Message::Error { code: ErrorCode::BadVersion, .. }));
    assert!(matches!(conn.recv(), Err(WireError::Closed)));

    match ThinClient::connect(server.local_addr(), "nope") {
        Err(OracleError::Remote { code, .. }) => assert_eq!(code, ErrorCode::UnknownLevel),
        Err(e) => panic!("{e}"),
        Ok(_) => panic!("unknown level accepted"),
    }

    let mut conn = raw(&server);
    conn.send(&Message::Input { t: 0, keymask: 0 }).unwrap();
    assert!(matches!(
        conn.recv().unwrap(),
        Message::Error { code: ErrorCode::ProtocolViolation, .. }
    ));

    // Garbage type byte after a good handshake.
    let mut stream = TcpStream::connect(server.local_addr()).unwrap();
    let hello = Message::Hello {
        version: PROTOCOL_VERSION,
        level_id: demo::LEVEL_ID.into(),
    }
    .encode();
    stream.write_all(&(hello.len() as u32).to_le_bytes()).unwrap();
    stream.write_all(&hello).unwrap();
    stream.write_all(&[1, 0, 0, 0, 0x7f]).unwrap();
    let mut conn = Framed::new(stream, 1 << 30);
    assert!(matches!(conn.recv().unwrap(), Message::Welcome(_)));
    assert!(matches!(
        conn.recv().unwrap(),
        Message::Error { code: ErrorCode::ProtocolViolation, .. }
    ));
}

#[test]
fn oversized_client_message_is_refused() {
    let keys = keys();
    let server = start(&keys);
    let mut stream = TcpStream::connect(server.local_addr()).unwrap();
    stream.write_all(&(1u32 << 20).to_le_bytes()).unwrap();
    let mut conn = Framed::new(stream, 1 << 30);
    assert!(matches!(
        conn.recv().unwrap(),
        Message::Error { code: ErrorCode::ProtocolViolation, .. }
    ));
}

#[test]
fn level_mismatch_between_server_and_verifier() {
    let keys = keys();
    let server = start(&keys);
    let mut client = ThinClient::connect(server.local_addr(), demo::LEVEL_ID).unwrap();
    client.step(Keymask::RIGHT).unwrap();
    let (_, bytes) = client.end().unwrap();
    let other = Level::parse("M..F\n####\n").unwrap();
    assert!(!verify_bytes(&keys.public_key(), &other, &bytes).accept());
}
