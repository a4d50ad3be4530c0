use std::sync::Arc;

use crate::authstamp::{authenticate_frame, bundle_header, FrameRecord, KeyPair, PublicKey, SpeedrunBundle};
use crate::game::{frame_timestamp, Game, GameState, Keymask, Level};

use super::OracleError;

/// Server-side state of one thin-client connection. The key pair and the
/// clock stay here; the client only ever sees produced frames.
pub struct Session {
    id: u64,
    level: Arc<Level>,
    keys: Arc<KeyPair>,
    t_s0: u64,
    state: GameState,
    records: Vec<FrameRecord>,
    closed: bool,
}

impl Session {
    pub fn new(id: u64, level: Arc<Level>, keys: Arc<KeyPair>, t_s0: u64) -> Session {
        Session {
            id,
            state: GameState::initial(&level),
            level,
            keys,
            t_s0,
            records: Vec::new(),
            closed: false,
        }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn level(&self) -> &Level {
        &self.level
    }

    pub fn public_key(&self) -> PublicKey {
        self.keys.public_key()
    }

    pub fn next_frame(&self) -> u32 {
        self.records.len() as u32
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn records(&self) -> &[FrameRecord] {
        &self.records
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Advances by one frame. The wall-clock stamp is assigned here from the
    /// session clock; nothing the client sends can influence it.
    pub fn thin_step(&mut self, t: u32, keymask: u8) -> Result<&FrameRecord, OracleError> {
        if self.closed {
            return Err(OracleError::SessionClosed);
        }
        let expected = self.next_frame();
        if t != expected {
            return Err(OracleError::OutOfOrderFrame { expected, got: t });
        }
        let k = Keymask::new(keymask).map_err(|_| OracleError::InvalidKeymask(keymask))?;
        let game = Game::new(&self.level);
        let t_s = frame_timestamp(self.t_s0, t);
        let (record, next) = authenticate_frame(&game, &self.keys, t_s, t, &self.state, k);
        self.state = next;
        self.records.push(record);
        Ok(self.records.last().unwrap())
    }

    /// Closes the session and hands out everything recorded so far.
    pub fn end(&mut self) -> Result<SpeedrunBundle, OracleError> {
        if self.closed {
            return Err(OracleError::SessionClosed);
        }
        self.closed = true;
        Ok(SpeedrunBundle {
            header: bundle_header(&self.level, &self.keys, self.t_s0),
            frames: std::mem::take(&mut self.records),
        })
    }
}

/// In-process thin-client oracle: any number of sessions on one level under
/// one key, with no way to reach the key or the clock from outside.
pub struct ThinOracle {
    level: Arc<Level>,
    keys: Arc<KeyPair>,
    t_s0: u64,
    sessions: Vec<Session>,
    /// Bundles of ended sessions, kept so the harness can see what was played.
    transcripts: Vec<Option<SpeedrunBundle>>,
}

impl ThinOracle {
    pub fn new(level: Arc<Level>, keys: Arc<KeyPair>, t_s0: u64) -> ThinOracle {
        ThinOracle {
            level,
            keys,
            t_s0,
            sessions: Vec::new(),
            transcripts: Vec::new(),
        }
    }

    pub fn level(&self) -> &Level {
        &self.level
    }

    pub fn public_key(&self) -> PublicKey {
        self.keys.public_key()
    }

    pub fn open(&mut self) -> usize {
        let id = self.sessions.len();
        self.sessions.push(Session::new(
            id as u64,
            self.level.clone(),
            self.keys.clone(),
            self.t_s0,
        ));
        self.transcripts.push(None);
        id
    }

    fn session(&mut self, id: usize) -> Result<&mut Session, OracleError> {
        self.sessions.get_mut(id).ok_or(OracleError::UnknownSession(id as u64))
    }

    pub fn input(&mut self, id: usize, t: u32, keymask: u8) -> Result<FrameRecord, OracleError> {
        self.session(id)?.thin_step(t, keymask).cloned()
    }

    pub fn end(&mut self, id: usize) -> Result<SpeedrunBundle, OracleError> {
        let bundle = self.session(id)?.end()?;
        self.transcripts[id] = Some(bundle.clone());
        Ok(bundle)
    }

    /// Frames produced so far in session `id`, whether or not it has ended.
    pub fn transcript(&self, id: usize) -> Option<&[FrameRecord]> {
        match self.transcripts.get(id)? {
            Some(b) => Some(&b.frames),
            None => Some(self.sessions[id].records()),
        }
    }

    pub fn session_count(&self) -> usize {
        self.sessions.len()
    }
}
