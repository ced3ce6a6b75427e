use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, PoisonError, RwLock, TryLockError};

use super::{ElicitationError, ElicitationSession, Payload, Result, StudyContext};

/// Persistence for sessions, keyed by id. Saving a session replaces what
/// `load` returns for its id.
pub trait SessionStore: Send + Sync {
    fn save(&self, session: &ElicitationSession) -> Result<()>;
    fn load(&self, id: &str) -> Result<ElicitationSession>;
    fn ids(&self) -> Result<Vec<String>>;
}

#[derive(Debug, Default)]
pub struct MemoryStore {
    sessions: RwLock<HashMap<String, ElicitationSession>>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }
}

impl SessionStore for MemoryStore {
    fn save(&self, session: &ElicitationSession) -> Result<()> {
        self.sessions
            .write()
            .unwrap_or_else(PoisonError::into_inner)
            .insert(session.id().to_string(), session.clone());
        Ok(())
    }

    fn load(&self, id: &str) -> Result<ElicitationSession> {
        self.sessions
            .read()
            .unwrap_or_else(PoisonError::into_inner)
            .get(id)
            .cloned()
            .ok_or_else(|| ElicitationError::NotFound(id.to_string()))
    }

    fn ids(&self) -> Result<Vec<String>> {
        let mut ids: Vec<String> = self
            .sessions
            .read()
            .unwrap_or_else(PoisonError::into_inner)
            .keys()
            .cloned()
            .collect();
        ids.sort();
        Ok(ids)
    }
}

/// One append-only JSON Lines file per session; the last line is current.
#[derive(Debug, Clone)]
pub struct FileStore {
    dir: PathBuf,
}

impl FileStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
        Ok(FileStore { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, id: &str) -> Result<PathBuf> {
        let ok = !id.is_empty()
            && id.len() <= 128
            && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
        if !ok {
            return Err(ElicitationError::InvalidId(id.to_string()));
        }
        Ok(self.dir.join(format!("{id}.jsonl")))
    }
}

fn io_error(path: &Path, e: std::io::Error) -> ElicitationError {
    ElicitationError::Io(format!("{}: {e}", path.display()))
}

impl SessionStore for FileStore {
    fn save(&self, session: &ElicitationSession) -> Result<()> {
        let path = self.path(session.id())?;
        let mut line = session.to_json();
        line.push('\n');
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| io_error(&path, e))?;
        file.write_all(line.as_bytes()).map_err(|e| io_error(&path, e))
    }

    fn load(&self, id: &str) -> Result<ElicitationSession> {
        let path = self.path(id)?;
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(ElicitationError::NotFound(id.to_string()))
            }
            Err(e) => return Err(io_error(&path, e)),
        };
        let last = text
            .lines()
            .rev()
            .find(|l| !l.trim().is_empty())
            .ok_or_else(|| ElicitationError::NotFound(id.to_string()))?;
        ElicitationSession::from_json(last)
    }

    fn ids(&self) -> Result<Vec<String>> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(&self.dir).map_err(|e| io_error(&self.dir, e))? {
            let path = entry.map_err(|e| io_error(&self.dir, e))?.path();
            if path.extension().is_some_and(|x| x == "jsonl") {
                if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                    ids.push(stem.to_string());
                }
            }
        }
        ids.sort();
        Ok(ids)
    }
}

/// Store front end that serializes writes per session id.
///
/// An advance that finds another advance in flight on the same id fails
/// with [`ElicitationError::Conflict`] instead of waiting, and so does one
/// whose `expected_revision` is stale.
pub struct SessionHub {
    store: Arc<dyn SessionStore>,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

impl SessionHub {
    pub fn new(store: impl SessionStore + 'static) -> Self {
        SessionHub {
            store: Arc::new(store),
            locks: Mutex::new(HashMap::new()),
        }
    }

    pub fn in_memory() -> Self {
        Self::new(MemoryStore::new())
    }

    pub fn store(&self) -> &dyn SessionStore {
        self.store.as_ref()
    }

    /// New session, advanced past the context stage when one is given.
    pub fn create(&self, context: Option<StudyContext>) -> Result<ElicitationSession> {
        let mut session = ElicitationSession::with_random_id();
        if let Some(ctx) = context {
            session = session.advance(Payload::Context(ctx))?;
        }
        self.store.save(&session)?;
        Ok(session)
    }

    pub fn get(&self, id: &str) -> Result<ElicitationSession> {
        self.store.load(id)
    }

    pub fn advance(
        &self,
        id: &str,
        payload: Payload,
        expected_revision: Option<usize>,
    ) -> Result<ElicitationSession> {
        let lock = self
            .locks
            .lock()
            .unwrap_or_else(PoisonError::into_inner)
            .entry(id.to_string())
            .or_default()
            .clone();
        let _guard = match lock.try_lock() {
            Ok(g) => g,
            Err(TryLockError::Poisoned(p)) => p.into_inner(),
            Err(TryLockError::WouldBlock) => {
                return Err(ElicitationError::Conflict {
                    id: id.to_string(),
                    reason: "another update is in progress".into(),
                })
            }
        };
        let current = self.store.load(id)?;
        if let Some(expected) = expected_revision {
            if expected != current.revision() {
                return Err(ElicitationError::Conflict {
                    id: id.to_string(),
                    reason: format!(
                        "expected revision {expected}, session is at revision {}",
                        current.revision()
                    ),
                });
            }
        }
        let next = current.advance(payload)?;
        self.store.save(&next)?;
        Ok(next)
    }
}
