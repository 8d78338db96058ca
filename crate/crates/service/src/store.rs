//! File-backed session store. Each session lives in `sessions/<id>.json`
//! and is rewritten atomically after every change.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use advisor_core::consultation::{Session, SessionRecord, SessionStatus};
use advisor_core::kb_admin::KbSnapshot;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("session storage at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("session record {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

/// A session together with the snapshot it was started on.
#[derive(Debug)]
pub struct LiveSession {
    pub session: Session,
    pub kb: Arc<KbSnapshot>,
}

pub type SessionHandle = Arc<tokio::sync::Mutex<LiveSession>>;

pub struct SessionStore {
    dir: PathBuf,
    live: Mutex<HashMap<String, SessionHandle>>,
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_path_buf(), source }
}

impl SessionStore {
    /// Opens `data_dir`, restoring every stored session against `current`.
    /// Records that no longer match the current rules are skipped and returned.
    pub fn open(data_dir: &Path, current: &Arc<KbSnapshot>) -> Result<(Self, Vec<(PathBuf, String)>), StoreError> {
        let dir = data_dir.join("sessions");
        fs::create_dir_all(&dir).map_err(io(&dir))?;
        let mut live = HashMap::new();
        let mut skipped = Vec::new();
        let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
            .map_err(io(&dir))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "json"))
            .collect();
        paths.sort();
        for path in paths {
            let restored = fs::read_to_string(&path)
                .map_err(|e| e.to_string())
                .and_then(|text| serde_json::from_str::<SessionRecord>(&text).map_err(|e| e.to_string()))
                .and_then(|record| Session::from_record(record, current.kb.clone()).map_err(|e| e.to_string()));
            match restored {
                Ok(session) => {
                    let id = session.id.clone();
                    live.insert(id, Arc::new(tokio::sync::Mutex::new(LiveSession { session, kb: Arc::clone(current) })));
                }
                Err(reason) => skipped.push((path, reason)),
            }
        }
        Ok((SessionStore { dir, live: Mutex::new(live) }, skipped))
    }

    fn path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }

    /// Writes the session's record through a temporary file and a rename.
    pub fn persist(&self, session: &Session) -> Result<(), StoreError> {
        let path = self.path(&session.id);
        let tmp = self.dir.join(format!("{}.json.tmp", session.id));
        let text = serde_json::to_string(&session.to_record()).map_err(|source| StoreError::Json { path: path.clone(), source })?;
        fs::write(&tmp, text).map_err(io(&tmp))?;
        fs::rename(&tmp, &path).map_err(io(&path))
    }

    pub fn insert(&self, live: LiveSession) -> Result<SessionHandle, StoreError> {
        self.persist(&live.session)?;
        let id = live.session.id.clone();
        let handle = Arc::new(tokio::sync::Mutex::new(live));
        self.map().insert(id, Arc::clone(&handle));
        Ok(handle)
    }

    pub fn get(&self, id: &str) -> Option<SessionHandle> {
        self.map().get(id).cloned()
    }

    pub fn len(&self) -> usize {
        self.map().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Ids of sessions still awaiting an answer.
    pub async fn open_sessions(&self) -> Vec<String> {
        let handles: Vec<SessionHandle> = self.map().values().cloned().collect();
        let mut ids = Vec::new();
        for h in handles {
            let live = h.lock().await;
            if matches!(live.session.status, SessionStatus::AwaitingAnswer { .. }) {
                ids.push(live.session.id.clone());
            }
        }
        ids.sort();
        ids
    }

    fn map(&self) -> std::sync::MutexGuard<'_, HashMap<String, SessionHandle>> {
        self.live.lock().unwrap_or_else(|p| p.into_inner())
    }
}
