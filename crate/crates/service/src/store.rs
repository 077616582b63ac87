use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex as StdMutex};

use ids_core::metrics::{read_records, record_line, StudyCondition};
use ids_core::planner::PlannerBudget;
use ids_core::session::{GameSession, SessionError, SessionView, StudyGames, Submitted};
use tokio::sync::{broadcast, Mutex};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("no session `{0}`")]
    UnknownSession(String),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error("storage: {0}")]
    Io(#[from] io::Error),
    #[error("session log {path}: {message}")]
    Recovery { path: PathBuf, message: String },
}

/// One live session and its log file.
pub struct Slot {
    pub(crate) inner: Mutex<Inner>,
    /// Cancels the recommendation currently being computed, if any.
    cancel: StdMutex<Option<Arc<AtomicBool>>>,
    pub(crate) updates: broadcast::Sender<SessionView>,
}

pub(crate) struct Inner {
    pub session: GameSession,
    path: PathBuf,
    persisted: usize,
}

impl Inner {
    /// Appends every record not yet on disk in one write.
    fn persist(&mut self) -> io::Result<()> {
        let fresh = &self.session.records()[self.persisted..];
        if fresh.is_empty() {
            return Ok(());
        }
        let text: String = fresh.iter().map(record_line).collect();
        let mut file = OpenOptions::new().create(true).append(true).open(&self.path)?;
        file.write_all(text.as_bytes())?;
        file.sync_data()?;
        self.persisted += fresh.len();
        Ok(())
    }
}

pub struct Store {
    dir: PathBuf,
    study: Arc<StudyGames>,
    budget: PlannerBudget,
    default_seed: u64,
    sessions: StdMutex<BTreeMap<String, Arc<Slot>>>,
}

impl Store {
    /// Opens the storage directory and restores every session logged there.
    pub fn open(dir: &Path, study: Arc<StudyGames>, budget: PlannerBudget, default_seed: u64) -> Result<Arc<Self>, StoreError> {
        fs::create_dir_all(dir)?;
        let store = Arc::new(Store {
            dir: dir.to_path_buf(),
            study,
            budget,
            default_seed,
            sessions: StdMutex::new(BTreeMap::new()),
        });
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        paths.sort();
        for path in paths {
            let fail = |message: String| StoreError::Recovery { path: path.clone(), message };
            let records = read_records(&fs::read_to_string(&path)?).map_err(|e| fail(e.to_string()))?;
            let session = GameSession::restore(&records, store.study.clone(), store.budget.clone()).map_err(|e| fail(e.to_string()))?;
            let persisted = session.records().len();
            let id = session.id().to_string();
            store.insert(Inner { session, path: path.clone(), persisted });
            store.schedule(&id);
        }
        Ok(store)
    }

    pub fn study(&self) -> &Arc<StudyGames> {
        &self.study
    }

    fn insert(&self, inner: Inner) -> Arc<Slot> {
        let id = inner.session.id().to_string();
        let slot = Arc::new(Slot {
            inner: Mutex::new(inner),
            cancel: StdMutex::new(None),
            updates: broadcast::channel(64).0,
        });
        self.sessions.lock().unwrap().insert(id, slot.clone());
        slot
    }

    pub fn slot(&self, id: &str) -> Result<Arc<Slot>, StoreError> {
        self.sessions.lock().unwrap().get(id).cloned().ok_or_else(|| StoreError::UnknownSession(id.into()))
    }

    pub fn session_ids(&self) -> Vec<String> {
        self.sessions.lock().unwrap().keys().cloned().collect()
    }

    /// Creates a session. Without an explicit order, consecutive sessions
    /// alternate which themed game comes first.
    pub async fn create(
        self: &Arc<Self>,
        condition: StudyCondition,
        seed: Option<u64>,
        swap_order: Option<bool>,
    ) -> Result<SessionView, StoreError> {
        let count = self.sessions.lock().unwrap().len() as u64;
        let id = uuid::Uuid::new_v4().simple().to_string();
        let seed = seed.unwrap_or(self.default_seed.wrapping_add(count));
        let swap = swap_order.unwrap_or(count % 2 == 1);
        let session = GameSession::new(&id, condition, seed, swap, self.study.clone(), self.budget.clone());
        let mut inner = Inner { session, path: self.dir.join(format!("{id}.jsonl")), persisted: 0 };
        inner.persist()?;
        let view = inner.session.view();
        self.insert(inner);
        self.schedule(&id);
        Ok(view)
    }

    pub async fn view(&self, id: &str) -> Result<SessionView, StoreError> {
        Ok(self.slot(id)?.inner.lock().await.session.view())
    }

    /// Applies an action and persists it. The next recommendation is
    /// computed in the background, or before replying when `wait` is set.
    pub async fn submit(self: &Arc<Self>, id: &str, seq: u64, action: &str, wait: bool) -> Result<SessionView, StoreError> {
        let slot = self.slot(id)?;
        let mut inner = slot.inner.lock().await;
        if let Submitted::Repeat(view) = inner.session.apply(seq, action)? {
            return Ok(*view);
        }
        if let Some(flag) = slot.cancel.lock().unwrap().take() {
            flag.store(true, Ordering::Relaxed);
        }
        if wait {
            if let Some(job) = inner.session.recommendation_job() {
                let result = tokio::task::spawn_blocking(move || job.run(None)).await.expect("planner task panicked");
                inner.session.commit(result)?;
            }
        }
        inner.persist()?;
        let view = inner.session.view();
        inner.session.remember_reply(seq, action, view.clone());
        drop(inner);
        let _ = slot.updates.send(view.clone());
        self.schedule(id);
        Ok(view)
    }

    /// Starts computing the owed recommendation, if any, on the blocking pool.
    fn schedule(self: &Arc<Self>, id: &str) {
        let Ok(slot) = self.slot(id) else { return };
        let Ok(handle) = tokio::runtime::Handle::try_current() else { return };
        handle.spawn(async move {
            let (job, flag) = {
                let inner = slot.inner.lock().await;
                let Some(job) = inner.session.recommendation_job() else { return };
                let flag = Arc::new(AtomicBool::new(false));
                if let Some(old) = slot.cancel.lock().unwrap().replace(flag.clone()) {
                    old.store(true, Ordering::Relaxed);
                }
                (job, flag)
            };
            let result = tokio::task::spawn_blocking(move || job.run(Some(flag))).await.expect("planner task panicked");
            let mut inner = slot.inner.lock().await;
            if matches!(inner.session.commit(result), Ok(true)) && inner.persist().is_ok() {
                let view = inner.session.view();
                let _ = slot.updates.send(view);
            }
        });
    }

    pub async fn vote(&self, id: &str, clip: u32, mode: ids_core::explain::ExplanationMode) -> Result<(), StoreError> {
        let slot = self.slot(id)?;
        let mut inner = slot.inner.lock().await;
        inner.session.vote_preference(clip, mode)?;
        inner.persist()?;
        Ok(())
    }

    /// The session's log file as written.
    pub async fn export(&self, id: &str) -> Result<String, StoreError> {
        let slot = self.slot(id)?;
        let inner = slot.inner.lock().await;
        Ok(fs::read_to_string(&inner.path)?)
    }
}
