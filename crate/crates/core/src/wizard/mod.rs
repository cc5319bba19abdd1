//! Step-gated frame creation sessions.
//!
//! Lexical sessions start with a lemma search; non-lexical ones start at
//! type selection. Each submission is checked before the session advances,
//! and a rejected submission leaves the session exactly as it was. Calls on
//! one session are serialized by a per-session lock; distinct sessions run
//! concurrently and only meet at the store's commit.

mod session;

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::{DateTime, Duration, Utc};
use parking_lot::{Mutex, RwLock};
use thiserror::Error;

use crate::language::LanguageRegistry;
use crate::lexicon::{Lexicon, DEFAULT_THRESHOLD};
use crate::model::{ContributorId, SessionId};
use crate::report::{codes, ValidationReport};
use crate::store::{FrameStore, StoreError};

pub use session::{
    CommitOutcome, ExampleInput, FeEdit, FeInput, FeRelationInput, FeRelationsInput, FlowKind, FrameElementsInput,
    LemmaInput, MappingInput, NameInput, RelationInput, RelationsInput, ReviewDecision, StepPayload,
    StepRejection, SummaryInput, TypeSelectionInput, WizardSession, WizardStep,
};
use session::Context;

pub const DEFAULT_SESSION_TTL_DAYS: i64 = 30;

#[derive(Debug, Error)]
pub enum WizardError {
    #[error("no session {0}")]
    UnknownSession(SessionId),
    #[error("session {0} has expired")]
    SessionExpired(SessionId),
    #[error("wrong step (session is at {at:?}): {message}")]
    WrongStep { at: WizardStep, message: String },
    #[error("step rejected")]
    Rejected(StepRejection),
    #[error("unknown frame {0}")]
    UnknownFrame(String),
    #[error("the frame failed validation")]
    ValidationFailed(ValidationReport),
    #[error("a frame named {0} already exists")]
    DuplicateName(String),
    #[error(transparent)]
    Store(StoreError),
    #[error("session storage failure: {0}")]
    SessionStorage(String),
}

impl WizardError {
    pub fn code(&self) -> &str {
        match self {
            WizardError::UnknownSession(_) => "UNKNOWN_SESSION",
            WizardError::SessionExpired(_) => "SESSION_EXPIRED",
            WizardError::WrongStep { .. } => "WRONG_STEP",
            WizardError::Rejected(_) => "STEP_REJECTED",
            WizardError::UnknownFrame(_) => codes::UNKNOWN_FRAME,
            WizardError::ValidationFailed(_) => "VALIDATION_FAILED",
            WizardError::DuplicateName(_) => codes::DUPLICATE_NAME,
            WizardError::Store(e) => e.code(),
            WizardError::SessionStorage(_) => "STORAGE_FAILURE",
        }
    }

    pub fn report(&self) -> Option<&ValidationReport> {
        match self {
            WizardError::Rejected(r) => Some(&r.report),
            WizardError::ValidationFailed(r) => Some(r),
            WizardError::Store(e) => e.report(),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct WizardConfig {
    /// Cross-lingual spelling threshold for lemma searches.
    pub threshold: f64,
    pub session_ttl: Duration,
    /// Directory for resumable sessions; `None` keeps them in memory only.
    pub session_dir: Option<PathBuf>,
}

impl Default for WizardConfig {
    fn default() -> Self {
        Self { threshold: DEFAULT_THRESHOLD, session_ttl: Duration::days(DEFAULT_SESSION_TTL_DAYS), session_dir: None }
    }
}

type Clock = Arc<dyn Fn() -> DateTime<Utc> + Send + Sync>;

pub struct Wizard {
    store: Arc<FrameStore>,
    lexicon: Arc<Lexicon>,
    registry: LanguageRegistry,
    config: WizardConfig,
    sessions: RwLock<HashMap<SessionId, Arc<Mutex<WizardSession>>>>,
    clock: Clock,
}

impl std::fmt::Debug for Wizard {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Wizard").field("config", &self.config).field("sessions", &self.sessions.read().len()).finish()
    }
}

fn session_file(dir: &Path, id: &SessionId) -> PathBuf {
    dir.join(format!("{id}.json"))
}

impl Wizard {
    /// Creates the service, resuming any unexpired sessions found in
    /// `config.session_dir`.
    pub fn new(
        store: Arc<FrameStore>,
        lexicon: Arc<Lexicon>,
        registry: LanguageRegistry,
        config: WizardConfig,
    ) -> Result<Self, WizardError> {
        let wizard = Self {
            store,
            lexicon,
            registry,
            config,
            sessions: RwLock::new(HashMap::new()),
            clock: Arc::new(Utc::now),
        };
        wizard.load_sessions()?;
        Ok(wizard)
    }

    /// Replaces the time source (tests drive expiry with it).
    pub fn with_clock(mut self, clock: impl Fn() -> DateTime<Utc> + Send + Sync + 'static) -> Self {
        self.clock = Arc::new(clock);
        self
    }

    pub fn store(&self) -> &Arc<FrameStore> {
        &self.store
    }

    pub fn lexicon(&self) -> &Arc<Lexicon> {
        &self.lexicon
    }

    pub fn registry(&self) -> &LanguageRegistry {
        &self.registry
    }

    pub fn threshold(&self) -> f64 {
        self.config.threshold
    }

    fn load_sessions(&self) -> Result<(), WizardError> {
        let Some(dir) = &self.config.session_dir else { return Ok(()) };
        fs::create_dir_all(dir).map_err(|e| WizardError::SessionStorage(e.to_string()))?;
        let entries = fs::read_dir(dir).map_err(|e| WizardError::SessionStorage(e.to_string()))?;
        let now = (self.clock)();
        let mut sessions = self.sessions.write();
        for entry in entries.flatten() {
            let path = entry.path();
            if path.extension().is_none_or(|e| e != "json") {
                continue;
            }
            let parsed = fs::read(&path)
                .ok()
                .and_then(|bytes| serde_json::from_slice::<WizardSession>(&bytes).ok());
            match parsed {
                Some(s) if now - s.updated_at <= self.config.session_ttl => {
                    sessions.insert(s.id.clone(), Arc::new(Mutex::new(s)));
                }
                Some(_) => {
                    let _ = fs::remove_file(&path);
                }
                None => tracing::warn!(path = %path.display(), "skipping unreadable session file"),
            }
        }
        Ok(())
    }

    fn persist(&self, session: &WizardSession) -> Result<(), WizardError> {
        let Some(dir) = &self.config.session_dir else { return Ok(()) };
        let path = session_file(dir, &session.id);
        let tmp = path.with_extension("json.tmp");
        let bytes = serde_json::to_vec(session).map_err(|e| WizardError::SessionStorage(e.to_string()))?;
        fs::write(&tmp, bytes)
            .and_then(|_| fs::rename(&tmp, &path))
            .map_err(|e| WizardError::SessionStorage(e.to_string()))
    }

    fn forget(&self, id: &SessionId) {
        self.sessions.write().remove(id);
        if let Some(dir) = &self.config.session_dir {
            let _ = fs::remove_file(session_file(dir, id));
        }
    }

    fn entry(&self, id: &SessionId) -> Result<Arc<Mutex<WizardSession>>, WizardError> {
        self.sessions.read().get(id).cloned().ok_or_else(|| WizardError::UnknownSession(id.clone()))
    }

    fn expired(&self, session: &WizardSession, now: DateTime<Utc>) -> bool {
        now - session.updated_at > self.config.session_ttl
    }

    /// Runs `op` on a copy of the session and publishes the copy on success.
    fn mutate<T>(
        &self,
        id: &SessionId,
        op: impl FnOnce(&mut WizardSession, &Context) -> Result<T, WizardError>,
    ) -> Result<(WizardSession, T), WizardError> {
        let entry = self.entry(id)?;
        let mut guard = entry.lock();
        let now = (self.clock)();
        if self.expired(&guard, now) {
            drop(guard);
            self.forget(id);
            return Err(WizardError::SessionExpired(id.clone()));
        }
        let ctx = Context {
            store: &self.store,
            lexicon: &self.lexicon,
            registry: &self.registry,
            threshold: self.config.threshold,
            now,
        };
        let mut next = guard.clone();
        let out = op(&mut next, &ctx)?;
        next.updated_at = now;
        if let Err(e) = self.persist(&next) {
            if next.outcome.is_none() {
                return Err(e);
            }
            // the frame is already committed; keep the in-memory state
            tracing::warn!(session = %id, error = %e, "could not persist committed session");
        }
        *guard = next.clone();
        Ok((next, out))
    }

    pub fn start_session(&self, contributor: ContributorId, flow: FlowKind) -> Result<WizardSession, WizardError> {
        let id = SessionId::new(uuid::Uuid::new_v4().to_string());
        let session = WizardSession::new(id.clone(), contributor, flow, (self.clock)());
        self.persist(&session)?;
        self.sessions.write().insert(id, Arc::new(Mutex::new(session.clone())));
        Ok(session)
    }

    pub fn get_session(&self, id: &SessionId) -> Result<WizardSession, WizardError> {
        let entry = self.entry(id)?;
        let guard = entry.lock();
        if self.expired(&guard, (self.clock)()) {
            drop(guard);
            self.forget(id);
            return Err(WizardError::SessionExpired(id.clone()));
        }
        Ok(guard.clone())
    }

    pub fn submit_lemma(&self, id: &SessionId, input: &LemmaInput) -> Result<WizardSession, WizardError> {
        self.mutate(id, |s, ctx| s.submit_lemma(input, ctx)).map(|(s, _)| s)
    }

    pub fn resolve_review(&self, id: &SessionId, decision: &ReviewDecision) -> Result<WizardSession, WizardError> {
        self.mutate(id, |s, ctx| s.resolve_review(decision, ctx)).map(|(s, _)| s)
    }

    pub fn submit_step(&self, id: &SessionId, payload: &StepPayload) -> Result<WizardSession, WizardError> {
        self.mutate(id, |s, ctx| s.submit_step(payload, ctx)).map(|(s, _)| s)
    }

    pub fn go_back(&self, id: &SessionId, to: WizardStep) -> Result<WizardSession, WizardError> {
        self.mutate(id, |s, _| s.go_back(to)).map(|(s, _)| s)
    }

    /// Builds the final frame (or LU), validates it and commits it to the store.
    pub fn finalize(
        &self,
        id: &SessionId,
        input: &ExampleInput,
    ) -> Result<(WizardSession, CommitOutcome), WizardError> {
        self.mutate(id, |s, ctx| s.finalize(input, ctx))
    }

    /// Drops every expired session. Returns how many were removed.
    pub fn purge_expired(&self) -> usize {
        let now = (self.clock)();
        let stale: Vec<SessionId> = self
            .sessions
            .read()
            .iter()
            .filter(|(_, s)| self.expired(&s.lock(), now))
            .map(|(id, _)| id.clone())
            .collect();
        for id in &stale {
            self.forget(id);
        }
        stale.len()
    }

    pub fn session_count(&self) -> usize {
        self.sessions.read().len()
    }
}

#[cfg(test)]
mod tests;
