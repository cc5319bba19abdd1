//! Persistent frame database.
//!
//! Reads go through an immutable [`FrameStoreSnapshot`] behind an `Arc`, so
//! a reader never observes a half-applied write. Writes are serialized by a
//! single commit lock: the next snapshot is built, the record is appended to
//! the log and synced, and only then is the new snapshot published.

pub mod interchange;
mod log;

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::language::Language;
use crate::lexicon::{LemmaKey, LexicalUnitIndex};
use crate::model::{fold_name, Frame, FrameId, FrameSummary, FrameType, Lexicality, LexicalUnit, LuId, Pos};
use crate::report::{codes, ValidationReport};
use crate::validate::validate_frame_draft;

pub use interchange::{validate_document, ImportIssue, ImportMode, ImportOutcome, InterchangeDocument};
pub use log::Fault;
use log::{LogFile, Record};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_LICENSE: &str = "GPL-3.0-or-later";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("a frame named {0} already exists")]
    DuplicateName(String),
    #[error("no frame with id {0}")]
    NotFound(FrameId),
    #[error("unknown frame {0}")]
    UnknownFrame(String),
    #[error("frame failed validation")]
    ValidationFailed(ValidationReport),
    #[error("lexical unit {0} already exists for this frame")]
    DuplicateLu(String),
    #[error("interchange document does not match the schema: {0}")]
    SchemaMismatch(String),
    #[error("import conflict on {}: {}", .0.frame, .0.message)]
    Conflict(ImportIssue),
    #[error("import rejected at {}: {}", .0.frame, .0.message)]
    ImportRejected(ImportIssue),
    #[error("storage failure: {0}")]
    Storage(String),
}

impl StoreError {
    pub fn code(&self) -> &str {
        match self {
            StoreError::DuplicateName(_) => codes::DUPLICATE_NAME,
            StoreError::NotFound(_) => "NOT_FOUND",
            StoreError::UnknownFrame(_) => codes::UNKNOWN_FRAME,
            StoreError::ValidationFailed(_) => "VALIDATION_FAILED",
            StoreError::DuplicateLu(_) => codes::LU_DUPLICATE,
            StoreError::SchemaMismatch(_) => "SCHEMA_MISMATCH",
            StoreError::Conflict(_) => "CONFLICT",
            StoreError::ImportRejected(issue) => &issue.code,
            StoreError::Storage(_) => "STORAGE_FAILURE",
        }
    }

    pub fn report(&self) -> Option<&ValidationReport> {
        match self {
            StoreError::ValidationFailed(r) => Some(r),
            _ => None,
        }
    }
}

fn storage(e: impl std::fmt::Display) -> StoreError {
    StoreError::Storage(e.to_string())
}

/// Consistent read view of the database.
#[derive(Debug, Clone)]
pub struct FrameStoreSnapshot {
    frames: BTreeMap<FrameId, Arc<Frame>>,
    name_index: HashMap<String, FrameId>,
    lu_index: HashMap<LemmaKey, Vec<(FrameId, LuId)>>,
    schema_version: u32,
    license: String,
    next_frame: u64,
    next_lu: u64,
}

impl Default for FrameStoreSnapshot {
    fn default() -> Self {
        Self {
            frames: BTreeMap::new(),
            name_index: HashMap::new(),
            lu_index: HashMap::new(),
            schema_version: SCHEMA_VERSION,
            license: DEFAULT_LICENSE.to_string(),
            next_frame: 1,
            next_lu: 1,
        }
    }
}

fn id_number(id: &str, prefix: &str) -> u64 {
    id.strip_prefix(prefix).and_then(|n| n.parse().ok()).unwrap_or(0)
}

impl FrameStoreSnapshot {
    pub fn schema_version(&self) -> u32 {
        self.schema_version
    }

    pub fn license(&self) -> &str {
        &self.license
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frames(&self) -> impl Iterator<Item = &Frame> {
        self.frames.values().map(|f| f.as_ref())
    }

    pub fn get(&self, id: &FrameId) -> Option<&Frame> {
        self.frames.get(id).map(|f| f.as_ref())
    }

    pub fn by_name(&self, name: &str) -> Option<&Frame> {
        self.name_index.get(&fold_name(name)).and_then(|id| self.get(id))
    }

    pub fn name_taken(&self, name: &str) -> bool {
        self.name_index.contains_key(&fold_name(name))
    }

    /// Index entries, for consistency checks.
    pub fn name_index(&self) -> &HashMap<String, FrameId> {
        &self.name_index
    }

    pub fn lu_index(&self) -> &HashMap<LemmaKey, Vec<(FrameId, LuId)>> {
        &self.lu_index
    }

    pub fn find_lus(&self, lemma: &str, pos: Pos, language: &Language) -> Vec<LexicalUnit> {
        let key = LemmaKey::new(lemma.trim(), pos, language);
        self.lu_index
            .get(&key)
            .into_iter()
            .flatten()
            .filter_map(|(frame, lu)| self.get(frame)?.lus.iter().find(|l| &l.id == lu).cloned())
            .collect()
    }

    pub fn list(&self, filter: &FrameFilter) -> Page<Frame> {
        let mut matching: Vec<&Frame> = self.frames().filter(|f| filter.matches(f)).collect();
        matching.sort_by(|a, b| fold_name(&a.name).cmp(&fold_name(&b.name)).then_with(|| a.id.cmp(&b.id)));
        let per_page = filter.per_page.clamp(1, 500);
        let page = filter.page.max(1);
        let items = matching
            .iter()
            .skip((page - 1) * per_page)
            .take(per_page)
            .map(|f| (*f).clone())
            .collect();
        Page { items, page, per_page, total: matching.len() }
    }

    fn insert_frame(&mut self, frame: Frame) {
        self.next_frame = self.next_frame.max(id_number(frame.id.as_str(), "fr-") + 1);
        for lu in &frame.lus {
            self.next_lu = self.next_lu.max(id_number(lu.id.as_str(), "lu-") + 1);
            self.lu_index
                .entry(LemmaKey::new(&lu.lemma, lu.pos, &lu.language))
                .or_default()
                .push((frame.id.clone(), lu.id.clone()));
        }
        self.name_index.insert(fold_name(&frame.name), frame.id.clone());
        self.frames.insert(frame.id.clone(), Arc::new(frame));
    }

    fn insert_lu(&mut self, frame: &FrameId, lu: LexicalUnit) {
        let Some(existing) = self.frames.get(frame) else { return };
        let mut updated = existing.as_ref().clone();
        self.next_lu = self.next_lu.max(id_number(lu.id.as_str(), "lu-") + 1);
        self.lu_index
            .entry(LemmaKey::new(&lu.lemma, lu.pos, &lu.language))
            .or_default()
            .push((frame.clone(), lu.id.clone()));
        updated.languages.insert(lu.language.clone());
        updated.lus.push(lu);
        self.frames.insert(frame.clone(), Arc::new(updated));
    }

    fn apply(&mut self, record: Record) {
        match record {
            Record::Init { schema_version, license } => {
                self.schema_version = schema_version;
                self.license = license;
            }
            Record::Commit { frames } => {
                for f in frames {
                    self.insert_frame(f);
                }
            }
            Record::AddLu { frame, lu } => self.insert_lu(&frame, lu),
        }
    }

    fn allocate_frame_id(&mut self) -> FrameId {
        let id = FrameId(format!("fr-{}", self.next_frame));
        self.next_frame += 1;
        id
    }

    fn allocate_lu_id(&mut self) -> LuId {
        let id = LuId(format!("lu-{}", self.next_lu));
        self.next_lu += 1;
        id
    }

    /// Assigns store ids to a validated draft and checks it against the
    /// current contents. Does not insert.
    fn prepare(&mut self, mut draft: Frame) -> Result<Frame, StoreError> {
        let report = validate_frame_draft(&draft);
        if report.is_fail() {
            return Err(StoreError::ValidationFailed(report));
        }
        if self.name_taken(&draft.name) {
            return Err(StoreError::DuplicateName(draft.name.trim().to_string()));
        }
        for rel in &draft.relations {
            if let Some(mother) = &rel.mother.id {
                let Some(m) = self.get(mother) else {
                    return Err(StoreError::UnknownFrame(rel.mother.name.clone()));
                };
                for mapping in &rel.fe_mappings {
                    if let Some(fe) = &mapping.mother_fe {
                        if m.fe(fe).is_none() {
                            let mut report = ValidationReport::new();
                            report.error(
                                codes::UNKNOWN_FE,
                                "relations",
                                format!("{} has no frame element {}", m.name, mapping.mother_fe_name),
                            );
                            return Err(StoreError::ValidationFailed(report));
                        }
                    }
                }
            }
        }
        let id = self.allocate_frame_id();
        draft.name = draft.name.trim().to_string();
        draft.id = id.clone();
        for rel in &mut draft.relations {
            rel.daughter = id.clone();
        }
        for lu in &mut draft.lus {
            lu.id = self.allocate_lu_id();
            lu.frame = id.clone();
            draft.languages.insert(lu.language.clone());
        }
        Ok(draft)
    }
}

impl LexicalUnitIndex for FrameStoreSnapshot {
    fn find_lus(&self, lemma: &str, pos: Pos, language: &Language) -> Vec<LexicalUnit> {
        FrameStoreSnapshot::find_lus(self, lemma, pos, language)
    }

    fn frame_summary(&self, id: &FrameId) -> Option<FrameSummary> {
        self.get(id).map(Frame::summary)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrameFilter {
    pub language: Option<Language>,
    pub frame_type: Option<FrameType>,
    pub lexicality: Option<Lexicality>,
    /// Case-insensitive substring of the frame name.
    pub name_contains: Option<String>,
    /// 1-based.
    pub page: usize,
    pub per_page: usize,
}

impl Default for FrameFilter {
    fn default() -> Self {
        Self { language: None, frame_type: None, lexicality: None, name_contains: None, page: 1, per_page: 50 }
    }
}

impl FrameFilter {
    pub fn all() -> Self {
        Self { per_page: usize::MAX, ..Self::default() }
    }

    pub fn matches(&self, frame: &Frame) -> bool {
        if let Some(lang) = &self.language {
            if !frame.languages.contains(lang) && !frame.lus.iter().any(|lu| &lu.language == lang) {
                return false;
            }
        }
        if self.frame_type.is_some_and(|t| t != frame.frame_type) {
            return false;
        }
        if self.lexicality.is_some_and(|l| l != frame.lexicality) {
            return false;
        }
        if let Some(q) = &self.name_contains {
            if !fold_name(&frame.name).contains(&fold_name(q)) {
                return false;
            }
        }
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Page<T> {
    pub items: Vec<T>,
    pub page: usize,
    pub per_page: usize,
    pub total: usize,
}

#[derive(Debug)]
struct Writer {
    log: Option<LogFile>,
    fault: Option<Fault>,
    poisoned: bool,
}

/// The frame database. Cheap to share behind an `Arc`.
#[derive(Debug)]
pub struct FrameStore {
    current: RwLock<Arc<FrameStoreSnapshot>>,
    writer: Mutex<Writer>,
}

impl Default for FrameStore {
    fn default() -> Self {
        Self::in_memory()
    }
}

impl FrameStore {
    pub fn in_memory() -> Self {
        Self {
            current: RwLock::new(Arc::new(FrameStoreSnapshot::default())),
            writer: Mutex::new(Writer { log: None, fault: None, poisoned: false }),
        }
    }

    /// Opens the store whose commit log lives at `path`, replaying it and
    /// discarding any torn tail left by a crash.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let path = path.as_ref();
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(storage)?;
        }
        let (mut log, records) = LogFile::open(path).map_err(storage)?;
        let mut snapshot = FrameStoreSnapshot::default();
        if records.is_empty() {
            let init = Record::Init { schema_version: SCHEMA_VERSION, license: DEFAULT_LICENSE.to_string() };
            log.append(&init, None).map_err(storage)?;
        }
        for r in records {
            snapshot.apply(r);
        }
        Ok(Self {
            current: RwLock::new(Arc::new(snapshot)),
            writer: Mutex::new(Writer { log: Some(log), fault: None, poisoned: false }),
        })
    }

    pub fn path(&self) -> Option<PathBuf> {
        self.writer.lock().log.as_ref().map(|l| l.path().to_path_buf())
    }

    pub fn snapshot(&self) -> Arc<FrameStoreSnapshot> {
        self.current.read().clone()
    }

    /// Arms a one-shot failure for the next write.
    #[cfg(any(test, feature = "fault-injection"))]
    pub fn inject_fault(&self, fault: Fault) {
        self.writer.lock().fault = Some(fault);
    }

    /// Runs `build` against the current snapshot under the commit lock and
    /// publishes the result after the record is durable.
    fn write<T>(
        &self,
        build: impl FnOnce(&mut FrameStoreSnapshot) -> Result<(Record, T), StoreError>,
    ) -> Result<T, StoreError> {
        let mut writer = self.writer.lock();
        if writer.poisoned {
            return Err(StoreError::Storage("store needs to be reopened after a failed write".into()));
        }
        let mut next = self.snapshot().as_ref().clone();
        let (record, out) = build(&mut next)?;
        let fault = writer.fault.take();
        if let Some(log) = writer.log.as_mut() {
            if let Err(e) = log.append(&record, fault) {
                writer.poisoned = true;
                return Err(storage(e));
            }
        } else if fault.is_some() {
            return Err(storage("injected fault"));
        }
        *self.current.write() = Arc::new(next);
        Ok(out)
    }

    /// Validates, assigns ids and atomically stores a new frame with its LUs.
    pub fn commit_frame(&self, draft: Frame) -> Result<FrameId, StoreError> {
        self.write(|next| {
            let frame = next.prepare(draft)?;
            let id = frame.id.clone();
            next.insert_frame(frame.clone());
            Ok((Record::Commit { frames: vec![frame] }, id))
        })
    }

    /// Adds a lexical unit to an existing lexical frame.
    pub fn add_lexical_unit(&self, frame: &FrameId, mut lu: LexicalUnit) -> Result<LuId, StoreError> {
        self.write(|next| {
            let target = next.get(frame).ok_or_else(|| StoreError::NotFound(frame.clone()))?;
            let mut report = ValidationReport::new();
            if target.lexicality == Lexicality::NonLexical {
                report.error(codes::NONLEXICAL_HAS_LU, "frame", format!("{} is non-lexical", target.name));
            }
            if lu.lemma.trim().is_empty() {
                report.error(codes::LU_EMPTY_LEMMA, "lemma", "lexical unit has no lemma");
            }
            if lu.example_sentence.trim().is_empty() {
                report.error(codes::LU_NO_EXAMPLE, "example_sentence", "an example sentence is required");
            }
            if let Some(fe) = &lu.incorporated_fe {
                if target.fe(fe).is_none() {
                    report.error(
                        codes::LU_BAD_INCORPORATED_FE,
                        "incorporated_fe",
                        format!("{fe} is not an FE of {}", target.name),
                    );
                }
            }
            if report.is_fail() {
                return Err(StoreError::ValidationFailed(report));
            }
            let key = LemmaKey::new(&lu.lemma, lu.pos, &lu.language);
            if target.lus.iter().any(|l| LemmaKey::new(&l.lemma, l.pos, &l.language) == key) {
                return Err(StoreError::DuplicateLu(lu.label()));
            }
            lu.id = next.allocate_lu_id();
            lu.frame = frame.clone();
            let id = lu.id.clone();
            next.insert_lu(frame, lu.clone());
            Ok((Record::AddLu { frame: frame.clone(), lu }, id))
        })
    }

    pub fn get_frame(&self, id: &FrameId) -> Result<Frame, StoreError> {
        self.snapshot().get(id).cloned().ok_or_else(|| StoreError::NotFound(id.clone()))
    }

    pub fn list_frames(&self, filter: &FrameFilter) -> Page<Frame> {
        self.snapshot().list(filter)
    }

    pub fn find_lus(&self, lemma: &str, pos: Pos, language: &Language) -> Vec<LexicalUnit> {
        self.snapshot().find_lus(lemma, pos, language)
    }

    pub fn export_frames(&self, filter: &FrameFilter) -> InterchangeDocument {
        interchange::export(&self.snapshot(), filter)
    }

    /// Imports a document atomically: either every accepted frame lands in
    /// one commit or nothing does.
    pub fn import_frames(&self, doc: &InterchangeDocument, mode: ImportMode) -> Result<ImportOutcome, StoreError> {
        if doc.schema_version != SCHEMA_VERSION {
            return Err(StoreError::SchemaMismatch(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                doc.schema_version
            )));
        }
        self.write(|next| {
            let (frames, outcome) = interchange::import_into(doc, next, mode)?;
            Ok((Record::Commit { frames }, outcome))
        })
    }
}

impl LexicalUnitIndex for FrameStore {
    fn find_lus(&self, lemma: &str, pos: Pos, language: &Language) -> Vec<LexicalUnit> {
        FrameStore::find_lus(self, lemma, pos, language)
    }

    fn frame_summary(&self, id: &FrameId) -> Option<FrameSummary> {
        self.snapshot().get(id).map(Frame::summary)
    }
}
