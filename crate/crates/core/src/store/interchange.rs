//! Canonical interchange documents.
//!
//! A document is UTF-8 JSON with the top-level keys `schema_version`,
//! `license`, `frames`, `lus` and `relations`. Frames, FEs and relations
//! reference each other by name; ids are store-local and remapped on
//! import. Every list is sorted so that exporting an unchanged store is
//! byte-identical across runs, and export → import → export is a fixed point.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{FrameFilter, FrameStoreSnapshot, StoreError, SCHEMA_VERSION};
use crate::language::Language;
use crate::model::{
    fold_name, ContributorId, CorenessStatus, FeId, FeMapping, FeOrigin, FeRelation, FeRelationKind, Frame,
    FrameElement, FrameId, FrameRef, FrameRelation, FrameRelationKind, FrameType, Lexicality, LexicalUnit, LuId,
    Pos, RelationId,
};
use crate::report::{codes, ValidationReport};
use crate::validate::validate_frame_draft;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterchangeDocument {
    pub schema_version: u32,
    pub license: String,
    pub frames: Vec<FrameRecord>,
    pub lus: Vec<LuRecord>,
    pub relations: Vec<RelationRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameRecord {
    pub name: String,
    pub definition: String,
    pub frame_type: FrameType,
    #[serde(default)]
    pub scenario: bool,
    pub lexicality: Lexicality,
    pub languages: Vec<Language>,
    pub fes: Vec<FeRecord>,
    #[serde(default)]
    pub fe_relations: Vec<FeRelationRecord>,
    pub created_by: ContributorId,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OriginKind {
    Manual,
    SuggestedByType,
    MappedFromRelation,
}

/// Identifies a relation of the same frame by kind and mother name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationKey {
    pub kind: FrameRelationKind,
    pub mother: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeRecord {
    pub name: String,
    pub definition: String,
    pub coreness: CorenessStatus,
    pub origin: OriginKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mapped_from: Option<RelationKey>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeRelationRecord {
    pub kind: FeRelationKind,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LuRecord {
    pub frame: String,
    pub lemma: String,
    pub pos: Pos,
    pub language: Language,
    pub example_sentence: String,
    #[serde(default)]
    pub incorporated_fe: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingRecord {
    pub mother_fe: String,
    pub daughter_fe: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationRecord {
    pub kind: FrameRelationKind,
    pub mother: String,
    pub daughter: String,
    /// False when the mother is not part of this database (e.g. a remote
    /// FrameNet frame); such references are kept by name only.
    pub resolved: bool,
    #[serde(default)]
    pub fe_mappings: Vec<MappingRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImportMode {
    Strict,
    SkipConflicts,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImportIssue {
    /// Frame the issue concerns (or the dangling name it references).
    pub frame: String,
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImportOutcome {
    pub imported: usize,
    pub skipped: usize,
    pub errors: Vec<ImportIssue>,
}

impl InterchangeDocument {
    pub fn empty() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            license: super::DEFAULT_LICENSE.to_string(),
            frames: Vec::new(),
            lus: Vec::new(),
            relations: Vec::new(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, StoreError> {
        let doc: Self = serde_json::from_str(text).map_err(|e| StoreError::SchemaMismatch(e.to_string()))?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(StoreError::SchemaMismatch(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                doc.schema_version
            )));
        }
        Ok(doc)
    }

    /// Canonical text form: sorted lists, pretty JSON, trailing newline.
    pub fn to_canonical_string(&self) -> String {
        let mut doc = self.clone();
        doc.canonicalize();
        let mut out = serde_json::to_string_pretty(&doc).expect("interchange documents always serialize");
        out.push('\n');
        out
    }

    pub fn canonicalize(&mut self) {
        for f in &mut self.frames {
            f.languages.sort();
            f.languages.dedup();
            f.fes.sort_by(|a, b| a.name.cmp(&b.name));
            for r in &mut f.fe_relations {
                if r.kind != FeRelationKind::Requires {
                    r.members.sort();
                }
            }
            f.fe_relations.sort();
        }
        self.frames.sort_by(|a, b| fold_name(&a.name).cmp(&fold_name(&b.name)).then_with(|| a.name.cmp(&b.name)));
        for r in &mut self.relations {
            r.fe_mappings.sort();
        }
        self.relations.sort_by(|a, b| {
            (a.kind, &a.mother, &a.daughter, a.resolved).cmp(&(b.kind, &b.mother, &b.daughter, b.resolved))
        });
        self.lus.sort_by(|a, b| {
            (&a.frame, &a.lemma, a.pos, &a.language, &a.example_sentence)
                .cmp(&(&b.frame, &b.lemma, b.pos, &b.language, &b.example_sentence))
        });
    }
}

fn fe_name(frame: &Frame, id: &FeId) -> String {
    frame.fe(id).map(|fe| fe.name.clone()).unwrap_or_else(|| id.to_string())
}

pub(super) fn export(snapshot: &FrameStoreSnapshot, filter: &FrameFilter) -> InterchangeDocument {
    let frames: Vec<&Frame> = snapshot.frames().filter(|f| filter.matches(f)).collect();
    let exported: HashSet<&FrameId> = frames.iter().map(|f| &f.id).collect();
    let mut doc = InterchangeDocument {
        schema_version: snapshot.schema_version(),
        license: snapshot.license().to_string(),
        ..InterchangeDocument::empty()
    };

    for frame in frames {
        let relation_key = |id: &RelationId| {
            frame.relations.iter().find(|r| &r.id == id).map(|r| RelationKey {
                kind: r.kind,
                mother: mother_name(snapshot, &r.mother),
            })
        };
        doc.frames.push(FrameRecord {
            name: frame.name.clone(),
            definition: frame.definition.clone(),
            frame_type: frame.frame_type,
            scenario: frame.scenario,
            lexicality: frame.lexicality,
            languages: frame.languages.iter().cloned().collect(),
            fes: frame
                .fes
                .iter()
                .map(|fe| {
                    let (origin, mapped_from) = match &fe.origin {
                        FeOrigin::Manual => (OriginKind::Manual, None),
                        FeOrigin::SuggestedByType => (OriginKind::SuggestedByType, None),
                        FeOrigin::MappedFromRelation(rel) => (OriginKind::MappedFromRelation, relation_key(rel)),
                    };
                    FeRecord {
                        name: fe.name.clone(),
                        definition: fe.definition.clone(),
                        coreness: fe.coreness,
                        origin,
                        mapped_from,
                    }
                })
                .collect(),
            fe_relations: frame
                .fe_relations
                .iter()
                .map(|r| FeRelationRecord { kind: r.kind, members: r.members.iter().map(|m| fe_name(frame, m)).collect() })
                .collect(),
            created_by: frame.created_by.clone(),
            created_at: frame.created_at,
        });
        for rel in &frame.relations {
            doc.relations.push(RelationRecord {
                kind: rel.kind,
                mother: mother_name(snapshot, &rel.mother),
                daughter: frame.name.clone(),
                resolved: rel.mother.id.as_ref().is_some_and(|id| exported.contains(id)),
                fe_mappings: rel
                    .fe_mappings
                    .iter()
                    .map(|m| MappingRecord { mother_fe: m.mother_fe_name.clone(), daughter_fe: m.daughter_fe.clone() })
                    .collect(),
            });
        }
        for lu in &frame.lus {
            doc.lus.push(LuRecord {
                frame: frame.name.clone(),
                lemma: lu.lemma.clone(),
                pos: lu.pos,
                language: lu.language.clone(),
                example_sentence: lu.example_sentence.clone(),
                incorporated_fe: lu.incorporated_fe.as_ref().map(|fe| fe_name(frame, fe)),
            });
        }
    }
    doc.canonicalize();
    doc
}

fn mother_name(snapshot: &FrameStoreSnapshot, mother: &FrameRef) -> String {
    mother
        .id
        .as_ref()
        .and_then(|id| snapshot.get(id))
        .map_or_else(|| mother.name.clone(), |m| m.name.clone())
}

struct Issue {
    code: &'static str,
    message: String,
}

fn issue(code: &'static str, message: impl Into<String>) -> Issue {
    Issue { code, message: message.into() }
}

/// Builds a draft frame from its record, resolving mothers through `lookup`.
///
/// With `lenient_mothers`, relations whose mother cannot be found are kept
/// unresolved even when the record marks them resolved (used for standalone
/// validation, where no database is available).
fn build_frame<'a>(
    record: &FrameRecord,
    relations: &[&RelationRecord],
    lus: &[&LuRecord],
    lookup: impl Fn(&str) -> Option<&'a Frame>,
    lenient_mothers: bool,
) -> Result<Frame, Issue> {
    let mut frame = Frame::draft(record.lexicality, record.created_by.clone(), record.created_at);
    frame.name = record.name.clone();
    frame.definition = record.definition.clone();
    frame.frame_type = record.frame_type;
    frame.scenario = record.scenario;
    frame.languages = record.languages.iter().cloned().collect();

    let mut relation_ids: HashMap<(FrameRelationKind, String), RelationId> = HashMap::new();
    for rel in relations {
        let id = frame.next_relation_id();
        let key = (rel.kind, fold_name(&rel.mother));
        if relation_ids.insert(key, id.clone()).is_some() {
            return Err(issue(codes::RELATION_DUPLICATE, format!("{:?} relation to {} listed twice", rel.kind, rel.mother)));
        }
        let mother = lookup(&rel.mother);
        let relation = match mother {
            Some(m) => {
                let mut fe_mappings = Vec::with_capacity(rel.fe_mappings.len());
                for map in &rel.fe_mappings {
                    let Some(mfe) = m.fe_by_name(&map.mother_fe) else {
                        return Err(issue(codes::UNKNOWN_FE, format!("{} has no frame element {}", m.name, map.mother_fe)));
                    };
                    fe_mappings.push(FeMapping {
                        mother_fe: Some(mfe.id.clone()),
                        mother_fe_name: mfe.name.clone(),
                        daughter_fe: map.daughter_fe.clone(),
                    });
                }
                if rel.kind == FrameRelationKind::Inheritance {
                    let missing: Vec<&str> = m
                        .fes
                        .iter()
                        .filter(|fe| fe.coreness.is_core())
                        .filter(|fe| !fe_mappings.iter().any(|x| x.mother_fe.as_ref() == Some(&fe.id)))
                        .map(|fe| fe.name.as_str())
                        .collect();
                    if !missing.is_empty() {
                        return Err(issue(
                            codes::INCOMPLETE_MAPPING,
                            format!("inheritance from {} leaves core FEs unmapped: {}", m.name, missing.join(", ")),
                        ));
                    }
                }
                FrameRelation {
                    id,
                    kind: rel.kind,
                    mother: FrameRef::resolved(m.id.clone(), m.name.clone()),
                    daughter: frame.id.clone(),
                    fe_mappings,
                }
            }
            None if rel.resolved && !lenient_mothers => {
                return Err(issue(codes::UNKNOWN_FRAME, format!("mother frame {} is not available", rel.mother)));
            }
            None => FrameRelation {
                id,
                kind: rel.kind,
                mother: FrameRef::unresolved(rel.mother.clone()),
                daughter: frame.id.clone(),
                fe_mappings: rel
                    .fe_mappings
                    .iter()
                    .map(|m| FeMapping {
                        mother_fe: None,
                        mother_fe_name: m.mother_fe.clone(),
                        daughter_fe: m.daughter_fe.clone(),
                    })
                    .collect(),
            },
        };
        frame.relations.push(relation);
    }

    for fe in &record.fes {
        let origin = match (&fe.origin, &fe.mapped_from) {
            (OriginKind::Manual, _) => FeOrigin::Manual,
            (OriginKind::SuggestedByType, _) => FeOrigin::SuggestedByType,
            (OriginKind::MappedFromRelation, Some(key)) => {
                match relation_ids.get(&(key.kind, fold_name(&key.mother))) {
                    Some(id) => FeOrigin::MappedFromRelation(id.clone()),
                    None => {
                        return Err(issue(
                            codes::FE_ORIGIN_DANGLING,
                            format!("FE {} is mapped from a relation the document does not list", fe.name),
                        ))
                    }
                }
            }
            (OriginKind::MappedFromRelation, None) => {
                return Err(issue(codes::FE_ORIGIN_DANGLING, format!("FE {} lacks mapped_from", fe.name)));
            }
        };
        let id = frame.next_fe_id();
        frame.fes.push(FrameElement {
            id,
            name: fe.name.clone(),
            definition: fe.definition.clone(),
            coreness: fe.coreness,
            origin,
        });
    }

    let fe_id = |name: &str| frame.fe_by_name(name).map(|fe| fe.id.clone());
    let mut fe_relations = Vec::with_capacity(record.fe_relations.len());
    for r in &record.fe_relations {
        let members = r
            .members
            .iter()
            .map(|m| fe_id(m).ok_or_else(|| issue(codes::FE_REL_DANGLING, format!("unknown FE {m} in FE relation"))))
            .collect::<Result<Vec<_>, _>>()?;
        fe_relations.push(FeRelation::new(r.kind, members));
    }

    let mut units = Vec::with_capacity(lus.len());
    for lu in lus {
        let incorporated_fe = match &lu.incorporated_fe {
            None => None,
            Some(name) => Some(fe_id(name).ok_or_else(|| {
                issue(codes::LU_BAD_INCORPORATED_FE, format!("{}.{} incorporates unknown FE {name}", lu.lemma, lu.pos))
            })?),
        };
        units.push(LexicalUnit {
            id: LuId::new(format!("lu-draft-{}", units.len() + 1)),
            lemma: lu.lemma.clone(),
            pos: lu.pos,
            language: lu.language.clone(),
            frame: frame.id.clone(),
            example_sentence: lu.example_sentence.clone(),
            incorporated_fe,
        });
    }
    frame.fe_relations = fe_relations;
    frame.lus = units;
    Ok(frame)
}

struct Grouped<'d> {
    relations: HashMap<String, Vec<&'d RelationRecord>>,
    lus: HashMap<String, Vec<&'d LuRecord>>,
}

fn group(doc: &InterchangeDocument) -> Grouped<'_> {
    let mut relations: HashMap<String, Vec<&RelationRecord>> = HashMap::new();
    for r in &doc.relations {
        relations.entry(fold_name(&r.daughter)).or_default().push(r);
    }
    let mut lus: HashMap<String, Vec<&LuRecord>> = HashMap::new();
    for l in &doc.lus {
        lus.entry(fold_name(&l.frame)).or_default().push(l);
    }
    Grouped { relations, lus }
}

/// Imports `doc` into the scratch snapshot `next`, returning the frames to
/// log. In strict mode the first issue aborts the whole import.
pub(super) fn import_into(
    doc: &InterchangeDocument,
    next: &mut FrameStoreSnapshot,
    mode: ImportMode,
) -> Result<(Vec<Frame>, ImportOutcome), StoreError> {
    let mut outcome = ImportOutcome::default();
    let mut committed = Vec::new();
    let grouped = group(doc);

    let fail = |outcome: &mut ImportOutcome, frame: &str, code: &str, message: String| -> Result<(), StoreError> {
        let issue = ImportIssue { frame: frame.to_string(), code: code.to_string(), message };
        if mode == ImportMode::Strict {
            return Err(if issue.code == "CONFLICT" {
                StoreError::Conflict(issue)
            } else {
                StoreError::ImportRejected(issue)
            });
        }
        outcome.errors.push(issue);
        Ok(())
    };

    // canonical processing order; first occurrence of a name wins
    let mut records: Vec<&FrameRecord> = doc.frames.iter().collect();
    records.sort_by(|a, b| fold_name(&a.name).cmp(&fold_name(&b.name)).then_with(|| a.name.cmp(&b.name)));
    let mut by_name: BTreeMap<String, &FrameRecord> = BTreeMap::new();
    for r in records {
        match by_name.entry(fold_name(&r.name)) {
            Entry::Occupied(_) => {
                outcome.skipped += 1;
                fail(&mut outcome, &r.name, "CONFLICT", format!("{} appears more than once in the document", r.name))?;
            }
            Entry::Vacant(v) => {
                v.insert(r);
            }
        }
    }

    for (daughter, rels) in &grouped.relations {
        if !by_name.contains_key(daughter) {
            let name = &rels[0].daughter;
            fail(&mut outcome, name, codes::UNKNOWN_FRAME, format!("relation daughter {name} is not in the document"))?;
        }
    }
    for (frame, lus) in &grouped.lus {
        if !by_name.contains_key(frame) {
            let name = &lus[0].frame;
            fail(&mut outcome, name, codes::UNKNOWN_FRAME, format!("lexical unit frame {name} is not in the document"))?;
        }
    }

    // Kahn's algorithm over in-document mother → daughter edges
    let mut deps: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
    for key in by_name.keys() {
        let mothers = grouped
            .relations
            .get(key)
            .into_iter()
            .flatten()
            .map(|r| fold_name(&r.mother))
            .filter(|m| by_name.contains_key(m) && m != key)
            .collect();
        deps.insert(key.as_str(), mothers);
    }
    let mut done: HashSet<String> = HashSet::new();
    let mut failed: HashSet<String> = HashSet::new();
    loop {
        let ready: Vec<&str> = deps
            .iter()
            .filter(|(_, mothers)| mothers.iter().all(|m| done.contains(m) || failed.contains(m)))
            .map(|(k, _)| *k)
            .collect();
        if ready.is_empty() {
            break;
        }
        for key in ready {
            deps.remove(key);
            let record = by_name[key];
            let blocked = grouped
                .relations
                .get(key)
                .into_iter()
                .flatten()
                .find(|r| failed.contains(&fold_name(&r.mother)));
            let result = if let Some(r) = blocked {
                Err((codes::UNKNOWN_FRAME, format!("mother frame {} was not imported", r.mother)))
            } else if next.name_taken(&record.name) {
                Err(("CONFLICT", format!("a frame named {} already exists", record.name)))
            } else {
                let rels = grouped.relations.get(key).map(Vec::as_slice).unwrap_or(&[]);
                let lus = grouped.lus.get(key).map(Vec::as_slice).unwrap_or(&[]);
                build_frame(record, rels, lus, |n| next.by_name(n), false)
                    .map_err(|i| (i.code, i.message))
                    .and_then(|draft| match next.prepare(draft) {
                        Ok(frame) => Ok(frame),
                        Err(StoreError::DuplicateName(n)) => Err(("CONFLICT", format!("a frame named {n} already exists"))),
                        Err(StoreError::ValidationFailed(report)) => Err(("VALIDATION_FAILED", describe(&report))),
                        Err(e) => Err((codes::UNKNOWN_FRAME, e.to_string())),
                    })
            };
            match result {
                Ok(frame) => {
                    next.insert_frame(frame.clone());
                    committed.push(frame);
                    done.insert(key.to_string());
                }
                Err((code, message)) => {
                    failed.insert(key.to_string());
                    outcome.skipped += 1;
                    fail(&mut outcome, &record.name, code, message)?;
                }
            }
        }
    }
    for key in deps.keys() {
        outcome.skipped += 1;
        let name = &by_name[*key].name;
        fail(&mut outcome, name, "RELATION_CYCLE", format!("{name} is part of a relation cycle"))?;
    }

    outcome.imported = committed.len();
    Ok((committed, outcome))
}

fn describe(report: &ValidationReport) -> String {
    report
        .findings()
        .iter()
        .filter(|f| f.severity == crate::report::Severity::Error)
        .map(|f| format!("{} at {}: {}", f.code, f.subject, f.message))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Validates every frame of a document on its own, without a database.
/// Structural problems (dangling FE names, bad origins) become error findings.
pub fn validate_document(doc: &InterchangeDocument) -> Vec<(String, ValidationReport)> {
    let grouped = group(doc);
    let mut out = Vec::with_capacity(doc.frames.len());
    for record in &doc.frames {
        let key = fold_name(&record.name);
        let rels = grouped.relations.get(&key).map(Vec::as_slice).unwrap_or(&[]);
        let lus = grouped.lus.get(&key).map(Vec::as_slice).unwrap_or(&[]);
        let report = match build_frame(record, rels, lus, |_| None, true) {
            Ok(frame) => validate_frame_draft(&frame),
            Err(i) => {
                let mut r = ValidationReport::new();
                r.error(i.code, "", i.message);
                r
            }
        };
        out.push((record.name.clone(), report));
    }
    out
}
