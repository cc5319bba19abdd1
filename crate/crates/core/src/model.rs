//! Frames, frame elements, lexical units and the relations between them.

use std::collections::BTreeSet;
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::language::Language;

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_string())
            }
        }
    };
}

string_id!(
    /// Store-local frame identifier.
    FrameId
);
string_id!(
    /// Frame element identifier, unique within its frame.
    FeId
);
string_id!(
    /// Frame relation identifier, unique within the daughter frame.
    RelationId
);
string_id!(LuId);
string_id!(ContributorId);
string_id!(
    /// Wizard session identifier.
    SessionId
);

impl FrameId {
    /// Placeholder id carried by frames that have not been committed yet.
    pub fn draft() -> Self {
        Self::new("draft")
    }

    pub fn is_draft(&self) -> bool {
        self.0 == "draft"
    }
}

/// Casefolded, trimmed form used for every name comparison.
pub fn fold_name(name: &str) -> String {
    name.trim().to_lowercase()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameType {
    Event,
    Entity,
    Relation,
    Attribute,
    State,
    Undefined,
}

impl FrameType {
    pub const ALL: [FrameType; 6] = [
        FrameType::Event,
        FrameType::Entity,
        FrameType::Relation,
        FrameType::Attribute,
        FrameType::State,
        FrameType::Undefined,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorenessStatus {
    Core,
    CoreUnexpressed,
    Peripheral,
    ExtraThematic,
}

impl CorenessStatus {
    /// Core and core-unexpressed FEs are both conceptually necessary to the frame.
    pub fn is_core(self) -> bool {
        matches!(self, CorenessStatus::Core | CorenessStatus::CoreUnexpressed)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "relation")]
pub enum FeOrigin {
    Manual,
    SuggestedByType,
    MappedFromRelation(RelationId),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameElement {
    pub id: FeId,
    pub name: String,
    pub definition: String,
    pub coreness: CorenessStatus,
    pub origin: FeOrigin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeRelationKind {
    Requires,
    Excludes,
    CoreSet,
}

/// A relation among FEs of one frame.
///
/// `Requires` is ordered (first requires second). `Excludes` and `CoreSet`
/// are unordered and their members are kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeRelation {
    pub kind: FeRelationKind,
    pub members: Vec<FeId>,
}

impl FeRelation {
    pub fn new(kind: FeRelationKind, members: Vec<FeId>) -> Self {
        let mut rel = Self { kind, members };
        rel.normalize();
        rel
    }

    pub fn normalize(&mut self) {
        if self.kind != FeRelationKind::Requires {
            self.members.sort();
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameRelationKind {
    Inheritance,
    Using,
    SubframeOf,
    PerspectiveOn,
    Precedes,
    CausativeOf,
    InchoativeOf,
    SeeAlso,
}

impl FrameRelationKind {
    pub const ALL: [FrameRelationKind; 8] = [
        FrameRelationKind::Inheritance,
        FrameRelationKind::Using,
        FrameRelationKind::SubframeOf,
        FrameRelationKind::PerspectiveOn,
        FrameRelationKind::Precedes,
        FrameRelationKind::CausativeOf,
        FrameRelationKind::InchoativeOf,
        FrameRelationKind::SeeAlso,
    ];
}

/// Reference to the mother frame of a relation.
///
/// `id` is `None` when the mother is not in the local store (for example a
/// frame of a remote FrameNet release); such references stay unresolved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameRef {
    pub id: Option<FrameId>,
    pub name: String,
}

impl FrameRef {
    pub fn resolved(id: FrameId, name: impl Into<String>) -> Self {
        Self { id: Some(id), name: name.into() }
    }

    pub fn unresolved(name: impl Into<String>) -> Self {
        Self { id: None, name: name.into() }
    }

    pub fn is_resolved(&self) -> bool {
        self.id.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeMapping {
    /// Mother FE id; `None` only on unresolved relations.
    pub mother_fe: Option<FeId>,
    pub mother_fe_name: String,
    pub daughter_fe: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameRelation {
    pub id: RelationId,
    pub kind: FrameRelationKind,
    pub mother: FrameRef,
    pub daughter: FrameId,
    pub fe_mappings: Vec<FeMapping>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pos {
    #[serde(rename = "n", alias = "noun")]
    Noun,
    #[serde(rename = "v", alias = "verb")]
    Verb,
    #[serde(rename = "a", alias = "adjective")]
    Adjective,
    #[serde(rename = "r", alias = "adverb")]
    Adverb,
    #[serde(rename = "p", alias = "preposition")]
    Preposition,
    #[serde(rename = "x", alias = "other")]
    Other,
}

impl Pos {
    pub fn code(self) -> &'static str {
        match self {
            Pos::Noun => "n",
            Pos::Verb => "v",
            Pos::Adjective => "a",
            Pos::Adverb => "r",
            Pos::Preposition => "p",
            Pos::Other => "x",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        Some(match code.trim().to_ascii_lowercase().as_str() {
            "n" | "noun" => Pos::Noun,
            "v" | "verb" => Pos::Verb,
            "a" | "s" | "adj" | "adjective" => Pos::Adjective,
            "r" | "adv" | "adverb" => Pos::Adverb,
            "p" | "prep" | "preposition" => Pos::Preposition,
            "x" | "other" => Pos::Other,
            _ => return None,
        })
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexicalUnit {
    pub id: LuId,
    pub lemma: String,
    pub pos: Pos,
    pub language: Language,
    pub frame: FrameId,
    pub example_sentence: String,
    pub incorporated_fe: Option<FeId>,
}

impl LexicalUnit {
    /// `lemma.pos` display form, e.g. `jeitinho.n`.
    pub fn label(&self) -> String {
        format!("{}.{}", self.lemma, self.pos)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lexicality {
    Lexical,
    NonLexical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frame {
    pub id: FrameId,
    pub name: String,
    pub definition: String,
    pub frame_type: FrameType,
    /// Event-structuring background frame, named with the `_scenario` suffix.
    #[serde(default)]
    pub scenario: bool,
    pub lexicality: Lexicality,
    pub languages: BTreeSet<Language>,
    pub fes: Vec<FrameElement>,
    pub fe_relations: Vec<FeRelation>,
    pub relations: Vec<FrameRelation>,
    pub lus: Vec<LexicalUnit>,
    pub created_by: ContributorId,
    pub created_at: DateTime<Utc>,
}

impl Frame {
    pub fn draft(lexicality: Lexicality, created_by: ContributorId, created_at: DateTime<Utc>) -> Self {
        Self {
            id: FrameId::draft(),
            name: String::new(),
            definition: String::new(),
            frame_type: FrameType::Undefined,
            scenario: false,
            lexicality,
            languages: BTreeSet::new(),
            fes: Vec::new(),
            fe_relations: Vec::new(),
            relations: Vec::new(),
            lus: Vec::new(),
            created_by,
            created_at,
        }
    }

    pub fn fe(&self, id: &FeId) -> Option<&FrameElement> {
        self.fes.iter().find(|fe| &fe.id == id)
    }

    pub fn fe_by_name(&self, name: &str) -> Option<&FrameElement> {
        let folded = fold_name(name);
        self.fes.iter().find(|fe| fold_name(&fe.name) == folded)
    }

    pub fn core_fe_count(&self) -> usize {
        self.fes.iter().filter(|fe| fe.coreness.is_core()).count()
    }

    pub fn next_fe_id(&self) -> FeId {
        FeId(format!("fe-{}", next_suffix(self.fes.iter().map(|fe| fe.id.as_str()), "fe-")))
    }

    pub fn next_relation_id(&self) -> RelationId {
        RelationId(format!(
            "rel-{}",
            next_suffix(self.relations.iter().map(|r| r.id.as_str()), "rel-")
        ))
    }

    pub fn summary(&self) -> FrameSummary {
        FrameSummary {
            id: self.id.clone(),
            name: self.name.clone(),
            frame_type: self.frame_type,
            lexicality: self.lexicality,
            languages: self.languages.iter().cloned().collect(),
        }
    }
}

fn next_suffix<'a>(ids: impl Iterator<Item = &'a str>, prefix: &str) -> u64 {
    ids.filter_map(|id| id.strip_prefix(prefix)?.parse::<u64>().ok())
        .max()
        .map_or(1, |m| m + 1)
}

/// Compact frame description carried in search results and listings.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FrameSummary {
    pub id: FrameId,
    pub name: String,
    pub frame_type: FrameType,
    pub lexicality: Lexicality,
    pub languages: Vec<Language>,
}
