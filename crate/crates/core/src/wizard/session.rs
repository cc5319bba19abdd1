//! Session state and the per-step transitions.
//!
//! Every transition works on a copy of the session; the caller publishes the
//! copy only when the transition succeeds.

use std::collections::HashSet;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::WizardError;
use crate::language::{Language, LanguageRegistry};
use crate::lexicon::{search_lemma, Lemma, LemmaSearchResult, Lexicon};
use crate::mapping::apply_relation_mapping;
use crate::model::{
    fold_name, ContributorId, CorenessStatus, FeId, FeMapping, FeOrigin, FeRelation, FeRelationKind, Frame, FrameElement,
    FrameId, FrameRef, FrameRelation, FrameRelationKind, FrameSummary, FrameType, Lexicality, LexicalUnit, LuId,
    Pos, SessionId,
};
use crate::report::{codes, ValidationReport};
use crate::store::{FrameStore, StoreError};
use crate::suggest::{suggest_frame_elements, FeSuggestion};
use crate::validate::validate_frame_draft;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowKind {
    Lexical,
    NonLexical,
}

/// Wizard screens. Declaration order is flow order, so `<` means "earlier".
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum WizardStep {
    LemmaSearch,
    ExistingFrameReview,
    TypeSelection,
    NameAndDefinition,
    FrameRelations,
    FrameElements,
    FERelations,
    Summary,
    ExampleSentence,
    Committed,
}

impl WizardStep {
    pub const ALL: [WizardStep; 10] = [
        WizardStep::LemmaSearch,
        WizardStep::ExistingFrameReview,
        WizardStep::TypeSelection,
        WizardStep::NameAndDefinition,
        WizardStep::FrameRelations,
        WizardStep::FrameElements,
        WizardStep::FERelations,
        WizardStep::Summary,
        WizardStep::ExampleSentence,
        WizardStep::Committed,
    ];
}

const LEXICAL_STEPS: &[WizardStep] = &WizardStep::ALL;
const NON_LEXICAL_STEPS: &[WizardStep] = &[
    WizardStep::TypeSelection,
    WizardStep::NameAndDefinition,
    WizardStep::FrameRelations,
    WizardStep::FrameElements,
    WizardStep::FERelations,
    WizardStep::Summary,
    WizardStep::Committed,
];

impl FlowKind {
    pub fn steps(self) -> &'static [WizardStep] {
        match self {
            FlowKind::Lexical => LEXICAL_STEPS,
            FlowKind::NonLexical => NON_LEXICAL_STEPS,
        }
    }

    pub fn first_step(self) -> WizardStep {
        self.steps()[0]
    }

    pub fn lexicality(self) -> Lexicality {
        match self {
            FlowKind::Lexical => Lexicality::Lexical,
            FlowKind::NonLexical => Lexicality::NonLexical,
        }
    }

    /// The step reached by a successful `submit_step` at `step`.
    fn after(self, step: WizardStep) -> Option<WizardStep> {
        match (self, step) {
            (FlowKind::NonLexical, WizardStep::Summary) => None,
            (_, WizardStep::TypeSelection) => Some(WizardStep::NameAndDefinition),
            (_, WizardStep::NameAndDefinition) => Some(WizardStep::FrameRelations),
            (_, WizardStep::FrameRelations) => Some(WizardStep::FrameElements),
            (_, WizardStep::FrameElements) => Some(WizardStep::FERelations),
            (_, WizardStep::FERelations) => Some(WizardStep::Summary),
            (FlowKind::Lexical, WizardStep::Summary) => Some(WizardStep::ExampleSentence),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitOutcome {
    pub frame_id: FrameId,
    pub lu_id: Option<LuId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WizardSession {
    pub id: SessionId,
    pub contributor: ContributorId,
    pub flow: FlowKind,
    pub step: WizardStep,
    pub draft: Frame,
    pub pending_lemma: Option<Lemma>,
    pub search_result: Option<LemmaSearchResult>,
    /// Existing frame the new LU will be attached to, after `AttachToFrame`.
    pub attach_to: Option<FrameSummary>,
    /// FE suggestions offered for the selected frame type.
    pub suggestions: Vec<FeSuggestion>,
    /// Warnings from the last accepted step.
    pub warnings: ValidationReport,
    pub outcome: Option<CommitOutcome>,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

/// A step submission the checks refused. The session is left as it was.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRejection {
    pub report: ValidationReport,
    pub stayed_at: WizardStep,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaInput {
    pub lemma: String,
    pub pos: Pos,
    pub language: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "decision", rename_all = "snake_case")]
pub enum ReviewDecision {
    CreateNewFrame,
    AttachToFrame { frame_id: FrameId },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeSelectionInput {
    pub frame_type: FrameType,
    #[serde(default)]
    pub scenario: bool,
    /// Required for non-lexical frames; optional extra tags otherwise.
    #[serde(default)]
    pub languages: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NameInput {
    pub name: String,
    pub definition: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingInput {
    pub mother_fe: String,
    pub daughter_fe: String,
}

/// A relation with the new frame as daughter. `mother` is a frame id or name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationInput {
    pub kind: FrameRelationKind,
    pub mother: String,
    #[serde(default)]
    pub mappings: Vec<MappingInput>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationsInput {
    #[serde(default)]
    pub relations: Vec<RelationInput>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeInput {
    pub name: String,
    pub definition: String,
    pub coreness: CorenessStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeEdit {
    /// Current FE name.
    pub fe: String,
    #[serde(default)]
    pub rename: Option<String>,
    #[serde(default)]
    pub definition: Option<String>,
    #[serde(default)]
    pub coreness: Option<CorenessStatus>,
}

/// Changes to the FE list. Applied in the order remove, edit, add, accept.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameElementsInput {
    #[serde(default)]
    pub accept_suggestions: Vec<String>,
    #[serde(default)]
    pub add: Vec<FeInput>,
    #[serde(default)]
    pub edit: Vec<FeEdit>,
    #[serde(default)]
    pub remove: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeRelationInput {
    pub kind: FeRelationKind,
    /// FE names.
    pub members: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeRelationsInput {
    #[serde(default)]
    pub relations: Vec<FeRelationInput>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummaryInput {}

/// One step's input, tagged with the step it belongs to:
/// `{"step": "NameAndDefinition", "payload": {...}}`. A missing payload
/// reads as `{}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "step", content = "payload", try_from = "RawPayload")]
pub enum StepPayload {
    TypeSelection(TypeSelectionInput),
    NameAndDefinition(NameInput),
    FrameRelations(RelationsInput),
    FrameElements(FrameElementsInput),
    FERelations(FeRelationsInput),
    Summary(SummaryInput),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPayload {
    step: String,
    #[serde(default)]
    payload: serde_json::Value,
}

impl TryFrom<RawPayload> for StepPayload {
    type Error = serde_json::Error;

    fn try_from(raw: RawPayload) -> Result<Self, Self::Error> {
        use serde::de::Error;
        let body = match raw.payload {
            serde_json::Value::Null => serde_json::Value::Object(Default::default()),
            v => v,
        };
        Ok(match raw.step.as_str() {
            "TypeSelection" => StepPayload::TypeSelection(serde_json::from_value(body)?),
            "NameAndDefinition" => StepPayload::NameAndDefinition(serde_json::from_value(body)?),
            "FrameRelations" => StepPayload::FrameRelations(serde_json::from_value(body)?),
            "FrameElements" => StepPayload::FrameElements(serde_json::from_value(body)?),
            "FERelations" => StepPayload::FERelations(serde_json::from_value(body)?),
            "Summary" => StepPayload::Summary(serde_json::from_value(body)?),
            other => return Err(serde_json::Error::custom(format!("{other:?} takes no step payload"))),
        })
    }
}

impl StepPayload {
    pub fn step(&self) -> WizardStep {
        match self {
            StepPayload::TypeSelection(_) => WizardStep::TypeSelection,
            StepPayload::NameAndDefinition(_) => WizardStep::NameAndDefinition,
            StepPayload::FrameRelations(_) => WizardStep::FrameRelations,
            StepPayload::FrameElements(_) => WizardStep::FrameElements,
            StepPayload::FERelations(_) => WizardStep::FERelations,
            StepPayload::Summary(_) => WizardStep::Summary,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleInput {
    #[serde(default)]
    pub sentence: String,
    /// FE name (or id) the lemma incorporates.
    #[serde(default)]
    pub incorporated_fe: Option<String>,
}

pub(super) struct Context<'a> {
    pub store: &'a FrameStore,
    pub lexicon: &'a Lexicon,
    pub registry: &'a LanguageRegistry,
    pub threshold: f64,
    pub now: DateTime<Utc>,
}

/// Step whose submission first enforces a finding.
fn owning_step(code: &str, subject: &str) -> WizardStep {
    use WizardStep::*;
    match code {
        codes::NONLEXICAL_NO_LANGUAGE | codes::UNKNOWN_LANGUAGE | codes::SCENARIO_NOT_EVENT => TypeSelection,
        codes::EMPTY_DEFINITION if subject == "definition" => NameAndDefinition,
        codes::NAME_CHARSET
        | codes::SCENARIO_SUFFIX
        | codes::SCENARIO_SUFFIX_UNEXPECTED
        | codes::STATE_PATTERN
        | codes::DUPLICATE_NAME => NameAndDefinition,
        codes::EMPTY_DEFINITION
        | codes::FE_NAME_CHARSET
        | codes::FE_DUPLICATE_NAME
        | codes::FE_DUPLICATE_ID
        | codes::FE_ORIGIN_DANGLING
        | codes::RELATION_SELF
        | codes::RELATION_DAUGHTER
        | codes::RELATION_DUPLICATE_ID
        | codes::RELATION_DUPLICATE
        | codes::MAPPING_TARGET_MISSING => FrameRelations,
        codes::NO_FES => FrameElements,
        codes::FE_REL_DANGLING
        | codes::FE_REL_SELF
        | codes::FE_REL_CONTRADICTION
        | codes::FE_REL_ARITY
        | codes::CORESET_NONCORE => FERelations,
        codes::LEXICAL_NO_LU
        | codes::NONLEXICAL_HAS_LU
        | codes::LU_NO_EXAMPLE
        | codes::LU_EMPTY_LEMMA
        | codes::LU_DUPLICATE
        | codes::LU_WRONG_FRAME
        | codes::LU_BAD_INCORPORATED_FE => ExampleSentence,
        _ => Summary,
    }
}

/// Full draft validation restricted to the checks owned by `step` and the
/// steps before it.
fn gate(draft: &Frame, step: WizardStep) -> ValidationReport {
    let mut report = validate_frame_draft(draft);
    report.retain(|f| owning_step(&f.code, &f.subject) <= step);
    report
}

/// Removes the matching FEs and any FE relation that loses a member.
fn drop_fes(draft: &mut Frame, remove: impl Fn(&FrameElement) -> bool) {
    let gone: HashSet<FeId> = draft.fes.iter().filter(|fe| remove(fe)).map(|fe| fe.id.clone()).collect();
    if gone.is_empty() {
        return;
    }
    draft.fes.retain(|fe| !gone.contains(&fe.id));
    draft.fe_relations.retain(|r| !r.members.iter().any(|m| gone.contains(m)));
}

fn parse_language(tag: &str, registry: &LanguageRegistry) -> Result<Language, String> {
    let lang = Language::parse(tag).map_err(|e| e.to_string())?;
    if !registry.contains(&lang) {
        return Err(format!("language {lang} is not in the registry"));
    }
    Ok(lang)
}

fn wrong_step(session: &WizardSession, message: impl Into<String>) -> WizardError {
    WizardError::WrongStep { at: session.step, message: message.into() }
}

fn reject(report: ValidationReport, step: WizardStep) -> WizardError {
    WizardError::Rejected(StepRejection { report, stayed_at: step })
}

impl WizardSession {
    pub(super) fn new(id: SessionId, contributor: ContributorId, flow: FlowKind, now: DateTime<Utc>) -> Self {
        let draft = Frame::draft(flow.lexicality(), contributor.clone(), now);
        Self {
            id,
            contributor,
            flow,
            step: flow.first_step(),
            draft,
            pending_lemma: None,
            search_result: None,
            attach_to: None,
            suggestions: Vec::new(),
            warnings: ValidationReport::new(),
            outcome: None,
            created_at: now,
            updated_at: now,
        }
    }

    pub(super) fn submit_lemma(&mut self, input: &LemmaInput, ctx: &Context) -> Result<(), WizardError> {
        if self.step != WizardStep::LemmaSearch {
            return Err(wrong_step(self, "a lemma can only be submitted at LemmaSearch"));
        }
        let mut report = ValidationReport::new();
        let language = parse_language(&input.language, ctx.registry)
            .map_err(|m| report.error(codes::UNKNOWN_LANGUAGE, "language", m))
            .ok();
        if input.lemma.trim().is_empty() {
            report.error(codes::LU_EMPTY_LEMMA, "lemma", "the lemma is empty");
        }
        let (Some(language), false) = (language, report.is_fail()) else {
            return Err(reject(report, self.step));
        };
        let lemma = Lemma::new(&input.lemma, input.pos, language).expect("lemma text checked above");
        let result = search_lemma(&lemma, &ctx.lexicon.snapshot(), ctx.store.snapshot().as_ref(), ctx.threshold);
        self.step = if result.is_empty() { WizardStep::TypeSelection } else { WizardStep::ExistingFrameReview };
        self.pending_lemma = Some(lemma);
        self.search_result = Some(result);
        self.attach_to = None;
        self.warnings = ValidationReport::new();
        Ok(())
    }

    pub(super) fn resolve_review(&mut self, decision: &ReviewDecision, ctx: &Context) -> Result<(), WizardError> {
        if self.step != WizardStep::ExistingFrameReview {
            return Err(wrong_step(self, "there are no search results to review"));
        }
        match decision {
            ReviewDecision::CreateNewFrame => self.step = WizardStep::TypeSelection,
            ReviewDecision::AttachToFrame { frame_id } => {
                let snapshot = ctx.store.snapshot();
                let frame = snapshot.get(frame_id).ok_or_else(|| WizardError::UnknownFrame(frame_id.to_string()))?;
                if frame.lexicality == Lexicality::NonLexical {
                    let mut report = ValidationReport::new();
                    report.error(
                        codes::NONLEXICAL_HAS_LU,
                        "frame_id",
                        format!("{} is non-lexical and cannot take lexical units", frame.name),
                    );
                    return Err(reject(report, self.step));
                }
                self.attach_to = Some(frame.summary());
                self.step = WizardStep::ExampleSentence;
            }
        }
        self.warnings = ValidationReport::new();
        Ok(())
    }

    pub(super) fn submit_step(&mut self, payload: &StepPayload, ctx: &Context) -> Result<(), WizardError> {
        let step = payload.step();
        if step != self.step {
            return Err(wrong_step(self, format!("expected a {:?} payload, got {:?}", self.step, step)));
        }
        let Some(next) = self.flow.after(step) else {
            return Err(wrong_step(self, "non-lexical sessions are committed with finalize at Summary"));
        };
        let mut extra = ValidationReport::new();
        match payload {
            StepPayload::TypeSelection(input) => self.type_selection(input, ctx, &mut extra),
            StepPayload::NameAndDefinition(input) => {
                self.draft.name = input.name.trim().to_string();
                self.draft.definition = input.definition.trim().to_string();
                if !self.draft.name.is_empty() && ctx.store.snapshot().name_taken(&self.draft.name) {
                    extra.error(
                        codes::DUPLICATE_NAME,
                        "name",
                        format!("a frame named {} already exists", self.draft.name),
                    );
                }
            }
            StepPayload::FrameRelations(input) => self.frame_relations(input, ctx, &mut extra),
            StepPayload::FrameElements(input) => self.frame_elements(input, &mut extra),
            StepPayload::FERelations(input) => self.fe_relations(input, &mut extra),
            StepPayload::Summary(_) => {}
        }
        let mut report = gate(&self.draft, step);
        report.merge(extra, "");
        if report.is_fail() {
            return Err(reject(report, step));
        }
        self.warnings = report;
        self.step = next;
        Ok(())
    }

    fn type_selection(&mut self, input: &TypeSelectionInput, ctx: &Context, report: &mut ValidationReport) {
        let mut languages = std::collections::BTreeSet::new();
        for (i, tag) in input.languages.iter().enumerate() {
            match parse_language(tag, ctx.registry) {
                Ok(lang) => {
                    languages.insert(lang);
                }
                Err(m) => report.error(codes::UNKNOWN_LANGUAGE, format!("languages[{i}]"), m),
            }
        }
        if self.draft.frame_type != input.frame_type {
            // suggestions for the old type no longer apply
            drop_fes(&mut self.draft, |fe| fe.origin == FeOrigin::SuggestedByType);
            self.suggestions = suggest_frame_elements(input.frame_type);
        }
        self.draft.frame_type = input.frame_type;
        self.draft.scenario = input.scenario;
        self.draft.languages = languages;
    }

    fn frame_relations(&mut self, input: &RelationsInput, ctx: &Context, report: &mut ValidationReport) {
        let snapshot = ctx.store.snapshot();
        let mut draft = self.draft.clone();
        draft.relations.clear();
        drop_fes(&mut draft, |fe| matches!(fe.origin, FeOrigin::MappedFromRelation(_)));

        for (i, rel) in input.relations.iter().enumerate() {
            let subject = format!("relations[{i}]");
            let Some(mother) = snapshot.get(&FrameId::new(rel.mother.trim())).or_else(|| snapshot.by_name(&rel.mother))
            else {
                report.error(codes::UNKNOWN_FRAME, subject, format!("no frame {}", rel.mother));
                continue;
            };
            if draft.relations.iter().any(|r| r.kind == rel.kind && r.mother.id.as_ref() == Some(&mother.id)) {
                report.error(
                    codes::RELATION_DUPLICATE,
                    subject,
                    format!("{:?} relation to {} is listed twice", rel.kind, mother.name),
                );
                continue;
            }
            let mut fe_mappings = Vec::with_capacity(rel.mappings.len());
            for (j, m) in rel.mappings.iter().enumerate() {
                match mother.fe_by_name(&m.mother_fe) {
                    Some(fe) => fe_mappings.push(FeMapping {
                        mother_fe: Some(fe.id.clone()),
                        mother_fe_name: fe.name.clone(),
                        daughter_fe: m.daughter_fe.trim().to_string(),
                    }),
                    None => report.error(
                        codes::UNKNOWN_FE,
                        format!("{subject}.mappings[{j}]"),
                        format!("{} has no frame element {}", mother.name, m.mother_fe),
                    ),
                }
            }
            if fe_mappings.len() != rel.mappings.len() {
                continue;
            }
            let relation = FrameRelation {
                id: draft.next_relation_id(),
                kind: rel.kind,
                mother: FrameRef::resolved(mother.id.clone(), mother.name.clone()),
                daughter: draft.id.clone(),
                fe_mappings,
            };
            match apply_relation_mapping(&draft, &relation, mother) {
                Ok(extended) => draft = extended,
                Err(e) => report.error(e.code(), subject, e.to_string()),
            }
        }
        self.draft = draft;
    }

    fn frame_elements(&mut self, input: &FrameElementsInput, report: &mut ValidationReport) {
        let locked = |fe: &FrameElement| matches!(fe.origin, FeOrigin::MappedFromRelation(_));
        for (i, name) in input.remove.iter().enumerate() {
            let subject = format!("remove[{i}]");
            match self.draft.fe_by_name(name) {
                None => report.error(codes::UNKNOWN_FE, subject, format!("no frame element {name}")),
                Some(fe) if locked(fe) => report.error(
                    codes::FE_MAPPED_LOCKED,
                    subject,
                    format!("{} comes from a frame relation; change the relation instead", fe.name),
                ),
                Some(fe) => {
                    let id = fe.id.clone();
                    drop_fes(&mut self.draft, |fe| fe.id == id);
                }
            }
        }
        for (i, edit) in input.edit.iter().enumerate() {
            let subject = format!("edit[{i}]");
            let Some(pos) = self.draft.fes.iter().position(|fe| fe.id.as_str() == edit.fe || fold_name(&fe.name) == fold_name(&edit.fe)) else {
                report.error(codes::UNKNOWN_FE, subject, format!("no frame element {}", edit.fe));
                continue;
            };
            let fe = &mut self.draft.fes[pos];
            let is_locked = matches!(fe.origin, FeOrigin::MappedFromRelation(_));
            if is_locked && (edit.rename.is_some() || edit.coreness.is_some_and(|c| c != fe.coreness)) {
                report.error(
                    codes::FE_MAPPED_LOCKED,
                    subject,
                    format!("only the definition of mapped FE {} can be edited", fe.name),
                );
                continue;
            }
            if let Some(name) = &edit.rename {
                fe.name = name.trim().to_string();
            }
            if let Some(def) = &edit.definition {
                fe.definition = def.trim().to_string();
            }
            if let Some(c) = edit.coreness {
                fe.coreness = c;
            }
        }
        for fe in &input.add {
            let id = self.draft.next_fe_id();
            self.draft.fes.push(FrameElement {
                id,
                name: fe.name.trim().to_string(),
                definition: fe.definition.trim().to_string(),
                coreness: fe.coreness,
                origin: FeOrigin::Manual,
            });
        }
        for (i, name) in input.accept_suggestions.iter().enumerate() {
            let Some(s) = self.suggestions.iter().find(|s| s.name == name.trim()) else {
                report.error(
                    codes::UNKNOWN_SUGGESTION,
                    format!("accept_suggestions[{i}]"),
                    format!("{name} was not suggested for {:?} frames", self.draft.frame_type),
                );
                continue;
            };
            let id = self.draft.next_fe_id();
            self.draft.fes.push(FrameElement {
                id,
                name: s.name.clone(),
                definition: s.definition_stub.clone(),
                coreness: s.coreness,
                origin: FeOrigin::SuggestedByType,
            });
        }
    }

    fn fe_relations(&mut self, input: &FeRelationsInput, report: &mut ValidationReport) {
        let mut relations = Vec::with_capacity(input.relations.len());
        for (i, rel) in input.relations.iter().enumerate() {
            let mut members = Vec::with_capacity(rel.members.len());
            for name in &rel.members {
                match self.draft.fe_by_name(name) {
                    Some(fe) => members.push(fe.id.clone()),
                    None => report.error(
                        codes::FE_REL_DANGLING,
                        format!("fe_relations[{i}]"),
                        format!("unknown frame element {name}"),
                    ),
                }
            }
            relations.push(FeRelation::new(rel.kind, members));
        }
        self.draft.fe_relations = relations;
    }

    pub(super) fn go_back(&mut self, to: WizardStep) -> Result<(), WizardError> {
        if self.step == WizardStep::Committed {
            return Err(wrong_step(self, "the session is already committed"));
        }
        if to >= self.step || !self.flow.steps().contains(&to) {
            return Err(wrong_step(self, format!("cannot go back to {to:?}")));
        }
        let reviewed = self.search_result.as_ref().is_some_and(|r| !r.is_empty());
        if to == WizardStep::ExistingFrameReview && !reviewed {
            return Err(wrong_step(self, "the lemma search had no results to review"));
        }
        if self.attach_to.is_some() && to > WizardStep::ExistingFrameReview {
            return Err(wrong_step(self, "an attached lexical unit has no frame-editing steps"));
        }
        match to {
            WizardStep::LemmaSearch => {
                self.pending_lemma = None;
                self.search_result = None;
                self.attach_to = None;
            }
            WizardStep::ExistingFrameReview => self.attach_to = None,
            _ => {}
        }
        self.step = to;
        self.warnings = ValidationReport::new();
        Ok(())
    }

    pub(super) fn finalize(&mut self, input: &ExampleInput, ctx: &Context) -> Result<CommitOutcome, WizardError> {
        let ready = match self.flow {
            FlowKind::Lexical => WizardStep::ExampleSentence,
            FlowKind::NonLexical => WizardStep::Summary,
        };
        if self.step != ready {
            return Err(wrong_step(self, format!("finalize is only possible at {ready:?}")));
        }
        let outcome = match (&self.attach_to, self.flow) {
            (Some(target), _) => self.attach_lexical_unit(&target.id.clone(), input, ctx)?,
            (None, FlowKind::Lexical) => {
                let mut frame = self.final_frame(ctx);
                let mut report = ValidationReport::new();
                let lu = self.lexical_unit(&frame, FrameId::draft(), input, &mut report);
                frame.lus.extend(lu);
                commit(frame, report, ctx)?
            }
            (None, FlowKind::NonLexical) => commit(self.final_frame(ctx), ValidationReport::new(), ctx)?,
        };
        self.step = WizardStep::Committed;
        self.outcome = Some(outcome.clone());
        self.warnings = ValidationReport::new();
        Ok(outcome)
    }

    fn final_frame(&self, ctx: &Context) -> Frame {
        let mut frame = self.draft.clone();
        frame.created_by = self.contributor.clone();
        frame.created_at = ctx.now;
        frame
    }

    /// LU for the pending lemma, evoking `frame`. Problems go into `report`.
    fn lexical_unit(
        &self,
        frame: &Frame,
        frame_id: FrameId,
        input: &ExampleInput,
        report: &mut ValidationReport,
    ) -> Option<LexicalUnit> {
        let Some(lemma) = &self.pending_lemma else {
            report.error(codes::LEXICAL_NO_LU, "lemma", "no lemma was entered for this session");
            return None;
        };
        let incorporated_fe = match input.incorporated_fe.as_deref().map(str::trim).filter(|s| !s.is_empty()) {
            None => None,
            Some(name) => match frame.fes.iter().find(|fe| fe.id.as_str() == name).or_else(|| frame.fe_by_name(name)) {
                Some(fe) => Some(fe.id.clone()),
                None => {
                    report.error(
                        codes::LU_BAD_INCORPORATED_FE,
                        "incorporated_fe",
                        format!("{name} is not a frame element of {}", frame.name),
                    );
                    None
                }
            },
        };
        Some(LexicalUnit {
            id: LuId::new("lu-draft"),
            lemma: lemma.text.clone(),
            pos: lemma.pos,
            language: lemma.language.clone(),
            frame: frame_id,
            example_sentence: input.sentence.trim().to_string(),
            incorporated_fe,
        })
    }

    fn attach_lexical_unit(
        &self,
        target: &FrameId,
        input: &ExampleInput,
        ctx: &Context,
    ) -> Result<CommitOutcome, WizardError> {
        let frame = ctx.store.get_frame(target).map_err(|_| WizardError::UnknownFrame(target.to_string()))?;
        let mut report = ValidationReport::new();
        let lu = self.lexical_unit(&frame, frame.id.clone(), input, &mut report);
        if let Some(lu) = &lu {
            if lu.example_sentence.is_empty() {
                report.error(codes::LU_NO_EXAMPLE, "sentence", "an example sentence is required");
            }
        }
        let (Some(lu), false) = (lu, report.is_fail()) else {
            return Err(WizardError::ValidationFailed(report));
        };
        let lu_id = ctx.store.add_lexical_unit(target, lu).map_err(store_error)?;
        Ok(CommitOutcome { frame_id: target.clone(), lu_id: Some(lu_id) })
    }
}

fn commit(frame: Frame, mut report: ValidationReport, ctx: &Context) -> Result<CommitOutcome, WizardError> {
    report.merge(validate_frame_draft(&frame), "");
    if report.is_fail() {
        return Err(WizardError::ValidationFailed(report));
    }
    let frame_id = ctx.store.commit_frame(frame).map_err(store_error)?;
    let lu_id = ctx.store.snapshot().get(&frame_id).and_then(|f| f.lus.first()).map(|lu| lu.id.clone());
    Ok(CommitOutcome { frame_id, lu_id })
}

fn store_error(e: StoreError) -> WizardError {
    match e {
        StoreError::DuplicateName(name) => WizardError::DuplicateName(name),
        StoreError::ValidationFailed(report) => WizardError::ValidationFailed(report),
        StoreError::DuplicateLu(label) => {
            let mut report = ValidationReport::new();
            report.error(codes::LU_DUPLICATE, "lemma", format!("{label} already evokes this frame"));
            WizardError::ValidationFailed(report)
        }
        StoreError::NotFound(id) => WizardError::UnknownFrame(id.to_string()),
        StoreError::UnknownFrame(name) => WizardError::UnknownFrame(name),
        other => WizardError::Store(other),
    }
}
