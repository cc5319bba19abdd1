//! Frame database engine with a guided, check-enforcing creation workflow
//! for lexical and non-lexical semantic frames.
//!
//! - [`model`], [`validate`], [`suggest`] and [`mapping`]: the frame data
//!   model and its stateless checks.
//! - [`lexicon`]: multilingual synsets for synonym and cross-lingual
//!   duplicate detection.
//! - [`store`]: persistent frame database with atomic commits and the
//!   interchange format.
//! - [`wizard`]: the step-gated creation sessions.

pub mod language;
pub mod lexicon;
pub mod mapping;
pub mod model;
pub mod report;
pub mod store;
pub mod suggest;
pub mod validate;
pub mod wizard;

pub use language::{Language, LanguageError, LanguageRegistry};
pub use mapping::{apply_relation_mapping, MappingError};
pub use model::*;
pub use report::{codes, Finding, Severity, ValidationReport, Verdict};
pub use store::{FrameFilter, FrameStore, FrameStoreSnapshot, ImportMode, ImportOutcome, InterchangeDocument, Page, StoreError};
pub use suggest::{suggest_frame_elements, FeSuggestion};
pub use validate::{is_identifier, validate_fe_relations, validate_frame_draft, validate_frame_name};
pub use wizard::{FlowKind, StepPayload, StepRejection, Wizard, WizardConfig, WizardError, WizardSession, WizardStep};
