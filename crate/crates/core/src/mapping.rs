//! Mapping frame elements from a mother frame into a draft along a relation.

use std::collections::HashSet;

use thiserror::Error;

use crate::model::{fold_name, FeId, FeOrigin, Frame, FrameElement, FrameRelation, FrameRelationKind};
use crate::report::codes;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MappingError {
    #[error("relation does not connect this draft to the given mother frame")]
    RelationMismatch,
    #[error("mother frame has no frame element {0}")]
    UnknownMotherFe(FeId),
    #[error("mother frame element {0} is mapped more than once")]
    DuplicateMapping(String),
    #[error("inheritance requires mapping every core FE of the mother; unmapped: {}", .0.join(", "))]
    IncompleteMapping(Vec<String>),
    #[error("frame element name {0} already exists in the draft")]
    NameCollision(String),
}

impl MappingError {
    pub fn code(&self) -> &'static str {
        match self {
            MappingError::RelationMismatch => "RELATION_MISMATCH",
            MappingError::UnknownMotherFe(_) => codes::UNKNOWN_FE,
            MappingError::DuplicateMapping(_) => "DUPLICATE_MAPPING",
            MappingError::IncompleteMapping(_) => codes::INCOMPLETE_MAPPING,
            MappingError::NameCollision(_) => codes::NAME_COLLISION,
        }
    }
}

/// Extends `draft` with the FEs a relation brings in from `mother`.
///
/// Each mapping entry yields one FE named after its daughter side with the
/// mother FE's coreness and definition. Under inheritance every core mother
/// FE must be mapped, and unmapped non-core mother FEs are copied under their
/// own names. The relation itself is recorded on the draft so the new FEs'
/// origins resolve. Existing draft FEs are never touched; name collisions are
/// rejected.
pub fn apply_relation_mapping(
    draft: &Frame,
    relation: &FrameRelation,
    mother: &Frame,
) -> Result<Frame, MappingError> {
    if relation.daughter != draft.id || relation.mother.id.as_ref() != Some(&mother.id) {
        return Err(MappingError::RelationMismatch);
    }

    let mut mapped: HashSet<&FeId> = HashSet::new();
    let mut incoming: Vec<(String, &FrameElement)> = Vec::new();
    for m in &relation.fe_mappings {
        let id = m
            .mother_fe
            .as_ref()
            .ok_or_else(|| MappingError::UnknownMotherFe(FeId::new(m.mother_fe_name.clone())))?;
        let mother_fe = mother.fe(id).ok_or_else(|| MappingError::UnknownMotherFe(id.clone()))?;
        if !mapped.insert(id) {
            return Err(MappingError::DuplicateMapping(mother_fe.name.clone()));
        }
        incoming.push((m.daughter_fe.trim().to_string(), mother_fe));
    }

    if relation.kind == FrameRelationKind::Inheritance {
        let missing: Vec<String> = mother
            .fes
            .iter()
            .filter(|fe| fe.coreness.is_core() && !mapped.contains(&fe.id))
            .map(|fe| fe.name.clone())
            .collect();
        if !missing.is_empty() {
            return Err(MappingError::IncompleteMapping(missing));
        }
        incoming.extend(
            mother
                .fes
                .iter()
                .filter(|fe| !fe.coreness.is_core() && !mapped.contains(&fe.id))
                .map(|fe| (fe.name.clone(), fe)),
        );
    }

    let mut taken: HashSet<String> = draft.fes.iter().map(|fe| fold_name(&fe.name)).collect();
    for (name, _) in &incoming {
        if !taken.insert(fold_name(name)) {
            return Err(MappingError::NameCollision(name.clone()));
        }
    }

    let mut out = draft.clone();
    if !out.relations.iter().any(|r| r.id == relation.id) {
        out.relations.push(relation.clone());
    }
    for (name, source) in incoming {
        let id = out.next_fe_id();
        out.fes.push(FrameElement {
            id,
            name,
            definition: source.definition.clone(),
            coreness: source.coreness,
            origin: FeOrigin::MappedFromRelation(relation.id.clone()),
        });
    }
    Ok(out)
}
