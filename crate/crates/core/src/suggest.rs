//! Frame element suggestions keyed by root frame type.

use serde::{Deserialize, Serialize};

use crate::model::{CorenessStatus, FrameType};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeSuggestion {
    pub name: String,
    pub coreness: CorenessStatus,
    pub definition_stub: String,
}

use CorenessStatus::{ExtraThematic, Peripheral};

type Row = (&'static str, CorenessStatus, &'static str);

const EVENT: &[Row] = &[
    ("Duration", Peripheral, "The length of time over which the event takes place."),
    ("Explanation", ExtraThematic, "The reason why the event occurs."),
    ("Manner", Peripheral, "The way in which the event takes place."),
    ("Means", Peripheral, "An act performed to accomplish the event."),
    ("Place", Peripheral, "Where the event takes place."),
    ("Purpose", ExtraThematic, "The goal the participants intend to reach through the event."),
    ("Time", Peripheral, "When the event takes place."),
];

const ENTITY: &[Row] = &[
    ("Descriptor", Peripheral, "A characteristic or description of the entity."),
    ("Material", Peripheral, "What the entity is made of."),
    ("Origin", Peripheral, "Where or from whom the entity comes."),
    ("Possessor", Peripheral, "Who owns or holds the entity."),
    ("Use", Peripheral, "The purpose the entity is used for."),
];

const RELATION: &[Row] = &[
    ("Degree", Peripheral, "The extent to which the relation holds."),
    ("Direction", Peripheral, "The orientation of one participant with respect to the other."),
    ("Frequency", Peripheral, "How often the relation holds."),
    ("Time", Peripheral, "When the relation holds."),
];

const ATTRIBUTE: &[Row] = &[
    ("Circumstances", Peripheral, "The conditions under which the attribute holds."),
    ("Degree", Peripheral, "The extent to which the attribute applies."),
    ("Manner", Peripheral, "The way in which the attribute manifests."),
    ("Time", Peripheral, "When the attribute holds."),
];

const STATE: &[Row] = &[
    ("Degree", Peripheral, "The intensity of the state."),
    ("Duration", Peripheral, "How long the state lasts."),
    ("Explanation", ExtraThematic, "What brings the state about."),
    ("Place", Peripheral, "Where the state holds."),
    ("Time", Peripheral, "When the state holds."),
];

fn table(frame_type: FrameType) -> &'static [Row] {
    match frame_type {
        FrameType::Event => EVENT,
        FrameType::Entity => ENTITY,
        FrameType::Relation => RELATION,
        FrameType::Attribute => ATTRIBUTE,
        FrameType::State => STATE,
        FrameType::Undefined => &[],
    }
}

/// Suggested FEs for a root type, in alphabetical order.
pub fn suggest_frame_elements(frame_type: FrameType) -> Vec<FeSuggestion> {
    let mut out: Vec<FeSuggestion> = table(frame_type)
        .iter()
        .map(|(name, coreness, stub)| FeSuggestion {
            name: (*name).to_string(),
            coreness: *coreness,
            definition_stub: (*stub).to_string(),
        })
        .collect();
    out.sort_by(|a, b| a.name.cmp(&b.name));
    out
}
