//! Help texts shown next to each wizard screen.
//!
//! The built-in catalog covers every screen. An optional JSON file maps
//! anchor ids to `{title?, text?, video_url?}` overrides, so deployments can
//! link their own videos without rebuilding.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tutorial {
    pub anchor: String,
    pub title: String,
    pub text: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub video_url: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Override {
    title: Option<String>,
    text: Option<String>,
    video_url: Option<String>,
}

const BUILTIN: &[(&str, &str, &str)] = &[
    (
        "welcome",
        "Creating a frame",
        "A frame describes a situation, its participants (frame elements) and the words that evoke it. \
         Start with a lemma if a word evokes your frame, or create a non-lexical frame for background scenarios.",
    ),
    (
        "enter-lemma",
        "Enter lemma",
        "Type the word in its dictionary form, pick its part of speech and language. \
         The database and its multilingual synonym sets are searched before anything new is created.",
    ),
    (
        "review-results",
        "Existing frames",
        "These frames are already evoked by your lemma, a synonym, or a similarly spelled word in another language. \
         Attach your lemma to one of them, or create a new frame if none fits.",
    ),
    (
        "frame-type",
        "Frame type",
        "Choose the root type: event, entity, relation, attribute, state or undefined. \
         Mark scenario frames, and give the language(s) of non-lexical frames.",
    ),
    (
        "name-and-definition",
        "Name and definition",
        "Names start with a capital letter and use letters, digits and underscores. \
         Scenario frames end in _scenario; state frames follow Being_x or x_state. Names must be unique.",
    ),
    (
        "frame-relations",
        "Frame relations",
        "Connect the new frame to existing ones. For inheritance every core frame element of the mother \
         must be mapped to a frame element of the new frame; non-core ones are copied.",
    ),
    (
        "frame-elements",
        "Frame elements",
        "Add the participants and props of the situation, with a definition and coreness status. \
         Suggestions for the chosen type can be accepted with one click. At least one is required.",
    ),
    (
        "fe-relations",
        "Frame element relations",
        "State which frame elements require or exclude each other, and which form a core set.",
    ),
    ("summary", "Summary", "Check everything before saving. You can go back to any earlier step."),
    (
        "example-sentence",
        "Example sentence",
        "Give a sentence using your lemma in this sense, and say whether the lemma incorporates a frame element.",
    ),
];

#[derive(Debug, Clone)]
pub struct Tutorials {
    entries: BTreeMap<String, Tutorial>,
}

impl Default for Tutorials {
    fn default() -> Self {
        Self::builtin()
    }
}

impl Tutorials {
    pub fn builtin() -> Self {
        let entries = BUILTIN
            .iter()
            .map(|(anchor, title, text)| {
                let t = Tutorial {
                    anchor: anchor.to_string(),
                    title: title.to_string(),
                    text: text.to_string(),
                    video_url: None,
                };
                (anchor.to_string(), t)
            })
            .collect();
        Self { entries }
    }

    /// Built-in catalog with the overrides from `path` applied.
    pub fn with_overrides(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let overrides: BTreeMap<String, Override> =
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut catalog = Self::builtin();
        for (anchor, o) in overrides {
            let entry = catalog.entries.entry(anchor.clone()).or_insert_with(|| Tutorial {
                anchor,
                title: String::new(),
                text: String::new(),
                video_url: None,
            });
            if let Some(t) = o.title {
                entry.title = t;
            }
            if let Some(t) = o.text {
                entry.text = t;
            }
            if o.video_url.is_some() {
                entry.video_url = o.video_url;
            }
        }
        Ok(catalog)
    }

    pub fn get(&self, anchor: &str) -> Option<&Tutorial> {
        self.entries.get(anchor)
    }

    pub fn anchors(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}
