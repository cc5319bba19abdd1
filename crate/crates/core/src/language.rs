//! BCP-47 language tags and the registry of tags a deployment accepts.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LanguageError {
    #[error("empty language tag")]
    Empty,
    #[error("malformed language tag {0:?}")]
    Malformed(String),
}

/// A language tag in canonical BCP-47 casing (`pt-BR`, `en`, `zh-Hant-TW`).
///
/// Parsing is case-insensitive; the primary subtag is lowercased, four-letter
/// script subtags are titlecased and two-letter region subtags uppercased, so
/// `PT-br` and `pt-BR` compare equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Language(String);

impl Language {
    pub fn parse(tag: &str) -> Result<Self, LanguageError> {
        let tag = tag.trim();
        if tag.is_empty() {
            return Err(LanguageError::Empty);
        }
        let malformed = || LanguageError::Malformed(tag.to_string());
        let mut out = String::with_capacity(tag.len());
        for (i, sub) in tag.split(['-', '_']).enumerate() {
            if sub.is_empty() || sub.len() > 8 || !sub.chars().all(|c| c.is_ascii_alphanumeric()) {
                return Err(malformed());
            }
            if i == 0 {
                if !(2..=3).contains(&sub.len()) || !sub.chars().all(|c| c.is_ascii_alphabetic()) {
                    return Err(malformed());
                }
                out.push_str(&sub.to_ascii_lowercase());
                continue;
            }
            out.push('-');
            let alpha = sub.chars().all(|c| c.is_ascii_alphabetic());
            match sub.len() {
                2 if alpha => out.push_str(&sub.to_ascii_uppercase()),
                4 if alpha => {
                    let lower = sub.to_ascii_lowercase();
                    let mut chars = lower.chars();
                    if let Some(first) = chars.next() {
                        out.push(first.to_ascii_uppercase());
                        out.extend(chars);
                    }
                }
                _ => out.push_str(&sub.to_ascii_lowercase()),
            }
        }
        Ok(Language(out))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The primary language subtag (`pt` for `pt-BR`).
    pub fn primary(&self) -> &str {
        self.0.split('-').next().unwrap_or(&self.0)
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for Language {
    type Err = LanguageError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Language::parse(s)
    }
}

impl Serialize for Language {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Language {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        Language::parse(&raw).map_err(serde::de::Error::custom)
    }
}

/// Tags a deployment accepts for frames and lexical units.
///
/// An open registry accepts every well-formed tag. A registry loaded from a
/// file (one tag per line, `#` comments) accepts only the listed tags.
#[derive(Debug, Clone, Default)]
pub struct LanguageRegistry {
    allowed: Option<BTreeSet<Language>>,
}

impl LanguageRegistry {
    pub fn open() -> Self {
        Self { allowed: None }
    }

    pub fn from_tags<I, S>(tags: I) -> Result<Self, LanguageError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let allowed = tags
            .into_iter()
            .map(|t| Language::parse(t.as_ref()))
            .collect::<Result<BTreeSet<_>, _>>()?;
        Ok(Self { allowed: Some(allowed) })
    }

    pub fn load(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let tags = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        Self::from_tags(tags).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }

    pub fn contains(&self, lang: &Language) -> bool {
        match &self.allowed {
            None => true,
            Some(set) => set.contains(lang),
        }
    }
}
