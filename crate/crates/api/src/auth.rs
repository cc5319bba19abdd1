//! Static bearer-token registry.
//!
//! The token file has one `token contributor_id` pair per line; blank lines
//! and lines starting with `#` are ignored.

use std::collections::HashMap;
use std::path::Path;

use axum::extract::FromRequestParts;
use axum::http::header::AUTHORIZATION;
use axum::http::request::Parts;
use framemaker_core::ContributorId;

use crate::error::ApiError;
use crate::AppState;

#[derive(Debug, Clone, Default)]
pub struct TokenRegistry {
    tokens: HashMap<String, ContributorId>,
}

#[derive(Debug, thiserror::Error)]
pub enum TokenFileError {
    #[error("cannot read token file {path}: {source}")]
    Unreadable { path: String, source: std::io::Error },
    #[error("token file line {line}: expected `token contributor_id`")]
    Malformed { line: usize },
}

impl TokenRegistry {
    pub fn from_pairs<I, T, C>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (T, C)>,
        T: Into<String>,
        C: Into<String>,
    {
        Self { tokens: pairs.into_iter().map(|(t, c)| (t.into(), ContributorId::new(c))).collect() }
    }

    pub fn parse(text: &str) -> Result<Self, TokenFileError> {
        let mut tokens = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            match (parts.next(), parts.next(), parts.next()) {
                (Some(token), Some(who), None) => {
                    tokens.insert(token.to_string(), ContributorId::new(who));
                }
                _ => return Err(TokenFileError::Malformed { line: i + 1 }),
            }
        }
        Ok(Self { tokens })
    }

    pub fn load(path: &Path) -> Result<Self, TokenFileError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| TokenFileError::Unreadable { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    pub fn contributor(&self, token: &str) -> Option<&ContributorId> {
        self.tokens.get(token)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// The authenticated caller of a request.
#[derive(Debug, Clone)]
pub struct Contributor(pub ContributorId);

impl FromRequestParts<AppState> for Contributor {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &AppState) -> Result<Self, Self::Rejection> {
        let token = parts
            .headers
            .get(AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .map(str::trim)
            .ok_or_else(ApiError::unauthorized)?;
        state.tokens.contributor(token).cloned().map(Contributor).ok_or_else(ApiError::unauthorized)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_token_file() {
        let reg = TokenRegistry::parse("# tokens\n\nabc alice\n  def   bob  \n").unwrap();
        assert_eq!(reg.len(), 2);
        assert_eq!(reg.contributor("def").unwrap().as_str(), "bob");
        assert!(reg.contributor("alice").is_none());
        assert!(matches!(TokenRegistry::parse("abc\n"), Err(TokenFileError::Malformed { line: 1 })));
        assert!(matches!(TokenRegistry::parse("a b c"), Err(TokenFileError::Malformed { line: 1 })));
    }
}
