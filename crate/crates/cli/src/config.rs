//! Settings resolution: command-line flag, then `FRAMEMAKER_*` environment
//! variable (both handled by clap), then the TOML config file, then defaults.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub store: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub languages: Option<PathBuf>,
    pub threshold: Option<f64>,
    #[serde(default)]
    pub serve: ServeSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServeSection {
    pub bind: Option<SocketAddr>,
    pub token_file: Option<PathBuf>,
    pub session_dir: Option<PathBuf>,
    pub session_ttl_days: Option<i64>,
    pub tutorials: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: FileConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        // relative paths in the file are relative to the file itself
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [
            &mut cfg.store,
            &mut cfg.lexicon,
            &mut cfg.languages,
            &mut cfg.serve.token_file,
            &mut cfg.serve.session_dir,
            &mut cfg.serve.tutorials,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}
