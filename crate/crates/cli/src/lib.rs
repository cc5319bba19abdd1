//! `framemaker` command-line tool.

pub mod config;
pub mod script;

use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use framemaker_api::ServeConfig;
use framemaker_core::lexicon::{search_lemma, Lemma, Lexicon, DEFAULT_THRESHOLD};
use framemaker_core::store::validate_document;
use framemaker_core::{
    FrameFilter, FrameStore, FrameType, ImportMode, InterchangeDocument, Language, LanguageRegistry, Lexicality,
    Pos, Wizard, WizardConfig,
};

use crate::config::FileConfig;

#[derive(Debug, Parser)]
#[command(name = "framemaker", version, about = "Frame database with a guided creation wizard")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML config file.
    #[arg(long, global = true, env = "FRAMEMAKER_CONFIG")]
    pub config: Option<PathBuf>,
    /// Frame store log file.
    #[arg(long, global = true, env = "FRAMEMAKER_STORE")]
    pub store: Option<PathBuf>,
    /// Lexicon (synset TSV) file.
    #[arg(long, global = true, env = "FRAMEMAKER_LEXICON")]
    pub lexicon: Option<PathBuf>,
    /// File listing the accepted language tags, one per line.
    #[arg(long, global = true, env = "FRAMEMAKER_LANGUAGES")]
    pub languages: Option<PathBuf>,
    /// Cross-lingual spelling threshold.
    #[arg(long, global = true, env = "FRAMEMAKER_THRESHOLD")]
    pub threshold: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP API.
    Serve(ServeArgs),
    /// Load a synset TSV file (synset, language, pos, lemma) into the lexicon.
    IngestLexicon { file: PathBuf },
    /// Import an interchange document.
    Import {
        file: PathBuf,
        /// Abort on the first problem instead of skipping conflicting frames.
        #[arg(long)]
        strict: bool,
    },
    /// Export frames as an interchange document.
    Export {
        /// Output file; stdout when omitted.
        file: Option<PathBuf>,
        #[arg(long)]
        language: Option<Language>,
        #[arg(long = "type", value_parser = parse_json_enum::<FrameType>)]
        frame_type: Option<FrameType>,
        #[arg(long, value_parser = parse_json_enum::<Lexicality>)]
        lexicality: Option<Lexicality>,
    },
    /// Check an interchange document without importing it.
    Validate { file: PathBuf },
    /// Run a wizard script and commit what it creates.
    Create {
        #[arg(long)]
        script: PathBuf,
    },
    /// Look a lemma up in the database and the lexicon.
    Search {
        lemma: String,
        #[arg(long, value_parser = parse_json_enum::<Pos>)]
        pos: Pos,
        #[arg(long, visible_alias = "language")]
        lang: Language,
    },
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "FRAMEMAKER_BIND")]
    pub bind: Option<SocketAddr>,
    /// Bearer tokens, one `token contributor_id` per line.
    #[arg(long, env = "FRAMEMAKER_TOKEN_FILE")]
    pub token_file: Option<PathBuf>,
    /// Where unfinished sessions are kept.
    #[arg(long, env = "FRAMEMAKER_SESSION_DIR")]
    pub session_dir: Option<PathBuf>,
    #[arg(long, env = "FRAMEMAKER_SESSION_TTL_DAYS")]
    pub session_ttl_days: Option<i64>,
    /// JSON overrides for the tutorial texts.
    #[arg(long, env = "FRAMEMAKER_TUTORIALS")]
    pub tutorials: Option<PathBuf>,
}

/// Parses a serde enum from its wire name, e.g. `event` or `n`.
fn parse_json_enum<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

/// Global settings after merging flags, environment and config file.
#[derive(Debug, Clone)]
pub struct Settings {
    pub store: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub languages: Option<PathBuf>,
    pub threshold: f64,
    pub file: FileConfig,
}

impl Settings {
    pub fn resolve(global: &GlobalArgs) -> Result<Self> {
        let file = match &global.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let threshold = global.threshold.or(file.threshold).unwrap_or(DEFAULT_THRESHOLD);
        if !(0.0..=1.0).contains(&threshold) {
            bail!("threshold must be within [0, 1], got {threshold}");
        }
        Ok(Self {
            store: global.store.clone().or_else(|| file.store.clone()),
            lexicon: global.lexicon.clone().or_else(|| file.lexicon.clone()),
            languages: global.languages.clone().or_else(|| file.languages.clone()),
            threshold,
            file,
        })
    }

    fn store_path(&self) -> Result<&Path> {
        self.store
            .as_deref()
            .ok_or_else(|| anyhow!("no frame store configured (use --store, FRAMEMAKER_STORE or the config file)"))
    }

    fn open_store(&self) -> Result<FrameStore> {
        let p = self.store_path()?;
        FrameStore::open(p).with_context(|| format!("opening store {}", p.display()))
    }

    fn open_lexicon(&self) -> Result<Lexicon> {
        match &self.lexicon {
            Some(p) => Lexicon::open(p).with_context(|| format!("opening lexicon {}", p.display())),
            None => Ok(Lexicon::in_memory()),
        }
    }

    fn registry(&self) -> Result<LanguageRegistry> {
        match &self.languages {
            Some(p) => LanguageRegistry::load(p).with_context(|| format!("loading languages {}", p.display())),
            None => Ok(LanguageRegistry::open()),
        }
    }
}

/// Runs one command. Output goes to `out`; the caller maps errors to exit 1.
pub fn run(cli: Cli, out: &mut impl Write) -> Result<()> {
    let settings = Settings::resolve(&cli.global)?;
    match cli.command {
        Command::Serve(args) => serve(&settings, args),
        Command::IngestLexicon { file } => {
            let p = settings
                .lexicon
                .as_deref()
                .ok_or_else(|| anyhow!("no lexicon file configured (use --lexicon, FRAMEMAKER_LEXICON or the config file)"))?;
            let lexicon = Lexicon::open(p).with_context(|| format!("opening lexicon {}", p.display()))?;
            let stats = lexicon.ingest_file(&file).map_err(|e| anyhow!("{}: {e}", e.code()))?;
            writeln!(
                out,
                "loaded {} synsets, {} lemmas; rejected {} lines",
                stats.synsets_loaded, stats.lemmas_loaded, stats.lines_rejected
            )?;
            Ok(())
        }
        Command::Import { file, strict } => {
            let doc = read_document(&file)?;
            let store = settings.open_store()?;
            let mode = if strict { ImportMode::Strict } else { ImportMode::SkipConflicts };
            let outcome = store.import_frames(&doc, mode).map_err(|e| anyhow!("{}: {e}", e.code()))?;
            writeln!(out, "imported {}, skipped {}", outcome.imported, outcome.skipped)?;
            for issue in &outcome.errors {
                writeln!(out, "  {} {}: {}", issue.code, issue.frame, issue.message)?;
            }
            Ok(())
        }
        Command::Export { file: path, language, frame_type, lexicality } => {
            let store = settings.open_store()?;
            let filter = FrameFilter { language, frame_type, lexicality, ..FrameFilter::all() };
            let text = store.export_frames(&filter).to_canonical_string();
            match path {
                Some(p) => std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
                None => out.write_all(text.as_bytes())?,
            }
            Ok(())
        }
        Command::Validate { file } => {
            let doc = read_document(&file)?;
            let mut failed = 0;
            for (name, report) in validate_document(&doc) {
                writeln!(out, "{:?} {name}", report.verdict())?;
                for f in report.findings() {
                    writeln!(out, "  {:?} {} {}: {}", f.severity, f.code, f.subject, f.message)?;
                }
                failed += usize::from(report.is_fail());
            }
            if failed > 0 {
                writeln!(out, "Fail")?;
                bail!("{failed} frame(s) failed validation");
            }
            writeln!(out, "Pass")?;
            Ok(())
        }
        Command::Create { script } => {
            let text =
                std::fs::read_to_string(&script).with_context(|| format!("reading script {}", script.display()))?;
            let wizard = Wizard::new(
                Arc::new(settings.open_store()?),
                Arc::new(settings.open_lexicon()?),
                settings.registry()?,
                WizardConfig { threshold: settings.threshold, ..WizardConfig::default() },
            )?;
            script::run_script(&wizard, &text, out)?;
            Ok(())
        }
        Command::Search { lemma, pos, lang } => {
            let store = match &settings.store {
                Some(_) => settings.open_store()?,
                None => FrameStore::in_memory(),
            };
            let lexicon = settings.open_lexicon()?;
            let lemma = Lemma::new(&lemma, pos, lang).map_err(|e| anyhow!("{}: {e}", e.code()))?;
            let result = search_lemma(&lemma, &lexicon.snapshot(), &*store.snapshot(), settings.threshold);
            serde_json::to_writer_pretty(&mut *out, &result)?;
            writeln!(out)?;
            Ok(())
        }
    }
}

fn read_document(path: &Path) -> Result<InterchangeDocument> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    InterchangeDocument::parse(&text).map_err(|e| anyhow!("{}: {e}", e.code()))
}

fn serve(settings: &Settings, args: ServeArgs) -> Result<()> {
    let file = &settings.file.serve;
    let defaults = ServeConfig::default();
    let config = ServeConfig {
        bind: args.bind.or(file.bind).unwrap_or(defaults.bind),
        store_path: Some(settings.store_path()?.to_path_buf()),
        lexicon_path: settings.lexicon.clone(),
        threshold: settings.threshold,
        session_ttl_days: args.session_ttl_days.or(file.session_ttl_days).unwrap_or(defaults.session_ttl_days),
        session_dir: args.session_dir.or_else(|| file.session_dir.clone()),
        token_file: args.token_file.or_else(|| file.token_file.clone()),
        language_registry: settings.languages.clone(),
        tutorials_file: args.tutorials.or_else(|| file.tutorials.clone()),
    };
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(framemaker_api::serve(config))?;
    Ok(())
}
