//! HTTP front end for the frame-creation wizard, the frame store and the
//! lexicon. All routes live under `/api/v1`.

pub mod auth;
pub mod error;
mod routes;
pub mod tutorials;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::Router;
use framemaker_core::lexicon::{Lexicon, DEFAULT_THRESHOLD};
use framemaker_core::{FrameStore, LanguageRegistry, Wizard, WizardConfig};

pub use auth::{Contributor, TokenRegistry};
pub use error::{ApiError, ErrorBody};
pub use tutorials::{Tutorial, Tutorials};

#[derive(Clone)]
pub struct AppState {
    pub wizard: Arc<Wizard>,
    pub tokens: Arc<TokenRegistry>,
    pub tutorials: Arc<Tutorials>,
}

impl AppState {
    pub fn new(wizard: Arc<Wizard>, tokens: TokenRegistry, tutorials: Tutorials) -> Self {
        Self { wizard, tokens: Arc::new(tokens), tutorials: Arc::new(tutorials) }
    }
}

pub fn router(state: AppState) -> Router {
    routes::router().with_state(state)
}

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub bind: SocketAddr,
    pub store_path: Option<PathBuf>,
    pub lexicon_path: Option<PathBuf>,
    pub threshold: f64,
    pub session_ttl_days: i64,
    pub session_dir: Option<PathBuf>,
    pub token_file: Option<PathBuf>,
    pub language_registry: Option<PathBuf>,
    pub tutorials_file: Option<PathBuf>,
}

impl Default for ServeConfig {
    fn default() -> Self {
        Self {
            bind: SocketAddr::from(([127, 0, 0, 1], 8080)),
            store_path: None,
            lexicon_path: None,
            threshold: DEFAULT_THRESHOLD,
            session_ttl_days: framemaker_core::wizard::DEFAULT_SESSION_TTL_DAYS,
            session_dir: None,
            token_file: None,
            language_registry: None,
            tutorials_file: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("{0}")]
    Setup(String),
    #[error("server error: {0}")]
    Io(#[from] std::io::Error),
}

/// Opens every backing resource named in `config` and builds the state.
pub fn build_state(config: &ServeConfig) -> Result<AppState, ServeError> {
    let setup = |e: String| ServeError::Setup(e);
    let store = match &config.store_path {
        Some(p) => FrameStore::open(p).map_err(|e| setup(format!("store {}: {e}", p.display())))?,
        None => FrameStore::in_memory(),
    };
    let lexicon = match &config.lexicon_path {
        Some(p) => Lexicon::open(p).map_err(|e| setup(format!("lexicon {}: {e}", p.display())))?,
        None => Lexicon::in_memory(),
    };
    let registry = match &config.language_registry {
        Some(p) => LanguageRegistry::load(p).map_err(|e| setup(format!("languages {}: {e}", p.display())))?,
        None => LanguageRegistry::open(),
    };
    let tokens = match &config.token_file {
        Some(p) => TokenRegistry::load(p).map_err(|e| setup(e.to_string()))?,
        None => TokenRegistry::default(),
    };
    if tokens.is_empty() {
        tracing::warn!("no API tokens configured; every write request will be refused");
    }
    let tutorials = match &config.tutorials_file {
        Some(p) => Tutorials::with_overrides(p).map_err(setup)?,
        None => Tutorials::builtin(),
    };
    let wizard_config = WizardConfig {
        threshold: config.threshold,
        session_ttl: chrono::Duration::days(config.session_ttl_days),
        session_dir: config.session_dir.clone(),
    };
    let wizard = Wizard::new(Arc::new(store), Arc::new(lexicon), registry, wizard_config)
        .map_err(|e| setup(e.to_string()))?;
    Ok(AppState::new(Arc::new(wizard), tokens, tutorials))
}

/// Serves until ctrl-c.
pub async fn serve(config: ServeConfig) -> Result<(), ServeError> {
    let state = build_state(&config)?;
    let listener = tokio::net::TcpListener::bind(config.bind).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
