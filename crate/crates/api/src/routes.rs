use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use framemaker_core::lexicon::{search_lemma, Lemma, LemmaSearchResult};
use framemaker_core::wizard::{CommitOutcome, ExampleInput, LemmaInput, ReviewDecision};
use framemaker_core::{
    suggest_frame_elements, FeSuggestion, FlowKind, Frame, FrameFilter, FrameId, FrameSummary, FrameType,
    ImportMode, ImportOutcome, InterchangeDocument, Language, Lexicality, LexicalUnit, Page, Pos, SessionId,
    StepPayload, Wizard, WizardError, WizardSession, WizardStep,
};
use serde::{Deserialize, Serialize};

use crate::auth::Contributor;
use crate::error::ApiError;
use crate::tutorials::Tutorial;
use crate::AppState;

type ApiResult<T> = Result<T, ApiError>;

pub(crate) fn router() -> Router<AppState> {
    let v1 = Router::new()
        .route("/health", get(health))
        .route("/sessions", post(start_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/lemma", post(submit_lemma))
        .route("/sessions/{id}/review", post(resolve_review))
        .route("/sessions/{id}/steps", post(submit_step))
        .route("/sessions/{id}/back", post(go_back))
        .route("/sessions/{id}/finalize", post(finalize))
        .route("/frames", get(list_frames))
        .route("/frames/{id}", get(get_frame))
        .route("/lus", get(find_lus))
        .route("/suggestions/fes", get(suggestions))
        .route("/search/lemma", get(lemma_search))
        .route("/admin/import", post(import))
        .route("/admin/export", get(export))
        .route("/tutorials/{anchor}", get(tutorial));
    Router::new().nest("/api/v1", v1)
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> ApiResult<T> {
    payload.map(|Json(v)| v).map_err(ApiError::from)
}

fn query<T>(q: Result<Query<T>, QueryRejection>) -> ApiResult<T> {
    q.map(|Query(v)| v).map_err(ApiError::from)
}

/// Runs a wizard call off the async executor.
async fn blocking<T: Send + 'static>(
    state: &AppState,
    f: impl FnOnce(&Wizard) -> Result<T, WizardError> + Send + 'static,
) -> ApiResult<T> {
    let wizard = state.wizard.clone();
    tokio::task::spawn_blocking(move || f(&wizard))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "INTERNAL", e.to_string()))?
        .map_err(ApiError::from)
}

/// Loads the session and checks that `who` owns it.
fn owned(state: &AppState, id: &SessionId, who: &Contributor) -> ApiResult<WizardSession> {
    let session = state.wizard.get_session(id)?;
    if session.contributor != who.0 {
        return Err(ApiError::forbidden());
    }
    Ok(session)
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StartSession {
    flow: FlowKind,
}

async fn start_session(
    State(state): State<AppState>,
    who: Contributor,
    payload: Result<Json<StartSession>, JsonRejection>,
) -> ApiResult<impl IntoResponse> {
    let req = body(payload)?;
    let session = blocking(&state, move |w| w.start_session(who.0, req.flow)).await?;
    Ok((StatusCode::CREATED, Json(session)))
}

async fn get_session(
    State(state): State<AppState>,
    who: Contributor,
    Path(id): Path<String>,
) -> ApiResult<Json<WizardSession>> {
    owned(&state, &SessionId::new(id), &who).map(Json)
}

async fn submit_lemma(
    State(state): State<AppState>,
    who: Contributor,
    Path(id): Path<String>,
    payload: Result<Json<LemmaInput>, JsonRejection>,
) -> ApiResult<Json<WizardSession>> {
    let input = body(payload)?;
    let id = SessionId::new(id);
    owned(&state, &id, &who)?;
    blocking(&state, move |w| w.submit_lemma(&id, &input)).await.map(Json)
}

async fn resolve_review(
    State(state): State<AppState>,
    who: Contributor,
    Path(id): Path<String>,
    payload: Result<Json<ReviewDecision>, JsonRejection>,
) -> ApiResult<Json<WizardSession>> {
    let decision = body(payload)?;
    let id = SessionId::new(id);
    owned(&state, &id, &who)?;
    blocking(&state, move |w| w.resolve_review(&id, &decision)).await.map(Json)
}

async fn submit_step(
    State(state): State<AppState>,
    who: Contributor,
    Path(id): Path<String>,
    payload: Result<Json<StepPayload>, JsonRejection>,
) -> ApiResult<Json<WizardSession>> {
    let step = body(payload)?;
    let id = SessionId::new(id);
    owned(&state, &id, &who)?;
    blocking(&state, move |w| w.submit_step(&id, &step)).await.map(Json)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GoBack {
    to_step: WizardStep,
}

async fn go_back(
    State(state): State<AppState>,
    who: Contributor,
    Path(id): Path<String>,
    payload: Result<Json<GoBack>, JsonRejection>,
) -> ApiResult<Json<WizardSession>> {
    let req = body(payload)?;
    let id = SessionId::new(id);
    owned(&state, &id, &who)?;
    blocking(&state, move |w| w.go_back(&id, req.to_step)).await.map(Json)
}

#[derive(Serialize)]
struct Finalized {
    session: WizardSession,
    outcome: CommitOutcome,
}

async fn finalize(
    State(state): State<AppState>,
    who: Contributor,
    Path(id): Path<String>,
    payload: Result<Json<ExampleInput>, JsonRejection>,
) -> ApiResult<impl IntoResponse> {
    let input = body(payload)?;
    let id = SessionId::new(id);
    owned(&state, &id, &who)?;
    let (session, outcome) = blocking(&state, move |w| w.finalize(&id, &input)).await?;
    Ok((StatusCode::CREATED, Json(Finalized { session, outcome })))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameQuery {
    language: Option<Language>,
    #[serde(rename = "type")]
    frame_type: Option<FrameType>,
    lexicality: Option<Lexicality>,
    q: Option<String>,
    page: Option<usize>,
    per_page: Option<usize>,
}

async fn list_frames(
    State(state): State<AppState>,
    q: Result<Query<FrameQuery>, QueryRejection>,
) -> ApiResult<Json<Page<FrameSummary>>> {
    let q = query(q)?;
    let defaults = FrameFilter::default();
    let filter = FrameFilter {
        language: q.language,
        frame_type: q.frame_type,
        lexicality: q.lexicality,
        name_contains: q.q.filter(|s| !s.is_empty()),
        page: q.page.unwrap_or(defaults.page),
        per_page: q.per_page.unwrap_or(defaults.per_page),
    };
    let page = state.wizard.store().list_frames(&filter);
    Ok(Json(Page {
        items: page.items.iter().map(Frame::summary).collect(),
        page: page.page,
        per_page: page.per_page,
        total: page.total,
    }))
}

async fn get_frame(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Frame>> {
    Ok(Json(state.wizard.store().get_frame(&FrameId::new(id))?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LuQuery {
    lemma: String,
    pos: Pos,
    language: Language,
}

async fn find_lus(
    State(state): State<AppState>,
    q: Result<Query<LuQuery>, QueryRejection>,
) -> ApiResult<Json<Vec<LexicalUnit>>> {
    let q = query(q)?;
    Ok(Json(state.wizard.store().find_lus(&q.lemma, q.pos, &q.language)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SuggestionQuery {
    frame_type: FrameType,
}

async fn suggestions(q: Result<Query<SuggestionQuery>, QueryRejection>) -> ApiResult<Json<Vec<FeSuggestion>>> {
    Ok(Json(suggest_frame_elements(query(q)?.frame_type)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SearchQuery {
    lemma: String,
    pos: Pos,
    language: Language,
    threshold: Option<f64>,
}

async fn lemma_search(
    State(state): State<AppState>,
    q: Result<Query<SearchQuery>, QueryRejection>,
) -> ApiResult<Json<LemmaSearchResult>> {
    let q = query(q)?;
    let lemma = Lemma::new(&q.lemma, q.pos, q.language)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.code(), e.to_string()))?;
    let threshold = q.threshold.unwrap_or_else(|| state.wizard.threshold());
    let lexicon = state.wizard.lexicon().snapshot();
    let store = state.wizard.store().snapshot();
    Ok(Json(search_lemma(&lemma, &lexicon, &*store, threshold)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ImportQuery {
    #[serde(default = "strict")]
    mode: ImportMode,
}

fn strict() -> ImportMode {
    ImportMode::Strict
}

async fn import(
    State(state): State<AppState>,
    _who: Contributor,
    q: Result<Query<ImportQuery>, QueryRejection>,
    text: String,
) -> ApiResult<Json<ImportOutcome>> {
    let mode = query(q)?.mode;
    let doc = InterchangeDocument::parse(&text)?;
    let wizard = state.wizard.clone();
    let outcome = tokio::task::spawn_blocking(move || wizard.store().import_frames(&doc, mode))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "INTERNAL", e.to_string()))??;
    Ok(Json(outcome))
}

async fn export(State(state): State<AppState>, _who: Contributor) -> impl IntoResponse {
    let doc = state.wizard.store().export_frames(&FrameFilter::all());
    ([(header::CONTENT_TYPE, "application/json")], doc.to_canonical_string())
}

async fn tutorial(State(state): State<AppState>, Path(anchor): Path<String>) -> ApiResult<Json<Tutorial>> {
    state
        .tutorials
        .get(&anchor)
        .cloned()
        .map(Json)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "NOT_FOUND", format!("no tutorial for {anchor}")))
}
