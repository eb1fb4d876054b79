//! HTTP service for the rubric review flow.
//!
//! | route | |
//! |---|---|
//! | `GET /api/questions?rater_id=` | questions in display order, no key, plus review progress |
//! | `GET /api/questions/{id}?rater_id=` | one question with the rubric; the key only once this rater has rated it |
//! | `POST /api/ratings[?overwrite=true]` | validate and append a rating, answer with the key |
//! | `GET /api/report` | the same text `mcqgen eval --format json` prints |
//! | `GET /` | review UI assets, or a placeholder page |
//!
//! Errors are `{"error": {"code": "...", "message": "..."}}`.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use mcq_core::eval::{build_report, chosen_option, load_ratings, rubric, Rating, RatingInput, RatingSet};
use mcq_core::mcq::{option_letter, BankEntry, Mcq};
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::services::ServeDir;

use crate::commands::{bank_map, CommandError};

const PLACEHOLDER: &str = "<!doctype html>\n<title>mcqgen review</title>\n<p>Review UI assets are not installed. Start the server with <code>--static-dir</code>, or use the JSON API under <code>/api</code>.</p>\n";

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self { status, code, message: message.into() }
    }

    fn unknown_question(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "unknown_question", format!("no question with id {id:?}"))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({"error": {"code": self.code, "message": self.message}});
        (self.status, Json(body)).into_response()
    }
}

/// Ratings held in memory and mirrored to an append-only JSONL file. A
/// replacement is appended too; the last line for a (rater, question) wins
/// when the file is read back.
pub struct RatingStore {
    path: PathBuf,
    file: File,
    ratings: RatingSet,
}

impl RatingStore {
    pub fn open(path: &Path, bank: &BTreeMap<String, Mcq>) -> Result<Self, CommandError> {
        let ratings = if path.exists() {
            load_ratings(path).map_err(|source| CommandError::Ratings { path: path.to_path_buf(), source })?
        } else {
            RatingSet::new()
        };
        // reject a store that does not belong to this bank
        build_report(&ratings, bank)?;
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|source| CommandError::Io { path: path.to_path_buf(), source })?;
        Ok(Self { path: path.to_path_buf(), file, ratings })
    }

    pub fn ratings(&self) -> &RatingSet {
        &self.ratings
    }

    fn append(&mut self, rating: Rating) -> std::io::Result<()> {
        let line = rating.to_json_line() + "\n";
        self.file.write_all(line.as_bytes())?;
        self.file.flush()?;
        self.file.sync_data()?;
        self.ratings.insert(rating);
        Ok(())
    }
}

pub struct AppState {
    bank: Vec<BankEntry>,
    index: BTreeMap<String, usize>,
    mcqs: BTreeMap<String, Mcq>,
    store: Mutex<RatingStore>,
}

impl AppState {
    pub fn open(bank: Vec<BankEntry>, ratings_path: &Path) -> Result<Self, CommandError> {
        let mcqs = bank_map(&bank);
        let store = RatingStore::open(ratings_path, &mcqs)?;
        log::info!(
            "serving {} questions, {} existing ratings from {}",
            bank.len(),
            store.ratings.len(),
            store.path.display()
        );
        let index = bank.iter().enumerate().map(|(i, e)| (e.mcq.id.clone(), i)).collect();
        Ok(Self { bank, index, mcqs, store: Mutex::new(store) })
    }

    fn entry(&self, id: &str) -> Result<&BankEntry, ApiError> {
        self.index.get(id).map(|&i| &self.bank[i]).ok_or_else(|| ApiError::unknown_question(id))
    }

    /// Current report, rendered exactly as the CLI renders it.
    pub fn report_json(&self) -> Result<String, ApiError> {
        let store = self.store.lock().expect("rating store lock");
        build_report(&store.ratings, &self.mcqs)
            .map(|r| r.to_json())
            .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "report_failed", e.to_string()))
    }
}

pub fn router(state: Arc<AppState>, static_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/api/questions", get(list_questions))
        .route("/api/questions/{id}", get(get_question))
        .route("/api/ratings", post(post_rating))
        .route("/api/report", get(get_report))
        .route("/api/{*rest}", get(api_not_found).post(api_not_found))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(|| async { Html(PLACEHOLDER) })),
    }
}

#[derive(Debug, Default, Deserialize)]
struct RaterQuery {
    rater_id: Option<String>,
}

/// Question as shown to a rater: options in display order, no key marking.
fn question_view(entry: &BankEntry) -> Value {
    let mcq = &entry.mcq;
    let options: Vec<Value> = entry
        .display_order
        .arrange(mcq)
        .into_iter()
        .enumerate()
        .map(|(i, text)| json!({"letter": option_letter(i), "text": text}))
        .collect();
    json!({
        "id": mcq.id,
        "stem": mcq.stem,
        "options": options,
        "bloom_level": mcq.bloom_level,
        "grade_band": mcq.grade_band,
        "learning_objective": mcq.learning_objective,
        "scenario": mcq.scenario,
    })
}

fn key_view(entry: &BankEntry) -> Value {
    json!({"letter": option_letter(entry.display_order.key_position()), "text": entry.mcq.key})
}

async fn list_questions(State(state): State<Arc<AppState>>, Query(q): Query<RaterQuery>) -> Json<Value> {
    let store = state.store.lock().expect("rating store lock");
    let total = state.bank.len();
    let questions: Vec<Value> = state
        .bank
        .iter()
        .map(|entry| {
            let mut view = question_view(entry);
            if let Some(rater) = &q.rater_id {
                view["rated"] = json!(store.ratings.contains(rater, &entry.mcq.id));
            }
            view
        })
        .collect();
    let raters = match &q.rater_id {
        Some(r) => vec![r.clone()],
        None => store.ratings.raters(),
    };
    let progress: Vec<Value> = raters
        .iter()
        .map(|r| json!({"rater_id": r, "rated": store.ratings.by_rater(r).count(), "total": total}))
        .collect();
    Json(json!({"questions": questions, "progress": progress}))
}

async fn get_question(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<RaterQuery>,
) -> Result<Json<Value>, ApiError> {
    let entry = state.entry(&id)?;
    let rated = match &q.rater_id {
        Some(r) => state.store.lock().expect("rating store lock").ratings.contains(r, &id),
        None => false,
    };
    let mut body = json!({"question": question_view(entry), "rubric": rubric(), "rated": rated});
    if rated {
        body["key"] = key_view(entry);
    }
    Ok(Json(body))
}

#[derive(Debug, Default, Deserialize)]
struct OverwriteQuery {
    overwrite: Option<bool>,
}

async fn post_rating(
    State(state): State<Arc<AppState>>,
    Query(q): Query<OverwriteQuery>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let mut value: Value = serde_json::from_slice(&body)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_json", e.to_string()))?;
    let overwrite_field = value.as_object_mut().and_then(|o| o.remove("overwrite"));
    let overwrite = q.overwrite.unwrap_or(false) || overwrite_field.and_then(|v| v.as_bool()).unwrap_or(false);
    let input: RatingInput = serde_json::from_value(value)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_json", e.to_string()))?;
    let rating = input.validate().map_err(|e| {
        let message = match e.item() {
            Some(item) if !e.to_string().contains(item.name()) => format!("{e} (item {})", item.name()),
            _ => e.to_string(),
        };
        ApiError::new(StatusCode::BAD_REQUEST, "invalid_rating", message)
    })?;
    let entry = state.entry(&rating.question_id)?;
    let chosen = chosen_option(&entry.mcq, &rating.chosen_answer).ok_or_else(|| {
        ApiError::new(
            StatusCode::BAD_REQUEST,
            "invalid_answer",
            format!("chosen_answer {:?} is not one of the options of {}", rating.chosen_answer, entry.mcq.id),
        )
    })?;

    let mut store = state.store.lock().expect("rating store lock");
    if !overwrite && store.ratings.contains(&rating.rater_id, &rating.question_id) {
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            "duplicate_rating",
            format!("{} already rated {}; resend with overwrite=true to replace it", rating.rater_id, rating.question_id),
        ));
    }
    store
        .append(rating.clone())
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "store_failed", e.to_string()))?;
    let body = json!({"rating": rating, "key": key_view(entry), "matches_key": chosen == 0});
    Ok((StatusCode::CREATED, Json(body)).into_response())
}

async fn get_report(State(state): State<Arc<AppState>>) -> Result<Response, ApiError> {
    let text = state.report_json()?;
    Ok(([(header::CONTENT_TYPE, "application/json")], text).into_response())
}

async fn api_not_found(UrlPath(rest): UrlPath<String>) -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("no endpoint /api/{rest}"))
}

/// Binds `addr` and serves until Ctrl-C.
pub fn serve(state: AppState, addr: &str, static_dir: Option<PathBuf>) -> Result<(), CommandError> {
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CommandError::Serve(e.to_string()))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| CommandError::Serve(format!("{addr}: {e}")))?;
        log::info!("listening on http://{addr}");
        let app = router(Arc::new(state), static_dir.as_deref());
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| CommandError::Serve(e.to_string()))
    })
}
