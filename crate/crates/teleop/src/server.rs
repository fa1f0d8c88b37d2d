use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::{SinkExt, StreamExt};
use navbench_core::harness::{summaries, ResultRow, Summary};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::protocol::{ActionMessage, ServerMessage};
use crate::session::{SessionManager, TeleopError};

#[derive(Debug, Clone, Deserialize)]
pub struct CreateSession {
    /// Falls back to the server's default suite.
    #[serde(default)]
    pub suite: Option<String>,
    #[serde(default = "default_operator")]
    pub operator: String,
}

fn default_operator() -> String {
    "human".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentSummary {
    pub agent: String,
    #[serde(flatten)]
    pub summary: Summary,
}

/// Body of `GET /results`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultsDoc {
    pub rows: Vec<ResultRow>,
    pub summaries: Vec<AgentSummary>,
}

fn error(status: StatusCode, message: impl std::fmt::Display) -> Response {
    (status, Json(json!({ "error": message.to_string() }))).into_response()
}

pub fn router(manager: SessionManager) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(session_info))
        .route("/sessions/{id}/stream", get(stream))
        .route("/results", get(results))
        .route("/maps/{id}", get(map))
        .with_state(manager)
}

async fn create_session(State(m): State<SessionManager>, Json(req): Json<CreateSession>) -> Response {
    let Some(suite) = req.suite.or_else(|| m.config().default_suite.clone()) else {
        return error(StatusCode::BAD_REQUEST, "no suite given and the server has no default");
    };
    // Suite loading reads files and checks every start-goal pair.
    let result = tokio::task::spawn_blocking(move || m.create(&suite, &req.operator)).await;
    match result {
        Ok(Ok(id)) => (StatusCode::CREATED, Json(json!({ "id": id }))).into_response(),
        Ok(Err(e @ TeleopError::NotFound(_))) => error(StatusCode::NOT_FOUND, e),
        Ok(Err(e)) => error(StatusCode::UNPROCESSABLE_ENTITY, e),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e),
    }
}

async fn session_info(State(m): State<SessionManager>, Path(id): Path<String>) -> Response {
    match m.info(&id) {
        Some(info) => Json(info).into_response(),
        None => error(StatusCode::NOT_FOUND, format!("no session {id}")),
    }
}

async fn results(State(m): State<SessionManager>) -> Response {
    let rows = m.results();
    let summaries = summaries(&rows)
        .unwrap_or_default()
        .into_iter()
        .map(|(agent, summary)| AgentSummary { agent, summary })
        .collect();
    Json(ResultsDoc { rows, summaries }).into_response()
}

async fn map(State(m): State<SessionManager>, Path(id): Path<String>) -> Response {
    match m.map_text(&id) {
        Err(()) => error(StatusCode::FORBIDDEN, "maps are only served with the debug overlay"),
        Ok(None) => error(StatusCode::NOT_FOUND, format!("no map {id}")),
        Ok(Some(text)) => ([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], text).into_response(),
    }
}

async fn stream(State(m): State<SessionManager>, Path(id): Path<String>, ws: WebSocketUpgrade) -> Response {
    if m.info(&id).is_none() {
        return error(StatusCode::NOT_FOUND, format!("no session {id}"));
    }
    ws.on_upgrade(move |socket| play(socket, m, id))
}

/// One operator connection: send the current observation, then answer
/// each action line. Lines are handled strictly in order.
async fn play(socket: WebSocket, m: SessionManager, id: String) {
    let (mut tx, mut rx) = socket.split();
    let first = match m.attach(&id) {
        Ok(msg) => msg,
        Err(e) => ServerMessage::Error { message: e.to_string() },
    };
    if tx.send(Message::Text(first.to_line().into())).await.is_err() {
        return;
    }
    while let Some(Ok(frame)) = rx.next().await {
        let text = match frame {
            Message::Text(t) => t,
            Message::Close(_) => break,
            _ => continue,
        };
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let replies = match serde_json::from_str::<ActionMessage>(line) {
                Ok(action) => {
                    let wait = m.pacing_delay(&id);
                    if !wait.is_zero() {
                        tokio::time::sleep(wait).await;
                    }
                    m.submit(&id, action)
                }
                Err(e) => vec![ServerMessage::Error { message: format!("bad action message: {e}") }],
            };
            for r in replies {
                if tx.send(Message::Text(r.to_line().into())).await.is_err() {
                    return;
                }
            }
        }
    }
    log::debug!("stream for session {id} closed");
}

/// Serve until the listener fails.
pub async fn serve(listener: tokio::net::TcpListener, manager: SessionManager) -> std::io::Result<()> {
    log::info!("teleop service on {}", listener.local_addr()?);
    axum::serve(listener, router(manager)).await
}
