//! WebSocket front end: one [`Session`] per connection at `/session`.

use std::sync::Arc;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use tokio::net::TcpListener;

use crate::asr::AsrClient;
use crate::config::ServiceConfig;
use crate::error::ServiceError;
use crate::modelset::ModelSet;
use crate::protocol::ServerFrame;
use crate::session::Session;

#[derive(Clone)]
pub struct AppState {
    pub models: Arc<ModelSet>,
    pub config: Arc<ServiceConfig>,
    pub asr: Option<Arc<dyn AsrClient>>,
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/session", get(upgrade))
        .route("/health", get(|| async { "ok" }))
        .with_state(state)
}

pub async fn serve(listener: TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}

async fn upgrade(ws: WebSocketUpgrade, State(state): State<AppState>) -> Response {
    ws.on_upgrade(move |socket| run(socket, state))
}

async fn run(mut socket: WebSocket, state: AppState) {
    let mut session = Session::new(state.models, state.config, state.asr);
    while let Some(Ok(msg)) = socket.recv().await {
        let frames = match msg {
            Message::Text(text) => session.handle_frame(text.as_str()).await,
            Message::Binary(_) => vec![ServerFrame::error(&ServiceError::MalformedFrame(
                "binary frames are not part of the protocol".into(),
            ))],
            Message::Close(_) => break,
            Message::Ping(_) | Message::Pong(_) => continue,
        };
        for frame in frames {
            if socket.send(Message::Text(frame.to_json().into())).await.is_err() {
                return;
            }
        }
    }
}
