use std::io;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::Ordering;
use std::sync::Arc;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::http::header;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use futures_util::{SinkExt, StreamExt};
use serde_json::json;
use tokio::net::TcpListener;
use tokio::sync::watch;
use tokio::task::JoinHandle;
use tower_http::services::ServeDir;
use tracing::debug;

use super::{decode_ui_frame, Inputs};
use crate::world::TileMap;

const PLACEHOLDER_INDEX: &str = "<!doctype html>\n<title>scaledrive</title>\n\
<p>No UI assets configured. Telemetry is available on <code>/ws</code>, \
the map on <code>/api/map</code>.</p>\n";

/// State shared by every UI connection.
#[derive(Debug, Clone)]
pub struct UiShared {
    pub inputs: Arc<Inputs>,
    /// Latest encoded telemetry frame, `None` before the first one.
    pub telemetry: watch::Receiver<Option<Arc<str>>>,
    pub map_json: Arc<str>,
    /// Directory with the browser client; a placeholder page otherwise.
    pub assets: Option<PathBuf>,
}

impl UiShared {
    pub fn new(
        inputs: Arc<Inputs>,
        telemetry: watch::Receiver<Option<Arc<str>>>,
        map: &TileMap,
        assets: Option<PathBuf>,
    ) -> Self {
        Self {
            inputs,
            telemetry,
            map_json: map_json(map).into(),
            assets,
        }
    }
}

/// Map layout for the renderer, including each tile's open sides as a
/// bitmask (E=1, N=2, W=4, S=8).
pub fn map_json(map: &TileMap) -> String {
    let tiles: Vec<_> = map
        .tiles
        .values()
        .map(|t| {
            json!({
                "kind": t.kind.name(),
                "grid": [t.grid.0, t.grid.1],
                "rotation": t.rotation.degrees(),
                "openings": t.openings().bits(),
            })
        })
        .collect();
    let boxes: Vec<_> = map
        .boxes
        .iter()
        .map(|b| json!({"center": [b.center.x, b.center.y], "size": b.size, "yaw": b.yaw, "mass": b.mass}))
        .collect();
    json!({
        "tile_size": map.tile_size,
        "tiles": tiles,
        "boxes": boxes,
        "spawn": {"position": [map.spawn.position.x, map.spawn.position.y], "yaw": map.spawn.yaw},
    })
    .to_string()
}

/// A running UI server.
#[derive(Debug)]
pub struct UiServer {
    pub local_addr: SocketAddr,
    task: JoinHandle<()>,
}

impl UiServer {
    pub fn shutdown(self) {
        self.task.abort();
    }
}

impl Drop for UiServer {
    fn drop(&mut self) {
        self.task.abort();
    }
}

/// Binds `addr` and serves the UI in the background. Fails if the port is
/// taken.
pub async fn ui_server_run(addr: SocketAddr, shared: UiShared) -> io::Result<UiServer> {
    let listener = TcpListener::bind(addr).await?;
    let local_addr = listener.local_addr()?;
    let mut app = Router::new()
        .route("/ws", get(ws_handler))
        .route("/api/map", get(map_handler));
    app = match &shared.assets {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.route("/", get(|| async { Html(PLACEHOLDER_INDEX) })),
    };
    let app = app.with_state(shared);
    let task = tokio::spawn(async move {
        if let Err(e) = axum::serve(listener, app).await {
            tracing::error!(error = %e, "ui server stopped");
        }
    });
    Ok(UiServer { local_addr, task })
}

async fn map_handler(State(shared): State<UiShared>) -> Response {
    (
        [(header::CONTENT_TYPE, "application/json")],
        shared.map_json.to_string(),
    )
        .into_response()
}

async fn ws_handler(ws: WebSocketUpgrade, State(shared): State<UiShared>) -> Response {
    ws.on_upgrade(move |socket| ui_session(socket, shared))
}

async fn ui_session(socket: WebSocket, shared: UiShared) {
    let (mut sink, mut stream) = socket.split();
    let mut telemetry = shared.telemetry.clone();
    let sender = async move {
        loop {
            let frame = telemetry.borrow_and_update().clone();
            if let Some(frame) = frame {
                if sink.send(Message::Text((&*frame).into())).await.is_err() {
                    return;
                }
            }
            if telemetry.changed().await.is_err() {
                return;
            }
        }
    };
    let inputs = shared.inputs.clone();
    let receiver = async move {
        while let Some(Ok(msg)) = stream.next().await {
            match msg {
                Message::Text(text) => match decode_ui_frame(text.as_str()) {
                    Ok(frame) => inputs.submit_ui(frame),
                    Err(e) => {
                        inputs.ui_errors.fetch_add(1, Ordering::Relaxed);
                        debug!(error = %e, "ui frame dropped");
                    }
                },
                Message::Binary(_) => {
                    inputs.ui_errors.fetch_add(1, Ordering::Relaxed);
                }
                Message::Close(_) => return,
                _ => {}
            }
        }
    };
    tokio::select! {
        _ = sender => {}
        _ = receiver => {}
    }
}
