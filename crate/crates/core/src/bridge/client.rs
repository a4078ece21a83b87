use std::sync::atomic::Ordering;
use std::sync::Arc;

use futures_util::{SinkExt, StreamExt};
use tokio::net::TcpStream;
use tokio::sync::watch;
use tokio::time::{sleep, timeout};
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{connect_async, MaybeTlsStream, WebSocketStream};
use tracing::{debug, info};

use super::queue::DropOldest;
use super::{decode_control, BridgeConfig, BridgeEndpoint, BridgeStatus, Inputs};

/// Where the client should be connected. A new `generation` forces a
/// reconnect even when the endpoint is unchanged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndpointRequest {
    pub endpoint: BridgeEndpoint,
    pub generation: u64,
}

enum SessionEnd {
    Closed,
    Retarget,
    Shutdown,
}

/// Keeps the autonomy link up until the endpoint sender is dropped.
///
/// Telemetry frames are taken from `outbox`; decoded control frames go to
/// `inputs`. The target comes from `endpoint_rx`, not `cfg.endpoint`.
pub async fn bridge_client_run(
    cfg: BridgeConfig,
    mut endpoint_rx: watch::Receiver<EndpointRequest>,
    inputs: Arc<Inputs>,
    outbox: Arc<DropOldest<String>>,
    status: Arc<BridgeStatus>,
) {
    let mut attempt = 0;
    loop {
        let endpoint = endpoint_rx.borrow_and_update().endpoint.clone();
        let url = endpoint.url();
        match timeout(cfg.connect_timeout, connect_async(url.as_str())).await {
            Ok(Ok((ws, _))) => {
                info!(%endpoint, "bridge connected");
                attempt = 0;
                outbox.clear();
                status.set_connected(true);
                let end = session(ws, &mut endpoint_rx, &inputs, &outbox, &status).await;
                status.set_connected(false);
                info!(%endpoint, "bridge disconnected");
                match end {
                    SessionEnd::Retarget => continue,
                    SessionEnd::Shutdown => return,
                    SessionEnd::Closed => {}
                }
            }
            Ok(Err(e)) => debug!(%endpoint, error = %e, "bridge connect failed"),
            Err(_) => debug!(%endpoint, "bridge connect timed out"),
        }

        let wait = cfg.backoff(attempt);
        attempt += 1;
        tokio::select! {
            _ = sleep(wait) => {}
            changed = endpoint_rx.changed() => {
                if changed.is_err() {
                    return;
                }
                attempt = 0;
            }
        }
        if endpoint_rx.has_changed().is_err() {
            return;
        }
    }
}

async fn session(
    ws: WebSocketStream<MaybeTlsStream<TcpStream>>,
    endpoint_rx: &mut watch::Receiver<EndpointRequest>,
    inputs: &Inputs,
    outbox: &DropOldest<String>,
    status: &BridgeStatus,
) -> SessionEnd {
    let (mut sink, mut stream) = ws.split();
    loop {
        tokio::select! {
            frame = outbox.pop() => {
                if sink.send(Message::text(frame)).await.is_err() {
                    return SessionEnd::Closed;
                }
                status.frames_sent.fetch_add(1, Ordering::Relaxed);
            }
            msg = stream.next() => match msg {
                Some(Ok(Message::Text(text))) => match decode_control(text.as_str()) {
                    Ok(control) => {
                        inputs.submit_control(control);
                        status.frames_received.fetch_add(1, Ordering::Relaxed);
                    }
                    Err(e) => {
                        status.protocol_errors.fetch_add(1, Ordering::Relaxed);
                        debug!(error = %e, "control frame dropped");
                    }
                },
                Some(Ok(Message::Binary(_))) => {
                    status.protocol_errors.fetch_add(1, Ordering::Relaxed);
                    debug!("binary frame dropped");
                }
                Some(Ok(Message::Close(_))) | Some(Err(_)) | None => return SessionEnd::Closed,
                Some(Ok(_)) => {}
            },
            changed = endpoint_rx.changed() => {
                let _ = sink.close().await;
                return if changed.is_ok() { SessionEnd::Retarget } else { SessionEnd::Shutdown };
            }
        }
    }
}
