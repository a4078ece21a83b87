//! Stand-in autonomy server for loopback tests.

#![allow(dead_code)]

use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use futures_util::{SinkExt, StreamExt};
use tokio::net::TcpListener;
use tokio::task::{JoinHandle, JoinSet};
use tokio_tungstenite::tungstenite::Message;

pub type Reply = Arc<dyn Fn(&str) -> Option<String> + Send + Sync>;

/// Accepts simulator connections and answers every text frame with
/// `reply(frame)`. Dropping or killing it closes all connections.
pub struct EchoServer {
    pub addr: SocketAddr,
    pub frames: Arc<AtomicU64>,
    task: JoinHandle<()>,
}

impl EchoServer {
    pub async fn start(addr: SocketAddr, reply: Reply) -> std::io::Result<Self> {
        let listener = TcpListener::bind(addr).await?;
        let addr = listener.local_addr()?;
        let frames = Arc::new(AtomicU64::new(0));
        let counter = frames.clone();
        let task = tokio::spawn(async move {
            let mut conns = JoinSet::new();
            while let Ok((tcp, _)) = listener.accept().await {
                let reply = reply.clone();
                let counter = counter.clone();
                conns.spawn(async move {
                    let Ok(ws) = tokio_tungstenite::accept_async(tcp).await else {
                        return;
                    };
                    let (mut tx, mut rx) = ws.split();
                    while let Some(Ok(msg)) = rx.next().await {
                        if let Message::Text(text) = msg {
                            counter.fetch_add(1, Ordering::Relaxed);
                            if let Some(answer) = reply(text.as_str()) {
                                if tx.send(Message::text(answer)).await.is_err() {
                                    return;
                                }
                            }
                        }
                    }
                });
            }
        });
        Ok(Self { addr, frames, task })
    }

    /// Replies to every frame with a zero command.
    pub async fn idle(addr: SocketAddr) -> std::io::Result<Self> {
        Self::start(
            addr,
            Arc::new(|_| Some(r#"{"type":"control","throttle":0,"steering":0}"#.into())),
        )
        .await
    }

    pub fn frames(&self) -> u64 {
        self.frames.load(Ordering::Relaxed)
    }

    pub fn kill(self) {}
}

impl Drop for EchoServer {
    fn drop(&mut self) {
        self.task.abort();
    }
}

pub fn loopback() -> SocketAddr {
    "127.0.0.1:0".parse().unwrap()
}
