//! Network side of the simulator.
//!
//! The autonomy link is a WebSocket *client*: the user's autonomy stack
//! hosts the server and the simulator dials out to it. The teleoperation
//! UI is the opposite, since a browser must initiate, so the simulator
//! serves HTTP and WebSocket for it. Neither transport ever blocks the
//! physics loop; all exchange goes through [`queue`].

mod client;
pub mod codec;
pub mod queue;
mod ui;

use std::fmt;
use std::net::Ipv4Addr;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use client::{bridge_client_run, EndpointRequest};
pub use codec::{
    decode_control, decode_telemetry, decode_ui_frame, encode_control, encode_telemetry,
    encode_telemetry_message, ControlMessage, ProtocolError, TelemetryMessage, UiFrame,
};
pub use ui::{map_json, ui_server_run, UiServer, UiShared};

use crate::dynamics::ActuatorCommand;
use crate::sim::SimCommand;
use queue::{DropOldest, LatestSlot};

pub const DEFAULT_HOST: Ipv4Addr = Ipv4Addr::LOCALHOST;
pub const DEFAULT_PORT: u16 = 4567;
pub const DEFAULT_UI_PORT: u16 = 8080;

/// Address of the autonomy server.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BridgeEndpoint {
    pub host: Ipv4Addr,
    pub port: u16,
}

impl Default for BridgeEndpoint {
    fn default() -> Self {
        Self {
            host: DEFAULT_HOST,
            port: DEFAULT_PORT,
        }
    }
}

impl BridgeEndpoint {
    pub fn url(&self) -> String {
        format!("ws://{}:{}", self.host, self.port)
    }
}

impl fmt::Display for BridgeEndpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.host, self.port)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("expected IPv4 address and port as HOST:PORT, got \"{0}\"")]
pub struct EndpointParseError(pub String);

impl FromStr for BridgeEndpoint {
    type Err = EndpointParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || EndpointParseError(s.to_string());
        let (host, port) = s.rsplit_once(':').ok_or_else(err)?;
        Ok(Self {
            host: host.parse().map_err(|_| err())?,
            port: port.parse().map_err(|_| err())?,
        })
    }
}

/// Bridge client settings.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgeConfig {
    pub endpoint: BridgeEndpoint,
    /// Waits between reconnection attempts; the last entry repeats.
    pub reconnect_backoff: Vec<Duration>,
    pub connect_timeout: Duration,
}

impl Default for BridgeConfig {
    fn default() -> Self {
        Self {
            endpoint: BridgeEndpoint::default(),
            reconnect_backoff: [1, 2, 4, 8].map(Duration::from_secs).to_vec(),
            connect_timeout: Duration::from_secs(2),
        }
    }
}

impl BridgeConfig {
    pub fn backoff(&self, attempt: usize) -> Duration {
        self.reconnect_backoff
            .get(attempt)
            .or(self.reconnect_backoff.last())
            .copied()
            .unwrap_or(Duration::from_secs(1))
    }
}

/// Everything network tasks deliver to the physics loop.
#[derive(Debug)]
pub struct Inputs {
    /// Latest teleoperation command from the UI.
    pub teleop: LatestSlot<ActuatorCommand>,
    /// Latest control frame from the autonomy stack.
    pub control: LatestSlot<ControlMessage>,
    /// Discrete UI commands, applied in order at the start of the next tick.
    pub commands: DropOldest<SimCommand>,
    /// Malformed UI frames dropped.
    pub ui_errors: AtomicU64,
}

impl Default for Inputs {
    fn default() -> Self {
        Self {
            teleop: LatestSlot::default(),
            control: LatestSlot::default(),
            commands: DropOldest::new(256),
            ui_errors: AtomicU64::new(0),
        }
    }
}

impl Inputs {
    pub fn submit_control(&self, msg: ControlMessage) {
        self.control.put_merged(msg, ControlMessage::merge);
    }

    /// Routes a decoded UI frame.
    pub fn submit_ui(&self, frame: UiFrame) {
        match frame {
            UiFrame::Teleop(cmd) => self.teleop.put(cmd),
            UiFrame::Command(cmd) => self.commands.push(cmd),
        }
    }

    pub fn ui_errors(&self) -> u64 {
        self.ui_errors.load(Ordering::Relaxed)
    }
}

/// Live counters of the autonomy link.
#[derive(Debug, Default)]
pub struct BridgeStatus {
    connected: AtomicBool,
    pub connections: AtomicU64,
    pub frames_sent: AtomicU64,
    pub frames_received: AtomicU64,
    pub protocol_errors: AtomicU64,
}

impl BridgeStatus {
    pub fn is_connected(&self) -> bool {
        self.connected.load(Ordering::Acquire)
    }

    pub(crate) fn set_connected(&self, up: bool) {
        self.connected.store(up, Ordering::Release);
        if up {
            self.connections.fetch_add(1, Ordering::Relaxed);
        }
    }

    pub fn protocol_errors(&self) -> u64 {
        self.protocol_errors.load(Ordering::Relaxed)
    }
}
