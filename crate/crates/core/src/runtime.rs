//! Drives a [`Sim`] on a tokio runtime together with the autonomy link and
//! the UI server.
//!
//! Pacing, telemetry emission and recording happen here. None of them feed
//! wall-clock time back into the physics state, so a realtime run and an
//! as-fast-as-possible run of the same script produce the same states.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::Deserialize;
use serde_json::value::RawValue;
use tokio::sync::watch;
use tracing::info;

use crate::bridge::queue::DropOldest;
use crate::bridge::{
    bridge_client_run, decode_control, decode_ui_frame, encode_telemetry_message, ui_server_run,
    BridgeConfig, BridgeStatus, ControlMessage, ProtocolError, TelemetryMessage, UiFrame, UiShared,
};
use crate::sim::{Sim, SimSnapshot};

/// Outbox depth towards the autonomy stack, in frames.
pub const OUTBOX_CAPACITY: usize = 16;

#[derive(Debug, thiserror::Error)]
pub enum RuntimeError {
    #[error("cannot start UI server on {addr}: {source}")]
    UiBind {
        addr: SocketAddr,
        #[source]
        source: io::Error,
    },
    #[error("cannot write record {path}: {source}")]
    Record {
        path: String,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum ScriptError {
    #[error("cannot read script {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("script line {line}: {reason}")]
    Line { line: usize, reason: String },
}

/// One scripted input, delivered before the step that leaves tick `tick`.
#[derive(Debug, Clone, PartialEq)]
pub enum ScriptInput {
    Ui(UiFrame),
    Bridge(ControlMessage),
}

/// Recorded input stream for replay. Text form is one JSON object per line:
/// `{"tick": 12, "ui": {...}}` or `{"tick": 12, "bridge": {...}}`, where the
/// inner object is a UI or control frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CommandScript {
    entries: Vec<(u64, ScriptInput)>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScriptLine<'a> {
    tick: u64,
    #[serde(borrow)]
    ui: Option<&'a RawValue>,
    #[serde(borrow)]
    bridge: Option<&'a RawValue>,
}

impl CommandScript {
    pub fn new(mut entries: Vec<(u64, ScriptInput)>) -> Self {
        entries.sort_by_key(|e| e.0);
        Self { entries }
    }

    pub fn parse(text: &str) -> Result<Self, ScriptError> {
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let err = |reason: String| ScriptError::Line { line, reason };
            let l: ScriptLine = serde_json::from_str(raw).map_err(|e| err(e.to_string()))?;
            let input = match (l.ui, l.bridge) {
                (Some(ui), None) => ScriptInput::Ui(
                    decode_ui_frame(ui.get()).map_err(|e: ProtocolError| err(e.to_string()))?,
                ),
                (None, Some(b)) => {
                    ScriptInput::Bridge(decode_control(b.get()).map_err(|e| err(e.to_string()))?)
                }
                _ => return Err(err("expected exactly one of \"ui\" or \"bridge\"".into())),
            };
            entries.push((l.tick, input));
        }
        Ok(Self::new(entries))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScriptError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ScriptError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn inject(&self, next: &mut usize, tick: u64, sim: &Sim) {
        while let Some((t, input)) = self.entries.get(*next) {
            if *t > tick {
                break;
            }
            match input.clone() {
                ScriptInput::Ui(frame) => sim.inputs().submit_ui(frame),
                ScriptInput::Bridge(msg) => sim.inputs().submit_control(msg),
            }
            *next += 1;
        }
    }
}

pub type Observer = Box<dyn FnMut(&SimSnapshot) + Send>;

#[derive(Default)]
pub struct RunOptions {
    /// Pace ticks against the wall clock instead of running flat out.
    pub realtime: bool,
    /// Stop after this much simulated time, s.
    pub duration: Option<f64>,
    /// Snapshot log, one telemetry line per telemetry tick.
    pub record: Option<PathBuf>,
    pub script: Option<CommandScript>,
    pub bridge: Option<BridgeConfig>,
    /// UI listen address and optional asset directory.
    pub ui: Option<(SocketAddr, Option<PathBuf>)>,
    /// Called with every published snapshot.
    pub observer: Option<Observer>,
    pub stop: Arc<AtomicBool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub ticks: u64,
    pub sim_time: f64,
    pub wall_time: Duration,
    pub telemetry_frames: u64,
    pub bridge_connections: u64,
    pub protocol_errors: u64,
    pub ui_errors: u64,
    pub ui_addr: Option<SocketAddr>,
}

impl RunSummary {
    pub fn ticks_per_second(&self) -> f64 {
        self.ticks as f64 / self.wall_time.as_secs_f64().max(1e-9)
    }
}

/// Telemetry line for the snapshot log, with the wall-clock dependent
/// fields zeroed so that logs of identical runs are byte-identical.
pub fn record_line(snapshot: &SimSnapshot) -> String {
    let mut msg = TelemetryMessage::from_snapshot(snapshot);
    msg.frame_rate = 0.0;
    msg.bridge.connected = false;
    encode_telemetry_message(&msg)
}

/// Ticks-per-second meter over a sliding one-second window.
#[derive(Debug)]
struct RateMeter {
    window_start: Instant,
    ticks: u64,
    rate: f64,
}

impl RateMeter {
    fn new() -> Self {
        Self {
            window_start: Instant::now(),
            ticks: 0,
            rate: 0.0,
        }
    }

    fn tick(&mut self) -> f64 {
        self.ticks += 1;
        let elapsed = self.window_start.elapsed();
        if elapsed >= Duration::from_secs(1) {
            self.rate = self.ticks as f64 / elapsed.as_secs_f64();
            self.ticks = 0;
            self.window_start = Instant::now();
        }
        self.rate
    }
}

/// Runs `sim` until `opts.duration` elapses in sim time or `opts.stop` is set.
pub async fn run(mut sim: Sim, mut opts: RunOptions) -> Result<(Sim, RunSummary), RuntimeError> {
    let inputs = sim.inputs().clone();
    let (telemetry_tx, telemetry_rx) = watch::channel(None::<Arc<str>>);

    let ui = match opts.ui.take() {
        Some((addr, assets)) => {
            let shared = UiShared::new(inputs.clone(), telemetry_rx, sim.map(), assets);
            let server = ui_server_run(addr, shared)
                .await
                .map_err(|source| RuntimeError::UiBind { addr, source })?;
            info!(addr = %server.local_addr, "ui server listening");
            Some(server)
        }
        None => None,
    };

    let status = Arc::new(BridgeStatus::default());
    let outbox = Arc::new(DropOldest::<String>::new(OUTBOX_CAPACITY));
    let (endpoint_tx, endpoint_rx) = watch::channel(sim.endpoint_target().clone());
    let client = opts.bridge.take().map(|cfg| {
        tokio::spawn(bridge_client_run(
            cfg,
            endpoint_rx,
            inputs.clone(),
            outbox.clone(),
            status.clone(),
        ))
    });

    let mut record = match &opts.record {
        Some(path) => Some(BufWriter::new(File::create(path).map_err(|source| {
            RuntimeError::Record {
                path: path.display().to_string(),
                source,
            }
        })?)),
        None => None,
    };
    let record_err = |source| RuntimeError::Record {
        path: opts
            .record
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_default(),
        source,
    };

    let dt = sim.snapshot().clock.dt;
    let interval = sim.telemetry_interval();
    let max_ticks = opts.duration.map(|d| (d / dt).round() as u64);
    let script = opts.script.take().unwrap_or_default();
    let mut next_entry = 0;
    let mut meter = RateMeter::new();
    let mut telemetry_frames = 0;
    let mut ticks = 0u64;
    let started = Instant::now();
    let pace_origin = tokio::time::Instant::now();

    let mut emit = |snap: &SimSnapshot, record: &mut Option<BufWriter<File>>| -> io::Result<()> {
        if !snap.clock.tick.is_multiple_of(interval) {
            return Ok(());
        }
        let frame = encode_telemetry_message(&TelemetryMessage::from_snapshot(snap));
        if client.is_some() && status.is_connected() {
            outbox.push(frame.clone());
        }
        telemetry_tx.send_replace(Some(frame.into()));
        telemetry_frames += 1;
        if let Some(w) = record.as_mut() {
            writeln!(w, "{}", record_line(snap))?;
        }
        Ok(())
    };

    let first = sim.snapshot();
    if let Some(obs) = opts.observer.as_mut() {
        obs(&first);
    }
    emit(&first, &mut record).map_err(record_err)?;

    loop {
        if opts.stop.load(Ordering::Relaxed) || max_ticks.is_some_and(|m| ticks >= m) {
            break;
        }
        script.inject(&mut next_entry, sim.snapshot().clock.tick, &sim);
        sim.set_bridge_connected(status.is_connected());
        let fps = meter.tick();
        sim.set_fps(fps);
        let snap = sim.step();
        ticks += 1;

        let target = sim.endpoint_target();
        if *endpoint_tx.borrow() != *target {
            endpoint_tx.send_replace(target.clone());
        }
        if let Some(obs) = opts.observer.as_mut() {
            obs(&snap);
        }
        emit(&snap, &mut record).map_err(record_err)?;

        if opts.realtime {
            let deadline = pace_origin + Duration::from_secs_f64(ticks as f64 * dt);
            tokio::time::sleep_until(deadline).await;
        } else if ticks.is_multiple_of(256) {
            tokio::task::yield_now().await;
        }
    }

    if let Some(mut w) = record {
        w.flush().map_err(record_err)?;
    }
    drop(endpoint_tx);
    if let Some(c) = client {
        c.abort();
    }
    let ui_addr = ui.as_ref().map(|u| u.local_addr);
    drop(ui);

    let snap = sim.snapshot();
    let summary = RunSummary {
        ticks,
        sim_time: snap.clock.sim_time,
        wall_time: started.elapsed(),
        telemetry_frames,
        bridge_connections: status.connections.load(Ordering::Relaxed),
        protocol_errors: status.protocol_errors(),
        ui_errors: inputs.ui_errors(),
        ui_addr,
    };
    Ok((sim, summary))
}
