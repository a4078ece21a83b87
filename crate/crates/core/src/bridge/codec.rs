//! Wire format shared by the autonomy link, the UI link and the snapshot log.
//!
//! Every frame is one JSON text object with a `"type"` discriminator:
//! `"telemetry"` (simulator to clients), `"control"` (autonomy stack to
//! simulator), and on the UI link `"teleop"` and `"command"`. Floats are
//! written in shortest round-trip form, so decoding an encoded frame gives
//! back the identical values. LIDAR non-returns travel as the maximum range
//! with intensity 0.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use tracing::debug;

use super::BridgeEndpoint;
use crate::dynamics::{clamp_unit, ActuatorCommand, Gear};
use crate::sim::{DrivingMode, SimCommand, SimSnapshot};
use crate::sim::{Headlights, Indicators, LightState};

#[derive(Debug, thiserror::Error)]
pub enum ProtocolError {
    #[error("malformed frame: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unexpected frame type \"{0}\"")]
    WrongType(String),
    #[error("unknown command \"{0}\"")]
    UnknownCommand(String),
    #[error("bad arguments for command \"{name}\": {reason}")]
    BadArgs { name: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImuPayload {
    pub orientation_quaternion: [f64; 4],
    pub orientation_euler: [f64; 3],
    pub angular_velocity: [f64; 3],
    pub linear_acceleration: [f64; 3],
}

/// LIDAR arrays. In memory a non-return is `f64::INFINITY`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "LidarWire", into = "LidarWire")]
pub struct LidarPayload {
    pub scan_count: u64,
    pub range_min: f64,
    pub range_max: f64,
    pub ranges: Vec<f64>,
    pub intensities: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct LidarWire {
    scan_count: u64,
    range_min: f64,
    range_max: f64,
    ranges: Vec<f64>,
    intensities: Vec<f64>,
}

impl From<LidarPayload> for LidarWire {
    fn from(p: LidarPayload) -> Self {
        let ranges = p
            .ranges
            .iter()
            .zip(&p.intensities)
            .map(|(&r, &i)| {
                if i == 0.0 || !r.is_finite() {
                    p.range_max
                } else {
                    r
                }
            })
            .collect();
        Self {
            scan_count: p.scan_count,
            range_min: p.range_min,
            range_max: p.range_max,
            ranges,
            intensities: p.intensities,
        }
    }
}

impl From<LidarWire> for LidarPayload {
    fn from(w: LidarWire) -> Self {
        let ranges = w
            .ranges
            .iter()
            .zip(&w.intensities)
            .map(|(&r, &i)| if i == 0.0 { f64::INFINITY } else { r })
            .collect();
        Self {
            scan_count: w.scan_count,
            range_min: w.range_min,
            range_max: w.range_max,
            ranges,
            intensities: w.intensities,
        }
    }
}

/// Ground-truth pose for rendering; the IPS may be noisy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosePayload {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
    /// Physical front-wheel angle, rad, positive left.
    pub steer: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxPayload {
    pub center: [f64; 2],
    pub size: [f64; 3],
    pub yaw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BridgePayload {
    pub host: String,
    pub port: u16,
    pub connected: bool,
}

mod gear_letter {
    use super::Gear;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(g: &Gear, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(match g {
            Gear::Drive => "D",
            Gear::Reverse => "R",
        })
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Gear, D::Error> {
        match String::deserialize(d)?.as_str() {
            "D" => Ok(Gear::Drive),
            "R" => Ok(Gear::Reverse),
            other => Err(serde::de::Error::custom(format!(
                "gear must be D or R, got {other}"
            ))),
        }
    }
}

/// One telemetry frame: the full sensor suite plus vehicle status.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TelemetryMessage {
    pub tick: u64,
    pub sim_time: f64,
    /// Physics ticks per wall-clock second, averaged over the last second.
    pub frame_rate: f64,
    pub driving_mode: DrivingMode,
    #[serde(with = "gear_letter")]
    pub gear: Gear,
    /// Magnitude of the forward speed, m/s.
    pub speed: f64,
    /// Echo of the applied normalized throttle.
    pub throttle: f64,
    /// Echo of the applied normalized steering (positive right).
    pub steering: f64,
    pub encoder_ticks: [i64; 2],
    pub encoder_angles: [f64; 2],
    pub ips_position: [f64; 3],
    pub imu: ImuPayload,
    pub lidar: LidarPayload,
    pub lights: LightState,
    pub scene_light: bool,
    pub vehicle: PosePayload,
    pub boxes: Vec<BoxPayload>,
    pub bridge: BridgePayload,
}

impl TelemetryMessage {
    pub fn from_snapshot(s: &SimSnapshot) -> Self {
        let sensors = &s.sensors;
        Self {
            tick: s.clock.tick,
            sim_time: s.clock.sim_time,
            frame_rate: s.clock.fps_avg,
            driving_mode: s.mode,
            gear: s.state.gear,
            speed: s.state.speed.abs(),
            throttle: sensors.throttle_fb,
            steering: sensors.steering_fb,
            encoder_ticks: sensors.encoder_ticks,
            encoder_angles: sensors.encoder_angles,
            ips_position: sensors.ips_position,
            imu: ImuPayload {
                orientation_quaternion: sensors.imu.quaternion,
                orientation_euler: sensors.imu.euler,
                angular_velocity: sensors.imu.angular_velocity,
                linear_acceleration: sensors.imu.linear_acceleration,
            },
            lidar: LidarPayload {
                scan_count: s.lidar_scans,
                range_min: s.lidar_range.0,
                range_max: s.lidar_range.1,
                ranges: sensors.lidar.ranges.clone(),
                intensities: sensors.lidar.intensities.clone(),
            },
            lights: s.lights,
            scene_light: s.scene_light,
            vehicle: PosePayload {
                x: s.state.x,
                y: s.state.y,
                yaw: s.state.yaw,
                steer: s.state.steer,
            },
            boxes: s
                .boxes
                .iter()
                .map(|b| BoxPayload {
                    center: [b.center.x, b.center.y],
                    size: b.size,
                    yaw: b.yaw,
                })
                .collect(),
            bridge: BridgePayload {
                host: s.bridge.host.to_string(),
                port: s.bridge.port,
                connected: s.bridge_connected,
            },
        }
    }
}

#[derive(Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum OutFrame<'a> {
    Telemetry(&'a TelemetryMessage),
    Control(&'a ControlMessage),
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum InTelemetry {
    Telemetry(TelemetryMessage),
}

pub fn encode_telemetry_message(msg: &TelemetryMessage) -> String {
    serde_json::to_string(&OutFrame::Telemetry(msg)).expect("telemetry always serializes")
}

pub fn encode_telemetry(snapshot: &SimSnapshot) -> String {
    encode_telemetry_message(&TelemetryMessage::from_snapshot(snapshot))
}

pub fn decode_telemetry(text: &str) -> Result<TelemetryMessage, ProtocolError> {
    let InTelemetry::Telemetry(msg) = serde_json::from_str(text)?;
    Ok(msg)
}

/// Actuation from the autonomy stack. Absent fields keep their previous value.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlMessage {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub throttle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steering: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub headlights: Option<Headlights>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub indicators: Option<Indicators>,
}

impl ControlMessage {
    pub fn drive(throttle: f64, steering: f64) -> Self {
        Self {
            throttle: Some(clamp_unit(throttle)),
            steering: Some(clamp_unit(steering)),
            ..Self::default()
        }
    }

    /// Overlays the fields present in `newer` onto `self`.
    pub fn merge(self, newer: Self) -> Self {
        Self {
            throttle: newer.throttle.or(self.throttle),
            steering: newer.steering.or(self.steering),
            headlights: newer.headlights.or(self.headlights),
            indicators: newer.indicators.or(self.indicators),
        }
    }

    /// Command after applying this frame on top of `held`.
    pub fn apply_to(&self, held: ActuatorCommand) -> ActuatorCommand {
        ActuatorCommand::new(
            self.throttle.unwrap_or(held.throttle),
            self.steering.unwrap_or(held.steering),
        )
    }
}

pub fn encode_control(msg: &ControlMessage) -> String {
    serde_json::to_string(&OutFrame::Control(msg)).expect("control always serializes")
}

#[derive(Deserialize)]
struct ControlWire {
    #[serde(rename = "type")]
    kind: Option<String>,
    throttle: Option<f64>,
    steering: Option<f64>,
    headlights: Option<Headlights>,
    indicators: Option<Indicators>,
}

fn clamp_logged(field: &str, v: Option<f64>) -> Option<f64> {
    v.map(|raw| {
        let c = clamp_unit(raw);
        if c != raw {
            debug!(field, raw, clamped = c, "control value clamped");
        }
        c
    })
}

/// Decodes a control frame. The `"type"` key may be omitted.
pub fn decode_control(text: &str) -> Result<ControlMessage, ProtocolError> {
    let w: ControlWire = serde_json::from_str(text)?;
    if let Some(kind) = w.kind.filter(|k| k != "control") {
        return Err(ProtocolError::WrongType(kind));
    }
    Ok(ControlMessage {
        throttle: clamp_logged("throttle", w.throttle),
        steering: clamp_logged("steering", w.steering),
        headlights: w.headlights,
        indicators: w.indicators,
    })
}

/// A frame received from the browser UI.
#[derive(Debug, Clone, PartialEq)]
pub enum UiFrame {
    Teleop(ActuatorCommand),
    Command(SimCommand),
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum UiWire {
    Teleop {
        #[serde(default)]
        throttle: f64,
        #[serde(default)]
        steering: f64,
    },
    Command {
        name: String,
        #[serde(default)]
        args: Value,
    },
}

pub fn decode_ui_frame(text: &str) -> Result<UiFrame, ProtocolError> {
    match serde_json::from_str(text)? {
        UiWire::Teleop { throttle, steering } => {
            Ok(UiFrame::Teleop(ActuatorCommand::new(throttle, steering)))
        }
        UiWire::Command { name, args } => parse_command(&name, &args).map(UiFrame::Command),
    }
}

fn parse_command(name: &str, args: &Value) -> Result<SimCommand, ProtocolError> {
    let bad = |reason: &str| ProtocolError::BadArgs {
        name: name.to_string(),
        reason: reason.to_string(),
    };
    Ok(match name {
        "reset" => SimCommand::Reset,
        "toggle_mode" => SimCommand::ToggleMode,
        "headlights" => {
            let level = match args.get("level") {
                None => Headlights::Low,
                Some(v) => {
                    let n = v.as_u64().ok_or_else(|| bad("level must be 1 or 2"))?;
                    match n {
                        1 => Headlights::Low,
                        2 => Headlights::High,
                        _ => return Err(bad("level must be 1 or 2")),
                    }
                }
            };
            SimCommand::ToggleHeadlights(level)
        }
        "indicator_left" => SimCommand::ToggleIndicator(Indicators::Left),
        "indicator_right" => SimCommand::ToggleIndicator(Indicators::Right),
        "hazard" => SimCommand::ToggleIndicator(Indicators::Hazard),
        "scene_light" => SimCommand::ToggleSceneLight,
        "set_bridge" => {
            let host = args
                .get("host")
                .and_then(Value::as_str)
                .ok_or_else(|| bad("missing host"))?;
            let port = args
                .get("port")
                .and_then(Value::as_u64)
                .and_then(|p| u16::try_from(p).ok())
                .ok_or_else(|| bad("port must be an integer in 0..=65535"))?;
            SimCommand::SetBridge(BridgeEndpoint {
                host: host
                    .parse()
                    .map_err(|_| bad("host must be an IPv4 address"))?,
                port,
            })
        }
        other => return Err(ProtocolError::UnknownCommand(other.to_string())),
    })
}
