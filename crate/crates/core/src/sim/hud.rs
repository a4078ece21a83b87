//! Operator-facing text rendering of a snapshot.

use std::fmt;

use super::SimSnapshot;

/// One HUD panel. Field order follows the panel layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HudRecord {
    pub sim_time: String,
    /// Labelled as physics ticks per second; there is no render loop.
    pub frame_rate: String,
    pub driving_mode: String,
    pub gear: String,
    pub speed: String,
    pub throttle: String,
    pub steering: String,
    pub encoder_ticks: String,
    pub position: String,
    pub orientation: String,
    pub angular_velocity: String,
    pub linear_acceleration: String,
    pub lidar: String,
    pub bridge: String,
}

impl HudRecord {
    pub fn rows(&self) -> [(&'static str, &str); 14] {
        [
            ("Simulation Time", &self.sim_time),
            ("Tick Rate (Hz)", &self.frame_rate),
            ("Driving Mode", &self.driving_mode),
            ("Gear", &self.gear),
            ("Speed (m/s)", &self.speed),
            ("Throttle (%)", &self.throttle),
            ("Steering (rad)", &self.steering),
            ("Encoder Ticks", &self.encoder_ticks),
            ("Position (m)", &self.position),
            ("Orientation (rad)", &self.orientation),
            ("Angular Velocity (rad/s)", &self.angular_velocity),
            ("Linear Acceleration (m/s^2)", &self.linear_acceleration),
            ("LIDAR", &self.lidar),
            ("Bridge", &self.bridge),
        ]
    }
}

impl fmt::Display for HudRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (label, value) in self.rows() {
            writeln!(f, "{label:<28} {value}")?;
        }
        Ok(())
    }
}

/// `HH:MM:SS`, whole seconds rounded down. Hours do not wrap.
pub fn format_sim_time(seconds: f64) -> String {
    let total = seconds.max(0.0).floor() as u64;
    format!(
        "{:02}:{:02}:{:02}",
        total / 3600,
        total / 60 % 60,
        total % 60
    )
}

fn vec3(v: [f64; 3]) -> String {
    format!("[{:.3}, {:.3}, {:.3}]", v[0], v[1], v[2])
}

pub fn format_hud(s: &SimSnapshot) -> HudRecord {
    let lidar = &s.sensors.lidar;
    let hits = lidar.ranges.iter().filter(|r| r.is_finite()).count();
    let nearest = lidar.ranges.iter().copied().fold(f64::INFINITY, f64::min);
    HudRecord {
        sim_time: format_sim_time(s.clock.sim_time),
        frame_rate: format!("{:.1}", s.clock.fps_avg),
        driving_mode: s.mode.label().to_string(),
        gear: s.state.gear.letter().to_string(),
        speed: format!("{:.3}", s.state.speed.abs()),
        throttle: format!("{} %", (s.sensors.throttle_fb * 100.0).round() as i64),
        steering: format!("{:.3}", s.state.steer),
        encoder_ticks: format!(
            "[{}, {}]",
            s.sensors.encoder_ticks[0], s.sensors.encoder_ticks[1]
        ),
        position: vec3(s.sensors.ips_position),
        orientation: vec3(s.sensors.imu.euler),
        angular_velocity: vec3(s.sensors.imu.angular_velocity),
        linear_acceleration: vec3(s.sensors.imu.linear_acceleration),
        lidar: if hits == 0 {
            format!("0/{} returns", lidar.ranges.len())
        } else {
            format!(
                "{hits}/{} returns, nearest {nearest:.3} m",
                lidar.ranges.len()
            )
        },
        bridge: format!(
            "{} {}",
            s.bridge,
            if s.bridge_connected {
                "Connected"
            } else {
                "Disconnected"
            }
        ),
    }
}
