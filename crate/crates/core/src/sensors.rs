//! Actuator feedback, wheel encoders, IPS, IMU and the 2D LIDAR.
//!
//! The IMU body frame is X forward, Y left, Z up. LIDAR ray 0 points along
//! the vehicle's forward axis and indices increase counter-clockwise.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dynamics::{wrap_angle, ActuatorCommand, VehicleState};
use crate::geometry::Vec2;
use crate::params::{SensorConfig, GRAVITY};
use crate::world::{raycast, ObstructionBox};

/// Everything the sensor suite reports for one tick. LIDAR non-returns are
/// `f64::INFINITY` here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorFrame {
    pub throttle_fb: f64,
    pub steering_fb: f64,
    pub encoder_ticks: [i64; 2],
    pub encoder_angles: [f64; 2],
    pub ips_position: [f64; 3],
    pub imu: ImuReading,
    pub lidar: LidarScan,
    pub sim_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ImuReading {
    /// [x, y, z, w]
    pub quaternion: [f64; 4],
    /// [roll, pitch, yaw], rad
    pub euler: [f64; 3],
    pub angular_velocity: [f64; 3],
    pub linear_acceleration: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LidarScan {
    pub ranges: Vec<f64>,
    pub intensities: Vec<f64>,
}

impl LidarScan {
    /// A scan in which no ray returned.
    pub fn empty(rays: usize) -> Self {
        Self {
            ranges: vec![f64::INFINITY; rays],
            intensities: vec![0.0; rays],
        }
    }
}

/// Echo of the last applied normalized command; `(0, 0)` before any.
pub fn feedback_read(last: Option<ActuatorCommand>) -> (f64, f64) {
    let c = last.unwrap_or(ActuatorCommand::IDLE);
    (c.throttle, c.steering)
}

/// Whole pulses turned so far, truncated toward zero, and the raw angle.
/// A pulse edge reached to within round-off counts as reached.
pub fn encoder_read(wheel_angle: f64, ppr: u32) -> (i64, f64) {
    let pulses = wheel_angle / (2.0 * PI) * ppr as f64;
    let ticks = (pulses + pulses.signum() * ENCODER_EDGE_SLACK).trunc() as i64;
    (ticks, wheel_angle)
}

/// Pulse fraction forgiven when testing for an encoder edge.
pub const ENCODER_EDGE_SLACK: f64 = 1e-9;

/// World position of the rear-axle reference with optional Gaussian noise.
pub fn ips_read<R: Rng + ?Sized>(state: &VehicleState, noise_std: f64, rng: &mut R) -> [f64; 3] {
    if noise_std > 0.0 {
        let n = Normal::new(0.0, noise_std).expect("noise std is finite and positive");
        [state.x + n.sample(rng), state.y + n.sample(rng), 0.0]
    } else {
        [state.x, state.y, 0.0]
    }
}

pub fn yaw_quaternion(yaw: f64) -> [f64; 4] {
    let (s, c) = (yaw / 2.0).sin_cos();
    [0.0, 0.0, s, c]
}

/// ZYX Euler angles `[roll, pitch, yaw]` of a unit quaternion `[x, y, z, w]`.
pub fn quaternion_to_euler([x, y, z, w]: [f64; 4]) -> [f64; 3] {
    let roll = (2.0 * (w * x + y * z)).atan2(1.0 - 2.0 * (x * x + y * y));
    let pitch = (2.0 * (w * y - z * x)).clamp(-1.0, 1.0).asin();
    let yaw = (2.0 * (w * z + x * y)).atan2(1.0 - 2.0 * (y * y + z * z));
    [roll, pitch, yaw]
}

/// Planar IMU from two consecutive states. Acceleration is tangential plus
/// centripetal, without gravity unless `include_gravity` is set.
pub fn imu_read(
    state: &VehicleState,
    prev: &VehicleState,
    dt: f64,
    include_gravity: bool,
) -> ImuReading {
    let yaw_rate = wrap_angle(state.yaw - prev.yaw) / dt;
    let dv = (state.speed - prev.speed) / dt;
    ImuReading {
        quaternion: yaw_quaternion(state.yaw),
        euler: [0.0, 0.0, state.yaw],
        angular_velocity: [0.0, 0.0, yaw_rate],
        linear_acceleration: [
            dv,
            state.speed * yaw_rate,
            if include_gravity { GRAVITY } else { 0.0 },
        ],
    }
}

/// One full revolution of range measurements from `origin`.
pub fn lidar_scan(
    origin: Vec2,
    yaw: f64,
    boxes: &[ObstructionBox],
    cfg: &SensorConfig,
) -> LidarScan {
    let step = 2.0 * PI / cfg.lidar_rays as f64;
    let mut scan = LidarScan::empty(cfg.lidar_rays);
    for k in 0..cfg.lidar_rays {
        let bearing = yaw + k as f64 * step;
        if let Some(d) = raycast(origin, bearing, boxes) {
            if d >= cfg.lidar_min_range && d <= cfg.lidar_max_range {
                scan.ranges[k] = d;
                scan.intensities[k] = cfg.lidar_intensity;
            }
        }
    }
    scan
}
