//! Vehicle, tire and sensor constants loaded once at startup.
//!
//! Everything is stored in SI units. The parameter file is TOML with one
//! table per group (`[vehicle]`, `[longitudinal_friction]`,
//! `[lateral_friction]`, `[sensors]`, `[suspension]`, `[world]`); any key
//! that is absent takes the default of the reference 1:14 vehicle.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

/// Standard gravity, m/s².
pub const GRAVITY: f64 = 9.81;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        reason: reason.into(),
    }
}

/// Rigid-body and actuator constants of the vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleParams {
    /// kg
    pub mass: f64,
    pub linear_drag: f64,
    pub angular_drag: f64,
    /// m
    pub chassis_length: f64,
    pub chassis_width: f64,
    pub chassis_height: f64,
    /// Distance between the front and rear axles, m.
    pub wheelbase: f64,
    pub wheel_radius: f64,
    pub wheel_mass: f64,
    /// Maximum front-wheel angle, rad.
    pub steer_limit: f64,
    /// Maximum rear-wheel speed, RPM.
    pub drive_limit: f64,
    /// First-order lag of the steering servo, s.
    pub steer_time_constant: f64,
    /// First-order lag of the drive motors, s.
    pub drive_time_constant: f64,
    /// Deceleration of the automatic brake, m/s².
    pub brake_decel: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self {
            mass: 1.75,
            linear_drag: 0.1,
            angular_drag: 0.05,
            chassis_length: 0.300,
            chassis_width: 0.175,
            chassis_height: 0.182,
            wheelbase: 0.14154,
            wheel_radius: 0.0325,
            wheel_mass: 0.034,
            steer_limit: 30.0_f64.to_radians(),
            drive_limit: 130.0,
            steer_time_constant: 0.10,
            drive_time_constant: 0.20,
            brake_decel: 4.0,
        }
    }
}

impl VehicleParams {
    /// Top speed reached at full throttle, m/s.
    pub fn max_speed(&self) -> f64 {
        self.drive_limit / 60.0 * 2.0 * PI * self.wheel_radius
    }

    /// Distance between the rear wheels. The chassis is as wide as the track.
    pub fn track_width(&self) -> f64 {
        self.chassis_width
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        positive("vehicle.mass", self.mass)?;
        non_negative("vehicle.linear_drag", self.linear_drag)?;
        non_negative("vehicle.angular_drag", self.angular_drag)?;
        positive("vehicle.chassis_length", self.chassis_length)?;
        positive("vehicle.chassis_width", self.chassis_width)?;
        positive("vehicle.chassis_height", self.chassis_height)?;
        positive("wheelbase", self.wheelbase)?;
        if self.wheelbase >= self.chassis_length {
            return Err(invalid(
                "wheelbase",
                format!(
                    "{} m is not shorter than the chassis ({} m)",
                    self.wheelbase, self.chassis_length
                ),
            ));
        }
        positive("vehicle.wheel_radius", self.wheel_radius)?;
        positive("vehicle.wheel_mass", self.wheel_mass)?;
        positive("vehicle.steer_limit", self.steer_limit)?;
        if self.steer_limit >= PI / 2.0 {
            return Err(invalid("vehicle.steer_limit", "must be below pi/2 rad"));
        }
        positive("vehicle.drive_limit", self.drive_limit)?;
        positive("vehicle.steer_time_constant", self.steer_time_constant)?;
        positive("vehicle.drive_time_constant", self.drive_time_constant)?;
        positive("vehicle.brake_decel", self.brake_decel)?;
        Ok(())
    }
}

/// Slip-to-grip mapping described by an extremum knot and an asymptote knot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrictionCurve {
    pub extremum_slip: f64,
    pub extremum_value: f64,
    pub asymptote_slip: f64,
    pub asymptote_value: f64,
    pub stiffness: f64,
}

impl FrictionCurve {
    pub const LONGITUDINAL: Self = Self {
        extremum_slip: 0.4,
        extremum_value: 1.0,
        asymptote_slip: 0.8,
        asymptote_value: 0.5,
        stiffness: 1.0,
    };

    pub const LATERAL: Self = Self {
        extremum_slip: 0.2,
        extremum_value: 1.0,
        asymptote_slip: 0.5,
        asymptote_value: 0.75,
        stiffness: 1.0,
    };

    fn validate(&self, field: &'static str) -> Result<(), ConfigError> {
        let ok = self.extremum_slip > 0.0
            && self.extremum_slip < self.asymptote_slip
            && self.asymptote_value > 0.0
            && self.extremum_value >= self.asymptote_value
            && self.stiffness > 0.0
            && [
                self.extremum_slip,
                self.extremum_value,
                self.asymptote_slip,
                self.asymptote_value,
                self.stiffness,
            ]
            .iter()
            .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(invalid(
                field,
                "need 0 < extremum_slip < asymptote_slip, extremum_value >= asymptote_value > 0, stiffness > 0",
            ))
        }
    }
}

/// Sensor-suite configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorConfig {
    /// Encoder pulses per wheel revolution.
    pub encoder_ppr: u32,
    /// Hz
    pub lidar_rate: f64,
    pub lidar_rays: usize,
    /// m
    pub lidar_min_range: f64,
    pub lidar_max_range: f64,
    pub lidar_intensity: f64,
    /// Hz
    pub telemetry_rate: f64,
    /// Standard deviation of the additive IPS noise, m.
    pub ips_noise_std: f64,
    /// Add +g on the body Z axis of the accelerometer.
    pub imu_include_gravity: bool,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            encoder_ppr: 16,
            lidar_rate: 7.0,
            lidar_rays: 360,
            lidar_min_range: 0.15,
            lidar_max_range: 12.0,
            lidar_intensity: 47.0,
            telemetry_rate: 20.0,
            ips_noise_std: 0.0,
            imu_include_gravity: false,
        }
    }
}

impl SensorConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        if self.encoder_ppr == 0 {
            return Err(invalid("sensors.encoder_ppr", "must be at least 1"));
        }
        positive("sensors.lidar_rate", self.lidar_rate)?;
        if self.lidar_rays == 0 {
            return Err(invalid("sensors.lidar_rays", "must be at least 1"));
        }
        non_negative("sensors.lidar_min_range", self.lidar_min_range)?;
        if self.lidar_max_range.is_nan()
            || self.lidar_max_range <= self.lidar_min_range
            || self.lidar_max_range.is_infinite()
        {
            return Err(invalid(
                "sensors.lidar_max_range",
                "must be finite and above lidar_min_range",
            ));
        }
        positive("sensors.lidar_intensity", self.lidar_intensity)?;
        positive("sensors.telemetry_rate", self.telemetry_rate)?;
        non_negative("sensors.ips_noise_std", self.ips_noise_std)?;
        Ok(())
    }
}

/// Wheel-collider suspension values. Kept for completeness; nothing consumes them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuspensionParams {
    /// N/m
    pub spring: f64,
    /// kg/s
    pub damper: f64,
    pub target_position: f64,
    pub damping_rate: f64,
    /// m
    pub distance: f64,
}

impl Default for SuspensionParams {
    fn default() -> Self {
        Self {
            spring: 5040.0,
            damper: 20.0,
            target_position: 0.5,
            damping_rate: 0.025,
            distance: 0.01,
        }
    }
}

/// Environment physics constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldParams {
    /// Sliding friction coefficient between a box and the floor.
    pub box_friction: f64,
    /// Multiplier on `linear_drag` while the vehicle is on lawn.
    pub lawn_drag_multiplier: f64,
    /// Seconds without a bridge frame before autonomous throttle is zeroed; 0 disables.
    pub command_timeout: f64,
}

impl Default for WorldParams {
    fn default() -> Self {
        Self {
            box_friction: 0.5,
            lawn_drag_multiplier: 3.0,
            command_timeout: 0.5,
        }
    }
}

/// The complete parameter set, as loaded from one file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimParams {
    pub vehicle: VehicleParams,
    pub longitudinal_friction: FrictionCurve,
    pub lateral_friction: FrictionCurve,
    pub sensors: SensorConfig,
    pub suspension: SuspensionParams,
    pub world: WorldParams,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            vehicle: VehicleParams::default(),
            longitudinal_friction: FrictionCurve::LONGITUDINAL,
            lateral_friction: FrictionCurve::LATERAL,
            sensors: SensorConfig::default(),
            suspension: SuspensionParams::default(),
            world: WorldParams::default(),
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.vehicle.validate()?;
        self.longitudinal_friction
            .validate("longitudinal_friction")?;
        self.lateral_friction.validate("lateral_friction")?;
        self.sensors.validate()?;
        non_negative("world.box_friction", self.world.box_friction)?;
        if self.world.lawn_drag_multiplier.is_nan() || self.world.lawn_drag_multiplier < 1.0 {
            return Err(invalid("world.lawn_drag_multiplier", "must be at least 1"));
        }
        non_negative("world.command_timeout", self.world.command_timeout)?;
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let params: Self = toml::from_str(text)?;
        params.validate()?;
        Ok(params)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("parameter set always serializes")
    }
}

/// Reads a parameter file. Absent keys keep their defaults.
pub fn load_params(path: impl AsRef<Path>) -> Result<SimParams, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    SimParams::from_toml_str(&text)
}

fn positive(field: &'static str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("{v} must be positive and finite")))
    }
}

fn non_negative(field: &'static str, v: f64) -> Result<(), ConfigError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(
            field,
            format!("{v} must be non-negative and finite"),
        ))
    }
}
