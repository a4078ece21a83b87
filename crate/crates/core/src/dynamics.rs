//! Actuator response and kinematic bicycle integration.
//!
//! World frame is Z-up with yaw counter-clockwise positive. The state
//! position is the centre of the rear axle. A positive normalized steering
//! command turns right, so it maps to a negative physical wheel angle.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::params::{FrictionCurve, VehicleParams, GRAVITY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Gear {
    #[default]
    Drive,
    Reverse,
}

impl Gear {
    pub fn letter(self) -> char {
        match self {
            Gear::Drive => 'D',
            Gear::Reverse => 'R',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    /// rad, wrapped to (-pi, pi]
    pub yaw: f64,
    /// Signed forward speed, m/s.
    pub speed: f64,
    /// Physical front-wheel angle, rad (positive = left).
    pub steer: f64,
    /// Cumulative rear-wheel rotation, rad.
    pub wheel_angle_left: f64,
    pub wheel_angle_right: f64,
    pub gear: Gear,
}

impl VehicleState {
    pub fn at_pose(x: f64, y: f64, yaw: f64) -> Self {
        Self {
            x,
            y,
            yaw: wrap_angle(yaw),
            ..Self::default()
        }
    }

    pub fn heading(&self) -> (f64, f64) {
        (self.yaw.cos(), self.yaw.sin())
    }

    /// Geometric centre of the chassis, half a wheelbase ahead of the rear axle.
    pub fn center(&self, params: &VehicleParams) -> (f64, f64) {
        let (c, s) = self.heading();
        let half = params.wheelbase / 2.0;
        (self.x + half * c, self.y + half * s)
    }

    pub fn front_axle(&self, params: &VehicleParams) -> (f64, f64) {
        let (c, s) = self.heading();
        (self.x + params.wheelbase * c, self.y + params.wheelbase * s)
    }
}

/// Normalized actuator inputs, each clamped to [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ActuatorCommand {
    pub throttle: f64,
    pub steering: f64,
}

impl ActuatorCommand {
    pub const IDLE: Self = Self {
        throttle: 0.0,
        steering: 0.0,
    };

    /// Non-finite inputs are treated as 0.
    pub fn new(throttle: f64, steering: f64) -> Self {
        Self {
            throttle: clamp_unit(throttle),
            steering: clamp_unit(steering),
        }
    }
}

pub fn clamp_unit(v: f64) -> f64 {
    if v.is_finite() {
        v.clamp(-1.0, 1.0)
    } else {
        0.0
    }
}

/// Wraps an angle to (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Returns `(target_speed, target_steer)` for a normalized command.
pub fn normalized_to_physical(cmd: ActuatorCommand, params: &VehicleParams) -> (f64, f64) {
    let cmd = ActuatorCommand::new(cmd.throttle, cmd.steering);
    (
        cmd.throttle * params.max_speed(),
        -cmd.steering * params.steer_limit,
    )
}

/// Exact discrete solution of a first-order lag over `dt`.
pub fn actuator_lag_step(current: f64, target: f64, tau: f64, dt: f64) -> f64 {
    target + (current - target) * (-dt / tau).exp()
}

/// Applies the holding brake: speed magnitude drops by `brake_decel * dt`
/// without crossing zero, and the steering servo retracts towards 0.
pub fn auto_brake(state: VehicleState, params: &VehicleParams, dt: f64) -> VehicleState {
    let dv = params.brake_decel * dt;
    // Relative slack so that round-off never costs an extra braking step.
    let speed = if state.speed.abs() <= dv * (1.0 + 1e-9) {
        0.0
    } else {
        state.speed - dv * state.speed.signum()
    };
    VehicleState {
        speed,
        steer: actuator_lag_step(state.steer, 0.0, params.steer_time_constant, dt),
        ..state
    }
}

/// One explicit Euler step of the rear-axle kinematic bicycle model.
pub fn kinematic_step(state: VehicleState, dt: f64, params: &VehicleParams) -> VehicleState {
    let v = state.speed;
    let (c, s) = state.heading();
    let curvature = state.steer.tan() / params.wheelbase;
    let half_track = params.track_width() / 2.0;
    let travel = v * dt / params.wheel_radius;
    VehicleState {
        x: state.x + v * c * dt,
        y: state.y + v * s * dt,
        yaw: wrap_angle(state.yaw + v * curvature * dt),
        // The inner wheel of a left turn is the left one.
        wheel_angle_left: state.wheel_angle_left + travel * (1.0 - half_track * curvature),
        wheel_angle_right: state.wheel_angle_right + travel * (1.0 + half_track * curvature),
        ..state
    }
}

/// Turning radii `(rear, front)` of the axle centres for a wheel angle.
/// Straight driving returns `f64::INFINITY` for both.
pub fn turning_radii(wheelbase: f64, steer: f64) -> (f64, f64) {
    if steer == 0.0 {
        return (f64::INFINITY, f64::INFINITY);
    }
    (wheelbase / steer.tan().abs(), wheelbase / steer.sin().abs())
}

/// Grip coefficient for a slip ratio.
///
/// Monotone cubic Hermite pieces join the origin, the extremum knot and the
/// asymptote knot with zero slope at both knots; past the asymptote the curve
/// is flat. The result is scaled by `stiffness`.
pub fn tire_friction(slip: f64, curve: &FrictionCurve) -> f64 {
    let slip = slip.abs();
    let value = if slip >= curve.asymptote_slip {
        curve.asymptote_value
    } else if slip >= curve.extremum_slip {
        hermite(
            slip,
            (curve.extremum_slip, curve.extremum_value, 0.0),
            (curve.asymptote_slip, curve.asymptote_value, 0.0),
        )
    } else {
        let secant = curve.extremum_value / curve.extremum_slip;
        hermite(
            slip,
            (0.0, 0.0, secant),
            (curve.extremum_slip, curve.extremum_value, 0.0),
        )
    };
    value * curve.stiffness
}

fn hermite(x: f64, (x0, y0, m0): (f64, f64, f64), (x1, y1, m1): (f64, f64, f64)) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * h * m0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * m1
}

/// Largest speed change per second the rear tyres can transmit.
pub fn traction_limit(curve: &FrictionCurve) -> f64 {
    tire_friction(curve.extremum_slip, curve) * GRAVITY
}

/// Advances actuators and pose by one step under `cmd`.
pub fn advance(
    state: VehicleState,
    cmd: ActuatorCommand,
    params: &VehicleParams,
    traction: &FrictionCurve,
    dt: f64,
) -> VehicleState {
    let cmd = ActuatorCommand::new(cmd.throttle, cmd.steering);
    let (target_speed, target_steer) = normalized_to_physical(cmd, params);
    let v_max = params.max_speed();
    let limit = params.steer_limit;

    let mut next = if cmd.throttle == 0.0 {
        auto_brake(state, params, dt)
    } else {
        let lagged = actuator_lag_step(state.speed, target_speed, params.drive_time_constant, dt);
        let max_dv = traction_limit(traction) * dt;
        let speed = state.speed + (lagged - state.speed).clamp(-max_dv, max_dv);
        VehicleState {
            speed,
            steer: actuator_lag_step(state.steer, target_steer, params.steer_time_constant, dt),
            gear: if cmd.throttle < 0.0 {
                Gear::Reverse
            } else {
                Gear::Drive
            },
            ..state
        }
    };
    next.speed = next.speed.clamp(-v_max, v_max);
    next.steer = next.steer.clamp(-limit, limit);
    kinematic_step(next, dt, params)
}
