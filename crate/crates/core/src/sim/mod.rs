//! Fixed-timestep scheduler.
//!
//! Each [`Sim::step`] runs, in order: command intake and source selection,
//! actuators and kinematics, world contact, sensors at their own rates, lamp
//! automation, and publication of an immutable [`SimSnapshot`].

mod hud;
mod lights;

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use tracing::{debug, warn};

pub use hud::{format_hud, format_sim_time, HudRecord};
pub use lights::{Headlights, Indicators, LightState};

use crate::bridge::{BridgeEndpoint, ControlMessage, EndpointRequest, Inputs};
use crate::dynamics::{advance, ActuatorCommand, VehicleState};
use crate::params::SimParams;
use crate::sensors::{
    encoder_read, feedback_read, imu_read, ips_read, lidar_scan, LidarScan, SensorFrame,
};
use crate::world::{box_step, collide_vehicle, separate_all, ObstructionBox, TileMap};

pub const DEFAULT_DT: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DrivingMode {
    #[default]
    Manual,
    Autonomous,
}

impl DrivingMode {
    pub fn label(self) -> &'static str {
        match self {
            Self::Manual => "Manual",
            Self::Autonomous => "Autonomous",
        }
    }

    fn toggled(self) -> Self {
        match self {
            Self::Manual => Self::Autonomous,
            Self::Autonomous => Self::Manual,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimClock {
    pub dt: f64,
    pub tick: u64,
    /// Always `tick as f64 * dt`.
    pub sim_time: f64,
    /// Physics ticks per wall-clock second, as measured by the runtime.
    pub fps_avg: f64,
}

impl SimClock {
    fn new(dt: f64) -> Self {
        Self {
            dt,
            tick: 0,
            sim_time: 0.0,
            fps_avg: 0.0,
        }
    }
}

/// Discrete operator commands from the UI menu and keyboard.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimCommand {
    Reset,
    ToggleMode,
    ToggleHeadlights(Headlights),
    ToggleIndicator(Indicators),
    ToggleSceneLight,
    SetBridge(BridgeEndpoint),
}

/// State of one tick. Never mutated after publication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSnapshot {
    pub clock: SimClock,
    pub mode: DrivingMode,
    pub state: VehicleState,
    pub sensors: SensorFrame,
    pub lidar_scans: u64,
    /// `(min, max)` valid LIDAR range, m.
    pub lidar_range: (f64, f64),
    pub lights: LightState,
    /// Command the actuators were driven with this tick.
    pub applied: ActuatorCommand,
    pub boxes: Vec<ObstructionBox>,
    pub scene_light: bool,
    pub bridge: BridgeEndpoint,
    pub bridge_connected: bool,
}

/// Frames that arrived from the source not currently in control.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ArbitrationStats {
    pub bridge_discarded: u64,
    pub teleop_ignored: u64,
    pub stale_stops: u64,
}

#[derive(Debug)]
pub struct Sim {
    params: SimParams,
    map: TileMap,
    seed: u64,
    rng: ChaCha8Rng,
    inputs: Arc<Inputs>,
    default_endpoint: BridgeEndpoint,
    target: EndpointRequest,
    bridge_connected: bool,
    /// Zero throttle when the autonomy stack goes quiet.
    pub staleness_stop: bool,

    clock: SimClock,
    mode: DrivingMode,
    state: VehicleState,
    prev_state: VehicleState,
    boxes: Vec<ObstructionBox>,
    lights: LightState,
    scene_light: bool,
    held_teleop: ActuatorCommand,
    held_bridge: ActuatorCommand,
    bridge_quiet_ticks: u64,
    applied: Option<ActuatorCommand>,
    lidar: LidarScan,
    lidar_scans: u64,
    stats: ArbitrationStats,
    snapshot: Arc<SimSnapshot>,
}

impl Sim {
    pub fn new(
        params: SimParams,
        map: TileMap,
        dt: f64,
        seed: u64,
        inputs: Arc<Inputs>,
        bridge: BridgeEndpoint,
    ) -> Self {
        assert!(dt > 0.0 && dt.is_finite(), "dt must be positive");
        let spawn =
            VehicleState::at_pose(map.spawn.position.x, map.spawn.position.y, map.spawn.yaw);
        let rays = params.sensors.lidar_rays;
        let boxes = map.boxes.clone();
        let mut sim = Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
            inputs,
            target: EndpointRequest {
                endpoint: bridge.clone(),
                generation: 0,
            },
            default_endpoint: bridge,
            bridge_connected: false,
            staleness_stop: true,
            clock: SimClock::new(dt),
            mode: DrivingMode::Manual,
            state: spawn,
            prev_state: spawn,
            boxes,
            lights: LightState::default(),
            scene_light: true,
            held_teleop: ActuatorCommand::IDLE,
            held_bridge: ActuatorCommand::IDLE,
            bridge_quiet_ticks: 0,
            applied: None,
            lidar: LidarScan::empty(rays),
            lidar_scans: 0,
            stats: ArbitrationStats::default(),
            snapshot: Arc::new(placeholder_snapshot(dt)),
            params,
            map,
        };
        sim.lights.update_automatic(0.0, sim.state.gear);
        sim.publish();
        sim
    }

    pub fn params(&self) -> &SimParams {
        &self.params
    }

    pub fn map(&self) -> &TileMap {
        &self.map
    }

    pub fn inputs(&self) -> &Arc<Inputs> {
        &self.inputs
    }

    pub fn snapshot(&self) -> Arc<SimSnapshot> {
        self.snapshot.clone()
    }

    pub fn state(&self) -> &VehicleState {
        &self.state
    }

    pub fn mode(&self) -> DrivingMode {
        self.mode
    }

    pub fn stats(&self) -> ArbitrationStats {
        self.stats
    }

    pub fn endpoint_target(&self) -> &EndpointRequest {
        &self.target
    }

    pub fn set_bridge_connected(&mut self, up: bool) {
        self.bridge_connected = up;
    }

    pub fn set_fps(&mut self, fps: f64) {
        self.clock.fps_avg = fps;
    }

    /// Ticks between telemetry frames.
    pub fn telemetry_interval(&self) -> u64 {
        ((1.0 / (self.params.sensors.telemetry_rate * self.clock.dt)).round() as u64).max(1)
    }

    /// Overrides vehicle state, e.g. to start a test from a chosen pose.
    pub fn place_vehicle(&mut self, state: VehicleState) {
        self.state = state;
        self.prev_state = state;
        self.publish();
    }

    pub fn boxes_mut(&mut self) -> &mut Vec<ObstructionBox> {
        &mut self.boxes
    }

    /// Advances one tick and returns the published snapshot.
    ///
    /// A reset command consumes its tick: the returned snapshot is the
    /// initial one.
    pub fn step(&mut self) -> Arc<SimSnapshot> {
        while let Some(cmd) = self.inputs.commands.try_pop() {
            if cmd == SimCommand::Reset {
                self.reset();
                return self.snapshot();
            }
            self.apply_command(cmd);
        }
        let cmd = self.select_command();
        let dt = self.clock.dt;

        self.prev_state = self.state;
        let next = advance(
            self.state,
            cmd,
            &self.params.vehicle,
            &self.params.longitudinal_friction,
            dt,
        );
        let outcome = collide_vehicle(next, &self.map, &mut self.boxes, &self.params, dt);
        self.state = outcome.state;
        box_step(&mut self.boxes, self.params.world.box_friction, dt);
        separate_all(&mut self.state, &mut self.boxes, &self.params.vehicle);

        self.clock.tick += 1;
        self.clock.sim_time = self.clock.tick as f64 * dt;
        self.applied = Some(cmd);

        let phase = self.clock.sim_time * self.params.sensors.lidar_rate + 1e-9;
        if phase.floor() as u64 > self.lidar_scans {
            let center = self.state.center(&self.params.vehicle).into();
            self.lidar = lidar_scan(center, self.state.yaw, &self.boxes, &self.params.sensors);
            self.lidar_scans += 1;
        }

        self.lights.update_automatic(cmd.throttle, self.state.gear);
        self.publish();
        self.snapshot()
    }

    pub fn run_ticks(&mut self, n: u64) -> Arc<SimSnapshot> {
        for _ in 0..n {
            self.step();
        }
        self.snapshot()
    }

    fn select_command(&mut self) -> ActuatorCommand {
        let teleop = self.inputs.teleop.take();
        let control = self.inputs.control.take();

        if let Some((msg, _)) = control {
            self.apply_control_lights(&msg);
        }
        match self.mode {
            DrivingMode::Manual => {
                if let Some((cmd, _)) = teleop {
                    self.held_teleop = cmd;
                }
                if let Some((msg, n)) = control {
                    if msg.throttle.is_some() || msg.steering.is_some() {
                        self.stats.bridge_discarded += n;
                    }
                }
                self.held_teleop
            }
            DrivingMode::Autonomous => {
                if let Some((_, n)) = teleop {
                    self.stats.teleop_ignored += n;
                    warn!(frames = n, "teleop ignored in autonomous mode");
                }
                match control {
                    Some((msg, _)) if msg.throttle.is_some() || msg.steering.is_some() => {
                        self.held_bridge = msg.apply_to(self.held_bridge);
                        self.bridge_quiet_ticks = 0;
                    }
                    _ => self.bridge_quiet_ticks += 1,
                }
                let quiet = self.bridge_quiet_ticks as f64 * self.clock.dt;
                if self.staleness_stop
                    && quiet > self.params.world.command_timeout
                    && self.held_bridge.throttle != 0.0
                {
                    debug!(quiet, "autonomy commands stale, releasing throttle");
                    self.held_bridge.throttle = 0.0;
                    self.stats.stale_stops += 1;
                }
                self.held_bridge
            }
        }
    }

    fn apply_control_lights(&mut self, msg: &ControlMessage) {
        if let Some(h) = msg.headlights {
            self.lights.headlights = h;
        }
        if let Some(i) = msg.indicators {
            self.lights.indicators = i;
        }
    }

    pub fn apply_command(&mut self, cmd: SimCommand) {
        match cmd {
            SimCommand::Reset => self.reset(),
            SimCommand::ToggleMode => {
                self.toggle_mode();
            }
            SimCommand::ToggleHeadlights(level) => self.lights.toggle_headlights(level),
            SimCommand::ToggleIndicator(which) => self.lights.toggle_indicator(which),
            SimCommand::ToggleSceneLight => self.scene_light = !self.scene_light,
            SimCommand::SetBridge(endpoint) => {
                self.target = EndpointRequest {
                    endpoint,
                    generation: self.target.generation + 1,
                };
            }
        }
    }

    /// Switches the command source. Pending frames of the newly selected
    /// source are dropped and its held command restarts from idle.
    pub fn toggle_mode(&mut self) -> DrivingMode {
        self.mode = self.mode.toggled();
        match self.mode {
            DrivingMode::Manual => {
                self.inputs.control.take();
                self.held_teleop = ActuatorCommand::IDLE;
            }
            DrivingMode::Autonomous => {
                self.inputs.teleop.take();
                self.held_bridge = ActuatorCommand::IDLE;
                self.bridge_quiet_ticks = 0;
            }
        }
        self.mode
    }

    /// Restores the initial conditions, including the default bridge target.
    pub fn reset(&mut self) {
        let spawn = &self.map.spawn;
        self.state = VehicleState::at_pose(spawn.position.x, spawn.position.y, spawn.yaw);
        self.prev_state = self.state;
        self.boxes = self.map.boxes.clone();
        self.rng = ChaCha8Rng::seed_from_u64(self.seed);
        let fps = self.clock.fps_avg;
        self.clock = SimClock::new(self.clock.dt);
        self.clock.fps_avg = fps;
        self.mode = DrivingMode::Manual;
        self.lights = LightState::default();
        self.lights.update_automatic(0.0, self.state.gear);
        self.scene_light = true;
        self.held_teleop = ActuatorCommand::IDLE;
        self.held_bridge = ActuatorCommand::IDLE;
        self.bridge_quiet_ticks = 0;
        self.applied = None;
        self.lidar = LidarScan::empty(self.params.sensors.lidar_rays);
        self.lidar_scans = 0;
        self.inputs.teleop.take();
        self.inputs.control.take();
        self.target = EndpointRequest {
            endpoint: self.default_endpoint.clone(),
            generation: self.target.generation + 1,
        };
        self.publish();
    }

    fn read_sensors(&mut self) -> SensorFrame {
        let cfg = &self.params.sensors;
        let (throttle_fb, steering_fb) = feedback_read(self.applied);
        let (left, left_angle) = encoder_read(self.state.wheel_angle_left, cfg.encoder_ppr);
        let (right, right_angle) = encoder_read(self.state.wheel_angle_right, cfg.encoder_ppr);
        SensorFrame {
            throttle_fb,
            steering_fb,
            encoder_ticks: [left, right],
            encoder_angles: [left_angle, right_angle],
            ips_position: ips_read(&self.state, cfg.ips_noise_std, &mut self.rng),
            imu: imu_read(
                &self.state,
                &self.prev_state,
                self.clock.dt,
                cfg.imu_include_gravity,
            ),
            lidar: self.lidar.clone(),
            sim_time: self.clock.sim_time,
        }
    }

    fn publish(&mut self) {
        let sensors = self.read_sensors();
        self.snapshot = Arc::new(SimSnapshot {
            clock: self.clock,
            mode: self.mode,
            state: self.state,
            sensors,
            lidar_scans: self.lidar_scans,
            lidar_range: (
                self.params.sensors.lidar_min_range,
                self.params.sensors.lidar_max_range,
            ),
            lights: self.lights,
            applied: self.applied.unwrap_or(ActuatorCommand::IDLE),
            boxes: self.boxes.clone(),
            scene_light: self.scene_light,
            bridge: self.target.endpoint.clone(),
            bridge_connected: self.bridge_connected,
        });
    }
}

fn placeholder_snapshot(dt: f64) -> SimSnapshot {
    SimSnapshot {
        clock: SimClock::new(dt),
        mode: DrivingMode::Manual,
        state: VehicleState::at_pose(0.0, 0.0, 0.0),
        sensors: SensorFrame {
            throttle_fb: 0.0,
            steering_fb: 0.0,
            encoder_ticks: [0; 2],
            encoder_angles: [0.0; 2],
            ips_position: [0.0; 3],
            imu: Default::default(),
            lidar: LidarScan::empty(0),
            sim_time: 0.0,
        },
        lidar_scans: 0,
        lidar_range: (0.0, 0.0),
        lights: LightState::default(),
        applied: ActuatorCommand::IDLE,
        boxes: Vec::new(),
        scene_light: true,
        bridge: BridgeEndpoint::default(),
        bridge_connected: false,
    }
}
