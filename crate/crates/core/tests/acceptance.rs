//! Acceptance gate. Runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line each; exits non-zero if any criterion fails.

mod support;

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use scaledrive::bridge::{
    decode_telemetry, BridgeConfig, BridgeEndpoint, ControlMessage, Inputs, UiFrame,
};
use scaledrive::dynamics::{advance, normalized_to_physical, wrap_angle};
use scaledrive::runtime::{run, CommandScript, RunOptions};
use scaledrive::sim::{Headlights, Indicators, SimCommand, DEFAULT_DT};
use scaledrive::world::{collide_vehicle, load_map, validate_map, MapError};
use scaledrive::{ActuatorCommand, Gear, Sim, SimParams, TileMap, Vec2, VehicleState};

use support::EchoServer;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);
type LoadCase = (&'static str, fn(&MapError) -> bool);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let held: bool = $cond;
        if !held {
            return Err(format!($($fmt)+));
        }
    };
}

/// Open 9 x 9 grid of crossings with a lawn strip along the top row.
fn proving_ground(boxes: &[(f64, f64)]) -> TileMap {
    let mut text = String::from("tile_size = 0.6\n");
    for i in -4..=4 {
        for j in -4..=4 {
            let kind = if j == 4 { "lawn" } else { "x_intersection" };
            text += &format!("[[tiles]]\nkind = \"{kind}\"\ngrid = [{i}, {j}]\n");
        }
    }
    for (x, y) in boxes {
        text += &format!("[[boxes]]\ncenter = [{x}, {y}]\n");
    }
    TileMap::parse(&text).expect("proving ground parses")
}

fn sim_on(map: TileMap, params: SimParams) -> Sim {
    Sim::new(
        params,
        map,
        DEFAULT_DT,
        42,
        Arc::new(Inputs::default()),
        BridgeEndpoint::default(),
    )
}

fn drive(sim: &mut Sim, throttle: f64, steering: f64) {
    sim.inputs()
        .teleop
        .put(ActuatorCommand::new(throttle, steering));
}

/// Algebraic least-squares circle fit, returning the radius.
fn fit_radius(points: &[(f64, f64)]) -> f64 {
    // Minimise sum (x^2 + y^2 + a x + b y + c)^2 via the 3x3 normal equations.
    let mut m = [[0.0; 3]; 3];
    let mut r = [0.0; 3];
    for &(x, y) in points {
        let row = [x, y, 1.0];
        let z = -(x * x + y * y);
        for i in 0..3 {
            for k in 0..3 {
                m[i][k] += row[i] * row[k];
            }
            r[i] += row[i] * z;
        }
    }
    let det = |a: [[f64; 3]; 3]| {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let d = det(m);
    let solve = |col: usize| {
        let mut a = m;
        for i in 0..3 {
            a[i][col] = r[i];
        }
        det(a) / d
    };
    let (a, b, c) = (solve(0), solve(1), solve(2));
    (a * a / 4.0 + b * b / 4.0 - c).sqrt()
}

fn rel_err(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}

fn turning_radius() -> Outcome {
    const REAR: f64 = 0.24515;
    const FRONT: f64 = 0.28308;
    let started = Instant::now();
    let mut sim = sim_on(proving_ground(&[]), SimParams::default());
    drive(&mut sim, 0.5, -1.0);
    sim.run_ticks(300);

    let vp = sim.params().vehicle;
    let mut rear = Vec::new();
    let mut front = Vec::new();
    let mut turned = 0.0;
    let mut yaw = sim.state().yaw;
    while turned < 2.0 * PI {
        let s = sim.step().state;
        turned += wrap_angle(s.yaw - yaw).abs();
        yaw = s.yaw;
        rear.push((s.x, s.y));
        front.push(s.front_axle(&vp));
    }
    let elapsed = started.elapsed();
    let (r, f) = (fit_radius(&rear), fit_radius(&front));
    let detail = format!(
        "rear {r:.5} m (want {REAR}), front {f:.5} m (want {FRONT}), {} samples, {:.0} ms",
        rear.len(),
        elapsed.as_secs_f64() * 1e3
    );
    ensure!(rel_err(r, REAR) <= 0.01, "{detail}");
    ensure!(rel_err(f, FRONT) <= 0.01, "{detail}");
    ensure!(elapsed < Duration::from_secs(1), "{detail}");
    Ok(detail)
}

fn top_speed() -> Outcome {
    let oracle = 130.0 / 60.0 * 2.0 * PI * 0.0325;
    ensure!(rel_err(oracle, 0.44244) < 1e-5, "oracle {oracle}");
    let mut sim = sim_on(proving_ground(&[]), SimParams::default());
    sim.place_vehicle(VehicleState::at_pose(-2.4, 0.0, 0.0));
    drive(&mut sim, 1.0, 0.0);
    let mut tail = Vec::new();
    for k in 0..400 {
        let v = sim.step().state.speed;
        if k >= 350 {
            tail.push(v);
        }
    }
    let v = tail.iter().sum::<f64>() / tail.len() as f64;
    let detail = format!("steady speed {v:.5} m/s (want {oracle:.5} +/- 1%)");
    ensure!(rel_err(v, oracle) <= 0.01, "{detail}");
    Ok(detail)
}

fn lidar_conformance() -> Outcome {
    let boxes = [(1.0, 0.0), (0.0, -1.2), (-1.5, 1.5), (2.2, 2.0)];
    let mut sim = sim_on(proving_ground(&boxes), SimParams::default());
    drive(&mut sim, 0.3, 0.4);
    let mut scans = 0;
    let mut hits = 0;
    let mut last = 0;
    for _ in 0..1000 {
        let snap = sim.step();
        if snap.lidar_scans == last {
            continue;
        }
        last = snap.lidar_scans;
        scans += 1;
        let lidar = &snap.sensors.lidar;
        ensure!(
            lidar.ranges.len() == 360,
            "scan {scans} has {} ranges",
            lidar.ranges.len()
        );
        ensure!(lidar.intensities.len() == 360, "scan {scans} intensities");
        for (r, i) in lidar.ranges.iter().zip(&lidar.intensities) {
            if r.is_finite() {
                hits += 1;
                ensure!((0.15..=12.0).contains(r), "range {r} outside [0.15, 12]");
                ensure!(*i == 47.0, "hit intensity {i}");
            } else {
                ensure!(*i == 0.0, "non-return intensity {i}");
            }
        }
    }
    let total = sim.snapshot().lidar_scans;
    let detail = format!("{total} scans in 10 s, {hits} returns, all 360 rays, intensity 47");
    ensure!((69..=71).contains(&total) && scans == total, "{detail}");
    ensure!(hits > 0, "{detail}");
    Ok(detail)
}

fn encoder() -> Outcome {
    let params = SimParams::default();
    let vp = params.vehicle;
    let mut sim = sim_on(proving_ground(&[]), params);

    // 100 ticks at constant speed cover exactly one wheel circumference.
    let throttle = 2.0 * PI * vp.wheel_radius / (100.0 * DEFAULT_DT) / vp.max_speed();
    let cmd = ActuatorCommand::new(throttle, 0.0);
    let (speed, _) = normalized_to_physical(cmd, &vp);
    sim.place_vehicle(VehicleState {
        speed,
        ..VehicleState::at_pose(-2.4, 0.0, 0.0)
    });
    sim.inputs().teleop.put(cmd);
    let one_rev = sim.run_ticks(100).sensors.encoder_ticks;
    ensure!(one_rev == [16, 16], "one revolution gave ticks {one_rev:?}");

    sim.reset();
    sim.place_vehicle(VehicleState::at_pose(-2.4, -1.2, 0.0));
    let start = sim.snapshot().sensors.encoder_ticks;
    drive(&mut sim, 1.0, 0.0);
    let mut path = 0.0;
    let mut prev = sim.snapshot().sensors.ips_position;
    loop {
        let snap = sim.step();
        let p = snap.sensors.ips_position;
        path += ((p[0] - prev[0]).powi(2) + (p[1] - prev[1]).powi(2)).sqrt();
        prev = p;
        if path >= 2.0 {
            drive(&mut sim, 0.0, 0.0);
        }
        if path >= 2.0 && snap.state.speed == 0.0 {
            break;
        }
        ensure!(snap.clock.tick < 2000, "vehicle never stopped");
    }
    let ticks = sim.snapshot().sensors.encoder_ticks;
    let mean = ((ticks[0] - start[0]) + (ticks[1] - start[1])) as f64 / 2.0;
    let enc_path = mean / 16.0 * 2.0 * PI * vp.wheel_radius;
    let diff = (enc_path - path).abs();
    let detail = format!(
        "one revolution = {one_rev:?} ticks; straight run encoder {enc_path:.4} m vs IPS {path:.4} m (diff {diff:.4})"
    );
    ensure!(diff <= 0.013, "{detail}");
    Ok(detail)
}

#[derive(Clone, Copy)]
struct Row {
    tick: u64,
    at: Instant,
    connected: bool,
    throttle: f64,
}

fn echo_throttle(tick: u64) -> f64 {
    0.2 + 0.1 * ((tick / 5) % 6) as f64
}

fn bridge_loopback() -> Outcome {
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .unwrap();
    rt.block_on(async {
        let reply: support::Reply = Arc::new(|text| {
            let t = decode_telemetry(text).ok()?;
            Some(scaledrive::bridge::encode_control(&ControlMessage::drive(echo_throttle(t.tick), 0.0)))
        });
        let server = EchoServer::start(support::loopback(), reply.clone()).await.unwrap();
        let addr = server.addr;
        let endpoint = BridgeEndpoint {
            host: "127.0.0.1".parse().unwrap(),
            port: addr.port(),
        };
        let mut sim = Sim::new(
            SimParams::default(),
            proving_ground(&[]),
            DEFAULT_DT,
            1,
            Arc::new(Inputs::default()),
            endpoint,
        );
        sim.staleness_stop = false;

        let rows = Arc::new(Mutex::new(Vec::<Row>::new()));
        let connected = Arc::new(AtomicBool::new(false));
        let stop = Arc::new(AtomicBool::new(false));
        let (obs_rows, obs_conn) = (rows.clone(), connected.clone());
        let opts = RunOptions {
            realtime: true,
            duration: Some(13.0),
            script: Some(CommandScript::new(vec![(
                0,
                scaledrive::runtime::ScriptInput::Ui(UiFrame::Command(SimCommand::ToggleMode)),
            )])),
            bridge: Some(BridgeConfig::default()),
            observer: Some(Box::new(move |s| {
                obs_conn.store(s.bridge_connected, Ordering::Relaxed);
                obs_rows.lock().unwrap().push(Row {
                    tick: s.clock.tick,
                    at: Instant::now(),
                    connected: s.bridge_connected,
                    throttle: s.applied.throttle,
                });
            })),
            stop: stop.clone(),
            ..RunOptions::default()
        };
        let sim_task = tokio::spawn(run(sim, opts));

        tokio::time::sleep(Duration::from_millis(1500)).await;
        server.kill();
        let killed_at = Instant::now();
        tokio::time::sleep(Duration::from_millis(700)).await;
        let _restarted = EchoServer::start(addr, reply).await.unwrap();
        let restarted_at = Instant::now();
        let mut reconnected = None;
        while restarted_at.elapsed() < Duration::from_secs(10) {
            if connected.load(Ordering::Relaxed) {
                reconnected = Some(restarted_at.elapsed());
                break;
            }
            tokio::time::sleep(Duration::from_millis(5)).await;
        }
        tokio::time::sleep(Duration::from_millis(300)).await;
        stop.store(true, Ordering::Relaxed);
        let (_, summary) = sim_task.await.unwrap().map_err(|e| e.to_string())?;
        let rows = rows.lock().unwrap().clone();

        let reconnected = reconnected.ok_or("not reconnected within 10 s of restart")?;

        // Latency: every telemetry frame sent while connected must have its
        // answer applied within two ticks.
        let mut worst = 0;
        let mut checked = 0;
        for (idx, row) in rows.iter().enumerate() {
            if row.tick % 5 != 0 || !row.connected || row.at >= killed_at {
                continue;
            }
            let want = echo_throttle(row.tick);
            let Some(hit) = rows[idx + 1..]
                .iter()
                .take_while(|r| r.at < killed_at)
                .take(5)
                .find(|r| r.throttle == want)
            else {
                continue;
            };
            worst = worst.max(hit.tick - row.tick);
            checked += 1;
        }
        ensure!(checked >= 20, "only {checked} telemetry frames answered before the outage");

        let outage: Vec<_> = rows.iter().filter(|r| !r.connected && r.at > killed_at).collect();
        let period = |rs: &[&Row]| {
            let n = rs.len().saturating_sub(1).max(1) as f64;
            (rs.last().unwrap().at - rs[0].at).as_secs_f64() / n
        };
        ensure!(outage.len() > 10, "outage not observed");
        let outage_period = period(&outage);
        let max_gap = outage
            .windows(2)
            .map(|w| (w[1].at - w[0].at).as_secs_f64())
            .fold(0.0, f64::max);
        let detail = format!(
            "control applied within {worst} ticks ({checked} frames), reconnected {:.2} s after restart, \
             outage step period {:.2} ms (max gap {:.1} ms), {} ticks",
            reconnected.as_secs_f64(),
            outage_period * 1e3,
            max_gap * 1e3,
            summary.ticks
        );
        ensure!(worst <= 2, "{detail}");
        ensure!(rel_err(outage_period, DEFAULT_DT) <= 0.05, "{detail}");
        ensure!(max_gap < 0.1, "{detail}");
        Ok(detail)
    })
}

fn fuzz_script(seed: u64, ticks: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lines = Vec::new();
    let mut tick = 0;
    while tick < ticks {
        let throttle = if rng.random_bool(0.25) {
            0.0
        } else {
            rng.random_range(-1.0..=1.0)
        };
        let steering: f64 = rng.random_range(-1.0..=1.0);
        lines.push(match rng.random_range(0..10) {
            0 => format!(r#"{{"tick":{tick},"ui":{{"type":"command","name":"toggle_mode"}}}}"#),
            1 => format!(r#"{{"tick":{tick},"ui":{{"type":"command","name":"headlights","args":{{"level":{}}}}}}}"#, rng.random_range(1..=2)),
            2 => format!(r#"{{"tick":{tick},"ui":{{"type":"command","name":"hazard"}}}}"#),
            3..=5 => format!(r#"{{"tick":{tick},"bridge":{{"throttle":{throttle},"steering":{steering}}}}}"#),
            _ => format!(r#"{{"tick":{tick},"ui":{{"type":"teleop","throttle":{throttle},"steering":{steering}}}}}"#),
        });
        tick += rng.random_range(1..40);
    }
    lines.join("\n")
}

fn determinism() -> Outcome {
    let script = CommandScript::parse(&fuzz_script(7, 6000)).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().unwrap();
    let rt = tokio::runtime::Builder::new_current_thread()
        .enable_all()
        .build()
        .unwrap();
    let mut logs = Vec::new();
    let mut times = Vec::new();
    for k in 0..2 {
        let mut params = SimParams::default();
        params.sensors.ips_noise_std = 0.01;
        let boxes = [(1.0, 0.0), (-1.0, 0.5), (0.5, -1.5)];
        let sim = sim_on(proving_ground(&boxes), params);
        let path: PathBuf = dir.path().join(format!("run{k}.jsonl"));
        let opts = RunOptions {
            duration: Some(60.0),
            record: Some(path.clone()),
            script: Some(script.clone()),
            ..RunOptions::default()
        };
        let (_, summary) = rt.block_on(run(sim, opts)).map_err(|e| e.to_string())?;
        ensure!(summary.ticks == 6000, "ran {} ticks", summary.ticks);
        times.push(summary.wall_time);
        logs.push(std::fs::read(path).unwrap());
    }
    let slowest = times.iter().max().unwrap().as_secs_f64();
    let detail = format!(
        "two 60 s runs, logs {} bytes, identical: {}, slowest {:.2} s ({:.0} ticks/s)",
        logs[0].len(),
        logs[0] == logs[1],
        slowest,
        6000.0 / slowest
    );
    ensure!(logs[0] == logs[1], "{detail}");
    ensure!(slowest < 5.0, "{detail}");
    Ok(detail)
}

fn collision() -> Outcome {
    let mut sim = sim_on(proving_ground(&[(0.0, 0.0)]), SimParams::default());
    sim.place_vehicle(VehicleState::at_pose(-1.0, 0.0, 0.0));
    let cmd = ActuatorCommand::new(1.0, 0.0);
    sim.inputs().teleop.put(cmd);
    let params = *sim.params();
    let map = sim.map().clone();
    let start_box = sim.snapshot().boxes[0].center;

    let mut contacts = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..400 {
        let snap = sim.snapshot();
        let next = advance(
            snap.state,
            cmd,
            &params.vehicle,
            &params.longitudinal_friction,
            DEFAULT_DT,
        );
        let mut boxes = snap.boxes.clone();
        let before_boxes = boxes.clone();
        let out = collide_vehicle(next, &map, &mut boxes, &params, DEFAULT_DT);
        for imp in &out.impulses {
            let n = imp.normal;
            let heading = Vec2::from_angle(next.yaw);
            let b0 = &before_boxes[imp.box_index];
            let b1 = &boxes[imp.box_index];
            let p0 =
                params.vehicle.mass * next.speed * heading.dot(n) + b0.mass * b0.velocity.dot(n);
            let p1 = params.vehicle.mass * out.state.speed * heading.dot(n)
                + b1.mass * b1.velocity.dot(n);
            worst = worst.max((p1 - p0).abs());
            contacts += 1;
        }
        sim.step();
    }
    let moved = (sim.snapshot().boxes[0].center - start_box).norm();

    // Lawn: steady speed under the same throttle, road versus lawn.
    let steady = |y: f64| {
        let mut s = sim_on(proving_ground(&[]), SimParams::default());
        s.place_vehicle(VehicleState::at_pose(-2.4, y, 0.0));
        drive(&mut s, 0.6, 0.0);
        let v: Vec<f64> = (0..300).map(|_| s.step().state.speed).collect();
        v[250..].iter().sum::<f64>() / 50.0
    };
    let (road, lawn) = (steady(0.0), steady(2.4));

    // Boundary: drive at the east edge.
    let mut s = sim_on(proving_ground(&[]), SimParams::default());
    s.place_vehicle(VehicleState::at_pose(2.0, 0.0, 0.0));
    drive(&mut s, 1.0, 0.0);
    let vp = s.params().vehicle;
    let mut clamps = 0;
    for _ in 0..300 {
        let snap = s.step();
        let (cx, _) = snap.state.center(&vp);
        ensure!(cx <= 2.7 + 1e-12, "centre escaped to x = {cx}");
        if (cx - 2.7).abs() < 1e-12 {
            ensure!(
                snap.state.speed == 0.0,
                "clamped with speed {}",
                snap.state.speed
            );
            clamps += 1;
        }
    }

    let detail = format!(
        "{contacts} contact steps, momentum error {worst:.1e} N s, box moved {moved:.3} m; \
         steady speed road {road:.4} vs lawn {lawn:.4} m/s; {clamps} boundary clamps at speed 0"
    );
    ensure!(contacts > 0 && worst <= 1e-9, "{detail}");
    ensure!(moved > 0.05, "{detail}");
    ensure!(lawn < road * 0.99, "{detail}");
    ensure!(clamps > 0, "{detail}");
    Ok(detail)
}

fn light_truth_table() -> Outcome {
    let mut sim = sim_on(
        proving_ground(&[(1.0, 1.0), (-1.0, -1.0)]),
        SimParams::default(),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut checked = 0;
    let (mut brakes, mut reverses) = (0, 0);
    for _ in 0..1000 {
        if rng.random_bool(0.1) {
            let t = if rng.random_bool(0.3) {
                0.0
            } else {
                rng.random_range(-1.0..=1.0)
            };
            let s = rng.random_range(-1.0..=1.0);
            if rng.random_bool(0.5) {
                sim.inputs().teleop.put(ActuatorCommand::new(t, s));
            } else {
                sim.inputs().submit_control(ControlMessage::drive(t, s));
            }
        }
        if rng.random_bool(0.01) {
            sim.inputs().commands.push(SimCommand::ToggleMode);
        }
        if rng.random_bool(0.01) {
            sim.inputs()
                .commands
                .push(SimCommand::ToggleIndicator(Indicators::Left));
            sim.inputs()
                .commands
                .push(SimCommand::ToggleHeadlights(Headlights::High));
        }
        let snap = sim.step();
        let brake = snap.applied.throttle == 0.0;
        let reverse = snap.state.gear == Gear::Reverse;
        ensure!(
            snap.lights.brake == brake,
            "tick {}: brake lamp {}",
            snap.clock.tick,
            snap.lights.brake
        );
        ensure!(
            snap.lights.reverse == reverse,
            "tick {}: reverse lamp",
            snap.clock.tick
        );
        brakes += brake as u32;
        reverses += reverse as u32;
        checked += 1;
    }
    let detail = format!("{checked} snapshots, {brakes} braking, {reverses} in reverse");
    ensure!(brakes > 0 && reverses > 0 && brakes < checked, "{detail}");
    Ok(detail)
}

fn imu_circle() -> Outcome {
    let mut sim = sim_on(proving_ground(&[]), SimParams::default());
    let vp = sim.params().vehicle;
    let v = 0.2;
    let steering = -0.5;
    let radius = vp.wheelbase / (0.5 * 30f64.to_radians()).tan();
    drive(&mut sim, v / vp.max_speed(), steering);
    let mut worst_norm: f64 = 0.0;
    let (mut w_err, mut a_err): (f64, f64) = (0.0, 0.0);
    for k in 0..1000 {
        let imu = sim.step().sensors.imu;
        let q = imu.quaternion;
        let norm = (q.iter().map(|c| c * c).sum::<f64>()).sqrt();
        worst_norm = worst_norm.max((norm - 1.0).abs());
        if k >= 500 {
            w_err = w_err.max(rel_err(imu.angular_velocity[2], v / radius));
            a_err = a_err.max(rel_err(imu.linear_acceleration[1], v * v / radius));
        }
    }
    let detail = format!(
        "R {radius:.4} m: max omega_z error {:.3}%, max a_y error {:.3}%, |q| - 1 <= {worst_norm:.1e}",
        w_err * 100.0,
        a_err * 100.0
    );
    ensure!(w_err <= 0.02 && a_err <= 0.02, "{detail}");
    ensure!(worst_norm <= 1e-9, "{detail}");
    Ok(detail)
}

fn map_validation() -> Outcome {
    let report = validate_map(&load_map("minimap").map_err(|e| e.to_string())?);
    ensure!(report.closed_loop && report.components == 1, "{report}");
    ensure!(report.curvature_violations.is_empty(), "{report}");
    let corpus = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/corpus/maps");
    let cases: [LoadCase; 7] = [
        ("missing.toml", |e| matches!(e, MapError::Io { .. })),
        ("syntax_error.toml", |e| matches!(e, MapError::Parse(_))),
        ("unknown_kind.toml", |e| {
            matches!(e, MapError::UnknownKind { .. })
        }),
        ("duplicate_cell.toml", |e| {
            matches!(e, MapError::DuplicateCell { .. })
        }),
        ("spawn_off_road.toml", |e| {
            matches!(e, MapError::SpawnOffRoad { .. })
        }),
        ("invalid_box.toml", |e| {
            matches!(e, MapError::InvalidBox { .. })
        }),
        ("invalid_tile_size.toml", |e| {
            matches!(e, MapError::InvalidTileSize(_))
        }),
    ];
    for (file, check) in cases {
        match load_map(corpus.join(file)) {
            Err(e) if check(&e) => {}
            other => return Err(format!("{file}: unexpected {other:?}")),
        }
    }
    Ok(format!(
        "minimap: {} drivable tiles, 1 loop, 0 curvature violations; {} load errors reproduced",
        report.drivable_tiles,
        cases.len()
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("turning radius", turning_radius),
        ("top speed", top_speed),
        ("lidar conformance", lidar_conformance),
        ("encoder", encoder),
        ("bridge loopback", bridge_loopback),
        ("determinism", determinism),
        ("collision", collision),
        ("light automation", light_truth_table),
        ("imu circular motion", imu_circle),
        ("map validation", map_validation),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
