//! Option parsing and process lifecycle for the `sim` binary.

use std::net::{Ipv4Addr, SocketAddr};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::Ordering;
use std::sync::Arc;

use clap::Parser;
use tracing::{info, warn};

use scaledrive::bridge::{BridgeConfig, BridgeEndpoint, Inputs, DEFAULT_UI_PORT};
use scaledrive::runtime::{self, CommandScript, RunOptions as LoopOptions};
use scaledrive::sim::format_hud;
use scaledrive::{load_map, load_params, validate_map, Sim, SimParams};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;

/// Headless simulator for a 1:14-scale autonomous vehicle.
///
/// The simulator dials out to the autonomy server at --bridge and, unless
/// --headless is given, serves the teleoperation UI on --ui-port.
#[derive(Debug, Parser)]
#[command(name = "sim", version)]
struct Cli {
    /// Map file, or "minimap" for the bundled map.
    #[arg(long, env = "SCALEDRIVE_MAP")]
    map: String,

    /// Parameter file overriding the built-in vehicle, sensor and world defaults.
    #[arg(long, env = "SCALEDRIVE_PARAMS", value_name = "PATH")]
    params: Option<PathBuf>,

    /// Autonomy server as IPv4 HOST:PORT.
    #[arg(
        long,
        env = "SCALEDRIVE_BRIDGE",
        default_value = "127.0.0.1:4567",
        value_name = "HOST:PORT"
    )]
    bridge: BridgeEndpoint,

    /// TCP port of the UI server.
    #[arg(long, env = "SCALEDRIVE_UI_PORT", default_value_t = DEFAULT_UI_PORT, value_name = "PORT")]
    ui_port: u16,

    /// Run without the UI server.
    #[arg(long, env = "SCALEDRIVE_HEADLESS")]
    headless: bool,

    /// Pace physics ticks against the wall clock [default: on unless --headless].
    #[arg(long, overrides_with = "no_realtime")]
    realtime: bool,

    /// Run as fast as possible.
    #[arg(long, overrides_with = "realtime")]
    no_realtime: bool,

    /// Physics rate in Hz; the timestep is its inverse.
    #[arg(long, env = "SCALEDRIVE_RATE", default_value_t = 100.0, value_name = "HZ", value_parser = positive_rate)]
    rate: f64,

    /// Seed for sensor noise.
    #[arg(long, env = "SCALEDRIVE_SEED", default_value_t = 0)]
    seed: u64,

    /// Write one telemetry line per telemetry tick to this file.
    #[arg(long, env = "SCALEDRIVE_RECORD", value_name = "PATH")]
    record: Option<PathBuf>,

    /// Check the map, print the report and exit (status 1 on findings).
    #[arg(long)]
    validate_only: bool,

    /// Stop after this much simulated time, in seconds [default: run until interrupted].
    #[arg(long, env = "SCALEDRIVE_DURATION", value_name = "SECONDS", value_parser = non_negative)]
    duration: Option<f64>,

    /// Replay UI and bridge inputs from a JSON-lines script.
    #[arg(long, env = "SCALEDRIVE_SCRIPT", value_name = "PATH")]
    script: Option<PathBuf>,

    /// Directory with the browser UI [default: built-in placeholder page].
    #[arg(long, env = "SCALEDRIVE_UI_DIR", value_name = "PATH")]
    ui_dir: Option<PathBuf>,

    /// Print the HUD to stderr once per simulated second.
    #[arg(long)]
    hud: bool,
}

fn positive_rate(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a positive number of Hz, got \"{s}\"")),
    }
}

fn non_negative(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!(
            "expected a non-negative number of seconds, got \"{s}\""
        )),
    }
}

/// Resolved command-line options.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub map: String,
    pub params_path: Option<PathBuf>,
    pub bridge: BridgeEndpoint,
    pub ui_port: u16,
    pub headless: bool,
    pub realtime: bool,
    pub rate: f64,
    pub seed: u64,
    pub record_path: Option<PathBuf>,
    pub validate_only: bool,
    pub duration: Option<f64>,
    pub script: Option<PathBuf>,
    pub ui_dir: Option<PathBuf>,
    pub hud: bool,
}

impl From<Cli> for RunOptions {
    fn from(c: Cli) -> Self {
        let realtime = if c.realtime {
            true
        } else if c.no_realtime {
            false
        } else {
            !c.headless
        };
        Self {
            map: c.map,
            params_path: c.params,
            bridge: c.bridge,
            ui_port: c.ui_port,
            headless: c.headless,
            realtime,
            rate: c.rate,
            seed: c.seed,
            record_path: c.record,
            validate_only: c.validate_only,
            duration: c.duration,
            script: c.script,
            ui_dir: c.ui_dir,
            hud: c.hud,
        }
    }
}

/// Parses `argv` (including the program name). `Err` carries clap's
/// message, which also covers `--help` and `--version`.
pub fn parse_args<I, T>(argv: I) -> Result<RunOptions, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    Cli::try_parse_from(argv).map(RunOptions::from)
}

/// Argument vector that parses back to `opts`.
pub fn render(opts: &RunOptions) -> Vec<String> {
    let mut argv = vec!["sim".to_string(), "--map".into(), opts.map.clone()];
    let mut push = |flag: &str, value: String| {
        argv.push(flag.to_string());
        argv.push(value);
    };
    if let Some(p) = &opts.params_path {
        push("--params", p.display().to_string());
    }
    push("--bridge", opts.bridge.to_string());
    push("--ui-port", opts.ui_port.to_string());
    push("--rate", opts.rate.to_string());
    push("--seed", opts.seed.to_string());
    if let Some(p) = &opts.record_path {
        push("--record", p.display().to_string());
    }
    if let Some(d) = opts.duration {
        push("--duration", d.to_string());
    }
    if let Some(p) = &opts.script {
        push("--script", p.display().to_string());
    }
    if let Some(p) = &opts.ui_dir {
        push("--ui-dir", p.display().to_string());
    }
    if opts.headless {
        argv.push("--headless".into());
    }
    argv.push(
        if opts.realtime {
            "--realtime"
        } else {
            "--no-realtime"
        }
        .into(),
    );
    if opts.validate_only {
        argv.push("--validate-only".into());
    }
    if opts.hud {
        argv.push("--hud".into());
    }
    argv
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

/// Runs the simulator for parsed options and returns the process status.
pub fn execute(opts: RunOptions) -> ExitCode {
    let map = match load_map(&opts.map) {
        Ok(m) => m,
        Err(e) => return fail(EXIT_VALIDATION, e),
    };
    let report = validate_map(&map);
    if opts.validate_only {
        print!("{report}");
        return ExitCode::from(if report.is_clean() {
            EXIT_OK
        } else {
            EXIT_VALIDATION
        });
    }
    for w in &report.warnings {
        warn!("map: {w}");
    }

    let params = match &opts.params_path {
        Some(p) => match load_params(p) {
            Ok(p) => p,
            Err(e) => return fail(EXIT_VALIDATION, e),
        },
        None => SimParams::default(),
    };
    let script = match &opts.script {
        Some(p) => match CommandScript::load(p) {
            Ok(s) => Some(s),
            Err(e) => return fail(EXIT_VALIDATION, e),
        },
        None => None,
    };

    let rt = match tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
    {
        Ok(rt) => rt,
        Err(e) => return fail(EXIT_RUNTIME, e),
    };
    let sim = Sim::new(
        params,
        map,
        1.0 / opts.rate,
        opts.seed,
        Arc::new(Inputs::default()),
        opts.bridge.clone(),
    );

    let mut loop_opts = LoopOptions {
        realtime: opts.realtime,
        duration: opts.duration,
        record: opts.record_path.clone(),
        script,
        bridge: Some(BridgeConfig {
            endpoint: opts.bridge.clone(),
            ..BridgeConfig::default()
        }),
        ui: (!opts.headless).then(|| {
            (
                SocketAddr::from((Ipv4Addr::LOCALHOST, opts.ui_port)),
                opts.ui_dir.clone(),
            )
        }),
        ..LoopOptions::default()
    };
    if opts.hud {
        let every = opts.rate.round().max(1.0) as u64;
        loop_opts.observer = Some(Box::new(move |s| {
            if s.clock.tick % every == 0 {
                eprintln!("{}", format_hud(s));
            }
        }));
    }
    let stop = loop_opts.stop.clone();

    let result = rt.block_on(async move {
        tokio::spawn(async move {
            if tokio::signal::ctrl_c().await.is_ok() {
                stop.store(true, Ordering::Relaxed);
            }
        });
        info!(bridge = %opts.bridge, "starting");
        runtime::run(sim, loop_opts).await
    });
    match result {
        Ok((_, summary)) => {
            println!(
                "ran {} ticks ({:.2} s simulated) in {:.2} s, {:.0} ticks/s",
                summary.ticks,
                summary.sim_time,
                summary.wall_time.as_secs_f64(),
                summary.ticks_per_second()
            );
            ExitCode::from(EXIT_OK)
        }
        Err(e) => fail(EXIT_RUNTIME, e),
    }
}

/// Entry point: parse, set up logging, run.
pub fn main_with_args<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let opts = match parse_args(argv) {
        Ok(o) => o,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    execute(opts)
}
