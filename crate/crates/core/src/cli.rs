//! `hexnav` command line.
//!
//! Exit codes: 0 success, 1 validation or routing failure, 2 usage error
//! (bad flags, unreadable or malformed input).

use std::ffi::OsString;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::Error;
use crate::map::{self, validate_map, MapFile, RoomMap, TagId};
use crate::routing::{plan_instruction, shortest_path};
use crate::service::{self, Service};
use crate::session::{read_transcript, verify_transcript, write_transcript};
use crate::sim::{self, PowerProfile, ReaderModel, Scenario, WalkerModel};

/// Optional directory searched for map files given by name.
pub const MAP_DIR_ENV: &str = "HEXNAV_MAP_DIR";

#[derive(Debug, Parser)]
#[command(name = "hexnav", version, about = "Hexagonal floor-tag wayfinding toolkit")]
pub struct Cli {
    /// Suppress the timestamped banner on stderr.
    #[arg(long, global = true)]
    pub no_banner: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a map file against every map invariant.
    Validate { map: String },
    /// Print the shortest route and the cue heard at each tag.
    Route {
        map: String,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
    },
    /// Run seeded walker trials and print per-trial rows.
    #[command(allow_negative_numbers = true)]
    Simulate {
        map: String,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long, default_value_t = 1)]
        trials: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        compliance: f64,
        /// Walking speed in m/s.
        #[arg(long, default_value_t = 0.0627)]
        speed: f64,
        /// Pause after each scan in seconds.
        #[arg(long, default_value_t = 1.5)]
        pause: f64,
        /// Hop limit per trial; defaults to ten times the optimal hop count.
        #[arg(long)]
        step_cap: Option<u32>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Write each trial's session transcript into this directory.
        #[arg(long)]
        transcripts: Option<PathBuf>,
    },
    /// Energy drawn over a period by the two-level power model.
    #[command(allow_negative_numbers = true)]
    Energy {
        #[arg(long, default_value_t = 2.85)]
        idle_w: f64,
        #[arg(long, default_value_t = 3.25)]
        active_w: f64,
        #[arg(long, default_value_t = 0.6)]
        idle_frac: f64,
        #[arg(long, default_value_t = 24.0)]
        hours: f64,
    },
    /// Serve the walkthrough HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Map files or names to serve; the bundled clinic map by default.
        #[arg(long = "map")]
        maps: Vec<String>,
    },
    /// Re-run a recorded transcript and check it reproduces exactly.
    Replay {
        transcript: PathBuf,
        #[arg(long, default_value = "clinic")]
        map: String,
    },
}

/// A failure carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    fn failed(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }
}

type CliResult = Result<(), Failure>;

/// Parses `args` and runs the command. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    if !cli.no_banner {
        let now = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let _ = writeln!(err, "hexnav {} (unix time {now})", env!("CARGO_PKG_VERSION"));
    }
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> CliResult {
    match command {
        Command::Validate { map } => cmd_validate(&map, out),
        Command::Route { map, from, to } => cmd_route(&map, &from, &to, out),
        Command::Simulate {
            map,
            from,
            to,
            trials,
            seed,
            compliance,
            speed,
            pause,
            step_cap,
            format,
            transcripts,
        } => {
            let walker = WalkerModel { walk_speed_mps: speed, compliance, seed, pause_s: pause };
            walker.validate().map_err(|e| Failure::usage(e.to_string()))?;
            if trials == 0 {
                return Err(Failure::usage("--trials must be at least 1"));
            }
            if step_cap == Some(0) {
                return Err(Failure::usage("--step-cap must be at least 1"));
            }
            let opts = SimulateOptions { trials, walker, step_cap, format, transcripts };
            cmd_simulate(&map, &from, &to, &opts, out)
        }
        Command::Energy { idle_w, active_w, idle_frac, hours } => {
            cmd_energy(idle_w, active_w, idle_frac, hours, out)
        }
        Command::Serve { port, host, maps } => cmd_serve(&host, port, &maps, out),
        Command::Replay { transcript, map } => cmd_replay(&transcript, &map, out),
    }
}

fn io_failure(e: std::io::Error) -> Failure {
    Failure::usage(e.to_string())
}

/// Finds a map file by path, by name under `HEXNAV_MAP_DIR`, or falls back
/// to the bundled clinic map for `clinic`.
pub fn locate_map(spec: &str) -> Result<String, Failure> {
    let direct = Path::new(spec);
    if direct.is_file() {
        return std::fs::read_to_string(direct)
            .map_err(|e| Failure::usage(format!("cannot read {spec}: {e}")));
    }
    if let Some(dir) = std::env::var_os(MAP_DIR_ENV) {
        for candidate in [spec.to_string(), format!("{spec}.map.json")] {
            let p = Path::new(&dir).join(candidate);
            if p.is_file() {
                return std::fs::read_to_string(&p)
                    .map_err(|e| Failure::usage(format!("cannot read {}: {e}", p.display())));
            }
        }
    }
    if spec == "clinic" || spec == "clinic.map.json" {
        return Ok(map::CLINIC_MAP_JSON.to_string());
    }
    Err(Failure::usage(format!("cannot read map {spec}: no such file")))
}

fn load(spec: &str) -> Result<RoomMap, Failure> {
    let text = locate_map(spec)?;
    map::load_map(&text).map_err(|e| match e {
        Error::Validation(_) => Failure::failed(e.to_string()),
        other => Failure::usage(other.to_string()),
    })
}

fn resolve(map: &RoomMap, name: &str) -> Result<TagId, Failure> {
    map.resolve(name).ok_or_else(|| Failure::failed(format!("unknown tag {name:?}")))
}

pub fn cmd_validate(spec: &str, out: &mut dyn Write) -> CliResult {
    let text = locate_map(spec)?;
    let file: MapFile = serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("{spec}: malformed map file: {e}")))?;
    let map = RoomMap::from_file(file);
    let violations = validate_map(&map);
    if violations.is_empty() {
        writeln!(out, "OK, {} nodes", map.len()).map_err(io_failure)?;
        return Ok(());
    }
    for v in &violations {
        writeln!(out, "violation: {v}").map_err(io_failure)?;
    }
    Err(Failure::failed(format!("{} violation(s) in {spec}", violations.len())))
}

pub fn cmd_route(spec: &str, from: &str, to: &str, out: &mut dyn Write) -> CliResult {
    let map = load(spec)?;
    let src = resolve(&map, from)?;
    let dst = resolve(&map, to)?;
    let path = shortest_path(&map, src, dst).map_err(|e| Failure::failed(e.to_string()))?;
    let name = |t: TagId| map.tag_name(t).unwrap_or("?").to_string();
    let names: Vec<String> = path.nodes.iter().map(|&t| name(t)).collect();
    let mut text = format!("path: {}\ncost: {}\n", names.join(" "), path.cost);

    // At the first tag the heading is taken as the first hop's bearing,
    // as if orientation had already been acquired.
    let mut heading = match path.next_hop() {
        Some(n) => map.direction_between(src, n).map_err(|e| Failure::failed(e.to_string()))?,
        None => crate::hex::HexDirection::N,
    };
    for (i, &tag) in path.nodes.iter().enumerate() {
        if i > 0 {
            heading = map
                .direction_between(path.nodes[i - 1], tag)
                .map_err(|e| Failure::failed(e.to_string()))?;
        }
        let instr = plan_instruction(&map, tag, heading, dst).map_err(|e| Failure::failed(e.to_string()))?;
        text.push_str(&format!("{}: {}\n", name(tag), instr.cue_text()));
    }
    out.write_all(text.as_bytes()).map_err(io_failure)
}

pub struct SimulateOptions {
    pub trials: u32,
    pub walker: WalkerModel,
    pub step_cap: Option<u32>,
    pub format: Format,
    pub transcripts: Option<PathBuf>,
}

#[derive(Serialize)]
struct JsonBatch<'a> {
    trials: &'a [sim::TrialRow],
    aggregate: &'a sim::BatchStats,
}

pub fn cmd_simulate(spec: &str, from: &str, to: &str, opts: &SimulateOptions, out: &mut dyn Write) -> CliResult {
    let map = Arc::new(load(spec)?);
    let src = resolve(&map, from)?;
    let dst = resolve(&map, to)?;
    let optimal = shortest_path(&map, src, dst).map_err(|e| Failure::failed(e.to_string()))?;
    let step_cap = opts.step_cap.unwrap_or((10 * optimal.hops() as u32).max(1));
    let scenario = Scenario { src, dst, walker: opts.walker, reader: ReaderModel::default(), step_cap };
    let report = sim::run_batch(map, &scenario, opts.trials, opts.walker.seed)
        .map_err(|e| Failure::failed(e.to_string()))?;

    if let Some(dir) = &opts.transcripts {
        std::fs::create_dir_all(dir).map_err(io_failure)?;
        for (row, result) in report.rows.iter().zip(&report.results) {
            let path = dir.join(format!("trial-{}.jsonl", row.trial));
            let file = std::fs::File::create(&path).map_err(io_failure)?;
            write_transcript(std::io::BufWriter::new(file), &result.transcript)
                .map_err(|e| Failure::usage(e.to_string()))?;
        }
    }

    match opts.format {
        Format::Csv => sim::write_batch_csv(out, &report.rows).map_err(|e| Failure::usage(e.to_string())),
        Format::Json => {
            let body = JsonBatch { trials: &report.rows, aggregate: &report.aggregate };
            let text = serde_json::to_string_pretty(&body).expect("batch serializes");
            writeln!(out, "{text}").map_err(io_failure)
        }
    }
}

pub fn cmd_energy(idle_w: f64, active_w: f64, idle_frac: f64, hours: f64, out: &mut dyn Write) -> CliResult {
    if [idle_w, active_w, idle_frac, hours].iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return Err(Failure::usage("energy parameters must be non-negative"));
    }
    let profile = PowerProfile::new(idle_w, active_w, idle_frac).map_err(|e| Failure::usage(e.to_string()))?;
    let wh = sim::energy_consumption(&profile, hours).map_err(|e| Failure::usage(e.to_string()))?;
    writeln!(out, "{wh:.2} Wh").map_err(io_failure)
}

pub fn cmd_replay(path: &Path, map_spec: &str, out: &mut dyn Write) -> CliResult {
    let map = Arc::new(load(map_spec)?);
    let file = std::fs::File::open(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    let entries = read_transcript(std::io::BufReader::new(file)).map_err(|e| Failure::usage(e.to_string()))?;
    match verify_transcript(map, &entries).map_err(|e| Failure::usage(e.to_string()))? {
        Ok(()) => writeln!(out, "OK, {} events replayed", entries.len()).map_err(io_failure),
        Err(d) => Err(Failure::failed(d.to_string())),
    }
}

pub fn cmd_serve(host: &str, port: u16, specs: &[String], out: &mut dyn Write) -> CliResult {
    let maps = if specs.is_empty() {
        vec![map::clinic()]
    } else {
        specs.iter().map(|s| load(s)).collect::<Result<_, _>>()?
    };
    let addr: SocketAddr = format!("{host}:{port}")
        .parse()
        .map_err(|e| Failure::usage(format!("bad address {host}:{port}: {e}")))?;
    let service = Arc::new(Service::new(maps));
    let runtime = tokio::runtime::Runtime::new().map_err(io_failure)?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| Failure::failed(format!("cannot bind {addr}: {e}")))?;
        let local = listener.local_addr().map_err(io_failure)?;
        writeln!(out, "listening on http://{local}").map_err(io_failure)?;
        out.flush().map_err(io_failure)?;
        axum::serve(listener, service::router(service))
            .await
            .map_err(|e| Failure::failed(e.to_string()))
    })
}
