use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rieszpol::cli::{self, CellKind, Command, NList, RunConfig, Source};
use rieszpol::geometry::{SetKind, SetSpec};
use rieszpol::Error;

/// Riesz polarization, energy and equidistribution experiments.
#[derive(Parser)]
#[command(name = "rieszpol", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a TOML config file.
    Run {
        config: PathBuf,
        /// Overrides `output.dir`.
        #[arg(long)]
        out: Option<String>,
    },
    /// Best-found polarization configurations.
    Solve(Flags),
    /// Minimal-energy configurations.
    Energy(Flags),
    /// Ratio tables with the a + b/ln N fit.
    Asymptotics(Flags),
    /// Cell counts of solver configurations.
    Equidist(Flags),
    /// Covering density along an epsilon schedule.
    Alpha(Flags),
    /// Exhaustive grid oracle against the grid solver.
    Oracle(Flags),
    /// Randomized suite of the Riesz integral bound.
    BoundCheck(Flags),
    /// Print the canonical config for the given flags and exit.
    Config {
        #[arg(value_parser = parse_command)]
        command: Command,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Args, Clone, Default)]
struct Flags {
    /// Catalog kind: circle, arc, segment, ball, cube, sphere.
    #[arg(long)]
    set: Option<String>,
    /// Dimension parameter of balls, cubes and spheres.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    radius: Option<f64>,
    /// Segment length or cube side.
    #[arg(long)]
    length: Option<f64>,
    /// Angular extent of an arc.
    #[arg(long)]
    extent: Option<f64>,
    /// Point counts: "3", "64,128,256", "64..8192" or "2..8:+1".
    #[arg(long, value_parser = NList::parse)]
    n: Option<NList>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse_source)]
    source: Option<Source>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long, value_parser = parse_cells)]
    cells: Option<CellKind>,
    #[arg(long)]
    cell_count: Option<usize>,
    /// Comma-separated decreasing epsilon schedule.
    #[arg(long, value_delimiter = ',')]
    epsilon: Option<Vec<f64>>,
    #[arg(long)]
    exclusion: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Record elapsed time in the report.
    #[arg(long)]
    wall_time: bool,
}

fn parse_command(s: &str) -> Result<Command, String> {
    serde_json::from_value(serde_json::Value::String(s.into())).map_err(|_| format!("unknown command `{s}`"))
}

fn parse_source(s: &str) -> Result<Source, String> {
    serde_json::from_value(serde_json::Value::String(s.into())).map_err(|_| format!("unknown source `{s}`"))
}

fn parse_cells(s: &str) -> Result<CellKind, String> {
    serde_json::from_value(serde_json::Value::String(s.into())).map_err(|_| format!("unknown cell family `{s}`"))
}

fn build(command: Command, f: Flags) -> Result<RunConfig, Error> {
    let mut c = RunConfig::new(command);
    if let Some(kind) = &f.set {
        let kind = SetKind::from_name(kind)
            .filter(|k| !matches!(k, SetKind::Union | SetKind::Degenerate))
            .ok_or_else(|| Error::Config {
                key: "set".into(),
                message: format!("unknown catalog kind `{kind}`; use a config file for unions"),
            })?;
        let mut spec = SetSpec::new(kind);
        spec.d = f.d.or(matches!(kind, SetKind::Sphere | SetKind::Ball | SetKind::Cube).then_some(2));
        spec.radius = f.radius;
        spec.length = f.length;
        spec.extent = f.extent;
        c.set = Some(spec);
    }
    c.n = f.n.unwrap_or_default();
    c.s = f.s;
    c.seed = f.seed;
    c.restarts = f.restarts;
    c.exclusion = f.exclusion;
    c.wall_time = f.wall_time;
    c.tolerances.max_iters = f.max_iters;
    if let Some(v) = f.strategy {
        c.strategy = v;
    }
    if let Some(v) = f.source {
        c.source = v;
    }
    if let Some(v) = f.samples {
        c.samples = v;
    }
    if let Some(v) = f.grid {
        c.grid = v;
    }
    if let Some(v) = f.cells {
        c.cells.family = v;
    }
    if let Some(v) = f.cell_count {
        c.cells.count = v;
    }
    if let Some(v) = f.epsilon {
        c.epsilon = v;
    }
    if let Some(v) = f.out {
        c.output.dir = v;
    }
    c.validate()
}

fn execute(cmd: Cmd) -> Result<i32, Error> {
    let config = match cmd {
        Cmd::Run { config, out } => {
            let mut c = cli::parse_config(&std::fs::read_to_string(config)?)?;
            if let Some(dir) = out {
                c.output.dir = dir;
            }
            c
        }
        Cmd::Config { command, flags } => {
            print!("{}", cli::serialize_config(&build(command, flags)?));
            return Ok(0);
        }
        Cmd::Solve(f) => build(Command::Solve, f)?,
        Cmd::Energy(f) => build(Command::Energy, f)?,
        Cmd::Asymptotics(f) => build(Command::Asymptotics, f)?,
        Cmd::Equidist(f) => build(Command::Equidist, f)?,
        Cmd::Alpha(f) => build(Command::Alpha, f)?,
        Cmd::Oracle(f) => build(Command::Oracle, f)?,
        Cmd::BoundCheck(f) => build(Command::BoundCheck, f)?,
    };
    let (files, code) = cli::run(&config)?;
    for f in files {
        println!("{}", f.display());
    }
    Ok(code)
}

fn main() -> ExitCode {
    let args = Cli::parse();
    if let Some(n) = cli::threads_from_env() {
        // a second initialization can only fail if something ran first
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match execute(args.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("rieszpol: {e}");
            ExitCode::from(cli::error_exit_code(&e) as u8)
        }
    }
}
