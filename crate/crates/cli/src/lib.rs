//! Command-line front end: flag parsing, config merging, output and exit codes.

pub mod commands;
pub mod config;
pub mod surface;

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use hbern::error::{Error, ErrorClass};

use commands::Report;
use config::{ConfigFile, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "hbern", version, about = "H-minimal surfaces and their second variation in the Heisenberg group")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Global {
    /// `key = value` config file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the command's table here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Also write the JSON record here.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Relative tolerance of the adaptive quadrature.
    #[arg(long)]
    pub quad_tol: Option<f64>,
    /// Base step of the finite-difference variations.
    #[arg(long)]
    pub fd_step: Option<f64>,
    /// Seed of the random deformations.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Parameter window `a,b` (both axes).
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct SurfaceArgs {
    /// Strip generator: `tan_tanh`, `affine(a,b)`, `cot_shift`, `square_pos` or an expression in t.
    #[arg(long)]
    pub strip: Option<String>,
    /// Strip interval `a,b`.
    #[arg(long = "I", allow_hyphen_values = true)]
    pub interval: Option<String>,
    /// Strip branch, `x` or `y`.
    #[arg(long)]
    pub branch: Option<String>,
    /// Graph `t = f(x, y)`.
    #[arg(long, allow_hyphen_values = true)]
    pub graph_xy: Option<String>,
    /// Graph `x = psi(y, t)`.
    #[arg(long, allow_hyphen_values = true)]
    pub graph_yt: Option<String>,
    /// Vertical plane `a,b,gamma`: `ax + by = gamma`.
    #[arg(long, allow_hyphen_values = true)]
    pub plane: Option<String>,
    /// Vertical circular cylinder `cx,cy,R`.
    #[arg(long, allow_hyphen_values = true)]
    pub cylinder: Option<String>,
    /// Type II graph with parameters `a,b`.
    #[arg(long, allow_hyphen_values = true)]
    pub type2: Option<String>,
    /// Left translation `x,y,t` of the type II graph.
    #[arg(long, allow_hyphen_values = true)]
    pub g0: Option<String>,
    /// Profile `h0(s)` of the type II graph.
    #[arg(long, allow_hyphen_values = true)]
    pub h0: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Horizontal mean curvature on a grid and the characteristic set.
    Curvature {
        #[command(flatten)]
        global: Global,
        #[command(flatten)]
        surface: SurfaceArgs,
        /// Points per axis of the curvature grid.
        #[arg(long)]
        grid: Option<usize>,
        /// Grid size of the characteristic scan.
        #[arg(long)]
        scan: Option<usize>,
    },
    /// First and second variation of the H-perimeter, numerically and by formula.
    Variation {
        #[command(flatten)]
        global: Global,
        #[command(flatten)]
        surface: SurfaceArgs,
        /// `normal-bump`, `x1-bump`, `random`, or `hk` for the certificate's own field.
        #[arg(long)]
        family: Option<String>,
        /// Deformation support `u0,u1,v0,v1` in patch parameters.
        #[arg(long, allow_hyphen_values = true)]
        support: Option<String>,
        /// Number of random deformations.
        #[arg(long)]
        count: Option<usize>,
    },
    /// Instability certificate for a strict graphical strip.
    Instability {
        #[command(flatten)]
        global: Global,
        #[command(flatten)]
        surface: SurfaceArgs,
        /// Window `a,b` inside the strict window.
        #[arg(long = "J", allow_hyphen_values = true)]
        j: Option<String>,
    },
    /// Reduce a graph `x = psi(y, t)` to a graphical strip.
    Reduce {
        #[command(flatten)]
        global: Global,
        /// The graph `x = psi(y, t)`.
        #[arg(long, allow_hyphen_values = true)]
        psi: Option<String>,
        /// Probe rectangle `y0,y1,t0,t1`.
        #[arg(long, allow_hyphen_values = true)]
        probe: Option<String>,
        /// Range `a,b` of t where the graph is defined.
        #[arg(long, allow_hyphen_values = true)]
        t_domain: Option<String>,
        /// Certify the reduced strip, or report stability of a vertical plane.
        #[arg(long)]
        then_certify: bool,
    },
    /// Vertical cylinders in the higher Heisenberg groups.
    Highdim {
        #[command(flatten)]
        global: Global,
        /// Group index: cylinders live in H^n.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..=hbern::highdim::MAX_N as u64))]
        n: Option<u64>,
        /// Radius of the sphere cylinder.
        #[arg(long)]
        radius: Option<f64>,
        /// Extra cylinder `h = 0` to tabulate the curvature of.
        #[arg(long, allow_hyphen_values = true)]
        h: Option<String>,
        /// Graph `y_n = f(x, y')` for the unit field table.
        #[arg(long, allow_hyphen_values = true)]
        graph: Option<String>,
        /// Gauss–Legendre nodes per axis.
        #[arg(long)]
        nodes: Option<usize>,
        /// Gradient floor.
        #[arg(long)]
        alpha: Option<f64>,
    },
}

fn put<T: ToString>(m: &mut BTreeMap<String, String>, k: &str, v: &Option<T>) {
    if let Some(v) = v {
        m.insert(k.to_string(), v.to_string());
    }
}

fn global_keys(m: &mut BTreeMap<String, String>, g: &Global) {
    put(m, "csv", &g.csv.as_ref().map(|p| p.display().to_string()));
    put(m, "json", &g.json.as_ref().map(|p| p.display().to_string()));
    put(m, "quad_tol", &g.quad_tol);
    put(m, "fd_step", &g.fd_step);
    put(m, "seed", &g.seed);
    put(m, "window", &g.window);
}

fn surface_keys(m: &mut BTreeMap<String, String>, s: &SurfaceArgs) {
    put(m, "strip", &s.strip);
    put(m, "I", &s.interval);
    put(m, "branch", &s.branch);
    put(m, "graph_xy", &s.graph_xy);
    put(m, "graph_yt", &s.graph_yt);
    put(m, "plane", &s.plane);
    put(m, "cylinder", &s.cylinder);
    put(m, "type2", &s.type2);
    put(m, "g0", &s.g0);
    put(m, "h0", &s.h0);
}

/// Command name, config path and the flag key map.
fn flag_map(cmd: &Command) -> (&'static str, Option<PathBuf>, BTreeMap<String, String>) {
    let mut m = BTreeMap::new();
    let (name, global) = match cmd {
        Command::Curvature { global, surface, grid, scan } => {
            surface_keys(&mut m, surface);
            put(&mut m, "grid", grid);
            put(&mut m, "scan", scan);
            ("curvature", global)
        }
        Command::Variation { global, surface, family, support, count } => {
            surface_keys(&mut m, surface);
            put(&mut m, "family", family);
            put(&mut m, "support", support);
            put(&mut m, "count", count);
            ("variation", global)
        }
        Command::Instability { global, surface, j } => {
            surface_keys(&mut m, surface);
            put(&mut m, "J", j);
            ("instability", global)
        }
        Command::Reduce { global, psi, probe, t_domain, then_certify } => {
            put(&mut m, "psi", psi);
            put(&mut m, "probe", probe);
            put(&mut m, "t_domain", t_domain);
            if *then_certify {
                m.insert("then_certify".into(), "true".into());
            }
            ("reduce", global)
        }
        Command::Highdim { global, n, radius, h, graph, nodes, alpha } => {
            put(&mut m, "n", n);
            put(&mut m, "radius", radius);
            put(&mut m, "h", h);
            put(&mut m, "graph", graph);
            put(&mut m, "nodes", nodes);
            put(&mut m, "alpha", alpha);
            ("highdim", global)
        }
    };
    global_keys(&mut m, global);
    (name, global.config.clone(), m)
}

/// Builds the run configuration of a parsed command line, reading the config file if any.
pub fn run_config(cmd: &Command) -> Result<RunConfig, Error> {
    let (name, path, flags) = flag_map(cmd);
    let file = match path {
        Some(p) => {
            let text = std::fs::read_to_string(&p)
                .map_err(|e| Error::invalid(format!("cannot read config {}: {e}", p.display())))?;
            ConfigFile::parse(&text)?
        }
        None => ConfigFile::default(),
    };
    RunConfig::new(name, flags, file)
}

pub fn execute(rc: &RunConfig) -> Result<Report, Error> {
    match rc.command.as_str() {
        "curvature" => commands::curvature::run(rc),
        "variation" => commands::variation::run(rc),
        "instability" => commands::instability::run(rc),
        "reduce" => commands::reduce::run(rc),
        "highdim" => commands::highdim::run(rc),
        c => Err(Error::invalid(format!("unknown command `{c}`"))),
    }
}

pub fn exit_code(class: ErrorClass) -> i32 {
    match class {
        ErrorClass::Input => 2,
        ErrorClass::NotApplicable => 3,
        ErrorClass::Numeric => 4,
    }
}

fn class_name(class: ErrorClass) -> &'static str {
    match class {
        ErrorClass::Input => "input",
        ErrorClass::NotApplicable => "not_applicable",
        ErrorClass::Numeric => "numeric",
    }
}

/// JSON record printed in place of a report when a command fails.
pub fn error_record(e: &Error) -> serde_json::Value {
    serde_json::json!({
        "status": "error",
        "class": class_name(e.class()),
        "message": e.to_string(),
    })
}

/// Runs a parsed command: prints the JSON record, writes the side files and returns the exit code.
pub fn run(cli: &Cli) -> anyhow::Result<i32> {
    let outcome = run_config(&cli.command).and_then(|rc| execute(&rc).map(|r| (rc, r)));
    match outcome {
        Ok((rc, report)) => {
            let text = serde_json::to_string_pretty(&report.json)?;
            if let Some(p) = rc.path("json") {
                std::fs::write(&p, format!("{text}\n"))
                    .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", p.display()))?;
            }
            if let (Some(p), Some(csv)) = (rc.path("csv"), report.csv) {
                std::fs::write(&p, csv).map_err(|e| anyhow::anyhow!("cannot write {}: {e}", p.display()))?;
            }
            print_stdout(&text)?;
            Ok(report.exit_code)
        }
        Err(e) => {
            print_stdout(&serde_json::to_string_pretty(&error_record(&e))?)?;
            eprintln!("hbern: {e}");
            Ok(exit_code(e.class()))
        }
    }
}

/// Prints a line to stdout; a closed pipe on the reading side is not an error.
fn print_stdout(text: &str) -> anyhow::Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

/// Sizes the global thread pool from `HBERN_THREADS` when set.
pub fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("HBERN_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| anyhow::anyhow!("HBERN_THREADS must be a positive integer"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}
