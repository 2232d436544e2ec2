//! The `netheat` command line.
//!
//! Exit codes: 0 on success, 1 when an analysis fails (theorem check,
//! maximum principle, incidence suite), 2 on usage, parse or I/O errors.
//! Output files are written atomically into `--out`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::connectivity::{count_invariant_ideals, delta_components, is_irreducible, Irreducibility};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::graph::Graph;
use crate::heat::{self, MassMode};
use crate::incidence;
use crate::spectral::{self, MultiplicityMode};

const DEFAULTS: &str = "\
Defaults: --n 32 segments per edge, --dt 1e-3, --T 0.1, --tol 1e-9 (rank threshold \
relative to the Laplacian norm), --mass lumped, --mode fin, --seed 0, --out ./out, \
--theta 1e-10 (support threshold; the initial bump has max 1), --samples 1000.
Fixed thresholds: continuity tolerance 1e-9 relative to max|psi|; heat outside the \
starting edge's finite span must stay below 1e-12 * max|u0|; power-iteration \
tolerance 1e-10.";

#[derive(Debug, Parser)]
#[command(name = "netheat", version, about = "Finite spans, heat flow and spectra on networks with infinite-degree nodes", after_help = DEFAULTS)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Δ-component partition (finite spans) as JSON.
    Components(GraphArgs),
    /// Irreducibility verdict with a certificate when reducible.
    Irreducible(GraphArgs),
    /// Number of minimal invariant ideals.
    Ideals(GraphArgs),
    /// Smallest eigenvalues of the discretized network Laplacian.
    Spectrum(GraphArgs),
    /// Combinatorial Laplacian Δ_fin ⊕ 0 and the multiplicity of 0.
    Laplacian(GraphArgs),
    /// Compare span count, G_fin components and dim ker Δ_fin.
    CheckTheorem(GraphArgs),
    /// Heat flow from a bump on --edge plus a maximum-principle report.
    Simulate(GraphArgs),
    /// Incidence-operator property suite (norm bounds, contraction, truncation).
    VerifyIncidence(GraphArgs),
    /// Write the built-in fixture gallery as graph JSON files.
    Fixtures(RunArgs),
}

#[derive(Debug, Args)]
struct GraphArgs {
    /// Graph JSON file.
    graph: PathBuf,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MassArg {
    Lumped,
    Consistent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Fin,
    Full,
}

#[derive(Debug, Clone, Args)]
struct RunArgs {
    /// Segments per edge.
    #[arg(long, default_value_t = 32)]
    n: usize,
    /// Time step.
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Final time.
    #[arg(long = "T", default_value_t = 0.1)]
    t_end: f64,
    /// Starting edge for `simulate`.
    #[arg(long)]
    edge: Option<String>,
    /// Relative rank / eigensolver tolerance.
    #[arg(long, default_value_t = spectral::DEFAULT_RANK_TOL)]
    tol: f64,
    /// Support threshold for `simulate`.
    #[arg(long, default_value_t = 1e-10)]
    theta: f64,
    #[arg(long, value_enum, default_value_t = MassArg::Lumped)]
    mass: MassArg,
    /// Zero multiplicity of Δ_fin alone (fin) or of Δ_fin ⊕ 0 (full).
    #[arg(long, value_enum, default_value_t = ModeArg::Fin)]
    mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of eigenvalues for `spectrum` (default: min(6, DOF)).
    #[arg(long)]
    k: Option<usize>,
    /// Random vectors per operator for `verify-incidence`.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

/// Validated run parameters.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub edge: Option<String>,
    pub tol: f64,
    pub theta: f64,
    pub mass: MassMode,
    pub mode: MultiplicityMode,
    pub seed: u64,
    pub k: Option<usize>,
    pub samples: usize,
    pub out: PathBuf,
}

impl TryFrom<RunArgs> for RunConfig {
    type Error = Error;

    fn try_from(a: RunArgs) -> Result<RunConfig> {
        let positive = |name, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(Error::param(name, "must be positive and finite"))
            }
        };
        if a.n < 2 {
            return Err(Error::param("n", "need at least 2 segments per edge"));
        }
        if !(a.theta >= 0.0 && a.theta.is_finite()) {
            return Err(Error::param("theta", "must be nonnegative and finite"));
        }
        if a.samples == 0 {
            return Err(Error::param("samples", "must be at least 1"));
        }
        if a.k == Some(0) {
            return Err(Error::param("k", "must be at least 1"));
        }
        Ok(RunConfig {
            n: a.n,
            dt: positive("dt", a.dt)?,
            t_end: positive("T", a.t_end)?,
            edge: a.edge,
            tol: positive("tol", a.tol)?,
            theta: a.theta,
            mass: match a.mass {
                MassArg::Lumped => MassMode::Lumped,
                MassArg::Consistent => MassMode::Consistent,
            },
            mode: match a.mode {
                ModeArg::Fin => MultiplicityMode::FinOnly,
                ModeArg::Full => MultiplicityMode::WithZeroBlock,
            },
            seed: a.seed,
            k: a.k,
            samples: a.samples,
            out: a.out,
        })
    }
}

enum Outcome {
    Pass,
    Fail,
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(Outcome::Pass) => 0,
        Ok(Outcome::Fail) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn load(path: &Path) -> Result<Graph> {
    let text = fs::read_to_string(path)?;
    Graph::from_json(&text)
}

fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(dir.join(name)).map_err(|e| e.error)?;
    Ok(())
}

fn emit_json(cfg: &RunConfig, name: &str, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(&cfg.out, name, text.as_bytes())?;
    print!("{text}");
    Ok(())
}

fn dispatch(command: Command) -> Result<Outcome> {
    match command {
        Command::Fixtures(args) => {
            let cfg = RunConfig::try_from(args)?;
            for (name, g) in fixtures::gallery() {
                let mut text = g.to_json();
                text.push('\n');
                write_atomic(&cfg.out, &format!("{name}.json"), text.as_bytes())?;
                println!("{}", cfg.out.join(format!("{name}.json")).display());
            }
            Ok(Outcome::Pass)
        }
        Command::Components(a) => with_graph(a, components),
        Command::Irreducible(a) => with_graph(a, irreducible),
        Command::Ideals(a) => with_graph(a, ideals),
        Command::Spectrum(a) => with_graph(a, spectrum),
        Command::Laplacian(a) => with_graph(a, laplacian),
        Command::CheckTheorem(a) => with_graph(a, check_theorem),
        Command::Simulate(a) => with_graph(a, simulate),
        Command::VerifyIncidence(a) => with_graph(a, verify_incidence),
    }
}

fn with_graph(args: GraphArgs, f: fn(&Graph, &RunConfig) -> Result<Outcome>) -> Result<Outcome> {
    let cfg = RunConfig::try_from(args.run)?;
    let g = load(&args.graph)?;
    f(&g, &cfg)
}

fn components(g: &Graph, cfg: &RunConfig) -> Result<Outcome> {
    let mut text = delta_components(g).to_json(g);
    text.push('\n');
    write_atomic(&cfg.out, "components.json", text.as_bytes())?;
    print!("{text}");
    Ok(Outcome::Pass)
}

fn irreducible(g: &Graph, cfg: &RunConfig) -> Result<Outcome> {
    let doc = match is_irreducible(g)? {
        Irreducibility::Irreducible => json!({ "irreducible": true, "certificate": null }),
        Irreducibility::Reducible {
            edge_a,
            edge_b,
            separator,
            blocks,
        } => json!({
            "irreducible": false,
            "certificate": {
                "edge_a": g.edge(edge_a).id,
                "edge_b": g.edge(edge_b).id,
                "separator": g.vertex_ids(&separator),
                "blocks": blocks,
            }
        }),
    };
    emit_json(cfg, "irreducible.json", &doc)?;
    Ok(Outcome::Pass)
}

fn ideals(g: &Graph, cfg: &RunConfig) -> Result<Outcome> {
    emit_json(cfg, "ideals.json", &json!({ "invariant_ideals": count_invariant_ideals(g) }))?;
    Ok(Outcome::Pass)
}

fn spectrum(g: &Graph, cfg: &RunConfig) -> Result<Outcome> {
    let mesh = heat::build_mesh(g, cfg.n)?;
    let pair = heat::assemble(&mesh, cfg.mass);
    let k = cfg.k.unwrap_or_else(|| mesh.dof_count().min(6));
    let eig = spectral::network_spectrum(&pair, k, cfg.tol)?;
    let mut buf = Vec::new();
    spectral::write_spectrum_csv(&eig, &mut buf)?;
    write_atomic(&cfg.out, "spectrum.csv", &buf)?;
    std::io::stdout().write_all(&buf)?;
    Ok(Outcome::Pass)
}

fn laplacian(g: &Graph, cfg: &RunConfig) -> Result<Outcome> {
    let l = spectral::combinatorial_laplacian(g);
    let mult = spectral::zero_multiplicity(&l, cfg.mode, cfg.tol)?;
    let full = l.full();
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(["row", "col", "value"])?;
    for i in 0..full.nrows() {
        for j in 0..full.ncols() {
            if full[(i, j)] != 0.0 {
                w.write_record([&g.vertex(i).id, &g.vertex(j).id, &full[(i, j)].to_string()])?;
            }
        }
    }
    let buf = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    write_atomic(&cfg.out, "laplacian.csv", &buf)?;
    let doc = json!({
        "fin_vertices": g.vertex_ids(&l.fin_vertices),
        "infinite_vertices": g.vertex_ids(&l.inf_vertices),
        "mode": match cfg.mode { MultiplicityMode::FinOnly => "fin", MultiplicityMode::WithZeroBlock => "full" },
        "zero_multiplicity": mult,
    });
    emit_json(cfg, "laplacian.json", &doc)?;
    Ok(Outcome::Pass)
}

fn check_theorem(g: &Graph, cfg: &RunConfig) -> Result<Outcome> {
    let report = spectral::check_component_theorem(g, cfg.tol)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    emit_json(cfg, "theorem.json", &serde_json::to_value(&report)?)?;
    Ok(if report.pass { Outcome::Pass } else { Outcome::Fail })
}

fn simulate(g: &Graph, cfg: &RunConfig) -> Result<Outcome> {
    let edge = cfg
        .edge
        .as_deref()
        .ok_or_else(|| Error::param("edge", "simulate requires --edge <id>"))?;
    let e0 = g.edge_idx(edge)?;
    let mesh = heat::build_mesh(g, cfg.n)?;
    let pair = heat::assemble(&mesh, cfg.mass);
    let trajectory = heat::evolve(&pair, &heat::edge_bump(&mesh, e0), cfg.dt, cfg.t_end)?;
    let mut buf = Vec::new();
    heat::write_trajectory_csv(&trajectory, &mut buf)?;
    write_atomic(&cfg.out, "trajectory.csv", &buf)?;

    let report = heat::verify_strong_max_principle(g, edge, cfg.n, cfg.dt, cfg.t_end, cfg.theta)?;
    emit_json(cfg, "max_principle.json", &serde_json::to_value(&report)?)?;
    Ok(if report.pass { Outcome::Pass } else { Outcome::Fail })
}

fn verify_incidence(g: &Graph, cfg: &RunConfig) -> Result<Outcome> {
    let rows = incidence::property_suite(g, cfg.samples, cfg.seed, 1e-10)?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for row in &rows {
        w.serialize(row)?;
    }
    let buf = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    write_atomic(&cfg.out, "incidence.csv", &buf)?;
    std::io::stdout().write_all(&buf)?;
    Ok(if rows.iter().all(|r| r.pass) { Outcome::Pass } else { Outcome::Fail })
}
