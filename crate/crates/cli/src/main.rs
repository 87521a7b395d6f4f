//! `pathtower`: build balls and path towers, run the verification suites,
//! export artifacts.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid arguments,
//! 3 I/O error.

use std::fs;
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use pathtower::checks::{self, CheckParams, Suite};
use pathtower::padic::LatticeClassVertex;
use pathtower::{
    act, build_ball, build_path_graph, canonicalize, harmonic_space, induced_apartments, radon_transform, Cochain,
    Error, GroupElement, Level, PathGraph, Scalar, TreeBall, TreeParams,
};

const OUT_DIR_ENV: &str = "PATHTOWER_OUT_DIR";

#[derive(Parser)]
#[command(name = "pathtower", version, about = "Path towers over truncated homogeneous trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a ball and export it.
    Ball {
        #[command(flatten)]
        tree: TreeArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Build the path graph of level k and print its counts.
    Tower {
        #[command(flatten)]
        tree: TreeArgs,
        #[arg(long, default_value_t = 0)]
        k: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run a verification suite and print its JSON report.
    Check {
        /// euler, adjoint, radon-d, exactness, loops, primitive,
        /// equivariance, padic, stabilizer or span
        suite: String,
        #[command(flatten)]
        tree: TreeArgs,
        #[arg(long, default_value_t = 0)]
        k: usize,
        /// Interior margin, default k + 2.
        #[arg(long)]
        margin: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        samples: Option<usize>,
        /// Congruence level n of Γ0(p^(n+1)).
        #[arg(long, default_value_t = 0)]
        n: u32,
        /// Sampling modulus exponent m (entries mod p^m).
        #[arg(long, default_value_t = 6)]
        modulus: u32,
        /// Also write the report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write an artifact in its documented format.
    Export {
        #[arg(value_enum)]
        artifact: Artifact,
        #[command(flatten)]
        tree: TreeArgs,
        #[arg(long, default_value_t = 0)]
        k: usize,
        /// Edge cochain CSV to transform (radon only).
        #[arg(long)]
        omega: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Canonical lattice class of g·v, with g given inline as JSON.
    Act {
        #[arg(long, visible_alias = "p")]
        q: u64,
        /// e.g. '[["1/1","0/1"],["2/1","1/1"]]'
        #[arg(long)]
        g: String,
        /// Vertex (n, u); the root by default.
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        n: i64,
        #[arg(long, default_value = "0")]
        u: String,
    },
}

#[derive(Args)]
struct TreeArgs {
    #[arg(long, visible_alias = "p", default_value_t = 2)]
    q: usize,
    #[arg(long, default_value_t = 3)]
    radius: usize,
}

#[derive(Args)]
struct OutArgs {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file (a directory for multi-file exports). Without it, output
    /// goes to $PATHTOWER_OUT_DIR when set, else to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Csv,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Dot => "dot",
            Format::Csv => "csv",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Artifact {
    Ball,
    Tower,
    Harmonic,
    Apartments,
    Radon,
}

enum Failure {
    Verification(String),
    Invalid(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Invalid(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Verification(m) | Failure::Invalid(m) | Failure::Io(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type CliResult = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(command: Command) -> CliResult {
    match command {
        Command::Ball { tree, out } => {
            let ball = tree.build()?;
            let format = out.format.unwrap_or(Format::Json);
            let text = match format {
                Format::Json => ball.to_json(),
                Format::Dot => ball.to_dot(),
                Format::Csv => return Err(Failure::Invalid("balls export as json or dot".into())),
            };
            emit(&out, &format!("ball_q{}_r{}.{}", tree.q, tree.radius, format.extension()), &text)
        }
        Command::Tower { tree, k, out } => {
            let pg = build_path_graph(Arc::new(tree.build()?), k)?;
            to_stdout(&format!("V={} E={} C={}\n", pg.num_vertices(), pg.num_edges(), pg.components().count))?;
            let Some(format) = out.format else { return Ok(()) };
            let text = match format {
                Format::Json => pg.to_json(),
                Format::Dot => pg.to_dot(),
                Format::Csv => return Err(Failure::Invalid("towers export as json or dot".into())),
            };
            emit(&out, &format!("tower_q{}_r{}_k{k}.{}", tree.q, tree.radius, format.extension()), &text)
        }
        Command::Check { suite, tree, k, margin, seed, samples, n, modulus, out } => {
            let suite: Suite = suite.parse()?;
            let params = CheckParams { q: tree.q, radius: tree.radius, k, margin, seed, samples, n, modulus };
            let report = checks::run(suite, &params)?;
            let text = serde_json::to_string_pretty(&report).expect("serializable") + "\n";
            to_stdout(&text)?;
            if let Some(path) = out {
                write_file(&path, &text)?;
            }
            if report.passed {
                Ok(())
            } else {
                Err(Failure::Verification(format!("check {suite} failed")))
            }
        }
        Command::Export { artifact, tree, k, omega, out } => export(artifact, &tree, k, omega.as_deref(), &out),
        Command::Act { q, g, n, u } => {
            let g = GroupElement::from_json(&g)?;
            let u: Scalar = pathtower::scalar::parse_fraction(&u)?;
            let v = LatticeClassVertex::new(n, u, q);
            let image = act(&g, &v, q)?;
            let class = canonicalize(&g, q)?;
            let report = json!({
                "g": g.to_json_value(),
                "v": {"n": v.n, "u": pathtower::scalar::to_fraction_string(&v.u)},
                "image": {"n": image.n, "u": pathtower::scalar::to_fraction_string(&image.u)},
                "g_root": {"n": class.n, "u": pathtower::scalar::to_fraction_string(&class.u)},
            });
            to_stdout(&format!("{report}\n"))
        }
    }
}

impl TreeArgs {
    fn build(&self) -> std::result::Result<TreeBall, Failure> {
        Ok(build_ball(TreeParams::new(self.q, self.radius)?)?)
    }
}

fn tower_of(tree: &TreeArgs, k: usize) -> std::result::Result<PathGraph, Failure> {
    Ok(build_path_graph(Arc::new(tree.build()?), k)?)
}

fn export(artifact: Artifact, tree: &TreeArgs, k: usize, omega: Option<&Path>, out: &OutArgs) -> CliResult {
    let (q, r) = (tree.q, tree.radius);
    match artifact {
        Artifact::Ball => {
            let ball = tree.build()?;
            match out.format.unwrap_or(Format::Json) {
                Format::Json => emit(out, &format!("ball_q{q}_r{r}.json"), &ball.to_json()),
                Format::Dot => emit(out, &format!("ball_q{q}_r{r}.dot"), &ball.to_dot()),
                Format::Csv => Err(Failure::Invalid("balls export as json or dot".into())),
            }
        }
        Artifact::Tower => {
            let pg = tower_of(tree, k)?;
            match out.format.unwrap_or(Format::Json) {
                Format::Json => emit(out, &format!("tower_q{q}_r{r}_k{k}.json"), &pg.to_json()),
                Format::Dot => emit(out, &format!("tower_q{q}_r{r}_k{k}.dot"), &pg.to_dot()),
                Format::Csv => Err(Failure::Invalid("towers export as json or dot".into())),
            }
        }
        Artifact::Harmonic => {
            let pg = tower_of(tree, k)?;
            let dir = out_dir(out)?.ok_or_else(|| {
                Failure::Invalid(format!("harmonic export writes several files; pass --out DIR or set {OUT_DIR_ENV}"))
            })?;
            let basis = harmonic_space(&pg);
            fs::create_dir_all(&dir).map_err(|e| io_failure(&dir, e))?;
            let mut files = Vec::new();
            for (i, w) in basis.vectors.iter().enumerate() {
                let name = format!("harmonic_{i:04}.csv");
                write_file(&dir.join(&name), &w.to_csv())?;
                files.push(name);
            }
            let manifest = json!({
                "q": q, "radius": r, "k": k,
                "V": pg.num_vertices(), "E": pg.num_edges(), "C": pg.components().count,
                "dim": basis.dim(),
                "files": files,
            });
            write_file(&dir.join("manifest.json"), &(serde_json::to_string_pretty(&manifest).expect("json") + "\n"))
        }
        Artifact::Apartments => {
            let pg = tower_of(tree, k)?;
            let aps = induced_apartments(&pg, &pg.ball().enumerate_oriented_diameters())?;
            let manifest = json!({
                "q": q, "radius": r, "k": k,
                "count": aps.total(),
                "apartments": aps.manifest(pg.ball()),
            });
            let text = serde_json::to_string_pretty(&manifest).expect("json") + "\n";
            emit(out, &format!("apartments_q{q}_r{r}_k{k}.json"), &text)
        }
        Artifact::Radon => {
            let pg = tower_of(tree, k)?;
            let path = omega.ok_or_else(|| Failure::Invalid("radon export needs --omega FILE".into()))?;
            let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
            let w = Cochain::from_csv(&text)?;
            if w.level() != Level::Edge {
                return Err(Failure::Invalid("--omega must hold an edge cochain (kind E)".into()));
            }
            let aps = induced_apartments(&pg, &pg.ball().enumerate_oriented_diameters())?;
            let image = radon_transform(&pg, &aps, &w)?;
            emit(out, &format!("radon_q{q}_r{r}_k{k}.csv"), &image.to_csv())
        }
    }
}

fn out_dir(out: &OutArgs) -> std::result::Result<Option<PathBuf>, Failure> {
    Ok(out.out.clone().or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from)))
}

/// Writes to `--out`, else into `$PATHTOWER_OUT_DIR/name`, else stdout.
fn emit(out: &OutArgs, name: &str, text: &str) -> CliResult {
    if let Some(path) = &out.out {
        return write_file(path, text);
    }
    if let Some(dir) = std::env::var_os(OUT_DIR_ENV) {
        let dir = PathBuf::from(dir);
        fs::create_dir_all(&dir).map_err(|e| io_failure(&dir, e))?;
        return write_file(&dir.join(name), text);
    }
    if text.ends_with('\n') {
        to_stdout(text)
    } else {
        to_stdout(&format!("{text}\n"))
    }
}

/// A closed pipe on the reading side is not an error.
fn to_stdout(text: &str) -> CliResult {
    let mut lock = std::io::stdout().lock();
    match lock.write_all(text.as_bytes()).and_then(|_| lock.flush()) {
        Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(Failure::Io(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

fn write_file(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).map_err(|e| io_failure(path, e))
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}
