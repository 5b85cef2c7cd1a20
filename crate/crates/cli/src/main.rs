use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use inversive::flow::{format_real, run_flow, EventKind, FlowError, FlowKind, FlowOutcome, FlowSpec, FlowTrace, Integrator};
use inversive::potential::{newton_solve, PotentialError, Target};
use inversive::surface::{load_mesh, load_radii, radii_to_json, SurfaceError, WeightRegime, WeightedTriangulation};
use inversive::{curvature, tetra, Geometry};
use rayon::prelude::*;
use serde::Deserialize;

const EXIT_IO: u8 = 1;
const EXIT_PRECONDITION: u8 = 2;
const EXIT_SINGULARITY: u8 = 3;
const EXIT_HORIZON: u8 = 4;

#[derive(Parser)]
#[command(name = "inversive", version, about = "Inversive distance circle packings: curvature, flows and Newton solves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the triangulation and the weights; prints V, E, F, chi and the weight verdict.
    Validate {
        #[command(flatten)]
        mesh: MeshArgs,
    },
    /// Per-vertex curvature table followed by the Gauss-Bonnet residual.
    Curvature {
        #[command(flatten)]
        mesh: MeshArgs,
        #[arg(long)]
        radii: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        /// Use the constant extension of the angles on degenerate faces.
        #[arg(long)]
        extended: bool,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate a curvature flow; writes trace.csv, events.json and final_radii.json.
    Flow(FlowArgs),
    /// Newton's method on the potential for a prescribed (or average) target.
    Solve {
        #[command(flatten)]
        mesh: MeshArgs,
        #[arg(long)]
        radii: PathBuf,
        /// JSON file `{"target": [...]}`; the average curvature is used when omitted.
        #[arg(long)]
        target: Option<PathBuf>,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        /// Write the final radii here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Eigenvalues of the discrete Laplacian at a Euclidean metric.
    Spectrum {
        #[command(flatten)]
        mesh: MeshArgs,
        #[arg(long)]
        radii: PathBuf,
    },
    /// The tetrahedron with two non-proportional constant-curvature metrics.
    ExampleTetra {
        /// Directory for f_curve.csv.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct MeshArgs {
    /// Mesh JSON file.
    mesh: PathBuf,
    /// Override the geometry declared in the mesh file.
    #[arg(long, value_enum)]
    geometry: Option<GeometryArg>,
    /// Override the weight regime declared in the mesh file.
    #[arg(long, value_enum)]
    regime: Option<RegimeArg>,
}

#[derive(Args)]
struct FlowArgs {
    #[command(flatten)]
    mesh: MeshArgs,
    /// Initial radii; repeat the flag to run a sweep.
    #[arg(long, required = true)]
    radii: Vec<PathBuf>,
    #[arg(long, default_value = "normalized-euclidean")]
    kind: FlowKind,
    /// JSON file `{"target": [...]}` for the prescribed-curvature flows.
    #[arg(long)]
    target: Option<PathBuf>,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    #[arg(long, default_value_t = 100.0)]
    tmax: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value = "rk4")]
    integrator: Integrator,
    /// Output directory; a sweep writes one numbered subdirectory per run.
    #[arg(long, default_value = "flow-out")]
    out: PathBuf,
    /// Worker threads for a sweep.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum GeometryArg {
    Euclidean,
    Hyperbolic,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    Nonnegative,
    ExtendedNote,
}

/// An error together with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn io(error: impl Into<anyhow::Error>) -> Self {
        Failure { code: EXIT_IO, error: error.into() }
    }

    fn precondition(error: impl Into<anyhow::Error>) -> Self {
        Failure { code: EXIT_PRECONDITION, error: error.into() }
    }
}

impl From<SurfaceError> for Failure {
    fn from(e: SurfaceError) -> Self {
        // The message already names the underlying cause; keep the chain flat.
        let flat = anyhow!(e.to_string());
        match e {
            SurfaceError::Io { .. } | SurfaceError::Parse(_) => Failure::io(flat),
            SurfaceError::Topology(_) | SurfaceError::Weight(_) => Failure::precondition(flat),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { mesh } => validate(&mesh),
        Command::Curvature { mesh, radii, alpha, extended, out } => curvature_table(&mesh, &radii, alpha, extended, out),
        Command::Flow(args) => flow(&args),
        Command::Solve { mesh, radii, target, alpha, out } => solve(&mesh, &radii, target.as_deref(), alpha, out),
        Command::Spectrum { mesh, radii } => spectrum(&mesh, &radii),
        Command::ExampleTetra { out } => example_tetra(&out),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

struct Loaded {
    surface: WeightedTriangulation,
    regime: WeightRegime,
}

/// Reads the mesh and applies the geometry and regime overrides.
fn load(args: &MeshArgs) -> Result<Loaded, Failure> {
    let doc = load_mesh(&args.mesh)?;
    let surface = match args.geometry {
        Some(GeometryArg::Euclidean) => doc.surface.with_geometry(Geometry::Euclidean),
        Some(GeometryArg::Hyperbolic) => doc.surface.with_geometry(Geometry::Hyperbolic),
        None => doc.surface,
    };
    let regime = match args.regime {
        Some(RegimeArg::Nonnegative) => WeightRegime::Nonnegative,
        Some(RegimeArg::ExtendedNote) => WeightRegime::ExtendedNote,
        None => doc.regime.unwrap_or_default(),
    };
    Ok(Loaded { surface, regime })
}

/// Like [`load`], but weights outside the regime are an error.
fn load_checked(args: &MeshArgs) -> Result<WeightedTriangulation, Failure> {
    let loaded = load(args)?;
    let report = loaded.surface.validate_weights(loaded.regime);
    if let Some(v) = report.violations.first() {
        return Err(Failure::precondition(anyhow!("weights fail the {} regime: {v}", loaded.regime)));
    }
    Ok(loaded.surface)
}

fn radii_for(surface: &WeightedTriangulation, path: &Path) -> Result<Vec<f64>, Failure> {
    let radii = load_radii(path)?;
    if radii.len() != surface.vertex_count() {
        return Err(Failure::precondition(anyhow!(
            "{} holds {} radii but the mesh has {} vertices",
            path.display(),
            radii.len(),
            surface.vertex_count()
        )));
    }
    Ok(radii)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TargetFile {
    target: Vec<f64>,
}

fn load_target(path: &Path, n: usize) -> Result<Vec<f64>, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("failed to read {}", path.display())).map_err(Failure::io)?;
    let file: TargetFile = serde_json::from_str(&text)
        .with_context(|| format!("failed to parse {}", path.display()))
        .map_err(Failure::io)?;
    if file.target.len() != n {
        return Err(Failure::precondition(anyhow!("target has {} entries, expected {n}", file.target.len())));
    }
    Ok(file.target)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("failed to write {}", path.display())).map_err(Failure::io),
        None => std::io::stdout().write_all(text.as_bytes()).context("failed to write to stdout").map_err(Failure::io),
    }
}

fn validate(args: &MeshArgs) -> Outcome {
    let loaded = match load(args) {
        Ok(l) => l,
        Err(f) if f.code == EXIT_PRECONDITION => {
            println!("invalid: {:#}", f.error);
            return Ok(EXIT_PRECONDITION);
        }
        Err(f) => return Err(f),
    };
    let s = &loaded.surface;
    let report = s.validate_weights(loaded.regime);
    println!(
        "V={} E={} F={} chi={} weights:{}",
        s.vertex_count(),
        s.edges().len(),
        s.faces().len(),
        s.euler_characteristic(),
        if report.passed() { "pass" } else { "fail" }
    );
    for v in &report.violations {
        println!("  {v}");
    }
    Ok(if report.passed() { 0 } else { EXIT_PRECONDITION })
}

fn curvature_table(args: &MeshArgs, radii_path: &Path, alpha: f64, extended: bool, out: Option<PathBuf>) -> Outcome {
    let surface = load_checked(args)?;
    let radii = radii_for(&surface, radii_path)?;
    let field = curvature::curvature(&surface, &radii, alpha, extended).map_err(Failure::precondition)?;
    let residual = curvature::gauss_bonnet_residual(&surface, &radii, extended).map_err(Failure::precondition)?;
    let mut text = String::from("i,r,K,R,R_alpha\n");
    for (i, r) in radii.iter().enumerate() {
        text.push_str(&format!(
            "{i},{},{},{},{}\n",
            format_real(*r),
            format_real(field.k[i]),
            format_real(field.r[i]),
            format_real(field.r_alpha[i])
        ));
    }
    text.push_str(&format!("# gauss_bonnet_residual,{}\n", format_real(residual)));
    emit(out.as_deref(), &text)?;
    Ok(0)
}

fn exit_code_for(status: EventKind) -> u8 {
    match status {
        EventKind::Converged => 0,
        EventKind::HorizonReached => EXIT_HORIZON,
        _ => EXIT_SINGULARITY,
    }
}

fn write_run(dir: &Path, trace: &FlowTrace, final_radii: Option<&[f64]>) -> Result<(), Failure> {
    fs::create_dir_all(dir).with_context(|| format!("failed to create {}", dir.display())).map_err(Failure::io)?;
    let write = |name: &str, text: &str| {
        let path = dir.join(name);
        fs::write(&path, text).with_context(|| format!("failed to write {}", path.display())).map_err(Failure::io)
    };
    write("trace.csv", &trace.to_csv())?;
    write("events.json", &trace.events_json())?;
    if let Some(r) = final_radii {
        write("final_radii.json", &radii_to_json(r))?;
    }
    Ok(())
}

/// Runs one flow, writes its artifacts and returns the exit code with a one-line summary.
fn one_flow(
    surface: &WeightedTriangulation,
    spec: &FlowSpec,
    radii_path: &Path,
    dir: &Path,
) -> Result<(u8, String), Failure> {
    let r0 = radii_for(surface, radii_path)?;
    match run_flow(surface, &r0, spec) {
        Ok(FlowOutcome { trace, metric, steps }) => {
            write_run(dir, &trace, Some(metric.radii()))?;
            let status = trace.terminal().map(|e| e.kind).unwrap_or(EventKind::HorizonReached);
            let t_end = trace.rows.last().map_or(0.0, |r| r.t);
            Ok((exit_code_for(status), format!("{}: {status:?} at t={t_end} after {steps} steps", radii_path.display())))
        }
        Err(FlowError::StepUnderflow { t, trace }) => {
            write_run(dir, &trace, None)?;
            Ok((EXIT_SINGULARITY, format!("{}: step size underflow at t={t}", radii_path.display())))
        }
        Err(e @ (FlowError::Spec(_) | FlowError::Inadmissible { .. } | FlowError::Curvature(_))) => {
            Err(Failure::precondition(e))
        }
    }
}

fn flow(args: &FlowArgs) -> Outcome {
    let surface = load_checked(&args.mesh)?;
    let mut spec = FlowSpec::new(args.kind)
        .with_alpha(args.alpha)
        .with_step(args.dt)
        .with_t_max(args.tmax)
        .with_tol(args.tol)
        .with_integrator(args.integrator);
    if let Some(path) = &args.target {
        spec = spec.with_target(load_target(path, surface.vertex_count())?);
    }
    spec.validate(&surface).map_err(Failure::precondition)?;
    if let Some(i) = spec.sign_violation() {
        eprintln!("warning: alpha * target > 0 at vertex {i}; convergence is not guaranteed");
    }

    if args.radii.len() == 1 {
        let (code, summary) = one_flow(&surface, &spec, &args.radii[0], &args.out)?;
        println!("{summary}");
        return Ok(code);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.max(1))
        .build()
        .map_err(Failure::io)?;
    let results: Vec<Result<(u8, String), Failure>> = pool.install(|| {
        args.radii
            .par_iter()
            .enumerate()
            .map(|(k, path)| one_flow(&surface, &spec, path, &args.out.join(format!("run-{k}"))))
            .collect()
    });
    // Worst outcome wins: precondition, then singularity, then horizon.
    let mut code = 0;
    for r in results {
        let c = match r {
            Ok((c, summary)) => {
                println!("{summary}");
                c
            }
            Err(f) => {
                eprintln!("error: {:#}", f.error);
                f.code
            }
        };
        let rank = |c: u8| match c {
            0 => 0,
            EXIT_HORIZON => 1,
            EXIT_SINGULARITY => 2,
            EXIT_PRECONDITION => 3,
            _ => 4,
        };
        if rank(c) > rank(code) {
            code = c;
        }
    }
    Ok(code)
}

fn solve(args: &MeshArgs, radii_path: &Path, target: Option<&Path>, alpha: f64, out: Option<PathBuf>) -> Outcome {
    let surface = load_checked(args)?;
    let r0 = radii_for(&surface, radii_path)?;
    let target = match target {
        Some(path) => Target::Prescribed(load_target(path, surface.vertex_count())?),
        None => Target::Average,
    };
    let report = match newton_solve(&surface, &r0, &target, alpha) {
        Ok(r) => r,
        Err(e @ (PotentialError::Inadmissible { .. }
        | PotentialError::Unsupported(_)
        | PotentialError::DimensionMismatch { .. }
        | PotentialError::OutsideDomain { .. })) => return Err(Failure::precondition(e)),
        Err(e) => return Err(Failure { code: EXIT_SINGULARITY, error: e.into() }),
    };
    if report.sign_warning {
        eprintln!("warning: alpha * target > 0 somewhere; the solution need not be unique");
    }
    eprintln!("iterations={} grad_norm={} gauged={}", report.iterations, format_real(report.grad_norm), report.gauged);
    emit(out.as_deref(), &(radii_to_json(report.metric.radii()) + "\n"))?;
    Ok(0)
}

fn spectrum(args: &MeshArgs, radii_path: &Path) -> Outcome {
    let surface = load_checked(args)?;
    let radii = radii_for(&surface, radii_path)?;
    let spec = curvature::laplacian_spectrum(&surface, &radii).map_err(Failure::precondition)?;
    let mut text = String::from("k,eigenvalue\n");
    for (k, v) in spec.eigenvalues.iter().enumerate() {
        text.push_str(&format!("{k},{}\n", format_real(*v)));
    }
    if let Some(gap) = spec.first_positive(1e-9) {
        text.push_str(&format!("# first_positive,{}\n", format_real(gap)));
    }
    emit(None, &text)?;
    Ok(0)
}

fn example_tetra(out: &Path) -> Outcome {
    let (a, b, n) = tetra::DEFAULT_CURVE;
    let points = tetra::emit_f_curve(a, b, n).map_err(Failure::io)?;
    fs::create_dir_all(out).with_context(|| format!("failed to create {}", out.display())).map_err(Failure::io)?;
    let csv_path = out.join("f_curve.csv");
    fs::write(&csv_path, tetra::f_curve_csv(&points))
        .with_context(|| format!("failed to write {}", csv_path.display()))
        .map_err(Failure::io)?;

    let root = tetra::find_second_root().map_err(Failure::io)?;
    let one = tetra::tetra_curvature(1.0).map_err(Failure::io)?;
    let at_root = tetra::tetra_curvature(root.x0).map_err(Failure::io)?;
    println!("f(1) = {}", format_real(tetra::f_of_x(1.0).map_err(Failure::io)?));
    println!("f(2) = {}", format_real(tetra::f_of_x(2.0).map_err(Failure::io)?));
    println!("x0 = {}  f(x0) = {}  bisection steps = {}", format_real(root.x0), format_real(root.f_x0), root.iterations);
    println!("R at (1, 1, 1, 1)     = {}  spread {}", format_real(one[0]), format_real(tetra::spread(&one)));
    println!(
        "R at (1, x0, x0, x0)  = {}  spread {}",
        format_real(root.curvature),
        format_real(tetra::spread(&at_root))
    );
    println!("curve written to {}", csv_path.display());
    Ok(0)
}
