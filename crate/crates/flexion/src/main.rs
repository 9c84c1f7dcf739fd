//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when an analysis comes back negative
//! (inseparable assembly, stalled stepper, no admissible tolerance), 2 on
//! bad input or environment. Angles on the command line and in scene files
//! are radians.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use flexion::analyses::{
    flock_iterate, make_objective, suggest_cross_beam, tolerance_search, x_spread, FlockStepParams,
    ObjectiveSpec, ToleranceQuery, TrackedPoint,
};
use flexion::error::{AnalysisError, IoError, StepError};
use flexion::io::{load_scene, save_scene, write_svg, write_trace, ParsedScene, TraceFile};
use flexion::lp::SEPARATION_K;
use flexion::stepper::{flex_iterate, StepParams, StopReason};
use flexion::structures;
use flexion::{assemble, classify_separability, FlexError, Scene, Separability, Vec2};

#[derive(Parser)]
#[command(
    name = "flexion",
    version,
    about = "Free-motion analysis of planar rigid-body assemblies with loose joints"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a scene file and report its constraint census.
    Validate(ValidateArgs),
    /// Flex the assembly along an objective until convergence.
    Flex(FlexArgs),
    /// Decide whether any gross separating motion exists.
    Separate(SeparateArgs),
    /// Bisect for the largest joint tolerance under a flex threshold.
    Tolerance(ToleranceArgs),
    /// Compress the scene's flock toward its leader's column.
    Flock(FlockArgs),
    /// Report a cross-beam endpoint pair from a flex trace.
    Brace(BraceArgs),
    /// Time assembly and flexing on generated grid structures.
    Bench(BenchArgs),
}

#[derive(Args)]
struct ValidateArgs {
    scene: PathBuf,
    /// Render the parsed scene to an SVG file.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct ObjectiveArgs {
    /// Push along this direction, e.g. `--direction 1,0`.
    #[arg(long, value_parser = parse_vec2, conflicts_with_all = ["radial", "objective"])]
    direction: Option<Vec2>,
    /// Restrict `--direction` to these bodies (default: all free bodies).
    #[arg(long)]
    body: Vec<String>,
    /// Push every free body outward from the free centroid mean.
    #[arg(long, conflicts_with = "objective")]
    radial: bool,
    /// Override the radial center, e.g. `--center 0.5,0.5`.
    #[arg(long, value_parser = parse_vec2, requires = "radial")]
    center: Option<Vec2>,
    /// Read the objective spec from a JSON file instead.
    #[arg(long)]
    objective: Option<PathBuf>,
}

impl ObjectiveArgs {
    fn resolve(&self, scene: &Scene) -> Result<ObjectiveSpec, CliError> {
        if let Some(path) = &self.objective {
            let text = std::fs::read_to_string(path).map_err(IoError::from)?;
            return Ok(serde_json::from_str(&text).map_err(IoError::from)?);
        }
        if self.radial {
            return Ok(ObjectiveSpec::Radial {
                center: self.center,
            });
        }
        let direction = self.direction.unwrap_or(Vec2::new(1.0, 0.0));
        let bodies = self
            .body
            .iter()
            .map(|name| body_index(scene, name))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ObjectiveSpec::Direction { direction, bodies })
    }
}

#[derive(Args)]
struct FlexArgs {
    scene: PathBuf,
    #[command(flatten)]
    objective: ObjectiveArgs,
    /// Per-step violation budget.
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Write the full iteration trace to a JSON file.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Render initial and final configurations to an SVG file.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Save the flexed scene to a JSON file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SeparateArgs {
    scene: PathBuf,
    /// Translation-sum target the escape probe must reach.
    #[arg(long, default_value_t = SEPARATION_K)]
    k: f64,
}

#[derive(Args)]
struct ToleranceArgs {
    scene: PathBuf,
    /// Largest inset considered.
    #[arg(long)]
    t_max: f64,
    /// Flex-metric threshold the assembly must stay under.
    #[arg(long)]
    threshold: f64,
    /// Body whose motion is the metric: NAME or NAME:x,y (local point).
    #[arg(long)]
    track: String,
    #[command(flatten)]
    objective: ObjectiveArgs,
    /// Bisection stops when the bracket is this tight.
    #[arg(long, default_value_t = 1e-3)]
    bisect_tol: f64,
}

#[derive(Args)]
struct FlockArgs {
    scene: PathBuf,
    /// Violation budget during stepping.
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BraceArgs {
    /// Scene file of the nominal (unflexed) assembly.
    scene: PathBuf,
    /// Trace file of a flex run over that scene.
    trace: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Block counts to generate (frame adds one fixed body each).
    #[arg(long, default_values_t = [10usize, 36])]
    n: Vec<usize>,
    /// Uniform joint gap of the generated structures.
    #[arg(long, default_value_t = 0.05)]
    gap: f64,
}

/// Errors that end the run with exit code 2.
#[derive(Debug)]
enum CliError {
    Flex(FlexError),
    Message(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Flex(e) => e.fmt(f),
            CliError::Message(m) => f.write_str(m),
        }
    }
}

impl From<FlexError> for CliError {
    fn from(e: FlexError) -> CliError {
        CliError::Flex(e)
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> CliError {
        CliError::Flex(e.into())
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> CliError {
        CliError::Flex(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Validate(args) => validate(args),
        Command::Flex(args) => flex(args),
        Command::Separate(args) => separate(args),
        Command::Tolerance(args) => tolerance(args),
        Command::Flock(args) => flock(args),
        Command::Brace(args) => brace(args),
        Command::Bench(args) => bench(args),
    }
}

fn load(path: &Path) -> Result<ParsedScene, CliError> {
    let parsed = load_scene(path)?;
    for warning in &parsed.warnings {
        eprintln!("warning: {warning}");
    }
    Ok(parsed)
}

fn body_index(scene: &Scene, name: &str) -> Result<usize, CliError> {
    scene
        .find_body(name)
        .ok_or_else(|| CliError::Flex(AnalysisError::UnknownBody(name.to_string()).into()))
}

fn parse_vec2(text: &str) -> Result<Vec2, String> {
    let (x, y) = text
        .split_once(',')
        .ok_or_else(|| format!("expected X,Y but got {text:?}"))?;
    let x: f64 = x.trim().parse().map_err(|e| format!("bad x: {e}"))?;
    let y: f64 = y.trim().parse().map_err(|e| format!("bad y: {e}"))?;
    if !(x.is_finite() && y.is_finite()) {
        return Err("components must be finite".into());
    }
    Ok(Vec2::new(x, y))
}

/// NAME or NAME:x,y; the point is in the body's local frame.
fn parse_track(scene: &Scene, text: &str) -> Result<TrackedPoint, CliError> {
    let (name, local) = match text.split_once(':') {
        Some((name, point)) => (name, parse_vec2(point).map_err(CliError::Message)?),
        None => (text, Vec2::ZERO),
    };
    Ok(TrackedPoint {
        body: body_index(scene, name)?,
        local,
    })
}

fn reason_label(reason: StopReason) -> &'static str {
    match reason {
        StopReason::Converged => "converged",
        StopReason::MaxIters => "iteration budget exhausted",
        StopReason::LpUnbounded => "LP unbounded",
        StopReason::Stalled => "stalled (no feasible step scale)",
    }
}

fn validate(args: ValidateArgs) -> Result<ExitCode, CliError> {
    let parsed = load(&args.scene)?;
    let scene = &parsed.scene;
    let free = scene.bodies.iter().filter(|b| !b.fixed).count();
    let system = assemble(scene)?;
    let nnz: usize = system.jacobian.rows().map(|r| r.len()).sum();
    println!("bodies: {} ({} free)", scene.bodies.len(), free);
    println!("epsilon: {}", scene.epsilon);
    println!(
        "constraints: {} rows x {} columns, {} non-zeros",
        system.nrows(),
        system.ncols(),
        nnz
    );
    let min_d0 = system.d0.iter().copied().fold(f64::INFINITY, f64::min);
    if min_d0.is_finite() {
        println!("min initial distance: {min_d0:.6}");
    }
    if let Some(flock) = &parsed.flock {
        println!(
            "flock: {} robots, leader {}",
            flock.robots.len(),
            flock.leader
        );
    }
    if let Some(path) = &args.svg {
        write_svg(path, scene, None)?;
        println!("svg: {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn flex(args: FlexArgs) -> Result<ExitCode, CliError> {
    let parsed = load(&args.scene)?;
    let spec = args.objective.resolve(&parsed.scene)?;
    let objective = make_objective(&parsed.scene, &spec)?;
    let mut params = StepParams {
        bounds: parsed.bounds,
        ..StepParams::default()
    };
    if let Some(eta) = args.eta {
        params.eta = eta;
    }
    if let Some(n) = args.max_iters {
        params.max_iters = n;
    }

    let out = match flex_iterate(&parsed.scene, &objective, &params) {
        Ok(out) => out,
        Err(FlexError::Step(StepError::Infeasible)) => {
            println!("infeasible at the initial configuration");
            return Ok(ExitCode::from(1));
        }
        Err(e) => return Err(e.into()),
    };

    for (i, rec) in out.trace.iterations.iter().enumerate() {
        println!(
            "iter {:>3}: gain {:>12.6} scale {:<6} violation {:.3e}",
            i + 1,
            rec.objective,
            rec.scale,
            rec.violation
        );
    }
    println!(
        "stop: {} after {} iterations ({:.3}s)",
        reason_label(out.trace.reason),
        out.trace.iterations.len(),
        out.trace.timings.total
    );
    report_motion(&parsed.scene, &out.scene);

    if let Some(path) = &args.trace {
        write_trace(
            path,
            &TraceFile::capture(&parsed, &objective, &params, &out.trace),
        )?;
        println!("trace: {}", path.display());
    }
    if let Some(path) = &args.svg {
        write_svg(path, &parsed.scene, Some(&out.scene))?;
        println!("svg: {}", path.display());
    }
    if let Some(path) = &args.out {
        save_scene(path, &out.scene, parsed.bounds, parsed.flock.as_ref())?;
        println!("scene: {}", path.display());
    }
    let code = match out.trace.reason {
        StopReason::Stalled => 1,
        _ => 0,
    };
    Ok(ExitCode::from(code))
}

fn report_motion(before: &Scene, after: &Scene) {
    for (a, b) in before.bodies.iter().zip(&after.bodies) {
        if a.fixed {
            continue;
        }
        println!(
            "{}: dx {:+.6} dy {:+.6} dtheta {:+.6}",
            a.name,
            b.pose.x - a.pose.x,
            b.pose.y - a.pose.y,
            b.pose.theta - a.pose.theta
        );
    }
}

fn separate(args: SeparateArgs) -> Result<ExitCode, CliError> {
    if !(args.k.is_finite() && args.k > 0.0) {
        return Err(CliError::Message("k must be positive and finite".into()));
    }
    let parsed = load(&args.scene)?;
    match classify_separability(&parsed.scene, args.k)? {
        Separability::Separable { sign, displacement } => {
            println!("separable (translation sum pushed {sign})");
            let v = displacement.values();
            let free = parsed.scene.bodies.iter().filter(|b| !b.fixed);
            for (block, body) in free.enumerate() {
                println!(
                    "{}: escape direction ({:+.6}, {:+.6})",
                    body.name,
                    v[3 * block],
                    v[3 * block + 1]
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Separability::Inseparable => {
            println!("inseparable under linear model");
            Ok(ExitCode::from(1))
        }
    }
}

fn tolerance(args: ToleranceArgs) -> Result<ExitCode, CliError> {
    let parsed = load(&args.scene)?;
    let query = ToleranceQuery {
        t_max: args.t_max,
        threshold: args.threshold,
        objective: args.objective.resolve(&parsed.scene)?,
        track: parse_track(&parsed.scene, &args.track)?,
        bisect_tol: args.bisect_tol,
        params: StepParams {
            bounds: parsed.bounds,
            ..StepParams::default()
        },
    };
    let report = tolerance_search(&parsed.scene, &query)?;
    for probe in &report.probes {
        println!(
            "probe t {:<10.6} metric {:.6}",
            probe.inset, probe.displacement
        );
    }
    if !report.monotone {
        eprintln!("warning: metric was not monotone over the probes; t* is approximate");
    }
    match report.t_star {
        Some(t) => {
            println!("max tolerance: {t:.6}");
            Ok(ExitCode::SUCCESS)
        }
        None => {
            println!("no admissible tolerance: flex exceeds the threshold at t = 0");
            Ok(ExitCode::from(1))
        }
    }
}

fn flock(args: FlockArgs) -> Result<ExitCode, CliError> {
    let parsed = load(&args.scene)?;
    let Some(spec) = parsed.flock.clone() else {
        return Err(CliError::Message(format!(
            "{} has no flock block",
            args.scene.display()
        )));
    };
    let mut params = FlockStepParams::default();
    if let Some(eta) = args.eta {
        params.eta = eta;
    }
    if let Some(n) = args.max_iters {
        params.max_iters = n;
    }

    let before = x_spread(&parsed.scene);
    let out = match flock_iterate(&parsed.scene, &spec, &params) {
        Ok(out) => out,
        Err(FlexError::Step(StepError::Infeasible)) => {
            println!("infeasible at the initial configuration");
            return Ok(ExitCode::from(1));
        }
        Err(e) => return Err(e.into()),
    };
    let after = x_spread(&out.scene);

    println!(
        "x-spread: {before:.6} -> {after:.6} ({:.1}% of initial)",
        100.0 * after / before.max(1e-12)
    );
    println!(
        "stop: {} after {} iterations ({:.3}s)",
        reason_label(out.trace.reason),
        out.trace.iterations.len(),
        out.trace.timings.total
    );

    if let Some(path) = &args.trace {
        // The pipeline regenerates the leader objective each iteration;
        // the echo records the initial one.
        let objective = make_objective(
            &parsed.scene,
            &ObjectiveSpec::LeaderX {
                leader: spec.leader,
            },
        )?;
        write_trace(
            path,
            &TraceFile::capture(&parsed, &objective, &params, &out.trace),
        )?;
        println!("trace: {}", path.display());
    }
    if let Some(path) = &args.svg {
        write_svg(path, &parsed.scene, Some(&out.scene))?;
        println!("svg: {}", path.display());
    }
    if let Some(path) = &args.out {
        save_scene(path, &out.scene, parsed.bounds, Some(&spec))?;
        println!("scene: {}", path.display());
    }
    let code = match out.trace.reason {
        StopReason::Stalled => 1,
        _ => 0,
    };
    Ok(ExitCode::from(code))
}

fn brace(args: BraceArgs) -> Result<ExitCode, CliError> {
    let parsed = load(&args.scene)?;
    let trace = flexion::io::read_trace(&args.trace)?;
    let Some(poses) = trace.final_poses() else {
        return Err(CliError::Message("trace records no iterations".into()));
    };
    if poses.len() != parsed.scene.bodies.len() {
        return Err(CliError::Message(format!(
            "trace has {} poses but the scene has {} bodies",
            poses.len(),
            parsed.scene.bodies.len()
        )));
    }
    let flexed = parsed.scene.with_poses(poses);
    let suggestion = suggest_cross_beam(&parsed.scene, &flexed)?;
    let a = &parsed.scene.bodies[suggestion.a.body];
    let b = &parsed.scene.bodies[suggestion.b.body];
    println!(
        "brace {} vertex {} to {} vertex {}",
        a.name, suggestion.a.vertex, b.name, suggestion.b.vertex
    );
    println!(
        "distance {:.6} -> {:.6} (stretch {:.6})",
        suggestion.initial, suggestion.flexed, suggestion.stretch
    );
    Ok(ExitCode::SUCCESS)
}

fn bench(args: BenchArgs) -> Result<ExitCode, CliError> {
    if args.n.is_empty() {
        return Err(CliError::Message("need at least one --n".into()));
    }
    println!(
        "{:>6} {:>8} {:>8} {:>8} {:>6} {:>10} {:>10}",
        "bodies", "rows", "cols", "nnz", "iters", "assemble_s", "flex_s"
    );
    for &n in &args.n {
        if n < 2 {
            return Err(CliError::Message("--n must be at least 2".into()));
        }
        let scene = structures::grid_structure(n, args.gap);
        let t0 = Instant::now();
        let system = assemble(&scene)?;
        let assemble_s = t0.elapsed().as_secs_f64();
        let nnz: usize = system.jacobian.rows().map(|r| r.len()).sum();

        let objective = make_objective(
            &scene,
            &ObjectiveSpec::Direction {
                direction: Vec2::new(1.0, 0.0),
                bodies: vec![],
            },
        )?;
        let t0 = Instant::now();
        let out = flex_iterate(&scene, &objective, &StepParams::default())?;
        let flex_s = t0.elapsed().as_secs_f64();
        println!(
            "{:>6} {:>8} {:>8} {:>8} {:>6} {:>10.3} {:>10.3}",
            scene.bodies.len(),
            system.nrows(),
            system.ncols(),
            nnz,
            out.trace.iterations.len(),
            assemble_s,
            flex_s
        );
    }
    Ok(ExitCode::SUCCESS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vec2_and_track_parsing() {
        assert_eq!(parse_vec2("1,0").unwrap(), Vec2::new(1.0, 0.0));
        assert_eq!(parse_vec2(" -0.5 , 2.5 ").unwrap(), Vec2::new(-0.5, 2.5));
        assert!(parse_vec2("1").is_err());
        assert!(parse_vec2("nan,0").is_err());

        let scene = structures::two_squares(0.1);
        let t = parse_track(&scene, "right").unwrap();
        assert_eq!((t.body, t.local), (1, Vec2::ZERO));
        let t = parse_track(&scene, "right:0.5,-0.5").unwrap();
        assert_eq!((t.body, t.local), (1, Vec2::new(0.5, -0.5)));
        assert!(parse_track(&scene, "middle").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
