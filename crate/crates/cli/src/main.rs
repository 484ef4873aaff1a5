mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use hbvp::analysis::{
    barrier_check, corner_asymptote_check, disk_check, lipschitz_estimate, DiskCheckOptions, PairStrategy,
};
use hbvp::hilbert::metric_sample;
use hbvp::profile::{solve_profile_w, CoefficientFamily};
use hbvp::sector::solve_sector;
use hbvp::solver::{
    continuation_solve, default_schedule, gradient_cap_check, mesh_domain, ContinuationResult, Grading, Mesh,
    SolveOptions,
};
use hbvp::{ConvexDomain, DomainSpec, Point};

use output::{write_json, Report, Table, VERSIONS};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(hbvp::Error),
    Io(String),
}

impl From<hbvp::Error> for CliError {
    fn from(e: hbvp::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Core(e) => e.kind(),
            CliError::Io(_) => "io",
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) | CliError::Io(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }

    fn exit_code(&self) -> u8 {
        use hbvp::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Core(e) => match e {
                E::NonConvergence { .. }
                | E::LinearSolve(_)
                | E::Mesh(_)
                | E::Sampling(_)
                | E::OutOfRange { .. }
                | E::TailDivergence { .. }
                | E::Io(_) => 3,
                _ => 2,
            },
        }
    }
}

#[derive(Parser, Serialize)]
#[command(name = "hbvp", version, about = "Hilbert-metric geometry and singular quasilinear boundary value problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Gauges and Hilbert/Thompson distances between interior points.
    Metric(MetricArgs),
    /// The one-dimensional profile `W` of a coefficient family.
    Profile(ProfileArgs),
    /// The homogeneous solution on a sector of given aperture.
    Sector(SectorArgs),
    /// Continuation solve of the relaxed problem on a domain.
    Solve(SolveArgs),
    /// Solve, then estimate the Lipschitz constant of `log w`.
    Lipschitz(LipschitzArgs),
    /// Radial and two-dimensional solves on the unit disk against closed forms.
    VerifyDisk(VerifyDiskArgs),
}

#[derive(Args, Serialize, Clone)]
#[group(required = true, multiple = false)]
struct DomainArgs {
    /// JSON domain description.
    #[arg(long)]
    domain: Option<PathBuf>,
    /// The unit square.
    #[arg(long)]
    square: bool,
    /// Unit disk; N is the resolution of its polygonal approximation.
    #[arg(long, value_name = "N")]
    disk: Option<usize>,
    /// Regular N-gon inscribed in the unit circle.
    #[arg(long, value_name = "N")]
    ngon: Option<usize>,
}

impl DomainArgs {
    fn build(&self) -> Result<ConvexDomain, CliError> {
        if let Some(path) = &self.domain {
            return Ok(DomainSpec::load(path)?.build()?);
        }
        if self.square {
            return Ok(ConvexDomain::unit_square());
        }
        if let Some(n) = self.disk {
            return Ok(ConvexDomain::disk_with_resolution(Point::new(0.0, 0.0), 1.0, n)?);
        }
        if let Some(n) = self.ngon {
            return Ok(ConvexDomain::regular_ngon(n, Point::new(0.0, 0.0), 1.0)?);
        }
        Err(CliError::Usage("one of --domain, --square, --disk, --ngon is required".into()))
    }
}

#[derive(Args, Serialize, Clone)]
struct CommonArgs {
    /// Seed for every random choice of the run.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Serialize, Clone)]
struct SolveParams {
    /// chaplygin, unit or minimal-surface.
    #[arg(long, default_value = "chaplygin")]
    coeffs: String,
    /// Maximum mesh edge length.
    #[arg(long, default_value_t = 0.05, allow_negative_numbers = true)]
    h: f64,
    /// First continuation value; defaults to a tenth of `max W` times the minimal width.
    #[arg(long)]
    eps_start: Option<f64>,
    /// Number of halvings of `ε`.
    #[arg(long, default_value_t = 8)]
    eps_steps: usize,
    /// Sup-norm bound on the final nodal update.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Grade the mesh toward every polygon vertex: `FACTOR,DEPTH`, e.g. `0.5,6`.
    #[arg(long, value_parser = parse_grading)]
    grading: Option<(f64, usize)>,
}

impl SolveParams {
    fn validate(&self) -> Result<(), CliError> {
        positive("--h", self.h)?;
        positive("--tol", self.tol)?;
        if let Some(e) = self.eps_start {
            positive("--eps-start", e)?;
        }
        Ok(())
    }
}

#[derive(Args, Serialize)]
struct MetricArgs {
    #[command(flatten)]
    domain: DomainArgs,
    /// First point, `x,y`; random interior pairs are drawn when omitted.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_point, requires = "q")]
    p: Option<Point>,
    /// Second point, `x,y`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_point, requires = "p")]
    q: Option<Point>,
    /// Number of random pairs.
    #[arg(long, default_value_t = 50)]
    pairs: usize,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Serialize)]
struct ProfileArgs {
    #[arg(long, default_value = "chaplygin")]
    coeffs: String,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Serialize)]
struct SectorArgs {
    /// Opening angle, in radians unless --degrees is given.
    #[arg(long)]
    aperture: f64,
    #[arg(long)]
    degrees: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Serialize)]
struct SolveArgs {
    #[command(flatten)]
    domain: DomainArgs,
    #[command(flatten)]
    params: SolveParams,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Serialize)]
struct LipschitzArgs {
    #[command(flatten)]
    domain: DomainArgs,
    #[command(flatten)]
    params: SolveParams,
    /// Number of uniform pairs.
    #[arg(long, default_value_t = 500)]
    pairs: usize,
    /// Boundary point for radial pairs, `x,y`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_point)]
    radial_from: Option<Point>,
    /// Polygon vertex index for corner pairs and the sector comparison.
    #[arg(long)]
    corner: Option<usize>,
    /// Depths for radial or corner pairs.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.01,0.001")]
    depths: Vec<f64>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Serialize)]
struct VerifyDiskArgs {
    #[arg(long, default_value_t = 0.02)]
    h: f64,
    #[arg(long)]
    eps_start: Option<f64>,
    /// Halvings before the quartering tail; 10, or 2 with --fine.
    #[arg(long)]
    eps_steps: Option<usize>,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Use the finer boundary grading for the Lipschitz estimate (slower).
    #[arg(long)]
    fine: bool,
    #[command(flatten)]
    common: CommonArgs,
}

fn parse_point(s: &str) -> Result<Point, String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected x,y, got '{s}'"))?;
    let x: f64 = x.trim().parse().map_err(|e| format!("bad x in '{s}': {e}"))?;
    let y: f64 = y.trim().parse().map_err(|e| format!("bad y in '{s}': {e}"))?;
    Ok(Point::new(x, y))
}

fn parse_grading(s: &str) -> Result<(f64, usize), String> {
    let (f, d) = s.split_once(',').ok_or_else(|| format!("expected FACTOR,DEPTH, got '{s}'"))?;
    let f: f64 = f.trim().parse().map_err(|e| format!("bad factor in '{s}': {e}"))?;
    let d: usize = d.trim().parse().map_err(|e| format!("bad depth in '{s}': {e}"))?;
    if !(f > 0.0 && f < 1.0) {
        return Err(format!("grading factor must lie in (0, 1), got {f}"));
    }
    Ok((f, d))
}

fn positive(field: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{field} must be positive and finite, got {v}")))
    }
}

fn threads() -> Result<usize, CliError> {
    match std::env::var("HBVP_THREADS") {
        Err(_) => Ok(1),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Usage(format!("HBVP_THREADS must be a positive integer, got '{v}'"))),
        },
    }
}

struct Run {
    start: Instant,
    threads: usize,
}

impl Run {
    fn finish<C: Serialize, R: Serialize>(
        &self,
        command: &str,
        config: &C,
        common: &CommonArgs,
        passed: bool,
        result: &R,
    ) -> Result<bool, CliError> {
        let report = Report {
            command,
            config,
            versions: VERSIONS,
            seed: common.seed,
            threads: self.threads,
            wall_time_s: self.start.elapsed().as_secs_f64(),
            passed,
            result,
        };
        let path = common.out.join(format!("{command}.json"));
        write_json(&path, &report)?;
        println!("{}", path.display());
        Ok(passed)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = threads().and_then(|threads| {
        let run = Run { start: Instant::now(), threads };
        dispatch(&cli.command, &run)
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(4),
        Err(e) => {
            let body = serde_json::json!({
                "error": { "kind": e.kind(), "message": e.message(), "exit_code": e.exit_code() }
            });
            eprintln!("{body}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(command: &Command, run: &Run) -> Result<bool, CliError> {
    match command {
        Command::Metric(a) => metric(a, run),
        Command::Profile(a) => profile(a, run),
        Command::Sector(a) => sector(a, run),
        Command::Solve(a) => solve(a, run),
        Command::Lipschitz(a) => lipschitz(a, run),
        Command::VerifyDisk(a) => verify_disk(a, run),
    }
}

fn random_interior(domain: &ConvexDomain, rng: &mut ChaCha8Rng) -> Point {
    let (lo, hi) = domain.bounding_box();
    loop {
        let p = Point::new(rng.random_range(lo.x..hi.x), rng.random_range(lo.y..hi.y));
        if domain.is_interior(p) {
            return p;
        }
    }
}

fn metric(a: &MetricArgs, run: &Run) -> Result<bool, CliError> {
    let domain = a.domain.build()?;
    let pairs: Vec<(Point, Point)> = match (a.p, a.q) {
        (Some(p), Some(q)) => vec![(p, q)],
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.common.seed);
            (0..a.pairs).map(|_| (random_interior(&domain, &mut rng), random_interior(&domain, &mut rng))).collect()
        }
    };
    let samples = pairs.iter().map(|&(p, q)| metric_sample(&domain, p, q)).collect::<hbvp::Result<Vec<_>>>()?;
    let mut table = Table::new("metric", a.common.seed, &["px", "py", "qx", "qy", "m_pq", "m_qp", "d_hilbert", "d_thompson"])?;
    for s in &samples {
        table.row(&[s.p.x, s.p.y, s.q.x, s.q.y, s.m_pq, s.m_qp, s.d_hilbert, s.d_thompson])?;
    }
    table.save(&a.common.out.join("metric.csv"))?;
    run.finish("metric", a, &a.common, true, &samples)
}

#[derive(Serialize)]
struct ProfileSummary {
    coeffs: String,
    xbar: f64,
    max_value: f64,
    t_min: f64,
    /// Spread of `G(W') + log W` over the table.
    first_integral_spread: f64,
    max_ode_residual: f64,
    points: usize,
}

fn profile(a: &ProfileArgs, run: &Run) -> Result<bool, CliError> {
    let coeffs = CoefficientFamily::by_name(&a.coeffs)?;
    let prof = solve_profile_w(&coeffs)?;
    let table_pts = prof.table();
    let mut table = Table::new("profile", a.common.seed, &["t", "w", "dw"])?;
    let (mut lo, mut hi, mut ode) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for p in &table_pts {
        table.row(&[p.t, p.w, p.dw])?;
        if p.t > prof.t_min() && p.t < 0.5 {
            let fi = prof.first_integral(p.t)?;
            lo = lo.min(fi);
            hi = hi.max(fi);
            ode = ode.max(prof.ode_residual(p.t).abs());
        }
    }
    table.save(&a.common.out.join("profile.csv"))?;
    let summary = ProfileSummary {
        coeffs: coeffs.name().to_string(),
        xbar: prof.xbar(),
        max_value: prof.max_value(),
        t_min: prof.t_min(),
        first_integral_spread: hi - lo,
        max_ode_residual: ode,
        points: table_pts.len(),
    };
    run.finish("profile", a, &a.common, true, &summary)
}

fn sector(a: &SectorArgs, run: &Run) -> Result<bool, CliError> {
    let alpha = if a.degrees { a.aperture.to_radians() } else { a.aperture };
    let sol = solve_sector(alpha)?;
    let mut table = Table::new("sector", a.common.seed, &["theta", "a", "da"])?;
    for ((&t, &v), &s) in sol.theta.iter().zip(&sol.values).zip(&sol.slopes) {
        table.row(&[t, v, s])?;
    }
    table.save(&a.common.out.join("sector.csv"))?;
    run.finish("sector", a, &a.common, true, &sol)
}

#[derive(Serialize)]
struct MeshSummary {
    nodes: usize,
    triangles: usize,
    h: f64,
    max_edge: f64,
    grading: Option<Grading>,
}

#[derive(Serialize)]
struct SolveSummary {
    mesh: MeshSummary,
    schedule: Vec<f64>,
    stages: Vec<hbvp::solver::StageReport>,
    min_value: f64,
    max_value: f64,
    gradient_cap: hbvp::solver::GradientCapReport,
    barrier: hbvp::analysis::BarrierReport,
}

struct Solved {
    domain: ConvexDomain,
    run: ContinuationResult,
    summary: SolveSummary,
}

fn solve_domain(domain: &DomainArgs, params: &SolveParams) -> Result<Solved, CliError> {
    params.validate()?;
    let domain = domain.build()?;
    let coeffs = CoefficientFamily::by_name(&params.coeffs)?;
    let prof = solve_profile_w(&coeffs)?;
    let grading = match params.grading {
        Some(_) if !domain.is_polygon() => {
            return Err(CliError::Usage("--grading needs a polygonal domain".into()));
        }
        Some((factor, depth)) => {
            let all: Vec<usize> = (0..domain.vertices().len()).collect();
            Some(Grading::corners(&domain, &all, factor, depth)?)
        }
        None => None,
    };
    let mesh: Arc<Mesh> = Arc::new(mesh_domain(&domain, params.h, grading.as_ref())?);
    let schedule = match params.eps_start {
        Some(e0) => (0..=params.eps_steps).map(|k| e0 * 0.5f64.powi(k as i32)).collect(),
        None => default_schedule(&mesh, &prof, params.eps_steps),
    };
    let opts = SolveOptions { tol: params.tol, ..SolveOptions::default() };
    let run = continuation_solve(&mesh, &coeffs, &prof, &schedule, &opts)?;
    let field = run.field();
    let eps = field.eps;
    let summary = SolveSummary {
        mesh: MeshSummary {
            nodes: mesh.num_nodes(),
            triangles: mesh.num_triangles(),
            h: mesh.h(),
            max_edge: mesh.max_diameter(),
            grading,
        },
        schedule,
        stages: run.reports.clone(),
        min_value: field.min(),
        max_value: field.max(),
        gradient_cap: gradient_cap_check(field, &prof, eps)?,
        barrier: barrier_check(&domain, &coeffs, &prof, field, eps, 2e-2)?,
    };
    Ok(Solved { domain, run, summary })
}

fn save_field(solved: &Solved, common: &CommonArgs, command: &str) -> Result<(), CliError> {
    let field = solved.run.field();
    let mut table = Table::new(command, common.seed, &["x", "y", "w"])?;
    for (p, &w) in field.mesh.nodes().iter().zip(&field.values) {
        table.row(&[p.x, p.y, w])?;
    }
    table.save(&common.out.join("field.csv"))
}

fn solve(a: &SolveArgs, run: &Run) -> Result<bool, CliError> {
    let solved = solve_domain(&a.domain, &a.params)?;
    save_field(&solved, &a.common, "solve")?;
    let s = &solved.summary;
    let passed = s.barrier.violations() == 0 && s.gradient_cap.violations == 0;
    run.finish("solve", a, &a.common, passed, s)
}

#[derive(Serialize)]
struct LipschitzSummary<'a> {
    solve: &'a SolveSummary,
    uniform: hbvp::analysis::LipschitzReport,
    radial: Option<hbvp::analysis::LipschitzReport>,
    corner: Option<hbvp::analysis::LipschitzReport>,
    corner_asymptote: Option<hbvp::analysis::CornerReport>,
}

fn lipschitz(a: &LipschitzArgs, run: &Run) -> Result<bool, CliError> {
    let solved = solve_domain(&a.domain, &a.params)?;
    let field = solved.run.field();
    let domain = &solved.domain;
    let uniform = lipschitz_estimate(domain, field, &PairStrategy::UniformPairs { count: a.pairs, seed: a.common.seed })?;
    let radial = a
        .radial_from
        .map(|b| lipschitz_estimate(domain, field, &PairStrategy::RadialPairs { boundary_point: b, depths: a.depths.clone() }))
        .transpose()?;
    let (corner, corner_asymptote) = match a.corner {
        Some(i) => {
            let pairs = lipschitz_estimate(domain, field, &PairStrategy::CornerPairs { corner: i, depths: a.depths.clone() })?;
            let sol = solve_sector(domain.interior_angle(i))?;
            (Some(pairs), Some(corner_asymptote_check(field, i, &sol, &a.depths)?))
        }
        None => (None, None),
    };
    save_field(&solved, &a.common, "lipschitz")?;
    let passed = uniform.max_ratio <= 1.02;
    let summary = LipschitzSummary { solve: &solved.summary, uniform, radial, corner, corner_asymptote };
    run.finish("lipschitz", a, &a.common, passed, &summary)
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    value: f64,
    bound: String,
    passed: bool,
}

#[derive(Serialize)]
struct DiskSummary {
    /// Sup error of the two-dimensional solve against `√((1 − r²)/2)` on `|x| ≤ 0.9`.
    closed_form_sup_error: f64,
    /// The same against `√(1 − r²)`.
    hemisphere_sup_error: f64,
    checks: Vec<Check>,
    report: hbvp::analysis::DiskCheckReport,
}

fn verify_disk(a: &VerifyDiskArgs, run: &Run) -> Result<bool, CliError> {
    positive("--h", a.h)?;
    positive("--tol", a.tol)?;
    if let Some(e) = a.eps_start {
        positive("--eps-start", e)?;
    }
    let base = if a.fine { DiskCheckOptions::fine() } else { DiskCheckOptions::default() };
    let opts = DiskCheckOptions {
        h: a.h,
        eps_start: a.eps_start,
        eps_steps: a.eps_steps.unwrap_or(base.eps_steps),
        seed: a.common.seed,
        solve: SolveOptions { tol: a.tol, ..SolveOptions::default() },
        ..base
    };
    let (report, field) = disk_check(&opts)?;
    let mut table = Table::new("verify-disk", a.common.seed, &["x", "y", "w"])?;
    for (p, &w) in field.mesh.nodes().iter().zip(&field.values) {
        table.row(&[p.x, p.y, w])?;
    }
    table.save(&a.common.out.join("field.csv"))?;
    let mut radial = Table::new("verify-disk", a.common.seed, &["r", "w"])?;
    let sol = hbvp::solver::radial_solve_disk(&CoefficientFamily::chaplygin(), opts.radial_n, opts.radial_eps)?;
    for (&r, &w) in sol.r.iter().zip(&sol.w) {
        radial.row(&[r, w])?;
    }
    radial.save(&a.common.out.join("radial.csv"))?;

    let check = |name, value: f64, lo: f64, hi: f64| Check {
        name,
        value,
        bound: format!("[{lo}, {hi}]"),
        passed: (lo..=hi).contains(&value),
    };
    let checks = vec![
        check("radial_closed_form_sup_error", report.radial.closed_form_sup_error, 0.0, 1e-4),
        check("closed_form_sup_error", report.fem.closed_form_sup_error, 0.0, 2e-2),
        check("radial_pairs_estimate", report.radial_pairs.max_ratio, 0.45, 0.52),
        check("uniform_pairs_estimate", report.uniform_pairs.max_ratio, 0.0, 1.02),
    ];
    let passed = checks.iter().all(|c| c.passed);
    let summary = DiskSummary {
        closed_form_sup_error: report.fem.closed_form_sup_error,
        hemisphere_sup_error: report.fem.hemisphere_sup_error,
        checks,
        report,
    };
    run.finish("verify-disk", a, &a.common, passed, &summary)
}
