//! `pzmap` — command-line front end for the plankton-map analysis
//! library: fixed-point classification, Neimark-Sacker reports, orbits,
//! bifurcation sweeps, feedback-control triangles, and invariant-set
//! checks, emitted as CSV or JSON.

mod config;
mod output;

use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use pzmap::control::{
    controlled_jacobian, curve_fixed_points, is_stabilizing, stability_triangle, Gains,
    StabilityTriangle, Target,
};
use pzmap::dynamics::{
    classify_attractor, invariant_set_check, iterate, lyapunov_descent, sweep_theta, MSet,
    SweepSpec,
};
use pzmap::equilibria::{classify_region, find_fixed_points, predict_fp_count, FixedPoint, FpKind};
use pzmap::nsbif::{ns_reports, ns_verdict, NsBranch, NsVerdict, ThetaSide};
use pzmap::{Params, State};

use config::{
    load_config_file, parse_pair, take_f64, take_pair, take_u64, take_usize, ResolvedConfig,
};
use output::{fmt_f64, print_json, write_sidecar, Sink};

const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(name = "pzmap", version, about = "Discrete phytoplankton-zooplankton map analysis")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Region label, fixed points, and stability classification
    Classify(ClassifyArgs),
    /// Neimark-Sacker thresholds and normal-form reports (theta is solved for)
    Ns(NsArgs),
    /// Iterate one orbit and emit it as CSV (step,u,v)
    Orbit(OrbitArgs),
    /// Bifurcation-diagram sweep over theta (CSV: theta,u_tail,verdict)
    Sweep(SweepArgs),
    /// Feedback-control stability triangle in gain space
    Control(ControlArgs),
    /// Invariant-set sampling check and Lyapunov descent
    Invariance(InvarianceArgs),
    /// Regenerate the bundled example and figure data files
    Repro(ReproArgs),
}

#[derive(Args, Clone)]
struct ParamArgs {
    /// Zooplankton mortality rate (> 0)
    #[arg(long)]
    r: Option<f64>,
    /// Conversion efficiency (> 0)
    #[arg(long)]
    beta: Option<f64>,
    /// Half-saturation constant (> 0)
    #[arg(long)]
    gamma: Option<f64>,
    /// Toxin release rate (> 0)
    #[arg(long)]
    theta: Option<f64>,
    /// `key = value` file supplying defaults for any missing option
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ParamArgs {
    fn file(&self) -> Result<HashMap<String, String>> {
        match &self.config {
            Some(path) => load_config_file(path),
            None => Ok(HashMap::new()),
        }
    }

    fn resolve_with(&self, need_theta: bool) -> Result<(Params, HashMap<String, String>)> {
        let map = self.file()?;
        let get = |cli: Option<f64>, key: &str| -> Result<Option<f64>> {
            Ok(cli.or(take_f64(&map, key)?))
        };
        let r = get(self.r, "r")?.ok_or_else(|| anyhow!("missing --r"))?;
        let beta = get(self.beta, "beta")?.ok_or_else(|| anyhow!("missing --beta"))?;
        let gamma = get(self.gamma, "gamma")?.ok_or_else(|| anyhow!("missing --gamma"))?;
        let theta = match get(self.theta, "theta")? {
            Some(t) => t,
            None if need_theta => bail!("missing --theta"),
            // commands that solve for theta only need the (r, beta, gamma) slice
            None => 1.0,
        };
        Ok((Params::new(r, beta, theta, gamma)?, map))
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl Format {
    fn name(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct NsArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Restrict to one bifurcating branch
    #[arg(long, value_enum, default_value = "all")]
    branch: BranchChoice,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum BranchChoice {
    E1,
    E3,
    All,
}

#[derive(Args)]
struct OrbitArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Initial state "u,v"
    #[arg(long)]
    init: Option<String>,
    /// Number of iterations
    #[arg(long)]
    n: Option<usize>,
    /// Feedback gains "s1,s2" (switches to the controlled map)
    #[arg(long)]
    gains: Option<String>,
    /// Control target abscissa on the fixed-point curve (with --gains)
    #[arg(long)]
    target_u: Option<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Output file (stdout when omitted); file outputs get a
    /// `.config.json` sidecar
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    theta_lo: Option<f64>,
    #[arg(long)]
    theta_hi: Option<f64>,
    /// Number of theta grid points
    #[arg(long)]
    steps: Option<usize>,
    /// Initial state "u,v" (default 0.5,0.5)
    #[arg(long)]
    init: Option<String>,
    /// Iterations per grid point
    #[arg(long)]
    n: Option<usize>,
    /// Fraction of each orbit discarded before recording
    #[arg(long)]
    burn_in: Option<f64>,
    /// Tail samples kept per theta
    #[arg(long)]
    tail_keep: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ControlArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Target abscissa on the fixed-point curve (default: E1, falling
    /// back to the extended-curve fixed point when no positive one exists)
    #[arg(long)]
    target_u: Option<f64>,
    /// Evaluate these gains "s1,s2" against the triangle
    #[arg(long)]
    gains: Option<String>,
    /// Emit the triangle as a closed CSV polyline (s1,s2)
    #[arg(long)]
    emit_triangle: bool,
    /// Run this many interior and exterior orbit confirmations
    #[arg(long)]
    confirm: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct InvarianceArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Which invariant set to sample (default: by gamma)
    #[arg(long, value_enum)]
    set: Option<SetChoice>,
    /// Sample count
    #[arg(long)]
    samples: Option<usize>,
    /// Also run this many Lyapunov-descent orbits from random starts
    #[arg(long)]
    descent_starts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SetChoice {
    M1,
    M2,
}

#[derive(Args)]
struct ReproArgs {
    /// Directory for the generated data files
    #[arg(long, default_value = "repro-out")]
    outdir: PathBuf,
    /// Print the equivalent invocations instead of running them
    #[arg(long)]
    list: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let numerical = matches!(
                e.downcast_ref::<pzmap::Error>(),
                Some(
                    pzmap::Error::CountMismatch { .. }
                        | pzmap::Error::CertificateMismatch { .. }
                        | pzmap::Error::SingularTransformation { .. }
                        | pzmap::Error::NotNsApplicable { .. }
                )
            );
            ExitCode::from(if numerical { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Classify(args) => cmd_classify(args),
        Cmd::Ns(args) => cmd_ns(args),
        Cmd::Orbit(args) => cmd_orbit(args),
        Cmd::Sweep(args) => cmd_sweep(args),
        Cmd::Control(args) => cmd_control(args),
        Cmd::Invariance(args) => cmd_invariance(args),
        Cmd::Repro(args) => cmd_repro(args),
    }
}

fn base_config(cmd: &str, p: &Params) -> ResolvedConfig {
    ResolvedConfig {
        command: cmd.into(),
        r: p.r(),
        beta: p.beta(),
        gamma: p.gamma(),
        theta: Some(p.theta()),
        format: "json".into(),
        ..Default::default()
    }
}

fn emit_report<T: Serialize>(report: &T, output: Option<&PathBuf>, cfg: &ResolvedConfig) -> Result<()> {
    match output {
        Some(path) => {
            std::fs::write(path, serde_json::to_string_pretty(report)?)
                .with_context(|| format!("cannot write {}", path.display()))?;
            write_sidecar(Some(path), cfg)?;
            Ok(())
        }
        None => print_json(report),
    }
}

#[derive(Serialize)]
struct ClassifyReport {
    config: ResolvedConfig,
    region: String,
    boundary_with: Option<String>,
    prediction: pzmap::equilibria::FpPrediction,
    fixed_points: Vec<FixedPoint>,
}

fn cmd_classify(args: ClassifyArgs) -> Result<()> {
    let (p, _) = args.params.resolve_with(true)?;
    let label = classify_region(&p);
    let prediction = predict_fp_count(&p);
    let fixed_points = find_fixed_points(&p)?;
    let mut cfg = base_config("classify", &p);
    cfg.output = args.output.as_ref().map(|p| p.display().to_string());
    let report = ClassifyReport {
        config: cfg,
        region: label.region.to_string(),
        boundary_with: label.boundary_with.map(|r| r.to_string()),
        prediction,
        fixed_points,
    };
    emit_report(&report, args.output.as_ref(), &report.config)
}

#[derive(Serialize)]
struct VerdictJson {
    bifurcates: bool,
    curve: Option<&'static str>,
    side: Option<&'static str>,
}

impl From<NsVerdict> for VerdictJson {
    fn from(v: NsVerdict) -> Self {
        let side = |s: ThetaSide| match s {
            ThetaSide::BelowTheta0 => "theta-below-theta0",
            ThetaSide::AboveTheta0 => "theta-above-theta0",
        };
        match v {
            NsVerdict::Attracting(s) => {
                VerdictJson { bifurcates: true, curve: Some("attracting"), side: Some(side(s)) }
            }
            NsVerdict::Repelling(s) => {
                VerdictJson { bifurcates: true, curve: Some("repelling"), side: Some(side(s)) }
            }
            NsVerdict::Degenerate => VerdictJson { bifurcates: false, curve: None, side: None },
        }
    }
}

#[derive(Serialize)]
struct NsPoint {
    kind: FpKind,
    report: pzmap::nsbif::NsReport,
    verdict: VerdictJson,
}

#[derive(Serialize)]
struct NsOutput {
    config: ResolvedConfig,
    points: Vec<NsPoint>,
}

fn cmd_ns(args: NsArgs) -> Result<()> {
    let (p, _) = args.params.resolve_with(false)?;
    let branch = match args.branch {
        BranchChoice::E1 => Some(NsBranch::E1),
        BranchChoice::E3 => Some(NsBranch::E3),
        BranchChoice::All => None,
    };
    let mut cfg = base_config("ns", &p);
    cfg.theta = None; // solved for, not an input
    cfg.branch = Some(
        match args.branch {
            BranchChoice::E1 => "e1",
            BranchChoice::E3 => "e3",
            BranchChoice::All => "all",
        }
        .into(),
    );
    cfg.output = args.output.as_ref().map(|p| p.display().to_string());
    let points: Vec<NsPoint> = ns_reports(&p, branch)?
        .into_iter()
        .map(|(c, report)| {
            let verdict = VerdictJson::from(ns_verdict(&report));
            NsPoint { kind: c.kind, report, verdict }
        })
        .collect();
    let out = NsOutput { config: cfg, points };
    emit_report(&out, args.output.as_ref(), &out.config)
}

/// Pick the stabilization target: an explicit curve abscissa when given,
/// otherwise E1, otherwise the extended-curve fixed point.
fn resolve_control(p: &Params, target_u: Option<f64>) -> Result<Target> {
    if let Some(u) = target_u {
        let roots = curve_fixed_points(p, 1e-9, u.max(2.0) * 4.0);
        let best = roots
            .iter()
            .copied()
            .min_by(|a, b| (a - u).abs().partial_cmp(&(b - u).abs()).unwrap())
            .ok_or_else(|| pzmap::Error::NoTarget("no fixed point on the curve".into()))?;
        if (best - u).abs() > 1e-3 * u.abs().max(1.0) {
            bail!(pzmap::Error::NoTarget(format!(
                "no curve fixed point near u = {u} (nearest root at u = {best})"
            )));
        }
        return Ok(Target::on_curve(best, p)?);
    }
    let fps = find_fixed_points(p)?;
    if let Some(e1) = fps.iter().find(|f| f.kind == FpKind::E1) {
        return Ok(Target::on_curve(e1.u, p)?);
    }
    let ext = curve_fixed_points(p, 1.0, 50.0);
    match ext.first() {
        Some(&u) => Ok(Target::on_curve(u, p)?),
        None => bail!(pzmap::Error::NoTarget(
            "no positive fixed point and no extended-curve fixed point".into()
        )),
    }
}

#[derive(Serialize)]
struct OrbitSummary {
    config: ResolvedConfig,
    rows: usize,
    escape_step: Option<usize>,
    verdict: Option<String>,
    tail_stats: Option<pzmap::dynamics::TailStats>,
}

fn cmd_orbit(args: OrbitArgs) -> Result<()> {
    let (p, map) = args.params.resolve_with(true)?;
    let init = match &args.init {
        Some(s) => parse_pair(s)?,
        None => take_pair(&map, "init")?.ok_or_else(|| anyhow!("missing --init u,v"))?,
    };
    let n = args.n.or(take_usize(&map, "n")?).unwrap_or(10_000);
    let gains = match &args.gains {
        Some(s) => Some(parse_pair(s)?),
        None => take_pair(&map, "gains")?,
    };

    let control = match gains {
        None => None,
        Some((s1, s2)) => {
            let target = resolve_control(&p, args.target_u.or(take_f64(&map, "target-u")?))?;
            Some((Gains::new(s1, s2), target))
        }
    };
    let initial = if control.is_some() {
        // controlled starts may sit near targets outside the quadrant
        State::unchecked(init.0, init.1)
    } else {
        State::new(init.0, init.1)?
    };

    let mut cfg = base_config("orbit", &p);
    cfg.init = Some(init);
    cfg.n = Some(n);
    cfg.gains = gains;
    cfg.target_u = control.as_ref().map(|(_, t)| t.u_bar);
    cfg.format = args.format.name().into();
    cfg.output = args.output.as_ref().map(|p| p.display().to_string());

    let orbit = iterate(initial, n, &p, control);
    let (verdict, tail_stats) = if orbit.gains.is_none() {
        let fps = find_fixed_points(&p).unwrap_or_default();
        let summary = classify_attractor(&orbit, &fps);
        (Some(summary.verdict.to_string()), Some(summary.tail_stats))
    } else {
        (None, None)
    };

    match args.format {
        Format::Csv => {
            let mut sink = Sink::create(args.output.as_deref())?;
            sink.write_line("step,u,v")?;
            for (k, s) in orbit.points.iter().enumerate() {
                sink.write_line(&format!("{k},{},{}", fmt_f64(s.u), fmt_f64(s.v)))?;
            }
            sink.finish()?;
            write_sidecar(args.output.as_deref(), &cfg)?;
        }
        Format::Json => {
            let rows: Vec<(usize, f64, f64)> =
                orbit.points.iter().enumerate().map(|(k, s)| (k, s.u, s.v)).collect();
            emit_report(&rows, args.output.as_ref(), &cfg)?;
        }
    }
    if args.output.is_some() {
        print_json(&OrbitSummary {
            config: cfg,
            rows: orbit.points.len(),
            escape_step: orbit.escape_step,
            verdict,
            tail_stats,
        })?;
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let (p, map) = args.params.resolve_with(false)?;
    let theta_lo = args
        .theta_lo
        .or(take_f64(&map, "theta-lo")?)
        .ok_or_else(|| anyhow!("missing --theta-lo"))?;
    let theta_hi = args
        .theta_hi
        .or(take_f64(&map, "theta-hi")?)
        .ok_or_else(|| anyhow!("missing --theta-hi"))?;
    let steps = args.steps.or(take_usize(&map, "steps")?).unwrap_or(100);
    let init = match &args.init {
        Some(s) => parse_pair(s)?,
        None => take_pair(&map, "init")?.unwrap_or((0.5, 0.5)),
    };
    let n = args.n.or(take_usize(&map, "n")?).unwrap_or(10_000);
    let burn_in = args.burn_in.or(take_f64(&map, "burn-in")?).unwrap_or(0.5);
    let tail_keep = args.tail_keep.or(take_usize(&map, "tail-keep")?).unwrap_or(100);

    let spec = SweepSpec {
        theta_lo,
        theta_hi,
        steps,
        initial: State::new(init.0, init.1)?,
        n,
        burn_in,
        tail_keep: Some(tail_keep),
    };
    let rows = sweep_theta(&p, &spec)?;

    let mut cfg = base_config("sweep", &p);
    cfg.theta = None;
    cfg.theta_lo = Some(theta_lo);
    cfg.theta_hi = Some(theta_hi);
    cfg.steps = Some(steps);
    cfg.init = Some(init);
    cfg.n = Some(n);
    cfg.burn_in = Some(burn_in);
    cfg.tail_keep = Some(tail_keep);
    cfg.format = args.format.name().into();
    cfg.output = args.output.as_ref().map(|p| p.display().to_string());

    match args.format {
        Format::Csv => {
            let mut sink = Sink::create(args.output.as_deref())?;
            sink.write_line("theta,u_tail,verdict")?;
            for row in &rows {
                for u in &row.u_tail {
                    sink.write_line(&format!(
                        "{},{},{}",
                        fmt_f64(row.theta),
                        fmt_f64(*u),
                        row.verdict
                    ))?;
                }
            }
            sink.finish()?;
            write_sidecar(args.output.as_deref(), &cfg)?;
        }
        Format::Json => emit_report(&rows, args.output.as_ref(), &cfg)?,
    }
    if args.output.is_some() {
        eprintln!("sweep: {} grid points written", rows.len());
    }
    Ok(())
}

#[derive(Serialize)]
struct GainCheck {
    gains: (f64, f64),
    inside_triangle: bool,
    stabilizing: bool,
    #[serde(with = "pzmap::serde_complex::complex_pair")]
    multipliers: (num_complex::Complex64, num_complex::Complex64),
}

#[derive(Serialize)]
struct Confirmation {
    gains: (f64, f64),
    inside: bool,
    converged: bool,
    final_distance: f64,
}

#[derive(Serialize)]
struct ControlReport {
    config: ResolvedConfig,
    target: Target,
    triangle: StabilityTriangle,
    #[serde(skip_serializing_if = "Option::is_none")]
    gain_check: Option<GainCheck>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    confirmations: Vec<Confirmation>,
}

fn cmd_control(args: ControlArgs) -> Result<()> {
    let (p, map) = args.params.resolve_with(true)?;
    let target = resolve_control(&p, args.target_u.or(take_f64(&map, "target-u")?))?;
    let triangle = stability_triangle(&target, &p)?;
    let seed = args.seed.or(take_u64(&map, "seed")?).unwrap_or(DEFAULT_SEED);
    let gains = match &args.gains {
        Some(s) => Some(parse_pair(s)?),
        None => take_pair(&map, "gains")?,
    };

    let mut cfg = base_config("control", &p);
    cfg.target_u = Some(target.u_bar);
    cfg.seed = Some(seed);
    cfg.format = args.format.name().into();
    cfg.output = args.output.as_ref().map(|p| p.display().to_string());
    cfg.confirm = args.confirm;
    cfg.gains = gains;

    let gain_check = gains.map(|(s1, s2)| {
        let g = Gains::new(s1, s2);
        GainCheck {
            gains: (s1, s2),
            inside_triangle: triangle.contains(g, 0.0),
            stabilizing: is_stabilizing(g, &target, &p),
            multipliers: controlled_jacobian(&target, g, &p).eigenvalues(),
        }
    });

    let mut confirmations = Vec::new();
    if let Some(count) = args.confirm {
        if triangle.degenerate {
            bail!(pzmap::Error::NoTarget("degenerate triangle, nothing to confirm".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let verts = triangle.vertices.clone();
        let run_one = |g: Gains, inside: bool, rng: &mut ChaCha8Rng| {
            let ang: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let rad: f64 = rng.random_range(0.0..0.05);
            let start = State::unchecked(
                target.u_bar + rad * ang.cos(),
                target.v_bar + rad * ang.sin(),
            );
            let orbit = iterate(start, 10_000, &p, Some((g, target)));
            let d = orbit.last().dist(&target.state());
            Confirmation {
                gains: (g.s1, g.s2),
                inside,
                converged: orbit.escape_step.is_none() && d < 1e-8,
                final_distance: d,
            }
        };
        let mut interior = 0;
        while interior < count {
            let (r1, r2) = (rng.random::<f64>(), rng.random::<f64>());
            let s = r1.sqrt();
            let g = Gains::new(
                (1.0 - s) * verts[0].0 + s * (1.0 - r2) * verts[1].0 + s * r2 * verts[2].0,
                (1.0 - s) * verts[0].1 + s * (1.0 - r2) * verts[1].1 + s * r2 * verts[2].1,
            );
            if !triangle.contains(g, 1e-9) {
                continue;
            }
            interior += 1;
            let c = run_one(g, true, &mut rng);
            confirmations.push(c);
        }
        let span: Vec<f64> = verts.iter().flat_map(|v| [v.0, v.1]).collect();
        let lo = span.iter().cloned().fold(f64::INFINITY, f64::min) - 2.0;
        let hi = span.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 2.0;
        let mut exterior = 0;
        while exterior < count {
            let g = Gains::new(rng.random_range(lo..hi), rng.random_range(lo..hi));
            if triangle.contains(g, -1e-6) {
                continue;
            }
            exterior += 1;
            let c = run_one(g, false, &mut rng);
            confirmations.push(c);
        }
    }

    let report = ControlReport { config: cfg, target, triangle, gain_check, confirmations };
    if args.emit_triangle || args.format == Format::Csv {
        let mut sink = Sink::create(args.output.as_deref())?;
        sink.write_line("s1,s2")?;
        if !report.triangle.degenerate {
            let vs = &report.triangle.vertices;
            for &(x, y) in vs.iter().chain(vs.first()) {
                sink.write_line(&format!("{},{}", fmt_f64(x), fmt_f64(y)))?;
            }
        }
        sink.finish()?;
        write_sidecar(args.output.as_deref(), &report.config)?;
        if args.output.is_some() {
            print_json(&report)?;
        }
        return Ok(());
    }
    emit_report(&report, args.output.as_ref(), &report.config)
}

#[derive(Serialize)]
struct DescentRun {
    start: (f64, f64),
    monotone_convergent: bool,
}

#[derive(Serialize)]
struct InvarianceOutput {
    config: ResolvedConfig,
    report: pzmap::dynamics::InvarianceReport,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    descent: Vec<DescentRun>,
}

fn cmd_invariance(args: InvarianceArgs) -> Result<()> {
    let (p, map) = args.params.resolve_with(true)?;
    let set = match args.set {
        Some(SetChoice::M1) => MSet::M1,
        Some(SetChoice::M2) => MSet::M2,
        None => match map.get("set").map(|s| s.as_str()) {
            Some("m1") | Some("M1") => MSet::M1,
            Some("m2") | Some("M2") => MSet::M2,
            Some(other) => bail!("config key `set`: expected m1 or m2, got {other}"),
            None => {
                if p.gamma() >= 2.0 {
                    MSet::M1
                } else {
                    MSet::M2
                }
            }
        },
    };
    let samples = args.samples.or(take_usize(&map, "samples")?).unwrap_or(100_000);
    let seed = args.seed.or(take_u64(&map, "seed")?).unwrap_or(DEFAULT_SEED);
    let descent_starts =
        args.descent_starts.or(take_usize(&map, "descent-starts")?).unwrap_or(0);

    let report = invariant_set_check(&p, set, samples, seed)?;

    let mut descent = Vec::new();
    if descent_starts > 0 {
        let gamma = p.gamma();
        let v_cap = if gamma >= 2.0 {
            2.0 * gamma
        } else {
            ((2.0 + gamma) / 2.0) * ((2.0 + gamma) / 2.0)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5a5a_5a5a);
        while descent.len() < descent_starts {
            let s = State::new(rng.random::<f64>(), rng.random::<f64>() * v_cap)?;
            if s.u <= 1e-3 || !set.contains(s, gamma, 0.0) {
                continue;
            }
            let orbit = iterate(s, 10_000, &p, None);
            descent.push(DescentRun {
                start: (s.u, s.v),
                monotone_convergent: lyapunov_descent(&orbit),
            });
        }
    }

    let mut cfg = base_config("invariance", &p);
    cfg.set = Some(format!("{set:?}").to_lowercase());
    cfg.samples = Some(samples);
    cfg.seed = Some(seed);
    cfg.descent_starts = Some(descent_starts);
    cfg.output = args.output.as_ref().map(|p| p.display().to_string());

    let out = InvarianceOutput { config: cfg, report, descent };
    emit_report(&out, args.output.as_ref(), &out.config)
}

fn cmd_repro(args: ReproArgs) -> Result<()> {
    let jobs: Vec<(&str, Vec<&str>)> = vec![
        ("ex1_ns.json", vec!["ns", "--r", "0.5", "--beta", "2", "--gamma", "1"]),
        ("ex2_ns.json", vec!["ns", "--r", "0.5", "--beta", "4", "--gamma", "1"]),
        (
            "ex3_classify_set1.json",
            vec!["classify", "--r", "0.5", "--beta", "3", "--gamma", "0.1", "--theta", "2"],
        ),
        (
            "ex3_classify_set2.json",
            vec!["classify", "--r", "0.5", "--beta", "2.1", "--gamma", "0.5", "--theta", "1.1"],
        ),
        (
            "fig2_sweep.csv",
            vec![
                "sweep", "--r", "0.5", "--beta", "2", "--gamma", "1", "--theta-lo", "0.01",
                "--theta-hi", "2", "--steps", "400", "--init", "0.32,0.82",
            ],
        ),
        (
            "fig3a_orbit.csv",
            vec![
                "orbit", "--r", "0.5", "--beta", "2", "--gamma", "1", "--theta", "0.36",
                "--init", "0.32,0.82", "--n", "10000",
            ],
        ),
        (
            "fig3b_orbit.csv",
            vec![
                "orbit", "--r", "0.5", "--beta", "2", "--gamma", "1", "--theta", "0.3472",
                "--init", "0.32,0.82", "--n", "10000",
            ],
        ),
        (
            "fig3c_orbit.csv",
            vec![
                "orbit", "--r", "0.5", "--beta", "2", "--gamma", "1", "--theta", "0.32",
                "--init", "0.45,1", "--n", "10000",
            ],
        ),
        (
            "fig3d_orbit.csv",
            vec![
                "orbit", "--r", "0.5", "--beta", "2", "--gamma", "1", "--theta", "0.28",
                "--init", "0.34,0.85", "--n", "10000",
            ],
        ),
        (
            "fig5a_orbit.csv",
            vec![
                "orbit", "--r", "0.5", "--beta", "4", "--gamma", "1", "--theta", "5.02",
                "--init", "0.3,0.9", "--n", "10000",
            ],
        ),
        (
            "fig5b_orbit.csv",
            vec![
                "orbit", "--r", "0.5", "--beta", "4", "--gamma", "1", "--theta", "5",
                "--init", "0.3,0.9", "--n", "10000",
            ],
        ),
        (
            "fig5c_orbit_curve.csv",
            vec![
                "orbit", "--r", "0.5", "--beta", "4", "--gamma", "1", "--theta", "4.9",
                "--init", "0.31,0.99", "--n", "10000",
            ],
        ),
        (
            "fig5c_orbit_boundary.csv",
            vec![
                "orbit", "--r", "0.5", "--beta", "4", "--gamma", "1", "--theta", "4.9",
                "--init", "0.33,1.1", "--n", "10000",
            ],
        ),
        (
            "fig5d_orbit_a.csv",
            vec![
                "orbit", "--r", "0.5", "--beta", "4", "--gamma", "1", "--theta", "4.5",
                "--init", "0.2,0.95", "--n", "10000",
            ],
        ),
        (
            "fig5d_orbit_b.csv",
            vec![
                "orbit", "--r", "0.5", "--beta", "4", "--gamma", "1", "--theta", "4.5",
                "--init", "0.45,0.87", "--n", "10000",
            ],
        ),
        (
            "fig7_triangle.csv",
            vec![
                "control", "--r", "1", "--gamma", "1", "--beta", "3", "--theta", "1.2",
                "--emit-triangle",
            ],
        ),
    ];

    if args.list {
        for (file, argv) in &jobs {
            println!("pzmap {} --output {}", argv.join(" "), args.outdir.join(file).display());
        }
        return Ok(());
    }

    std::fs::create_dir_all(&args.outdir)
        .with_context(|| format!("cannot create {}", args.outdir.display()))?;
    for (file, argv) in &jobs {
        let out = args.outdir.join(file);
        let mut full: Vec<String> = vec!["pzmap".into()];
        full.extend(argv.iter().map(|s| s.to_string()));
        full.push("--output".into());
        full.push(out.display().to_string());
        let cli = Cli::try_parse_from(&full)?;
        run(cli).with_context(|| format!("repro job {file}"))?;
        eprintln!("wrote {}", out.display());
    }
    Ok(())
}
