//! The four commands. Each returns a [`Report`] and an exit code; files are
//! written only after all computation is done.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use aek_core::evolute::{
    discriminant_d, direction_sextic, evolute_directions, evolute_sample, finish_trace, mu_gamma_prime,
    solve_evolute_point, trace_grid, DirectionSet, RootOptions, SampleResult, TraceResult,
};
use aek_core::invariants::{
    affine_curvature, center_of_affine_curvature, moutard_center, moutard_quadric, su_cone_direction,
    transon_covector, transon_gradients, transon_plane, Center, TangentDirection,
};
use aek_core::linalg;
use aek_core::midplanes::{midplane_limit_probe, verify_lemma_main3, verify_lemma_main4_with, HForms};
use aek_core::{normalize_at, rotate_frame, BlaschkeFrame, Mode, Scalar};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::export;
use crate::report::{self, Report};
use crate::spec::SurfaceSpec;
use crate::{CliError, EXIT_VERIFICATION};

#[derive(Debug, Parser)]
#[command(name = "aek", version, about = "Affine invariants and the mid-planes evolute of convex surface patches")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normal-form coefficients and the world map at a point.
    Normalize(Options),
    /// Transon plane, cone line, Moutard quadric and centers for a direction.
    Invariants(Options),
    /// Exact checks of the expansion identities and the center relations.
    Verify(Options),
    /// Trace the evolute over the patch grid and write CSV, OBJ and JSON.
    Evolute(Options),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// Surface specification (JSON).
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Chart point `u,v` (numbers or p/q); defaults to the patch center.
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    /// Local tangent direction: an angle θ, or an exact unit pair `ξ,η`.
    #[arg(long, allow_hyphen_values = true)]
    pub direction: Option<String>,
    /// `rational` or `float`; overrides the spec.
    #[arg(long)]
    pub mode: Option<String>,
    /// Grid resolution per side; overrides the spec.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Output directory for report.json (and the evolute files).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for the grid (default: all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Include wall-clock time in the report.
    #[arg(long)]
    pub timing: bool,
    /// verify: use a random rational frame from this seed instead of a spec.
    #[arg(long)]
    pub seed: Option<u64>,
    /// verify: corrupt a displayed form before checking (`h12`).
    #[arg(long)]
    pub inject_fault: Option<String>,
}

/// Output of a command.
pub struct Outcome {
    pub report: Report,
    pub exit_code: i32,
    pub files: Vec<PathBuf>,
}

pub fn run(command: &Command) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let (kind, opts) = match command {
        Command::Normalize(o) => ("normalize", o),
        Command::Invariants(o) => ("invariants", o),
        Command::Verify(o) => ("verify", o),
        Command::Evolute(o) => ("evolute", o),
    };
    let mut out = match command {
        Command::Normalize(o) => normalize(o)?,
        Command::Invariants(o) => invariants(o)?,
        Command::Verify(o) => verify(o)?,
        Command::Evolute(o) => evolute(o)?,
    };
    out.report.command = kind.into();
    if opts.timing {
        out.report.timing_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    let dir = match command {
        Command::Evolute(_) => Some(opts.out.clone().unwrap_or_else(|| PathBuf::from("."))),
        _ => opts.out.clone(),
    };
    if let Some(dir) = &dir {
        std::fs::create_dir_all(dir)?;
        let path = dir.join("report.json");
        std::fs::write(&path, out.report.to_json())?;
        out.files.push(path);
    }
    Ok(out)
}

fn parse_mode(opts: &Options, spec: Option<&SurfaceSpec>) -> Result<Mode, CliError> {
    let flag = match &opts.mode {
        Some(m) => Some(m.parse::<Mode>().map_err(|_| CliError::Usage(format!("unknown mode {m:?}")))?),
        None => None,
    };
    match spec {
        Some(s) => s.mode(flag),
        None => Ok(flag.unwrap_or(Mode::Rational)),
    }
}

fn load(opts: &Options) -> Result<SurfaceSpec, CliError> {
    let path = opts.spec.as_ref().ok_or_else(|| CliError::Usage("--spec is required".into()))?;
    SurfaceSpec::load(path)
}

fn pair(text: &str, mode: Mode, what: &str) -> Result<[Scalar; 2], CliError> {
    let bad = || CliError::Usage(format!("{what} must be two comma-separated numbers, got {text:?}"));
    let (x, y) = text.split_once(',').ok_or_else(bad)?;
    Ok([
        Scalar::parse(mode, x).map_err(|_| bad())?,
        Scalar::parse(mode, y).map_err(|_| bad())?,
    ])
}

fn geometry(e: impl std::fmt::Display) -> CliError {
    CliError::Geometry(e.to_string())
}

fn frame_at(spec: &SurfaceSpec, opts: &Options, mode: Mode) -> Result<(BlaschkeFrame, [Scalar; 2]), CliError> {
    let surface = spec.surface(mode)?;
    let p = match &opts.point {
        Some(t) => pair(t, mode, "--point")?,
        None => {
            let pt = surface.patch();
            surface
                .chart_point([0.5 * (pt.u.0 + pt.u.1), 0.5 * (pt.v.0 + pt.v.1)])
                .map_err(geometry)?
        }
    };
    let frame = normalize_at(&surface, &p).map_err(geometry)?;
    Ok((frame, p))
}

fn direction(opts: &Options, mode: Mode) -> Result<TangentDirection, CliError> {
    let Some(text) = &opts.direction else {
        return Ok(TangentDirection::e1(mode));
    };
    if text.contains(',') {
        let [xi, eta] = pair(text, mode, "--direction")?;
        return TangentDirection::new(xi, eta).map_err(|e| CliError::Usage(format!("--direction: {e}")));
    }
    let theta: f64 = text
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("--direction: cannot read {text:?}")))?;
    match mode {
        Mode::Float => Ok(TangentDirection::from_angle(theta)),
        Mode::Rational if theta == 0.0 => Ok(TangentDirection::e1(mode)),
        Mode::Rational => Err(CliError::Usage(
            "in rational mode give --direction as an exact unit pair such as 3/5,4/5".into(),
        )),
    }
}

fn base_report(mode: Mode, echo: BTreeMap<String, Value>) -> Report {
    Report {
        command: String::new(),
        mode: mode.as_str().into(),
        echo,
        results: Value::Null,
        diagnostics: Vec::new(),
        ok: true,
        timing_ms: None,
    }
}

fn echo_of(opts: &Options, point: Option<&[Scalar; 2]>) -> BTreeMap<String, Value> {
    let mut e = BTreeMap::new();
    if let Some(s) = &opts.spec {
        e.insert("spec".into(), json!(s.display().to_string()));
    }
    if let Some(p) = point {
        e.insert("point".into(), report::vector(p));
    }
    if let Some(d) = &opts.direction {
        e.insert("direction".into(), json!(d));
    }
    if let Some(g) = opts.grid {
        e.insert("grid".into(), json!(g));
    }
    if let Some(s) = opts.seed {
        e.insert("seed".into(), json!(s));
    }
    if let Some(f) = &opts.inject_fault {
        e.insert("inject_fault".into(), json!(f));
    }
    e
}

fn done(report: Report) -> Outcome {
    Outcome {
        report,
        exit_code: 0,
        files: Vec::new(),
    }
}

fn normalize(opts: &Options) -> Result<Outcome, CliError> {
    let spec = load(opts)?;
    let mode = parse_mode(opts, Some(&spec))?;
    let (f, p) = frame_at(&spec, opts, mode)?;
    let f4 = f.f4();
    let names = ["f40", "f31", "f22", "f13", "f04"];
    let f4_obj: serde_json::Map<String, Value> =
        names.iter().zip(&f4).map(|(n, c)| (n.to_string(), report::scalar(c))).collect();
    let mut r = base_report(mode, echo_of(opts, Some(&p)));
    r.results = json!({
        "a": report::scalar(&f.a()),
        "b": report::scalar(&f.b()),
        "f4": f4_obj,
        "f50": report::scalar(&f.f50()),
        "f31": report::scalar(&f.f31()),
        "apolarity_residuals": report::vector(&f.apolarity_residuals()),
        "pick": report::scalar(&aek_core::evolute::pick_invariant(&f)),
        "volume_factor": report::scalar(&f.volume_factor()),
        "world_from_local": report::affine_map(f.world_from_local()),
    });
    Ok(done(r))
}

fn center_pair(f: &BlaschkeFrame, c: &Center) -> Value {
    json!({ "local": report::center(c), "world": report::center(&f.pull_back(c)) })
}

fn or_error(v: Result<Value, String>) -> Value {
    v.unwrap_or_else(|e| json!({ "error": e }))
}

fn invariants(opts: &Options) -> Result<Outcome, CliError> {
    let spec = load(opts)?;
    let mode = parse_mode(opts, Some(&spec))?;
    let (f, p) = frame_at(&spec, opts, mode)?;
    let t = direction(opts, mode)?;
    let world = f.world_from_local();
    let plane = or_error(
        transon_plane(&f, &t)
            .map(|pl| json!({ "local": report::plane(&pl), "world": report::plane(&f.pull_back(&pl)) }))
            .map_err(|e| e.to_string()),
    );
    let cone = or_error(
        su_cone_direction(&f, &t)
            .map(|s| json!({ "local": report::vector(&s), "world": report::vector(&world.apply_vector(&s)) }))
            .map_err(|e| e.to_string()),
    );
    let quadric = or_error(
        moutard_quadric(&f, &t)
            .map(|q| json!({ "local": report::quadric(&q), "world": report::quadric(&f.pull_back(&q)) }))
            .map_err(|e| e.to_string()),
    );
    let moutard = or_error(moutard_center(&f, &t).map(|c| center_pair(&f, &c)).map_err(|e| e.to_string()));
    let curvature_center = or_error(
        center_of_affine_curvature(&f, &t)
            .map(|c| center_pair(&f, &c))
            .map_err(|e| e.to_string()),
    );
    let section = rotate_frame(&f, &t.rotation()).map_err(geometry)?;
    let sec = aek_core::evolute::cone_section(&section);
    let mut r = base_report(mode, echo_of(opts, Some(&p)));
    r.results = json!({
        "direction": { "local": report::vector(&t.pair()), "theta": report::float(t.angle()) },
        "transon_plane": plane,
        "cone_direction": cone,
        "moutard_quadric": quadric,
        "moutard_center": moutard,
        "center_of_affine_curvature": curvature_center,
        "mu": report::scalar(&affine_curvature(&sec)),
        "mu_prime": report::scalar(&mu_gamma_prime(&section)),
    });
    Ok(done(r))
}

fn random_frame(seed: u64, mode: Mode) -> Result<BlaschkeFrame, CliError> {
    let mut g = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut next = || Scalar::ratio(Mode::Rational, g.gen_range(-9..=9), g.gen_range(1..=9));
    let (a, b) = (next(), next());
    let f4 = std::array::from_fn(|_| next());
    let f5 = std::array::from_fn(|_| next());
    BlaschkeFrame::from_coefficients(a, b, f4, f5)
        .and_then(|f| f.to_mode(mode))
        .map_err(geometry)
}

/// Unit directions `((1 − t²), 2t)/(1 + t²)`, exact in rational mode.
fn check_directions(mode: Mode) -> Vec<TangentDirection> {
    [(0, 1), (1, 2), (1, 1), (2, 1), (-1, 3), (-3, 4)]
        .iter()
        .map(|&(n, d)| {
            let t = Scalar::ratio(Mode::Rational, n, d);
            let one = Scalar::one(Mode::Rational);
            let den = &one + &(&t * &t);
            let xi = &(&one - &(&t * &t)) / &den;
            let eta = &(&Scalar::from_int(Mode::Rational, 2) * &t) / &den;
            TangentDirection::new(xi, eta)
                .and_then(|d| d.to_mode(mode))
                .expect("rational unit pair")
        })
        .collect()
}

struct Check {
    name: &'static str,
    pass: bool,
    max_residual: f64,
    detail: String,
}

impl Check {
    fn value(&self) -> Value {
        json!({
            "name": self.name,
            "pass": self.pass,
            "max_residual": report::float(self.max_residual),
            "detail": self.detail,
        })
    }
}

fn same(mode: Mode, x: &Scalar, y: &Scalar, tol: f64) -> (bool, f64) {
    let gap = (x.to_f64() - y.to_f64()).abs();
    match mode {
        Mode::Rational => (x == y, gap),
        Mode::Float => (gap <= tol * x.to_f64().abs().max(y.to_f64().abs()).max(1.0), gap),
    }
}

fn same3(mode: Mode, x: &[Scalar; 3], y: &[Scalar; 3], tol: f64) -> (bool, f64) {
    (0..3).fold((true, 0.0f64), |(ok, g), i| {
        let (o, gi) = same(mode, &x[i], &y[i], tol);
        (ok && o, g.max(gi))
    })
}

fn run_checks(f: &BlaschkeFrame, fault: Option<&str>, tol: f64) -> Result<Vec<Check>, CliError> {
    let mode = f.mode();
    let dirs = check_directions(mode);
    let mut checks = Vec::new();

    let l3 = verify_lemma_main3(f).map_err(geometry)?;
    checks.push(Check {
        name: "expansion_order3",
        pass: l3.passes(tol),
        max_residual: l3.max_residual,
        detail: format!("{} nonzero residual coefficients", l3.nonzero_terms),
    });

    let mut h = HForms::from_frame(f);
    match fault {
        None => {}
        Some("h12") => h = h.with_h12_perturbed(&Scalar::one(mode)),
        Some(other) => return Err(CliError::Usage(format!("unknown fault {other:?}; known: h12"))),
    }
    let l4 = verify_lemma_main4_with(f, &h).map_err(geometry)?;
    checks.push(Check {
        name: "expansion_order4",
        pass: l4.passes(tol),
        max_residual: l4.max_residual,
        detail: format!("{} nonzero residual coefficients", l4.nonzero_terms),
    });

    let k = Scalar::ratio(mode, -3, 32);
    let sextic = direction_sextic(f);
    let (mut ok, mut worst) = (true, 0.0f64);
    for d in &dirs {
        let d = d.pair();
        let lhs = discriminant_d(f, &d).map_err(geometry)?;
        let (o, g) = same(mode, &lhs, &(&k * &sextic.eval(&d)), tol);
        ok &= o;
        worst = worst.max(g);
    }
    checks.push(Check {
        name: "d_identity",
        pass: ok,
        max_residual: worst,
        detail: format!("D = -3/32 (xi^2 + eta^2)^2 q at {} directions", dirs.len()),
    });

    let (mut ok, mut worst) = (true, 0.0f64);
    for d in &dirs {
        let d = d.pair();
        let g = transon_covector(f, &d).map_err(geometry)?;
        let [gx, gy] = transon_gradients(f, &d).map_err(geometry)?;
        let lhs = linalg::scale3(&g, &Scalar::from_int(mode, 3));
        let rhs = linalg::add3(&linalg::scale3(&gx, &d[0]), &linalg::scale3(&gy, &d[1]));
        let (o, gap) = same3(mode, &lhs, &rhs, tol);
        ok &= o;
        worst = worst.max(gap);
    }
    checks.push(Check {
        name: "euler_relation",
        pass: ok,
        max_residual: worst,
        detail: format!("3G = xi G_xi + eta G_eta at {} directions", dirs.len()),
    });

    let (mut ok, mut worst, mut compared) = (true, 0.0f64, 0usize);
    for t in &dirs {
        let (Ok(c1), Ok(c2)) = (center_of_affine_curvature(f, t), moutard_center(f, t)) else {
            continue;
        };
        compared += 1;
        match (&c1, &c2) {
            (Center::Finite(x), Center::Finite(y)) => {
                let (o, g) = same3(mode, x, y, tol);
                ok &= o;
                worst = worst.max(g);
            }
            (Center::AtInfinity(x), Center::AtInfinity(y)) => {
                let z = linalg::zero3(mode);
                let (o, g) = same3(mode, &linalg::cross3(x, y), &z, tol);
                ok &= o;
                worst = worst.max(g);
            }
            _ => ok = false,
        }
    }
    checks.push(Check {
        name: "curvature_center_is_moutard_center",
        pass: ok && compared > 0,
        max_residual: worst,
        detail: format!("{compared} directions compared"),
    });

    // directions solving q are irrational in general: checked in float
    let ff = f.to_mode(Mode::Float).map_err(geometry)?;
    let (mut ok, mut worst, mut solved) = (true, 0.0f64, 0usize);
    let set = evolute_directions(&ff, &RootOptions::default());
    for root in set.roots() {
        match solve_evolute_point(&ff, &TangentDirection::from_angle(root.theta), 1e-8) {
            Ok(s) => {
                if let Some(gap) = s.moutard_gap {
                    solved += 1;
                    worst = worst.max(gap);
                    ok &= gap < 1e-9;
                }
            }
            Err(_) => ok = false,
        }
    }
    let detail = match set {
        DirectionSet::IdenticallyZero => "q vanishes identically; nothing to solve".to_string(),
        DirectionSet::Roots(r) => format!("{} roots, {solved} finite solutions within 1e-9 relative", r.len()),
    };
    checks.push(Check {
        name: "evolute_point_is_moutard_center",
        pass: ok,
        max_residual: worst,
        detail,
    });

    let ts = [1e-1, 1e-2, 1e-3, 1e-4];
    let (mut ok, mut min_order) = (true, f64::INFINITY);
    for t in &dirs {
        let probe = midplane_limit_probe(f, t, &ts).map_err(geometry)?;
        ok &= probe.converges(0.9, 1e-13);
        if let Some(o) = probe.order {
            min_order = min_order.min(o);
        }
    }
    checks.push(Check {
        name: "midplane_convergence",
        pass: ok,
        max_residual: 0.0,
        detail: format!("distance to the Transon plane decreasing, min fitted order {min_order:.3} (need >= 0.9)"),
    });
    Ok(checks)
}

fn verify(opts: &Options) -> Result<Outcome, CliError> {
    let (frame, mode, point, tol) = match (opts.seed, &opts.spec) {
        (Some(seed), _) => {
            let mode = parse_mode(opts, None)?;
            (random_frame(seed, mode)?, mode, None, 1e-12)
        }
        (None, Some(_)) => {
            let spec = load(opts)?;
            let mode = parse_mode(opts, Some(&spec))?;
            let (f, p) = frame_at(&spec, opts, mode)?;
            (f, mode, Some(p), spec.tolerances.check)
        }
        (None, None) => return Err(CliError::Usage("verify needs --spec or --seed".into())),
    };
    let checks = run_checks(&frame, opts.inject_fault.as_deref(), tol)?;
    let mut r = base_report(mode, echo_of(opts, point.as_ref()));
    if mode == Mode::Float {
        r.diagnostics
            .push(format!("warning: float mode; identities are checked to {tol:e} instead of exactly"));
    }
    r.ok = checks.iter().all(|c| c.pass);
    for c in checks.iter().filter(|c| !c.pass) {
        r.diagnostics.push(format!("FAIL {}: {}", c.name, c.detail));
    }
    r.results = json!({
        "frame": { "a": report::scalar(&frame.a()), "b": report::scalar(&frame.b()) },
        "checks": checks.iter().map(Check::value).collect::<Vec<_>>(),
    });
    let exit_code = if r.ok { 0 } else { EXIT_VERIFICATION };
    Ok(Outcome {
        report: r,
        exit_code,
        files: Vec::new(),
    })
}

fn sample_value(s: &SampleResult, branch_of: &BTreeMap<(usize, usize), usize>, k: usize) -> Value {
    let base = json!({ "index": [s.index.0, s.index.1], "chart": report::floats(&s.chart) });
    let mut obj = match base {
        Value::Object(m) => m,
        _ => unreachable!(),
    };
    match &s.outcome {
        Err(e) => {
            obj.insert("error".into(), json!(e.to_string()));
        }
        Ok(d) => {
            obj.insert("identically_zero".into(), json!(d.identically_zero));
            obj.insert("pick".into(), report::float(d.pick));
            let roots: Vec<Value> = d
                .points
                .iter()
                .enumerate()
                .map(|(p, pt)| {
                    let mut m = serde_json::Map::new();
                    m.insert("theta".into(), report::float(pt.root.theta));
                    m.insert("chart_angle".into(), report::float(pt.chart_angle));
                    m.insert("simple".into(), json!(pt.root.simple));
                    m.insert("branch".into(), json!(branch_of.get(&(k, p))));
                    match &pt.solution {
                        Ok(sol) => {
                            m.insert("center_world".into(), report::center(&sol.center_world));
                            m.insert("d_value".into(), report::float(sol.d_value));
                            m.insert("max_residual".into(), report::float(sol.max_residual()));
                            m.insert("moutard_gap".into(), sol.moutard_gap.map_or(Value::Null, report::float));
                        }
                        Err(e) => {
                            m.insert("error".into(), json!(e.to_string()));
                        }
                    }
                    if let Some(reg) = &pt.regularity {
                        m.insert(
                            "regularity".into(),
                            json!({
                                "simple_root": reg.simple_root,
                                "pick_gradient": report::floats(&reg.pick_gradient),
                                "max_pick_derivative": report::float(reg.max_pick_derivative),
                                "mu_gamma_prime": report::float(reg.mu_gamma_prime),
                                "regular": reg.regular,
                            }),
                        );
                    }
                    Value::Object(m)
                })
                .collect();
            obj.insert("roots".into(), Value::Array(roots));
        }
    }
    Value::Object(obj)
}

fn trace_value(t: &TraceResult) -> Value {
    let branch_of = t.branch_of();
    let samples: Vec<Value> = t.samples.iter().enumerate().map(|(k, s)| sample_value(s, &branch_of, k)).collect();
    let branches: Vec<Value> = t
        .branches
        .iter()
        .map(|b| {
            json!({
                "id": b.id,
                "degenerate": b.degenerate,
                "size": b.samples.len(),
                "at_infinity": b.samples.iter().filter(|s| !s.center_world.is_finite()).count(),
                "regular": b.samples.iter().filter(|s| s.regular == Some(true)).count(),
                "max_angle_jump": report::float(b.max_angle_jump),
                "events": b.events,
            })
        })
        .collect();
    json!({
        "grid": [t.nu, t.nv],
        "successes": t.successes(),
        "failures": t.samples.len() - t.successes(),
        "branches": branches,
        "samples": samples,
    })
}

/// Samples in parallel; the result order is the grid order.
pub fn parallel_trace(spec: &SurfaceSpec, mode: Mode, grid: Option<usize>, workers: Option<usize>) -> Result<TraceResult, CliError> {
    let n = grid.unwrap_or(spec.grid);
    if n == 0 {
        return Err(CliError::Usage("grid must have at least one sample per side".into()));
    }
    let surface = spec.surface(mode)?.to_mode(Mode::Float).map_err(geometry)?;
    let opts = spec.trace_options(Some(n), true);
    let points = trace_grid(&surface, &opts);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(k) = workers {
        if k == 0 {
            return Err(CliError::Usage("--workers must be positive".into()));
        }
        pool = pool.num_threads(k);
    }
    let pool = pool.build().map_err(|e| CliError::Usage(e.to_string()))?;
    let samples: Vec<SampleResult> = pool.install(|| {
        points
            .par_iter()
            .map(|(idx, p)| evolute_sample(&surface, *idx, *p, &opts))
            .collect()
    });
    Ok(finish_trace(samples, &opts))
}

fn write(dir: &Path, name: &str, text: &str, files: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, text)?;
    files.push(path);
    Ok(())
}

fn evolute(opts: &Options) -> Result<Outcome, CliError> {
    let spec = load(opts)?;
    let mode = parse_mode(opts, Some(&spec))?;
    let trace = parallel_trace(&spec, mode, opts.grid, opts.workers)?;
    if trace.successes() == 0 {
        let first = trace
            .samples
            .iter()
            .find_map(|s| s.outcome.as_ref().err())
            .map(|e| e.to_string())
            .unwrap_or_default();
        return Err(CliError::Geometry(format!("no grid sample succeeded (first error: {first})")));
    }
    let mut r = base_report(mode, echo_of(opts, None));
    if mode == Mode::Rational {
        r.diagnostics.push("the trace runs in float mode; rational coefficients are rounded once".into());
    }
    let failed = trace.samples.iter().filter(|s| s.outcome.is_err()).count();
    if failed > 0 {
        r.diagnostics.push(format!("{failed} grid samples failed; see results.samples"));
    }
    if trace.samples.iter().any(|s| matches!(&s.outcome, Ok(d) if d.identically_zero)) {
        r.diagnostics.push("q vanishes identically at some samples; they form the degenerate branch".into());
    }
    r.results = trace_value(&trace);
    let dir = opts.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    let mut files = Vec::new();
    write(&dir, "evolute_points.csv", &export::points_csv(&trace), &mut files)?;
    write(&dir, "evolute_mesh.obj", &export::mesh_obj(&trace), &mut files)?;
    Ok(Outcome {
        report: r,
        exit_code: 0,
        files,
    })
}
