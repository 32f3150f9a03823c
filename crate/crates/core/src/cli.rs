//! Command-line front end. Every subcommand validates its configuration
//! before computing, renders its whole output in memory and writes it with a
//! single atomic rename.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::ball::{solve_full, BallProblem};
use crate::density::{approximate, build_basis, ApproxNorm};
use crate::error::{usage, Error, Result};
use crate::extension::{conormal_trace, default_levels, extend};
use crate::field::{catalog, point, sampled_1d, Decay, Point, ScalarField, Smoothness};
use crate::levy::{mc_exit_samples, McConfig, McDomain};
use crate::pointwise::{frac_lap_grid, QuadratureSpec};
use crate::special::constant_set;
use crate::spectral::{frac_lap_spectral, periodization_correction, PeriodicGrid, SampledField};
use crate::verify::{run_suite, Datum, Report, Suite, Threshold, Verdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "fraclap", version, about = "Fractional Laplacian toolkit")]
pub struct Cli {
    /// output file; standard output when absent
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// overrides the seed of a Monte Carlo configuration
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// constants c, a, C, b, kappa for one (n, s)
    Constants {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        s: f64,
    },
    /// pointwise quadrature at points read from a CSV file
    Eval(EvalArgs),
    /// Fourier evaluation on a periodic grid
    Spectral(SpectralArgs),
    /// extension values above a point and the conormal trace
    Extend(ExtendArgs),
    /// Dirichlet problem on a ball from a JSON configuration
    SolveBall {
        #[arg(long)]
        config: PathBuf,
        /// where to write the JSON report of invariant checks
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Monte Carlo estimate from a JSON configuration
    Mc {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        dump_samples: Option<PathBuf>,
    },
    /// theorem checks on the default families
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
    },
    /// least-squares fit by s-harmonic functions on B_1
    Approx(ApproxArgs),
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    /// catalog name
    #[arg(long, default_value = "gaussian")]
    pub field: String,
    /// JSON description of a sampled field; replaces --field
    #[arg(long)]
    pub field_config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long)]
    pub s: f64,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    /// CSV file with one point per row
    #[arg(long)]
    pub points: PathBuf,
    /// JSON quadrature settings
    #[arg(long)]
    pub quadrature: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectralArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long = "L")]
    pub l: f64,
    #[arg(long = "N")]
    pub grid_n: usize,
    /// add the free-space correction for the periodic images (1D only)
    #[arg(long)]
    pub correct: bool,
}

#[derive(Debug, Args)]
pub struct ExtendArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    /// comma-separated coordinates
    #[arg(long, value_delimiter = ',', required = true)]
    pub x: Vec<f64>,
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Args)]
pub struct ApproxArgs {
    /// x2, x, abs-x, cos, or a catalog name
    #[arg(long)]
    pub target: String,
    #[arg(long)]
    pub m: usize,
    #[arg(long = "R")]
    pub r_outer: f64,
    #[arg(long)]
    pub s: f64,
    #[arg(long, default_value_t = 0.5)]
    pub width: f64,
    #[arg(long, value_enum, default_value = "c0")]
    pub norm: NormArg,
    /// CSV of the fitted function on B_1
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    C0,
    C1,
}

/// A field in a configuration file: a catalog name, a described datum, or
/// samples from a two-column CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldRef {
    Name(String),
    Datum(Datum),
    Sampled(SampledSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampledSpec {
    pub csv: PathBuf,
    pub smoothness: Smoothness,
    pub decay: Decay,
}

impl FieldRef {
    pub fn resolve(&self, n: usize, s: f64, base: &Path) -> Result<ScalarField> {
        match self {
            FieldRef::Name(name) => Ok(catalog(name, n, s)?.field),
            FieldRef::Datum(d) => Ok(d.field(n)),
            FieldRef::Sampled(spec) => {
                if n != 1 {
                    return Err(usage("sampled fields are one-dimensional"));
                }
                let path = if spec.csv.is_absolute() { spec.csv.clone() } else { base.join(&spec.csv) };
                let rows = read_rows(&path)?;
                if rows.iter().any(|r| r.len() != 2) {
                    return Err(usage(format!("{}: expected two columns (x, value)", path.display())));
                }
                let (xs, ys) = rows.into_iter().map(|r| (r[0], r[1])).unzip();
                sampled_1d(xs, ys, spec.smoothness, spec.decay)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveBallConfig {
    pub n: usize,
    pub r: f64,
    pub s: f64,
    #[serde(default)]
    pub f: Option<FieldRef>,
    #[serde(default)]
    pub g: Option<FieldRef>,
    pub points: Vec<Vec<f64>>,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McRunConfig {
    pub seed: u64,
    #[serde(rename = "N")]
    pub samples: usize,
    pub max_jumps: usize,
    pub domain: McDomain,
    pub s: f64,
    pub n: usize,
    pub g: FieldRef,
    pub x: Vec<f64>,
}

/// Everything a run produces, written only after the run succeeded.
struct Outputs {
    files: Vec<(Option<PathBuf>, String)>,
    code: i32,
}

impl Outputs {
    fn main(body: String, path: &Option<PathBuf>) -> Self {
        Self { files: vec![(path.clone(), body)], code: EXIT_OK }
    }
}

fn read_config<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("invalid configuration {}: {e}", path.display())))
}

fn read_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let row: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match row {
            Ok(r) => rows.push(r),
            // a header line
            Err(_) if rows.is_empty() => continue,
            Err(e) => return Err(usage(format!("{}: {e}", path.display()))),
        }
    }
    Ok(rows)
}

fn resolve_field(args: &FieldArgs) -> Result<ScalarField> {
    match &args.field_config {
        Some(p) => {
            let cfg: SampledSpec = read_config(p)?;
            let base = p.parent().unwrap_or(Path::new("."));
            FieldRef::Sampled(cfg).resolve(args.n, args.s, base)
        }
        None => Ok(catalog(&args.field, args.n, args.s)?.field),
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(|e| Error::Internal(e.to_string()))
}

fn coord_header(n: usize) -> String {
    ["x", "y", "z"][..n].join(",")
}

fn coords(p: &[f64]) -> String {
    p.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(",")
}

fn check_point(p: &[f64], n: usize) -> Result<Point> {
    if p.len() != n {
        return Err(usage(format!("point {p:?} does not have {n} coordinates")));
    }
    Ok(point(p))
}

fn constants(n: usize, s: f64, format: Format) -> Result<String> {
    let c = constant_set(n, s)?;
    match format {
        Format::Json => to_json(&c),
        Format::Csv => {
            let mut out = String::from("name,value\n");
            let b = c.b.map_or(String::new(), |b| format!("{b:e}"));
            for (k, v) in [("n", format!("{}", c.n)), ("s", format!("{:e}", c.s)), ("c", format!("{:e}", c.c)), ("a", format!("{:e}", c.a)),
                ("c_pois", format!("{:e}", c.c_pois)), ("b", b), ("kappa", format!("{:e}", c.kappa)), ("b_half", format!("{:e}", c.b_half)), ("omega", format!("{:e}", c.omega))]
            {
                writeln!(out, "{k},{v}").expect("string write");
            }
            Ok(out)
        }
    }
}

fn eval(args: &EvalArgs, format: Format) -> Result<String> {
    let field = resolve_field(&args.field)?;
    let spec: QuadratureSpec = match &args.quadrature {
        Some(p) => read_config(p)?,
        None => QuadratureSpec::default(),
    };
    spec.validate()?;
    let n = field.dim;
    let pts = read_rows(&args.points)?.iter().map(|r| check_point(r, n)).collect::<Result<Vec<_>>>()?;
    let vals = frac_lap_grid(&field, &pts, args.field.s, &spec)?;
    match format {
        Format::Csv => {
            let mut out = format!("{},value,err_est\n", coord_header(n));
            for (p, v) in pts.iter().zip(&vals) {
                writeln!(out, "{},{:e},{:e}", coords(&p[..n]), v.value, v.err_est).expect("string write");
            }
            Ok(out)
        }
        Format::Json => {
            let rows: Vec<_> = pts.iter().zip(&vals).map(|(p, v)| json!({ "x": &p[..n], "value": v.value, "err_est": v.err_est })).collect();
            to_json(&rows)
        }
    }
}

fn spectral(args: &SpectralArgs, format: Format) -> Result<String> {
    let field = resolve_field(&args.field)?;
    let grid = PeriodicGrid::new(field.dim, args.l, args.grid_n)?;
    let sampled = SampledField::sample(&field, grid)?;
    let res = frac_lap_spectral(&sampled, args.field.s)?;
    let pts: Vec<Point> = (0..grid.len()).map(|i| grid.point(i)).collect();
    let corr = if args.correct {
        if grid.dim != 1 {
            return Err(Error::Unsupported("the command-line correction is one-dimensional".into()));
        }
        Some(periodization_correction(&sampled, args.field.s, &pts)?)
    } else {
        None
    };
    let n = grid.dim;
    let value = |i: usize| res.field.values[i] + corr.as_ref().map_or(0.0, |c| c[i]);
    match format {
        Format::Csv => {
            let mut out = format!("{},u,value\n", coord_header(n));
            for (i, p) in pts.iter().enumerate() {
                writeln!(out, "{},{:e},{:e}", coords(&p[..n]), sampled.values[i], value(i)).expect("string write");
            }
            Ok(out)
        }
        Format::Json => {
            let values: Vec<f64> = (0..pts.len()).map(value).collect();
            to_json(&json!({ "grid": grid, "trusted": res.trusted, "imag_residue": res.imag_residue, "corrected": args.correct, "values": values }))
        }
    }
}

fn extension(args: &ExtendArgs) -> Result<String> {
    let field = resolve_field(&args.field)?;
    let x = check_point(&args.x, field.dim)?;
    let spec = QuadratureSpec::default();
    let s = args.field.s;
    let levels = default_levels();
    let v_levels = levels.iter().map(|&y| Ok((y, extend(&field, &x, y, s, &spec)?))).collect::<Result<Vec<_>>>()?;
    let mut out = json!({ "x": &x[..field.dim], "s": s, "v_levels": v_levels });
    if args.trace {
        let t = conormal_trace(&field, &x, s, &levels, &spec)?;
        out["trace"] = json!({ "value": t.op.value, "err_est": t.op.err_est, "limit": t.limit, "levels": t.levels });
        out["kappa"] = json!({ "calibrated": t.kappa, "theory": t.kappa_theory });
    }
    to_json(&out)
}

fn solve_ball(path: &Path, format: Format) -> Result<(String, String)> {
    let cfg: SolveBallConfig = read_config(path)?;
    cfg.quadrature.validate()?;
    let base = path.parent().unwrap_or(Path::new("."));
    let f = cfg.f.as_ref().map(|f| f.resolve(cfg.n, cfg.s, base)).transpose()?;
    let g = cfg.g.as_ref().map(|g| g.resolve(cfg.n, cfg.s, base)).transpose()?;
    let prob = BallProblem { n: cfg.n, r: cfg.r, s: cfg.s, f, g };
    prob.validate()?;
    let pts = cfg.points.iter().map(|p| check_point(p, cfg.n)).collect::<Result<Vec<_>>>()?;
    use rayon::prelude::*;
    let vals = pts.par_iter().map(|p| solve_full(&prob, &p[..cfg.n], &cfg.quadrature)).collect::<Result<Vec<_>>>()?;
    let n = cfg.n;
    let body = match format {
        Format::Csv => {
            let mut out = format!("{},value\n", coord_header(n));
            for (p, v) in pts.iter().zip(&vals) {
                writeln!(out, "{},{v:e}", coords(&p[..n])).expect("string write");
            }
            out
        }
        Format::Json => to_json(&pts.iter().zip(&vals).map(|(p, v)| json!({ "x": &p[..n], "value": v })).collect::<Vec<_>>())?,
    };
    let report = solve_ball_report(&prob, &cfg, &vals);
    Ok((body, to_json(&report)?))
}

/// Invariants that can be read off the computed values: finiteness and, for
/// nonnegative data, the maximum principle.
fn solve_ball_report(prob: &BallProblem, cfg: &SolveBallConfig, vals: &[f64]) -> Report {
    let finite = vals.iter().all(|v| v.is_finite());
    let umin = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let nonneg = |fld: &Option<ScalarField>| fld.as_ref().is_none_or(|f| f.range.is_some_and(|(lo, _)| lo >= 0.0));
    let sign_known = nonneg(&prob.f) && nonneg(&prob.g);
    let mut measured = vec![("finite".to_string(), if finite { 1.0 } else { 0.0 }), ("min_u".to_string(), umin)];
    measured.push(("data_nonnegative".into(), if sign_known { 1.0 } else { 0.0 }));
    let ok = finite && (!sign_known || umin >= crate::verify::MAX_PRINCIPLE_FLOOR);
    Report {
        check_name: "solve_ball_invariants".into(),
        inputs: serde_json::to_value(cfg).unwrap_or_default(),
        measured,
        threshold: if sign_known { Threshold::Value(crate::verify::MAX_PRINCIPLE_FLOOR) } else { Threshold::ReportedOnly },
        verdict: match (ok, sign_known) {
            (false, _) => Verdict::Fail,
            (true, true) => Verdict::Pass,
            (true, false) => Verdict::Reported,
        },
    }
}

fn monte_carlo(path: &Path, seed: Option<u64>, dump: bool) -> Result<(String, Option<String>)> {
    let mut cfg: McRunConfig = read_config(path)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let mc = McConfig { seed: cfg.seed, samples: cfg.samples, max_jumps: cfg.max_jumps, domain: cfg.domain.clone() };
    mc.validate()?;
    let base = path.parent().unwrap_or(Path::new("."));
    let g = cfg.g.resolve(cfg.n, cfg.s, base)?;
    let x = check_point(&cfg.x, cfg.n)?;
    let (est, samples) = mc_exit_samples(&g, &mc, cfg.s, &x[..cfg.n])?;
    let dumped = dump.then(|| {
        let mut out = format!("{},payoff\n", coord_header(cfg.n));
        for (y, v) in &samples {
            writeln!(out, "{},{v:e}", coords(&y[..cfg.n])).expect("string write");
        }
        out
    });
    Ok((to_json(&est)?, dumped))
}

fn approx(args: &ApproxArgs, format: Format) -> Result<(String, Option<String>)> {
    let target = match args.target.as_str() {
        "x2" => ScalarField::new(1, |x| x[0] * x[0]).named("x^2"),
        "x" => ScalarField::new(1, |x| x[0]).named("x"),
        "abs-x" => ScalarField::new(1, |x| x[0].abs()).named("|x|"),
        "cos" => ScalarField::new(1, |x| (std::f64::consts::PI * x[0]).cos()).named("cos(pi x)"),
        other => catalog(other, 1, args.s)?.field,
    };
    let spec = QuadratureSpec::default();
    let basis = build_basis(args.r_outer, args.m, args.width, args.s, &spec)?;
    let norm = match args.norm {
        NormArg::C0 => ApproxNorm::C0,
        NormArg::C1 => ApproxNorm::C1,
    };
    let res = approximate(&target, &basis, norm)?;
    let fit = basis.combination(&res.coefficients);
    let mut table = String::from("x,target,fit\n");
    for i in 0..=200 {
        let x = -1.0 + i as f64 / 100.0;
        writeln!(table, "{x:e},{:e},{:e}", target.eval(&[x]), fit.eval(&[x])).expect("string write");
    }
    match format {
        Format::Json => Ok((to_json(&res)?, Some(table))),
        Format::Csv => Ok((table, None)),
    }
}

fn stage(path: &Path, body: &str) -> Result<tempfile::NamedTempFile> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let io = |e: std::io::Error| usage(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(body.as_bytes()).map_err(io)?;
    tmp.flush().map_err(io)?;
    Ok(tmp)
}

/// Writes every file through a temporary in its target directory; nothing is
/// renamed into place unless all of them were staged.
pub fn write_atomic(files: &[(&Path, &str)]) -> Result<()> {
    let staged = files.iter().map(|(p, b)| stage(p, b)).collect::<Result<Vec<_>>>()?;
    for (tmp, (path, _)) in staged.into_iter().zip(files) {
        tmp.persist(path).map_err(|e| usage(format!("cannot write {}: {}", path.display(), e.error)))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<Outputs> {
    let out = &cli.output;
    Ok(match &cli.command {
        Command::Constants { n, s } => Outputs::main(constants(*n, *s, cli.format.unwrap_or(Format::Json))?, out),
        Command::Eval(a) => Outputs::main(eval(a, cli.format.unwrap_or(Format::Csv))?, out),
        Command::Spectral(a) => Outputs::main(spectral(a, cli.format.unwrap_or(Format::Csv))?, out),
        Command::Extend(a) => {
            if cli.format == Some(Format::Csv) {
                return Err(usage("extend emits JSON only"));
            }
            Outputs::main(extension(a)?, out)
        }
        Command::SolveBall { config, report } => {
            let (body, rep) = solve_ball(config, cli.format.unwrap_or(Format::Csv))?;
            let report_path = report.clone().or_else(|| out.as_ref().map(|p| p.with_extension("report.json")));
            let mut o = Outputs::main(body, out);
            match report_path {
                Some(p) => o.files.push((Some(p), rep)),
                None => eprint!("{rep}"),
            }
            o
        }
        Command::Mc { config, dump_samples } => {
            if cli.format == Some(Format::Csv) {
                return Err(usage("mc emits JSON; use --dump-samples for the sample table"));
            }
            let (body, dumped) = monte_carlo(config, cli.seed, dump_samples.is_some())?;
            let mut o = Outputs::main(body, out);
            if let (Some(p), Some(d)) = (dump_samples, dumped) {
                o.files.push((Some(p.clone()), d));
            }
            o
        }
        Command::Verify { suite } => {
            if cli.format == Some(Format::Csv) {
                return Err(usage("verify emits JSON only"));
            }
            let reports = run_suite(*suite, &QuadratureSpec::default())?;
            let failed = reports.iter().any(|r| r.verdict == Verdict::Fail);
            let mut o = Outputs::main(to_json(&reports)?, out);
            o.code = if failed { EXIT_CHECK_FAILED } else { EXIT_OK };
            o
        }
        Command::Approx(a) => {
            let (body, table) = approx(a, cli.format.unwrap_or(Format::Json))?;
            let mut o = Outputs::main(body, out);
            if let (Some(p), Some(t)) = (&a.csv, table) {
                o.files.push((Some(p.clone()), t));
            }
            o
        }
    })
}

fn error_kind(e: &Error) -> (&'static str, i32) {
    match e {
        Error::Usage(_) => ("usage", EXIT_USAGE),
        Error::Domain(_) => ("domain", EXIT_USAGE),
        Error::Precondition(_) => ("precondition", EXIT_USAGE),
        Error::Unsupported(_) => ("unsupported", EXIT_USAGE),
        Error::Convergence { .. } => ("convergence", EXIT_NUMERICAL),
        Error::Conditioning { .. } => ("conditioning", EXIT_NUMERICAL),
        Error::Singular(_) => ("singular", EXIT_NUMERICAL),
        Error::Geometry(_) => ("geometry", EXIT_NUMERICAL),
        Error::Internal(_) => ("internal", EXIT_NUMERICAL),
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("FRACLAP_THREADS") {
        let k: usize = v.trim().parse().map_err(|_| usage(format!("FRACLAP_THREADS must be a positive integer, got '{v}'")))?;
        if k == 0 {
            return Err(usage("FRACLAP_THREADS must be at least 1"));
        }
        // a pool that already exists (tests, repeated calls) is kept
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    Ok(())
}

/// Parses `args`, runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = configure_threads().and_then(|_| run(&cli)).and_then(|o| {
        let files: Vec<(&Path, &str)> = o.files.iter().filter_map(|(p, b)| p.as_deref().map(|p| (p, b.as_str()))).collect();
        write_atomic(&files)?;
        Ok(o)
    });
    match result {
        Ok(o) => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            for (path, body) in &o.files {
                if path.is_none() {
                    let _ = lock.write_all(body.as_bytes());
                }
            }
            o.code
        }
        Err(e) => {
            let (kind, code) = error_kind(&e);
            eprintln!("{}", json!({ "error": kind, "message": e.to_string() }));
            code
        }
    }
}
