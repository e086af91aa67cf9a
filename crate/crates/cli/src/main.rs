//! `levelmetric` command line: identity suites, contour and surface dumps, curve evolutions.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use levelmetric::catalog::{planar_field, Preset};
use levelmetric::contour::{extract_level, write_csv};
use levelmetric::evolve::{csf_run, parallel_offset, resample_uniform, CsfConfig, EvolutionTrace, StepSize};
use levelmetric::fieldlang::{parse, FieldExpr, Kind};
use levelmetric::geom::{Box3, Point2, Point3, Polyline, Rect};
use levelmetric::identities::VerifyOptions;
use levelmetric::suite::{self, SuiteRecord};
use levelmetric::surface3d::{extract_surface, surface_options};
use levelmetric::Error;

#[derive(Parser)]
#[command(name = "levelmetric", version, about = "Length, curvature and area of level sets, and the integral identities relating them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an identity suite and print one JSON report per identity.
    Verify(VerifyArgs),
    /// Extract a level curve and write it as CSV.
    Contour(ContourArgs),
    /// Extract a level surface and write it as an OFF mesh.
    Surface(SurfaceArgs),
    /// Evolve a closed curve and write the `t,L,A` trace as CSV.
    Evolve(EvolveArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SuiteName {
    Real,
    Complex,
    Evolve,
    Surface,
    All,
}

#[derive(Args, Clone)]
struct FieldArgs {
    /// Field expression, e.g. "x^2+y^2" or "z^2-1".
    #[arg(long)]
    field: Option<String>,
    /// real2d, real3d or complex.
    #[arg(long)]
    kind: Option<String>,
    /// Built-in field with its band and window.
    #[arg(long)]
    preset: Option<String>,
    /// Half-width of a centred square/cube, or x0 x1 y0 y1 [z0 z1].
    #[arg(long, num_args = 1..=6, allow_negative_numbers = true)]
    window: Option<Vec<f64>>,
    /// Grid cells per side.
    #[arg(long)]
    grid_n: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long, value_enum)]
    suite: Option<SuiteName>,
    /// Band of field values `a b` with a < b.
    #[arg(long, num_args = 2, allow_negative_numbers = true)]
    band: Option<Vec<f64>>,
    #[arg(long)]
    t_subdivisions: Option<usize>,
    /// Strictly decreasing excision radii, comma separated.
    #[arg(long, value_delimiter = ',')]
    excision_radii: Option<Vec<f64>>,
    /// Tolerance override `identity=value`; repeatable.
    #[arg(long = "tol")]
    tolerances: Vec<String>,
    /// Write the JSON lines here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ContourArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// Level value.
    #[arg(long, allow_negative_numbers = true)]
    t: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SurfaceArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long, allow_negative_numbers = true)]
    t: f64,
    /// OFF file; standard output when absent, with the metadata line on standard error.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EvolveArgs {
    /// Curve-shortening flow; without it the curve is offset along its outward normal.
    #[arg(long)]
    csf: bool,
    /// circle:R or ellipse:A,B
    #[arg(long, default_value = "circle:1")]
    shape: String,
    #[arg(long, default_value_t = 256)]
    vertices: usize,
    /// Time step for the flow: "auto" or a positive number.
    #[arg(long, default_value = "auto")]
    dt: String,
    /// Final time; the flow otherwise runs until the area floor, offsets default to 1.
    #[arg(long)]
    t_end: Option<f64>,
    /// Number of offset distances sampled in [0, t_end].
    #[arg(long, default_value_t = 16)]
    steps: usize,
    /// Keep every k-th flow step as a stored curve.
    #[arg(long)]
    store_every: Option<usize>,
    /// Dump stored curves here in the contour CSV layout.
    #[arg(long)]
    curves: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Failures of a command, split by exit code.
#[derive(Debug)]
enum Failure {
    Config(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(m) => Failure::Config(m),
            Error::Syntax { .. } => Failure::Config(e.to_string()),
            e => Failure::Run(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

type CmdResult<T> = Result<T, Failure>;

fn config<T>(msg: impl Into<String>) -> CmdResult<T> {
    Err(Failure::Config(msg.into()))
}

fn sink(path: &Option<PathBuf>) -> CmdResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Field, band and window after applying a preset and explicit flags.
struct Resolved {
    expr: FieldExpr,
    band: Option<(f64, f64)>,
    half_width: Option<f64>,
    window: Option<Vec<f64>>,
    disc: Option<(Point2, f64)>,
    name: String,
}

fn resolve(args: &FieldArgs, band: Option<&Vec<f64>>, default_kind: Kind) -> CmdResult<Resolved> {
    let band = band.map(|b| (b[0], b[1]));
    if let Some((a, b)) = band {
        if !(a < b) {
            return config("band must satisfy a<b");
        }
    }
    let preset = args.preset.as_deref().map(str::parse::<Preset>).transpose()?;
    let kind = args.kind.as_deref().map(str::parse::<Kind>).transpose()?;
    let (expr, name, pband, half, disc) = match (&args.field, preset) {
        (Some(_), Some(_)) => return config("give either --field or --preset, not both"),
        (Some(src), None) => (parse(src, kind.unwrap_or(default_kind))?, src.clone(), None, None, None),
        (None, Some(p)) => {
            let e = p.entry();
            if kind.is_some_and(|k| k != e.kind) {
                return config(format!("preset {p} has kind {}", e.kind));
            }
            (e.expr()?, p.name().to_string(), Some(e.band), Some(e.half_width), e.disc)
        }
        (None, None) => return config("a field is required: pass --field or --preset"),
    };
    Ok(Resolved { expr, band: band.or(pband), half_width: half, window: args.window.clone(), disc, name })
}

impl Resolved {
    fn rect(&self, default_half: f64) -> CmdResult<Rect> {
        match self.window.as_deref() {
            None => Ok(Rect::centered(self.half_width.unwrap_or(default_half))),
            Some([r]) if *r > 0.0 => Ok(Rect::centered(*r)),
            Some([x0, x1, y0, y1]) => Ok(Rect::new(*x0, *x1, *y0, *y1)?),
            Some(_) => config("a planar window is a half-width or x0 x1 y0 y1"),
        }
    }

    fn box3(&self, default_half: f64) -> CmdResult<Box3> {
        match self.window.as_deref() {
            None => Ok(Box3::centered(self.half_width.unwrap_or(default_half))),
            Some([r]) if *r > 0.0 => Ok(Box3::centered(*r)),
            Some([x0, x1, y0, y1, z0, z1]) => Ok(Box3::new(Point3::new(*x0, *y0, *z0), Point3::new(*x1, *y1, *z1))?),
            Some(_) => config("a spatial window is a half-width or x0 x1 y0 y1 z0 z1"),
        }
    }

    fn band(&self) -> CmdResult<(f64, f64)> {
        self.band.map_or_else(|| config("a band is required: pass --band a b"), Ok)
    }
}

fn verify_options(args: &VerifyArgs, base: VerifyOptions) -> CmdResult<VerifyOptions> {
    let mut opts = base;
    if let Some(n) = args.field.grid_n {
        opts.cfg.grid_n = n;
    }
    if let Some(n) = args.t_subdivisions {
        opts.cfg.t_subdivisions = n;
    }
    if let Some(r) = &args.excision_radii {
        opts.cfg.excision_radii = r.clone();
    }
    for t in &args.tolerances {
        let Some((id, v)) = t.split_once('=') else {
            return config(format!("tolerance '{t}' must look like identity=value"));
        };
        match v.parse::<f64>() {
            Ok(x) if x > 0.0 => {
                opts.tolerances.insert(id.to_string(), x);
            }
            _ => return config(format!("tolerance for {id} must be a positive number")),
        }
    }
    Ok(opts)
}

fn cmd_verify(args: &VerifyArgs) -> CmdResult<bool> {
    let suite = match args.suite {
        Some(s) => s,
        None => match args.field.kind.as_deref() {
            Some("complex") => SuiteName::Complex,
            Some("real3d") => SuiteName::Surface,
            _ => SuiteName::Real,
        },
    };
    if let Some(b) = &args.band {
        if !(b[0] < b[1]) {
            return config("band must satisfy a<b");
        }
    }
    let planar = verify_options(args, VerifyOptions::default())?;
    let records: Vec<SuiteRecord> = match suite {
        SuiteName::All => {
            if args.field.field.is_some() || args.field.preset.is_some() {
                return config("the 'all' suite runs the built-in catalog; drop --field and --preset");
            }
            suite::run_all(&planar, &verify_options(args, surface_options())?)?
        }
        SuiteName::Evolve => suite::run_evolve(&planar),
        SuiteName::Real => {
            let r = resolve(&args.field, args.band.as_ref(), Kind::Real2d)?;
            let field = planar_field(&r.expr)?;
            let window = r.rect(3.0)?;
            match (r.disc, args.band.is_some()) {
                (Some((c, rad)), false) => suite::run_disc(&r.name, &*field, c, rad, window, &planar)?,
                _ => {
                    let (a, b) = r.band()?;
                    suite::run_real(&r.name, &*field, a, b, window, &planar)?
                }
            }
        }
        SuiteName::Complex => {
            let r = resolve(&args.field, args.band.as_ref(), Kind::Complex)?;
            let (a, b) = r.band()?;
            suite::run_complex(&r.name, &r.expr, a, b, r.rect(3.0)?, &planar)?
        }
        SuiteName::Surface => {
            let r = resolve(&args.field, args.band.as_ref(), Kind::Real3d)?;
            let (a, b) = r.band()?;
            let opts = verify_options(args, surface_options())?;
            suite::run_surface(&r.name, &r.expr, a, b, r.box3(2.5)?, &opts)?
        }
    };
    let mut out = sink(&args.output)?;
    for rec in &records {
        writeln!(out, "{}", rec.to_json())?;
    }
    out.flush()?;
    Ok(records.iter().all(SuiteRecord::ok))
}

fn cmd_contour(args: &ContourArgs) -> CmdResult<bool> {
    let r = resolve(&args.field, None, Kind::Real2d)?;
    let field = planar_field(&r.expr)?;
    let ls = extract_level(&*field, args.t, &r.rect(3.0)?, args.field.grid_n.unwrap_or(256))?;
    let mut out = sink(&args.output)?;
    write_csv(&ls, &mut out)?;
    out.flush()?;
    Ok(true)
}

fn cmd_surface(args: &SurfaceArgs) -> CmdResult<bool> {
    let r = resolve(&args.field, None, Kind::Real3d)?;
    let field = r.expr.to_field3()?;
    let mesh = extract_surface(&field, args.t, &r.box3(2.5)?, args.field.grid_n.unwrap_or(64))?;
    let manifold = mesh.check_closed_manifold().is_ok();
    let meta = serde_json::json!({
        "t": args.t,
        "vertices": mesh.vertices.len(),
        "triangles": mesh.triangles.len(),
        "euler_characteristic": mesh.euler_characteristic(),
        "closed_manifold": manifold,
        "area": mesh.area(),
        "unprojected": mesh.unprojected,
    });
    let mut out = sink(&args.output)?;
    mesh.write_off(&mut out)?;
    out.flush()?;
    if args.output.is_some() {
        println!("{meta}");
    } else {
        eprintln!("{meta}");
    }
    Ok(true)
}

fn parse_shape(shape: &str, n: usize) -> CmdResult<Polyline> {
    let bad = || Failure::Config(format!("bad shape '{shape}': expected circle:R or ellipse:A,B"));
    let (kind, params) = shape.split_once(':').ok_or_else(bad)?;
    let nums: Vec<f64> = params.split(',').map(|x| x.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    if n < 8 {
        return config("at least 8 vertices are needed");
    }
    match (kind, nums.as_slice()) {
        ("circle", [r]) if *r > 0.0 => Ok(Polyline::circle(Point2::default(), *r, n)),
        ("ellipse", [a, b]) if *a > 0.0 && *b > 0.0 => {
            Ok(resample_uniform(&Polyline::ellipse(Point2::default(), *a, *b, 4 * n), n))
        }
        _ => Err(bad()),
    }
}

fn cmd_evolve(args: &EvolveArgs) -> CmdResult<bool> {
    let curve = parse_shape(&args.shape, args.vertices)?;
    let trace = if args.csf {
        let dt: StepSize = args.dt.parse()?;
        let cfg = CsfConfig {
            dt,
            t_end: args.t_end.unwrap_or(f64::INFINITY),
            store_every: args.store_every.or(args.curves.as_ref().map(|_| 100)),
            ..Default::default()
        };
        csf_run(&curve, &cfg)?
    } else {
        let t_end = args.t_end.unwrap_or(1.0);
        if !(t_end >= 0.0) || args.steps == 0 {
            return config("offsets need t_end >= 0 and steps >= 1");
        }
        let mut trace = EvolutionTrace {
            times: Vec::new(),
            lengths: Vec::new(),
            areas: Vec::new(),
            turning: Vec::new(),
            curves: args.curves.as_ref().map(|_| Vec::new()),
            extinction_time: None,
        };
        for k in 0..=args.steps {
            let t = t_end * k as f64 / args.steps as f64;
            let o = parallel_offset(&curve, t)?;
            trace.times.push(t);
            trace.lengths.push(o.length());
            trace.areas.push(o.area());
            trace.turning.push(o.turning_angles().iter().sum());
            if let Some(cs) = trace.curves.as_mut() {
                cs.push(levelmetric::evolve::StoredCurve { time: t, curve: o });
            }
        }
        trace
    };
    let mut out = sink(&args.output)?;
    trace.write_csv(&mut out)?;
    out.flush()?;
    if let Some(p) = &args.curves {
        let mut w = sink(&Some(p.clone()))?;
        trace.write_curves_csv(&mut w)?;
        w.flush()?;
    }
    Ok(true)
}

fn init_threads() -> CmdResult<()> {
    if let Ok(v) = std::env::var("LEVELMETRIC_THREADS") {
        let n: usize = match v.parse() {
            Ok(n) if n > 0 => n,
            _ => return config(format!("LEVELMETRIC_THREADS must be a positive integer, got '{v}'")),
        };
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Run(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| match &cli.command {
        Command::Verify(a) => cmd_verify(a),
        Command::Contour(a) => cmd_contour(a),
        Command::Surface(a) => cmd_surface(a),
        Command::Evolve(a) => cmd_evolve(a),
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Run(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes() {
        let c = parse_shape("circle:2", 64).unwrap();
        assert!((c.vertices[0].norm() - 2.0).abs() < 1e-12);
        let e = parse_shape("ellipse:2,1", 64).unwrap();
        assert_eq!(e.len(), 64);
        assert!(parse_shape("square:1", 64).is_err());
        assert!(parse_shape("ellipse:2", 64).is_err());
        assert!(parse_shape("circle:-1", 64).is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
