//! Command-line front end: `render`, `roundtrip` and `bench`.
//!
//! Exit codes: 0 success, 2 bad arguments, 3 expression parse error,
//! 4 render error, 5 I/O error, 6 numerical disagreement.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::{Expr, ParamEnv, ParseError};
use crate::geometry::{LogicalPoint, MappedPoint, Projection};
use crate::render::{self, ColorMap, Domain, PlotJob};
use crate::transform::{
    count_multiplications, Axis, ComposedTransform, GraphicsTransform, Strategy,
};

/// Largest accepted round-trip or transform error.
pub const AGREEMENT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    BadArguments = 2,
    ParseError = 3,
    RenderError = 4,
    IoError = 5,
    Disagreement = 6,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

const HELP_FOOTER: &str = "\
Angles are radians; append `deg` for degrees (e.g. `30deg`).
Every run is reproducible from its full flag set: random sampling in
`roundtrip` and `bench` is fully determined by --seed.";

#[derive(Debug, Parser)]
#[command(
    name = "obliplot",
    version,
    about = "Plot z = f(x, y) with an oblique 3-D to 2-D mapping",
    after_help = HELP_FOOTER
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a surface to a binary PPM image.
    Render(RenderArgs),
    /// Check that inverse_map(forward_map(p)) recovers p on random points.
    Roundtrip(RoundtripArgs),
    /// Compare the three ways of transforming mapped points (TSV on stdout).
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct ProjectionArgs {
    /// Angle between the X and Z axes, strictly inside (0, π/2).
    #[arg(long, value_parser = parse_angle, default_value = "0.7853981633974483", allow_hyphen_values = true)]
    pub theta: f64,
    /// Compression factor along Z, in (0, 1].
    #[arg(long = "rho-z", default_value_t = 1.0, allow_hyphen_values = true)]
    pub rho_z: f64,
    /// Physical units per logical unit.
    #[arg(long, default_value_t = 50.0, allow_hyphen_values = true)]
    pub scale: f64,
    /// Screen position of the logical origin: `center` or `X,Y`.
    #[arg(long, default_value = "center", allow_hyphen_values = true)]
    pub origin: Origin,
    /// Image size `WxH`; `center` resolves against it.
    #[arg(long, value_parser = parse_size, default_value = "640x480")]
    pub size: (usize, usize),
}

impl ProjectionArgs {
    fn projection(&self) -> Result<Projection, String> {
        let origin = self.origin.resolve(self.size);
        Projection::new(self.theta, self.rho_z, origin, self.scale).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Surface expression in x and y, e.g. "sin(x+y)".
    #[arg(long, allow_hyphen_values = true)]
    pub expr: String,
    /// Parameter binding `name=value`; repeatable.
    #[arg(long = "param", value_parser = parse_param, allow_hyphen_values = true)]
    pub params: Vec<(String, f64)>,
    /// Sampling domain `xmin:xmax:ymin:ymax`.
    #[arg(
        long,
        value_parser = parse_domain,
        default_value = "-3.141592653589793:3.141592653589793:-3.141592653589793:3.141592653589793",
        allow_hyphen_values = true
    )]
    pub domain: Domain,
    /// Sample counts `NXxNY`.
    #[arg(long, value_parser = parse_size, default_value = "300x300")]
    pub grid: (usize, usize),
    #[command(flatten)]
    pub projection: ProjectionArgs,
    /// Rotation `AXIS:ANGLE[:N]` applied to the mapped surface, N times;
    /// repeatable, applied in order.
    #[arg(long = "rotate", value_parser = parse_rotation, allow_hyphen_values = true)]
    pub rotations: Vec<RotationSpec>,
    /// Gradient stops `t:rrggbb,...` from t=0 to t=1.
    #[arg(long, value_parser = parse_colormap)]
    pub colormap: Option<ColorMap>,
    /// Output file, or `-` for standard output.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RoundtripArgs {
    /// Number of random points.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[command(flatten)]
    pub projection: ProjectionArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Number of mapped points to transform.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Power n: points are moved by Tⁿ.
    #[arg(long, default_value_t = 5)]
    pub power: u32,
    /// Rotation `AXIS:ANGLE[:N]` making up T; repeatable. Default: identity.
    #[arg(long = "rotate", value_parser = parse_rotation, allow_hyphen_values = true)]
    pub rotations: Vec<RotationSpec>,
    #[command(flatten)]
    pub projection: ProjectionArgs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Origin {
    Center,
    At(f64, f64),
}

impl Origin {
    pub fn resolve(self, (width, height): (usize, usize)) -> (f64, f64) {
        match self {
            Origin::Center => (width as f64 / 2.0, height as f64 / 2.0),
            Origin::At(x, y) => (x, y),
        }
    }
}

impl FromStr for Origin {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("center") {
            return Ok(Origin::Center);
        }
        let (x, y) = s
            .split_once(',')
            .ok_or_else(|| format!("`{s}` is neither `center` nor `X,Y`"))?;
        Ok(Origin::At(parse_finite(x)?, parse_finite(y)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationSpec {
    pub axis: Axis,
    pub angle: f64,
    pub times: u32,
}

impl RotationSpec {
    fn transform(&self) -> GraphicsTransform {
        // angle is validated finite at parse time
        GraphicsTransform::rotation(self.axis, self.angle)
            .unwrap_or(GraphicsTransform::IDENTITY)
    }
}

fn parse_finite(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

/// Radians, or degrees with a `deg` suffix.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    match s.trim().strip_suffix("deg") {
        Some(deg) => Ok(parse_finite(deg)?.to_radians()),
        None => parse_finite(s),
    }
}

/// `AxB` with both parts positive integers.
pub fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("`{s}` is not of the form AxB"))?;
    let a: usize = a.trim().parse().map_err(|_| format!("bad count `{a}`"))?;
    let b: usize = b.trim().parse().map_err(|_| format!("bad count `{b}`"))?;
    Ok((a, b))
}

pub fn parse_domain(s: &str) -> Result<Domain, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 4 {
        return Err(format!("`{s}` is not of the form xmin:xmax:ymin:ymax"));
    }
    let v = parts
        .iter()
        .map(|p| parse_finite(p))
        .collect::<Result<Vec<_>, _>>()?;
    Domain::new(v[0], v[1], v[2], v[3]).map_err(|e| e.to_string())
}

pub fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("`{s}` is not of the form name=value"))?;
    let name = name.trim().to_string();
    let value = parse_finite(value)?;
    ParamEnv::new().set(&name, value).map_err(|e| e.to_string())?;
    Ok((name, value))
}

pub fn parse_rotation(s: &str) -> Result<RotationSpec, String> {
    let mut parts = s.split(':');
    let axis = match parts.next().map(str::trim) {
        Some("x" | "X") => Axis::X,
        Some("y" | "Y") => Axis::Y,
        Some("z" | "Z") => Axis::Z,
        _ => return Err(format!("`{s}`: axis must be X, Y or Z")),
    };
    let angle = parse_angle(parts.next().ok_or_else(|| format!("`{s}`: missing angle"))?)?;
    let times = match parts.next() {
        Some(n) => n
            .trim()
            .parse()
            .map_err(|_| format!("`{s}`: repeat count must be a non-negative integer"))?,
        None => 1,
    };
    if parts.next().is_some() {
        return Err(format!("`{s}` is not of the form AXIS:ANGLE[:N]"));
    }
    Ok(RotationSpec { axis, angle, times })
}

fn parse_colormap(s: &str) -> Result<ColorMap, String> {
    s.parse().map_err(|e: render::RenderError| e.to_string())
}

/// Parses arguments and runs the selected command, returning the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() {
                ExitStatus::BadArguments.code()
            } else {
                ExitStatus::Success.code()
            };
        }
    };
    let status = match &cli.command {
        Command::Render(args) => run_render(args),
        Command::Roundtrip(args) => run_roundtrip(args),
        Command::Bench(args) => run_bench(args),
    };
    status.code()
}

fn bad_arguments(msg: impl std::fmt::Display) -> ExitStatus {
    eprintln!("error: {msg}");
    ExitStatus::BadArguments
}

fn report_parse_error(source: &str, err: &ParseError) {
    eprintln!("error: {err}");
    if let Some(offset) = err.offset() {
        let column = source
            .char_indices()
            .take_while(|&(i, _)| i < offset)
            .count();
        eprintln!("  {source}");
        eprintln!("  {}^", " ".repeat(column));
    }
}

pub fn run_render(args: &RenderArgs) -> ExitStatus {
    let projection = match args.projection.projection() {
        Ok(p) => p,
        Err(e) => return bad_arguments(e),
    };
    let (width, height) = args.projection.size;
    if args.grid.0 < 2 || args.grid.1 < 2 {
        return bad_arguments(format!(
            "grid needs at least 2 samples per axis, got {}x{}",
            args.grid.0, args.grid.1
        ));
    }
    if width == 0 || height == 0 || width > render::MAX_DIMENSION || height > render::MAX_DIMENSION {
        return bad_arguments(format!(
            "size must be between 1x1 and {m}x{m}, got {width}x{height}",
            m = render::MAX_DIMENSION
        ));
    }
    let expr = match Expr::parse(&args.expr) {
        Ok(e) => e,
        Err(err) => {
            report_parse_error(&args.expr, &err);
            return ExitStatus::ParseError;
        }
    };
    let mut params = ParamEnv::new();
    for (name, value) in &args.params {
        if let Err(e) = params.set(name, *value) {
            return bad_arguments(e);
        }
    }
    if let Err(e) = params.check_bound(&expr) {
        return bad_arguments(format!("{e}; bind it with --param NAME=VALUE"));
    }

    let transform = if args.rotations.is_empty() {
        None
    } else {
        let mut acc = ComposedTransform::identity(&projection);
        for spec in &args.rotations {
            match ComposedTransform::compose(&projection, &spec.transform()) {
                Ok(ct) => acc = acc.then(&ct.power(spec.times)),
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitStatus::RenderError;
                }
            }
        }
        Some(acc)
    };

    let job = PlotJob {
        expr,
        params,
        domain: args.domain,
        grid_nx: args.grid.0,
        grid_ny: args.grid.1,
        projection,
        transform,
        colormap: args.colormap.clone().unwrap_or_default(),
        width,
        height,
    };
    let rendered = match render::render_surface(&job) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitStatus::RenderError;
        }
    };

    let written = if args.out.as_os_str() == "-" {
        let stdout = io::stdout();
        render::write_ppm(&rendered.framebuffer, BufWriter::new(stdout.lock()))
    } else {
        File::create(&args.out)
            .and_then(|f| render::write_ppm(&rendered.framebuffer, BufWriter::new(f)))
    };
    if let Err(e) = written {
        eprintln!("error: writing {}: {e}", args.out.display());
        return ExitStatus::IoError;
    }

    let s = rendered.stats;
    eprintln!(
        "z-range [{}, {}], plotted {}, skipped {}, clipped {}",
        s.z_min, s.z_max, s.plotted, s.skipped, s.clipped
    );
    ExitStatus::Success
}

fn random_logical(rng: &mut impl Rng, extent: f64) -> LogicalPoint {
    LogicalPoint::new(
        rng.gen_range(-extent..=extent),
        rng.gen_range(-extent..=extent),
        rng.gen_range(-extent..=extent),
    )
}

/// Largest componentwise error of `inverse_map ∘ forward_map` over
/// `samples` seeded random points in `[-100, 100]³`.
pub fn roundtrip_error(proj: &Projection, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let p = random_logical(&mut rng, 100.0);
            match proj.forward_map(p).and_then(|q| proj.inverse_map(q)) {
                Ok(back) => (back.x - p.x)
                    .abs()
                    .max((back.y - p.y).abs())
                    .max((back.z - p.z).abs()),
                Err(_) => f64::INFINITY,
            }
        })
        .fold(0.0, f64::max)
}

pub fn run_roundtrip(args: &RoundtripArgs) -> ExitStatus {
    if args.samples == 0 {
        return bad_arguments("--samples must be at least 1");
    }
    let projection = match args.projection.projection() {
        Ok(p) => p,
        Err(e) => return bad_arguments(e),
    };
    let err = roundtrip_error(&projection, args.samples, args.seed);
    println!("samples\t{}\nmax_abs_error\t{err:e}", args.samples);
    if err < AGREEMENT_TOLERANCE {
        ExitStatus::Success
    } else {
        eprintln!("error: round-trip error {err:e} exceeds {AGREEMENT_TOLERANCE:e}");
        ExitStatus::Disagreement
    }
}

/// One row of the bench table.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub strategy: Strategy,
    pub seconds: f64,
    pub matrix_matrix: u64,
    pub point_matrix: u64,
    /// Largest deviation from the naive strategy's output.
    pub max_abs_diff: f64,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub points: usize,
    pub power: u32,
    pub rows: Vec<BenchRow>,
    /// Largest deviation between any two strategies.
    pub max_disagreement: f64,
}

fn max_diff(a: &[MappedPoint], b: &[MappedPoint]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| p.max_abs_diff(q))
        .fold(0.0, f64::max)
}

/// Moves `samples` seeded random mapped points through `Tⁿ` with each
/// [`Strategy`] and compares the results.
pub fn bench(
    proj: &Projection,
    t: &GraphicsTransform,
    power: u32,
    samples: usize,
    seed: u64,
) -> Result<BenchReport, crate::transform::TransformError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..samples)
        .map(|_| proj.forward_map(random_logical(&mut rng, 10.0)))
        .collect::<Result<Vec<_>, _>>()?;

    let started = Instant::now();
    let naive = points
        .iter()
        .map(|&q| {
            let mut p = proj.inverse_map(q)?.to_array();
            for _ in 0..power {
                p = t.apply(p);
            }
            proj.forward_map(p.into())
        })
        .collect::<Result<Vec<_>, _>>()?;
    let naive_secs = started.elapsed().as_secs_f64();

    let started = Instant::now();
    let recomposed = ComposedTransform::compose(proj, &t.pow(power))?;
    let precomposed = points
        .iter()
        .map(|&q| recomposed.apply(q))
        .collect::<Result<Vec<_>, _>>()?;
    let precomposed_secs = started.elapsed().as_secs_f64();

    let m_prime = ComposedTransform::compose(proj, t)?;
    let started = Instant::now();
    let powered = if power == 0 {
        m_prime.power(0)
    } else {
        m_prime.powers().nth(power as usize - 1).unwrap_or(m_prime)
    };
    let incremental = points
        .iter()
        .map(|&q| powered.apply(q))
        .collect::<Result<Vec<_>, _>>()?;
    let incremental_secs = started.elapsed().as_secs_f64();

    let outputs = [
        (Strategy::NaiveThreeStep, &naive, naive_secs),
        (Strategy::Precomposed, &precomposed, precomposed_secs),
        (Strategy::IncrementalPower, &incremental, incremental_secs),
    ];
    let rows = outputs
        .iter()
        .map(|&(strategy, out, seconds)| {
            let counts = count_multiplications(strategy, samples as u64, power);
            BenchRow {
                strategy,
                seconds,
                matrix_matrix: counts.matrix_matrix,
                point_matrix: counts.point_matrix,
                max_abs_diff: max_diff(out, &naive),
            }
        })
        .collect();
    let max_disagreement = max_diff(&naive, &precomposed)
        .max(max_diff(&naive, &incremental))
        .max(max_diff(&precomposed, &incremental));
    Ok(BenchReport {
        points: samples,
        power,
        rows,
        max_disagreement,
    })
}

impl BenchReport {
    pub fn write_tsv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(
            w,
            "strategy\tpoints\tpower\tmatrix_matrix_mults\tpoint_matrix_mults\tseconds\tpoints_per_sec\tmax_abs_diff_vs_naive"
        )?;
        for row in &self.rows {
            let throughput = if row.seconds > 0.0 {
                self.points as f64 / row.seconds
            } else {
                f64::INFINITY
            };
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{:.6}\t{:.0}\t{:e}",
                row.strategy,
                self.points,
                self.power,
                row.matrix_matrix,
                row.point_matrix,
                row.seconds,
                throughput,
                row.max_abs_diff
            )?;
        }
        Ok(())
    }
}

pub fn run_bench(args: &BenchArgs) -> ExitStatus {
    if args.power == 0 {
        return bad_arguments("--power must be at least 1");
    }
    if args.samples == 0 {
        return bad_arguments("--samples must be at least 1");
    }
    let projection = match args.projection.projection() {
        Ok(p) => p,
        Err(e) => return bad_arguments(e),
    };
    let t = args
        .rotations
        .iter()
        .fold(GraphicsTransform::IDENTITY, |acc, spec| {
            acc.then(&spec.transform().pow(spec.times))
        });
    let report = match bench(&projection, &t, args.power, args.samples, args.seed) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitStatus::RenderError;
        }
    };
    if let Err(e) = report.write_tsv(io::stdout().lock()) {
        eprintln!("error: writing table: {e}");
        return ExitStatus::IoError;
    }
    if report.max_disagreement < AGREEMENT_TOLERANCE {
        ExitStatus::Success
    } else {
        eprintln!(
            "error: strategies disagree by {:e} (limit {AGREEMENT_TOLERANCE:e})",
            report.max_disagreement
        );
        ExitStatus::Disagreement
    }
}
