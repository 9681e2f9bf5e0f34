use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use fiber_core::bodies::{sphere_sample, SphereSampling};
use fiber_core::fiber::{compute_fiber, FiberOptions, Method};
use fiber_core::geometry::{
    boundary_note, boundary_points, hausdorff_distance, polygon_from_support, polygons_svg,
    write_obj, write_ply,
};
use fiber_core::io::{parse_body_spec, read_support_csv, write_support_csv, RunManifest};
use fiber_core::verify::{verify, Suite, VerifyOptions};
use fiber_core::{BodySpec, FiberError, ProjectionSplit, SampleMeta, SampledSupport};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

/// Fiber bodies of convex bodies given by support functions.
#[derive(Parser, Debug)]
#[command(name = "fiberbody", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Support function of the fiber body on a direction sample, as CSV.
    Fiber {
        body: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 64)]
        directions: usize,
    },
    /// Support function of the body itself, as CSV.
    Support {
        body: PathBuf,
        #[arg(long, default_value_t = 64)]
        directions: usize,
        /// Explicit direction, comma separated; repeatable. Overrides --directions.
        #[arg(long = "u", value_name = "U")]
        u: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Invariant checks; exit code 1 when any check fails.
    Verify {
        body: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 16)]
        directions: usize,
        /// Suite to run; repeatable. All suites by default.
        #[arg(long)]
        suite: Vec<Suite>,
    },
    /// Sampled Hausdorff distance between two support CSV files.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Exit with code 1 when the distance exceeds this value.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// SVG polygon of a planar fiber body (from a body file or a support CSV),
    /// or an OBJ/PLY point cloud of a body in R³.
    Export {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Svg)]
        format: Format,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 256)]
        directions: usize,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long, default_value = "auto")]
    method: Method,
    /// Quadrature nodes for the slicer and curved routes.
    #[arg(long, default_value_t = 64)]
    nodes: usize,
    /// Monte-Carlo samples (fiber default 10^6, verify 2*10^5); boundary
    /// points for OBJ/PLY export (default 10^4).
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Embed the wall time in the output manifest (breaks byte-for-byte reproducibility).
    #[arg(long)]
    record_time: bool,
}

impl RunArgs {
    fn fiber_options(&self, default_samples: usize) -> FiberOptions {
        FiberOptions {
            method: self.method,
            nodes: self.nodes,
            samples: self.samples.unwrap_or(default_samples),
            seed: self.seed,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Svg,
    Obj,
    Ply,
}

struct LoadedBody {
    body: BodySpec,
    split: ProjectionSplit,
    sha256: String,
}

fn load_body(path: &Path) -> Result<LoadedBody, FiberError> {
    let bytes = fs::read(path)?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|e| FiberError::Input(format!("{} is not UTF-8: {e}", path.display())))?;
    let (body, split) = parse_body_spec(&text)?;
    Ok(LoadedBody {
        body,
        split,
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), FiberError> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn parse_direction(s: &str) -> Result<Vec<f64>, FiberError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| FiberError::Input(format!("bad direction component `{t}` in `{s}`")))
        })
        .collect()
}

fn exit_code(e: &FiberError) -> u8 {
    match e {
        FiberError::EmptySlice { .. }
        | FiberError::NotCurved { .. }
        | FiberError::UnboundedRay { .. }
        | FiberError::Geometry(_)
        | FiberError::Domain(_) => EXIT_NUMERIC,
        _ => EXIT_USAGE,
    }
}

fn finish(manifest: &mut RunManifest, start: Instant, record: bool) {
    let t = start.elapsed().as_secs_f64();
    eprintln!("wall time: {t:.3} s");
    if record {
        manifest.wall_time_s = Some(t);
    }
}

fn run(cli: Cli) -> Result<u8, FiberError> {
    let start = Instant::now();
    match cli.command {
        Command::Fiber {
            body,
            run,
            directions,
        } => {
            let b = load_body(&body)?;
            let dirs = sphere_sample(b.split.m(), directions, SphereSampling::UniformGrid);
            let s = compute_fiber(&b.body, &b.split, &dirs, &run.fiber_options(1_000_000))?;
            let mut m = RunManifest::new("fiber").with_meta(&s.meta);
            m.body_sha256 = Some(b.sha256);
            m.split = Some(b.split);
            finish(&mut m, start, run.record_time);
            emit(run.out.as_deref(), &write_support_csv(&m, &s))?;
        }
        Command::Support {
            body,
            directions,
            u,
            out,
        } => {
            let b = load_body(&body)?;
            let d = b.body.dim();
            let dirs = if u.is_empty() {
                sphere_sample(d, directions, SphereSampling::UniformGrid)
            } else {
                u.iter()
                    .map(|s| parse_direction(s))
                    .collect::<Result<_, _>>()?
            };
            let values = dirs
                .iter()
                .map(|u| b.body.support(u))
                .collect::<Result<_, _>>()?;
            let s = SampledSupport {
                dim: d,
                directions: dirs,
                values,
                stderr: None,
                meta: SampleMeta {
                    method: "support".into(),
                    ..SampleMeta::default()
                },
            };
            let mut m = RunManifest::new("support").with_meta(&s.meta);
            m.body_sha256 = Some(b.sha256);
            finish(&mut m, start, false);
            emit(out.as_deref(), &write_support_csv(&m, &s))?;
        }
        Command::Verify {
            body,
            run,
            directions,
            suite,
        } => {
            let b = load_body(&body)?;
            let suites = if suite.is_empty() {
                Suite::ALL.to_vec()
            } else {
                suite
            };
            let opts = VerifyOptions {
                fiber: run.fiber_options(VerifyOptions::default().fiber.samples),
                directions,
            };
            let report = verify(&b.body, &b.split, &suites, &opts)?;
            let mut m = RunManifest::new("verify");
            m.body_sha256 = Some(b.sha256);
            m.split = Some(b.split);
            m.method = Some(report.method.clone());
            m.nodes = Some(opts.fiber.nodes);
            m.samples = Some(opts.fiber.samples);
            m.seed = Some(opts.fiber.seed);
            finish(&mut m, start, run.record_time);
            let mut text: String = m.lines("# ").iter().map(|l| format!("{l}\n")).collect();
            text.push_str(&report.to_string());
            text.push('\n');
            emit(run.out.as_deref(), &text)?;
            if !report.all_passed() {
                return Ok(EXIT_CHECK_FAILED);
            }
        }
        Command::Compare { a, b, tol } => {
            let (_, sa) = read_support_csv(&fs::read_to_string(&a)?)?;
            let (_, sb) = read_support_csv(&fs::read_to_string(&b)?)?;
            let d = hausdorff_distance(&sa, &sb)?;
            println!("hausdorff (sampled): {d:e}");
            if tol.is_some_and(|t| d > t) {
                return Ok(EXIT_CHECK_FAILED);
            }
        }
        Command::Export {
            input,
            format,
            run,
            directions,
        } => {
            let from_csv = input.extension().is_some_and(|e| e == "csv");
            let text = match (format, from_csv) {
                (Format::Svg, true) => {
                    let (mut m, s) = read_support_csv(&fs::read_to_string(&input)?)?;
                    m.command = "export".into();
                    let poly = polygon_from_support(&s)?;
                    polygons_svg(&m, &[(s.meta.method.clone(), poly)])
                }
                (Format::Svg, false) => {
                    let b = load_body(&input)?;
                    if b.split.m() != 2 {
                        return Err(FiberError::Input(format!(
                            "SVG export needs a planar fiber body (m = 2), got m = {}",
                            b.split.m()
                        )));
                    }
                    let dirs = sphere_sample(2, directions, SphereSampling::UniformGrid);
                    let s = compute_fiber(&b.body, &b.split, &dirs, &run.fiber_options(1_000_000))?;
                    let mut m = RunManifest::new("export").with_meta(&s.meta);
                    m.body_sha256 = Some(b.sha256);
                    m.split = Some(b.split);
                    finish(&mut m, start, run.record_time);
                    polygons_svg(
                        &m,
                        &[(b.body.kind().to_string(), polygon_from_support(&s)?)],
                    )
                }
                (_, true) => {
                    return Err(FiberError::Input(
                        "point clouds are exported from body files".into(),
                    ))
                }
                (f, false) => {
                    let b = load_body(&input)?;
                    let n = run.samples.unwrap_or(10_000);
                    let pts = boundary_points(&b.body, n)?;
                    let mut m = RunManifest::new("export");
                    m.body_sha256 = Some(b.sha256);
                    m.samples = Some(n);
                    m.notes.push(boundary_note(&b.body).into());
                    finish(&mut m, start, run.record_time);
                    if f == Format::Obj {
                        write_obj(&m, &pts)
                    } else {
                        write_ply(&m, &pts)
                    }
                }
            };
            emit(run.out.as_deref(), &text)?;
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
