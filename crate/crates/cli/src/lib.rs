//! The `zipper` command line. [`run`] takes the arguments and output streams
//! and returns the exit status: 0 on success, 1 when a check fails, 2 for
//! bad input.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use zipper::attractor::refine_parametrized;
use zipper::geometry::{AffineMap, Matrix, Vector};
use zipper::io::{export_csv, export_svg, parse_config, ConfigError, RenderSpec, ZipperConfig};
use zipper::presets::{build_example1, build_example2, Example1Config, Example2Config};
use zipper::zipper::{conjugate, normalize_zipper, product_zipper, DEFAULT_WORD_LENGTH};
use zipper::{
    eval_f, inverse_design, run_suite, smooth_zipper, Error, LineZipper, SmoothLift, Suite,
    ValidationOptions, Zipper,
};

#[derive(Parser)]
#[command(
    name = "zipper",
    version,
    about = "Self-affine zippers and their smooth lifts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the vertex conditions and contraction of a zipper.
    Validate {
        #[command(flatten)]
        source: Source,
        /// Require every map to contract on its own.
        #[arg(long)]
        per_map: bool,
        /// Longest word tried for eventual contraction.
        #[arg(long, default_value_t = DEFAULT_WORD_LENGTH)]
        max_word_length: usize,
    },
    /// Evaluate the parametrization f(t).
    EvalF {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Evaluate g(t), the integral of f from 0 to t.
    EvalG {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Write the lifted zipper, whose attractor is the graph of g, as JSON.
    Lift {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw the attractor by subdivision.
    Render {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 12)]
        depth: usize,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Draw the lifted zipper instead of the input.
        #[arg(long)]
        lifted: bool,
        /// Draw the graph (t, f(t)); implied for scalar zippers.
        #[arg(long, conflicts_with = "lifted")]
        graph: bool,
        /// Axes to draw, e.g. `1,2`.
        #[arg(long, value_parser = parse_projection)]
        projection: Option<(usize, usize)>,
        #[arg(long, default_value_t = 800)]
        width: u32,
        #[arg(long, default_value_t = 600)]
        height: u32,
        #[arg(long, default_value_t = 1.0)]
        stroke_width: f64,
    },
    /// Run the numerical checks and print a JSON report.
    Verify {
        #[command(flatten)]
        source: Source,
        /// all, feq, quad, deriv, tangent or contraction.
        #[arg(long, default_value = "all")]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Recover y1, y2 of the two-map scalar family from g(x1) and g(1).
    InverseDesign {
        #[arg(long)]
        q1: f64,
        /// Defaults to 1 - q1.
        #[arg(long)]
        q2: Option<f64>,
        #[arg(long)]
        x1: f64,
        #[arg(long)]
        g1: f64,
        #[arg(long)]
        g2: f64,
    },
    /// Print a preset as a config file.
    Example {
        #[command(flatten)]
        source: Source,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Zipper config (JSON).
    config: Option<PathBuf>,
    /// Split family preset: `p=0.3`, or `q1=0.4,y1=0.3,y2=1`.
    #[arg(long, value_name = "PARAMS")]
    example1: Option<String>,
    /// Rotation family preset: `h=0.5`.
    #[arg(long, value_name = "PARAMS")]
    example2: Option<String>,
}

/// Bad input rather than a failed check; exits with status 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(message: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(Usage(message.into()))
}

fn parse_projection(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected two axes, e.g. 0,1")?;
    let axis = |v: &str| {
        v.trim()
            .parse::<usize>()
            .map_err(|e| format!("bad axis '{v}': {e}"))
    };
    Ok((axis(a)?, axis(b)?))
}

fn preset_params(spec: &str, allowed: &[&str]) -> anyhow::Result<Vec<(String, f64)>> {
    spec.split(',')
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| usage(format!("expected key=value, got '{kv}'")))?;
            let k = k.trim();
            if !allowed.contains(&k) {
                return Err(usage(format!("unknown preset parameter '{k}'")));
            }
            let v = v
                .trim()
                .parse::<f64>()
                .map_err(|e| usage(format!("bad value for '{k}': {e}")))?;
            Ok((k.to_string(), v))
        })
        .collect()
}

fn lookup(params: &[(String, f64)], key: &str) -> Option<f64> {
    params.iter().find(|(k, _)| k == key).map(|&(_, v)| v)
}

fn example1_config(spec: &str) -> anyhow::Result<Example1Config> {
    let params = preset_params(spec, &["p", "q1", "y1", "y2"])?;
    if let Some(p) = lookup(&params, "p") {
        if params.len() != 1 {
            bail!(usage("`p` cannot be combined with q1, y1, y2"));
        }
        return Ok(Example1Config::split(p));
    }
    match (
        lookup(&params, "q1"),
        lookup(&params, "y1"),
        lookup(&params, "y2"),
    ) {
        (Some(q1), Some(y1), Some(y2)) => Ok(Example1Config::general(q1, y1, y2)),
        _ => Err(usage("example1 needs p, or all of q1, y1, y2")),
    }
}

fn load(source: &Source, options: ValidationOptions) -> anyhow::Result<(Zipper, LineZipper)> {
    let built = if let Some(path) = &source.config {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let config = parse_config(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        config.build(options)?
    } else if let Some(spec) = &source.example1 {
        build_example1(example1_config(spec)?).map_err(preset_error)?
    } else if let Some(spec) = &source.example2 {
        let h =
            lookup(&preset_params(spec, &["h"])?, "h").ok_or_else(|| usage("example2 needs h"))?;
        build_example2(Example2Config::new(h)).map_err(preset_error)?
    } else {
        unreachable!("clap requires a source")
    };
    Ok(built)
}

fn preset_error(e: Error) -> anyhow::Error {
    match e {
        Error::InvalidConfig(msg) => usage(msg),
        other => other.into(),
    }
}

fn default_options() -> ValidationOptions {
    ValidationOptions::eventual(DEFAULT_WORD_LENGTH)
}

/// The lifted zipper in the original coordinates: the normalized lift
/// conjugated by `(t, y) ↦ (t, y + z_0 t)`.
fn lifted(zipper: &Zipper, line: &LineZipper) -> anyhow::Result<Zipper> {
    let (normal, shift) = normalize_zipper(zipper)?;
    let lift = SmoothLift::new(&normal, line)?;
    let smooth = smooth_zipper(&lift)?;
    let z0 = -&shift;
    let n = zipper.dim();
    let shear = AffineMap::new(
        Matrix::bordered(1.0, &z0, &Matrix::identity(n))?,
        Vector::zeros(n + 1),
    )?;
    Ok(conjugate(&smooth, &shear)?)
}

/// Writes to stdout, treating a closed pipe as success.
fn emit(out: &mut dyn Write, text: &str) -> anyhow::Result<()> {
    match out.write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn print_json(out: &mut dyn Write, value: &serde_json::Value) -> anyhow::Result<()> {
    emit(out, &format!("{}\n", serde_json::to_string_pretty(value)?))
}

fn execute(cli: Cli, out: &mut dyn Write) -> anyhow::Result<u8> {
    match cli.command {
        Command::Validate {
            source,
            per_map,
            max_word_length,
        } => {
            let options = if per_map {
                ValidationOptions::default()
            } else {
                ValidationOptions::eventual(max_word_length)
            };
            let (z, _) = load(&source, options)?;
            let cert = z.certificate();
            emit(
                out,
                &format!(
                    "valid: {} maps in dimension {}\nper-map contraction factors: {:?}\n\
                     certificate: word length {}, factor {}, radius {}\n",
                    z.count(),
                    z.dim(),
                    z.contraction_factors(),
                    cert.word_length,
                    cert.factor,
                    cert.radius
                ),
            )?;
        }
        Command::EvalF { source, t, tol } => {
            let (z, line) = load(&source, default_options())?;
            let e = eval_f(t, &z, &line, tol)?;
            print_json(
                out,
                &json!({ "t": t, "value": e.value, "errorBound": e.error_bound, "depth": e.depth }),
            )?;
        }
        Command::EvalG { source, t, tol } => {
            let (z, line) = load(&source, default_options())?;
            let (normal, shift) = normalize_zipper(&z)?;
            let lift = SmoothLift::new(&normal, &line)?;
            let e = lift.eval_g(t, tol)?;
            let value = &e.value - &shift.scale(t);
            print_json(
                out,
                &json!({ "t": t, "value": value, "errorBound": e.error_bound, "depth": e.depth }),
            )?;
        }
        Command::Lift { source, out } => {
            let (z, line) = load(&source, default_options())?;
            let smooth = lifted(&z, &line)?;
            let config = ZipperConfig::from_zipper(&smooth, &line);
            write(&out, &config.to_json())?;
        }
        Command::Render {
            source,
            depth,
            svg,
            csv,
            lifted: use_lift,
            graph,
            projection,
            width,
            height,
            stroke_width,
        } => {
            if svg.is_none() && csv.is_none() {
                bail!(usage("render needs --svg and/or --csv"));
            }
            let (z, line) = load(&source, default_options())?;
            let target = if use_lift {
                lifted(&z, &line)?
            } else if graph || z.dim() == 1 {
                product_zipper(&z, &line)?
            } else {
                z
            };
            let poly = refine_parametrized(&target, &line, depth)?;
            if let Some(path) = &svg {
                let spec = RenderSpec {
                    depth,
                    width,
                    height,
                    stroke_width,
                    projection,
                };
                export_svg(&poly, &spec, path)?;
            }
            if let Some(path) = &csv {
                export_csv(&poly, path)?;
            }
        }
        Command::Verify {
            source,
            suite,
            seed,
        } => {
            let (z, line) = load(&source, default_options())?;
            let reports = run_suite(&z, &line, suite, seed)?;
            print_json(out, &serde_json::to_value(&reports)?)?;
            if reports.iter().any(|r| !r.passed) {
                return Ok(1);
            }
        }
        Command::InverseDesign { q1, q2, x1, g1, g2 } => {
            let q2 = q2.unwrap_or(1.0 - q1);
            let (y1, y2) = inverse_design(q1, q2, x1, &Vector::scalar(g1), &Vector::scalar(g2))
                .map_err(|e| usage(e.to_string()))?;
            let (z, line) =
                build_example1(Example1Config::general(x1, y1[0], y2[0])).map_err(preset_error)?;
            let config = serde_json::to_value(ZipperConfig::from_zipper(&z, &line))?;
            print_json(out, &json!({ "y1": y1[0], "y2": y2[0], "config": config }))?;
        }
        Command::Example { source } => {
            if source.config.is_some() {
                bail!(usage("example takes --example1 or --example2"));
            }
            let (z, line) = load(&source, default_options())?;
            emit(out, &ZipperConfig::from_zipper(&z, &line).to_json())?;
        }
    }
    Ok(0)
}

fn write(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).map_err(|e| anyhow!("writing {}: {e}", path.display()))
}

fn exit_status(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return 2;
    }
    match err.downcast_ref::<ConfigError>() {
        Some(
            ConfigError::Parse { .. }
            | ConfigError::Shape { .. }
            | ConfigError::DimensionUnsupported(_),
        ) => 2,
        _ => 1,
    }
}

/// Runs the command line on `args` (program name first).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return e.exit_code() as u8;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            exit_status(&e)
        }
    }
}

#[cfg(test)]
mod tests;
