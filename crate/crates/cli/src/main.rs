use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use negcut::bench::{format_table, run_bench, BenchOptions};
use negcut::eigen::LanczosParams;
use negcut::hardness::{brute_force_blocks, decide_partition, PartitionInstance, MAX_BLOCKS};
use negcut::image::{load_image, overlay, quantize_gray, resize_max, write_mask, write_ppm};
use negcut::kmeans::{kmeans_cluster, DEFAULT_MAX_ITER};
use negcut::oracle::{estimate_sigma, Estimator};
use negcut::smoothness::{build_smoothness, Connectivity, SmoothnessMode, SmoothnessParams};
use negcut::{segment, Error, OracleKind, SegmentParams};

const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_CONVERGENCE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "negcut",
    version,
    about = "Automatic binary segmentation by negative-weight spectral cuts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment a PGM/PPM image into foreground and background.
    Segment(SegmentArgs),
    /// Decide set partition through the energy reduction.
    Partition {
        /// Comma-separated positive integers, e.g. 1,2,3
        values: String,
    },
    /// Time the structured matvec and the full pipeline on synthetic images.
    Bench {
        /// Ascending pixel counts, comma-separated.
        #[arg(long, value_delimiter = ',', default_value = "4096,16384")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        /// Skip timing the full segmentation.
        #[arg(long)]
        no_segment: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Gray,
    Color,
}

#[derive(Clone, Copy, ValueEnum)]
enum SmoothnessKind {
    Constant,
    Exponential,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Paper,
    Consistent,
}

#[derive(Args)]
struct SegmentArgs {
    #[arg(long)]
    input: PathBuf,
    /// Output mask (binary PGM, fore = 255).
    #[arg(long)]
    output: PathBuf,
    /// Optional PPM with the foreground tinted red.
    #[arg(long)]
    overlay: Option<PathBuf>,
    /// Optional key=value statistics file.
    #[arg(long)]
    stats: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "gray")]
    mode: Mode,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 16)]
    gray_levels: usize,
    #[arg(long, default_value_t = 16)]
    classes: usize,
    /// Kernel variance in squared RGB units, or "auto".
    #[arg(long, default_value = "auto")]
    sigma2: String,
    #[arg(long, default_value_t = 4)]
    connectivity: u32,
    #[arg(long, value_enum, default_value = "constant")]
    smoothness_mode: SmoothnessKind,
    #[arg(long, default_value_t = 0.0)]
    smoothness_offset: f64,
    #[arg(long, value_enum, default_value = "consistent")]
    estimator: EstimatorArg,
    #[arg(long, default_value_t = 256)]
    max_dim: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Include per-phase wall times in the stats file.
    #[arg(long)]
    timings: bool,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io { .. }
            | Error::MalformedHeader(_)
            | Error::UnsupportedMaxval(_)
            | Error::TruncatedData { .. } => EXIT_IO,
            Error::Numerical(_) => EXIT_CONVERGENCE,
            _ => EXIT_CONFIG,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Segment(args) => cmd_segment(&args),
        Command::Partition { values } => cmd_partition(&values),
        Command::Bench {
            sizes,
            repeats,
            no_segment,
        } => cmd_bench(&sizes, repeats, !no_segment),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("negcut: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn parse_sigma2(s: &str) -> Result<Option<f64>, Failure> {
    if s == "auto" {
        return Ok(None);
    }
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(Some(v)),
        _ => Err(Failure::config(format!(
            "--sigma2 must be a positive number or \"auto\", got {s:?}"
        ))),
    }
}

fn cmd_segment(args: &SegmentArgs) -> Result<u8, Failure> {
    if !(args.lambda >= 0.0 && args.lambda.is_finite()) {
        return Err(Failure::config("--lambda must be a finite value >= 0"));
    }
    if args.tol.is_nan() || args.tol <= 0.0 {
        return Err(Failure::config("--tol must be positive"));
    }
    if args.max_dim == 0 {
        return Err(Failure::config("--max-dim must be at least 1"));
    }
    if !(2..=256).contains(&args.gray_levels) {
        return Err(Failure::config("--gray-levels must lie in [2, 256]"));
    }
    if args.classes == 0 {
        return Err(Failure::config("--classes must be at least 1"));
    }
    let sigma2 = parse_sigma2(&args.sigma2)?;
    let smoothness = SmoothnessParams {
        connectivity: Connectivity::from_count(args.connectivity)?,
        mode: match args.smoothness_mode {
            SmoothnessKind::Constant => SmoothnessMode::Constant,
            SmoothnessKind::Exponential => SmoothnessMode::Exponential { beta: None },
        },
        offset: args.smoothness_offset,
    };
    if !(args.smoothness_offset >= 0.0 && args.smoothness_offset.is_finite()) {
        return Err(Failure::config(
            "--smoothness-offset must be a finite value >= 0",
        ));
    }

    let mut phases: Vec<(&str, Duration)> = Vec::new();
    let mut clock = Instant::now();
    let mut lap = |name: &'static str, phases: &mut Vec<(&str, Duration)>| {
        phases.push((name, clock.elapsed()));
        clock = Instant::now();
    };

    let raw = resize_max(&load_image(&args.input)?, args.max_dim)?;
    lap("load", &mut phases);

    let (img, kind) = match args.mode {
        Mode::Gray => (
            quantize_gray(&raw, args.gray_levels)?,
            OracleKind::Histogram,
        ),
        Mode::Color => {
            let m = args.classes.min(raw.len());
            let img = kmeans_cluster(&raw, m, args.seed, DEFAULT_MAX_ITER)?;
            let sigma2 = match sigma2 {
                Some(s) => s,
                None if raw.len() >= 2 => estimate_sigma(&raw)?,
                None => 1.0,
            };
            let estimator = match args.estimator {
                EstimatorArg::Paper => Estimator::Paper,
                EstimatorArg::Consistent => Estimator::Consistent,
            };
            (img, OracleKind::Kernel { sigma2, estimator })
        }
    };
    lap("quantize", &mut phases);

    let graph = build_smoothness(&raw, &smoothness)?;
    lap("smoothness", &mut phases);

    let params = SegmentParams {
        lambda: args.lambda,
        kind,
        solver: LanczosParams {
            tol: args.tol,
            seed: args.seed,
            ..Default::default()
        },
    };
    let result = segment(&img, &graph, &params)?;
    lap("segment", &mut phases);

    write_mask(&result.labeling, raw.width(), raw.height(), &args.output)?;
    if let Some(path) = &args.overlay {
        write_ppm(&overlay(&raw, &result.labeling)?, path)?;
    }
    lap("write", &mut phases);

    if let Some(path) = &args.stats {
        let mut s = String::new();
        let mut kv = |k: &str, v: &dyn std::fmt::Display| {
            writeln!(s, "{k}={v}").expect("writing to a String");
        };
        kv(
            "mode",
            &match args.mode {
                Mode::Gray => "gray",
                Mode::Color => "color",
            },
        );
        kv("width", &raw.width());
        kv("height", &raw.height());
        kv("n", &img.total());
        kv("classes", &img.class_count());
        if let OracleKind::Kernel { sigma2, .. } = kind {
            kv("sigma2", &sigma2);
        }
        kv("lambda", &args.lambda);
        kv("eigenvalue", &result.eigen.eigenvalue);
        kv("iterations", &result.eigen.iterations);
        kv("residual", &result.eigen.residual_norm);
        kv("converged", &result.eigen.converged);
        kv("data_term", &result.exact.data_term);
        kv("smoothness_term", &result.exact.smoothness_term);
        kv("exact_energy", &result.exact.total);
        kv("approx_energy", &result.approx);
        kv("cut_value", &result.cut);
        kv("s0", &result.fore_size);
        kv("s1", &result.back_size);
        kv("boundary_edges", &result.boundary_edges);
        if args.timings {
            for (name, d) in &phases {
                kv(
                    &format!("time_{name}_ms"),
                    &format!("{:.3}", d.as_secs_f64() * 1e3),
                );
            }
        }
        std::fs::write(path, s).map_err(|e| Failure {
            code: EXIT_IO,
            message: format!("cannot write {}: {e}", path.display()),
        })?;
    }

    if result.eigen.converged {
        Ok(0)
    } else {
        eprintln!(
            "negcut: eigensolver did not converge (residual {:.3e}); outputs hold the best estimate",
            result.eigen.residual_norm
        );
        Ok(EXIT_CONVERGENCE)
    }
}

fn cmd_partition(values: &str) -> Result<u8, Failure> {
    let inst = PartitionInstance::parse(values)?;
    if inst.values().len() > MAX_BLOCKS {
        return Err(Failure::config(format!(
            "at most {MAX_BLOCKS} values are supported, got {}",
            inst.values().len()
        )));
    }
    let yes = decide_partition(&inst)?;
    println!("{}", if yes { "YES" } else { "NO" });
    println!("min_energy={}", brute_force_blocks(&inst)?);
    println!("target={}", inst.target());
    Ok(0)
}

fn cmd_bench(sizes: &[usize], repeats: usize, time_segment: bool) -> Result<u8, Failure> {
    let opts = BenchOptions {
        repeats,
        time_segment,
        ..Default::default()
    };
    let rows = run_bench(sizes, &opts)?;
    print!("{}", format_table(&rows));
    Ok(0)
}
