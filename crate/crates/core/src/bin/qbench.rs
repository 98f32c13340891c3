use clap::{Args, Parser, Subcommand};
use qbench::analysis;
use qbench::backend::{self, Backend};
use qbench::bell::PairSelection;
use qbench::harness::{self, Benchmark, CurveSpec, RunManifest};
use qbench::linedraw::{self, Curve};
use qbench::riemann::{self, Kind};
use qbench::{platonic, Error, Topology};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qbench", version, about = "Visual quantum benchmarks on a local simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a benchmark into a run directory (resumes an identical earlier run).
    Run {
        #[command(subcommand)]
        bench: RunBench,
    },
    /// Recompute results and scores from the stored histograms of a run.
    Score { dir: PathBuf },
    /// Re-render the images of a run.
    Render { dir: PathBuf },
    /// Aggregate per-device overall scores into a mean score.
    Report {
        /// Directory holding one run directory per benchmark; repeatable.
        #[arg(long, required = true)]
        device: Vec<PathBuf>,
        /// Quantum volume per device, in the order of `--device`.
        #[arg(long)]
        qv: Vec<f64>,
        /// Correlate against log2 of the quantum volume.
        #[arg(long)]
        log2_qv: bool,
    },
    /// Fit score = n_s/sqrt(N) + n_d on binned shots of a sampled run.
    FitNoise {
        #[arg(long)]
        run: PathBuf,
        /// Expected benchmark id of the run (checked if given).
        #[arg(long)]
        benchmark: Option<String>,
        #[arg(long, default_value_t = 16)]
        max_bins: usize,
    },
    /// Print the benchmark ids and their default settings.
    ListBenchmarks,
    #[command(hide = true)]
    Worker {
        #[arg(long)]
        queue: PathBuf,
    },
}

#[derive(Args, Clone)]
struct Common {
    /// exact | sample | noisy:<noise.json> | mock-remote
    #[arg(long, default_value = "sample")]
    backend: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run directory (default: runs/<benchmark>-<seed>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Allow levels/depths beyond the defaults.
    #[arg(long)]
    allow_deep: bool,
}

#[derive(Subcommand)]
enum RunBench {
    /// Bell tests between qubit pairs of a device topology.
    Bell {
        #[command(flatten)]
        common: Common,
        /// Topology JSON; a 5-qubit line when omitted.
        #[arg(long)]
        topology: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "adjacent")]
        pairs: Pairs,
        #[arg(long, default_value_t = 8192)]
        shots: u64,
    },
    /// Schrödinger's Microscope images.
    Sm(GridArgs),
    /// Mandelbrot images from iterated state maps.
    Mandelbrot(GridArgs),
    /// Closed curves stored as Fourier amplitudes and read back through a QFT.
    Line {
        #[command(flatten)]
        common: Common,
        /// kite, heart8, heart16 or a JSON file of points; repeatable.
        #[arg(long)]
        curve: Vec<String>,
        #[arg(long, default_value_t = linedraw::DEFAULT_BATCHES)]
        batches: usize,
        #[arg(long, default_value_t = linedraw::DEFAULT_SHOTS)]
        shots: u64,
    },
    /// Matrix inversion through a QSVT inversion polynomial.
    Matinv {
        #[command(flatten)]
        common: Common,
        /// Matrix size; repeatable (default 2 to 64).
        #[arg(long)]
        size: Vec<usize>,
        #[arg(long)]
        shots: Option<u64>,
    },
    /// Platonic fractals from iterated weak Pauli measurements.
    Platonic {
        #[command(flatten)]
        common: Common,
        /// Number of weak measurements; repeatable (default 1, 2, 3).
        #[arg(long)]
        depth: Vec<usize>,
        #[arg(long, default_value_t = platonic::DEFAULT_STRENGTH)]
        strength: f64,
        #[arg(long, default_value_t = platonic::DEFAULT_SHOTS)]
        shots: u64,
    },
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    common: Common,
    /// Iteration level; repeatable (default 1, 2, 3).
    #[arg(long)]
    level: Vec<u32>,
    #[arg(long, default_value_t = riemann::DEFAULT_RESOLUTION)]
    res: usize,
    /// Shots per pixel (default 4096, or 8192 from level 3).
    #[arg(long)]
    shots: Option<u64>,
}

#[derive(clap::ValueEnum, Clone, Copy)]
enum Pairs {
    Adjacent,
    All,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Backend(_) | Error::Timeout(_) | Error::MalformedJob(_) | Error::Io(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn init_threads() -> qbench::Result<()> {
    let Ok(v) = std::env::var("QBENCH_THREADS") else { return Ok(()) };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidConfig(format!("QBENCH_THREADS={v:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidConfig(e.to_string()))
}

fn print_json<T: serde::Serialize>(v: &T) -> qbench::Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn dispatch(cmd: Command) -> qbench::Result<()> {
    match cmd {
        Command::Run { bench } => {
            let (common, benchmark) = resolve(bench)?;
            let out = common
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from(format!("runs/{}-{}", benchmark.id(), common.seed)));
            let backend = Backend::parse(&common.backend, &out.join("queue"))?;
            let manifest = RunManifest::new(benchmark, &backend, common.seed);
            let scores = harness::run(manifest, backend, &out)?;
            let _ = std::fs::remove_dir(out.join("queue"));
            print_json(&scores)
        }
        Command::Score { dir } => print_json(&harness::rescore(&dir)?),
        Command::Render { dir } => harness::render_dir(&dir),
        Command::Report { device, qv, log2_qv } => report(&device, &qv, log2_qv),
        Command::FitNoise { run, benchmark, max_bins } => {
            if let Some(b) = benchmark {
                let id = RunManifest::load(&run)?.benchmark.id();
                if id != b {
                    return Err(Error::InvalidConfig(format!("{} is a {id} run, not {b}", run.display())));
                }
            }
            let reports = harness::fit_noise_dir(&run, max_bins)?;
            harness::write_noise_reports(&run, &reports)?;
            print_json(&reports)
        }
        Command::ListBenchmarks => {
            println!("bell        --shots 8192 --pairs adjacent (5-qubit line unless --topology)");
            println!("sm          --level 1..3 --res 32 --shots 4096 (8192 from level 3)");
            println!("mandelbrot  --level 1..3 --res 32 --shots 4096 (8192 from level 3)");
            println!("line        --curve kite,heart8,heart16 --batches 25 --shots 4096");
            println!("matinv      --size 2..64 --shots 8192 (1024 above 16)");
            println!("platonic    --depth 1..3 --strength 0.75 --shots 131072");
            Ok(())
        }
        Command::Worker { queue } => match backend::serve_queue(&queue)? {
            0 => Ok(()),
            n => Err(Error::MalformedJob(format!("{n} malformed job(s)"))),
        },
    }
}

fn check_deep(common: &Common, values: &[usize], max: usize, what: &str) -> qbench::Result<()> {
    if !common.allow_deep && values.iter().any(|&v| v > max) {
        return Err(Error::InvalidConfig(format!("{what} above {max} needs --allow-deep")));
    }
    Ok(())
}

fn resolve(bench: RunBench) -> qbench::Result<(Common, Benchmark)> {
    Ok(match bench {
        RunBench::Bell { common, topology, pairs, shots } => {
            let topology = match topology {
                Some(p) => Topology::load(&p)?,
                None => Topology::line(5),
            };
            let pairs = match pairs {
                Pairs::Adjacent => PairSelection::Adjacent,
                Pairs::All => PairSelection::All,
            };
            (common, Benchmark::Bell { topology, pairs, shots })
        }
        RunBench::Sm(g) => grid(Kind::Microscope, g)?,
        RunBench::Mandelbrot(g) => grid(Kind::Mandelbrot, g)?,
        RunBench::Line { common, curve, batches, shots } => {
            let names = if curve.is_empty() { vec!["kite".into(), "heart8".into(), "heart16".into()] } else { curve };
            let curves = names
                .iter()
                .map(|n| {
                    let c = if Path::new(n).is_file() { Curve::load(Path::new(n))? } else { Curve::by_name(n)? };
                    Ok(CurveSpec::of(&c))
                })
                .collect::<qbench::Result<_>>()?;
            (common, Benchmark::Line { curves, batches, shots })
        }
        RunBench::Matinv { common, size, shots } => {
            let sizes = if size.is_empty() { qbench::matinv::SIZES.to_vec() } else { size };
            (common, Benchmark::matinv(&sizes, shots))
        }
        RunBench::Platonic { common, depth, strength, shots } => {
            let depths = if depth.is_empty() { vec![1, 2, 3] } else { depth };
            check_deep(&common, &depths, platonic::MAX_DEFAULT_DEPTH, "depth")?;
            (common, Benchmark::Platonic { depths, strength, shots })
        }
    })
}

fn grid(kind: Kind, g: GridArgs) -> qbench::Result<(Common, Benchmark)> {
    let levels = if g.level.is_empty() { vec![1, 2, 3] } else { g.level };
    let as_usize: Vec<usize> = levels.iter().map(|&l| l as usize).collect();
    check_deep(&g.common, &as_usize, riemann::MAX_DEFAULT_LEVEL as usize, "level")?;
    Ok((g.common, Benchmark::grid(kind, &levels, g.res, g.shots)?))
}

fn report(devices: &[PathBuf], qv: &[f64], log2_qv: bool) -> qbench::Result<()> {
    if !qv.is_empty() && qv.len() != devices.len() {
        return Err(Error::InvalidConfig("give one --qv per --device".into()));
    }
    let mut reports = Vec::with_capacity(devices.len());
    for (k, d) in devices.iter().enumerate() {
        let r = harness::device_report(d, qv.get(k).copied())?;
        harness::write_device_report(d, &r)?;
        reports.push(r);
    }
    let paired: Vec<(f64, f64)> =
        reports.iter().filter_map(|r| Some((r.mean_score?, r.quantum_volume?))).collect();
    let correlation = if paired.len() >= 3 {
        let (s, q): (Vec<f64>, Vec<f64>) = paired.into_iter().unzip();
        Some(analysis::correlate(&s, &q, log2_qv)?)
    } else {
        None
    };
    print_json(&serde_json::json!({ "devices": reports, "correlation": correlation }))
}
