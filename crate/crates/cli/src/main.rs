use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use photonscan_core::config::{Resolved, SceneData};
use photonscan_core::harness::{metrics, presets::Preset, sweep, ConfusionMatrix, ReferenceMaps};
use photonscan_core::reconstruct::{write_matrix, write_pgm16};
use photonscan_core::simulate::execute_plan;
use photonscan_core::{Error, HistogramCube, RunConfig, ScanPlan, Simulator, Strategy};

/// Exit code of a run that stopped on a budget rather than converging.
const EXIT_BUDGET: u8 = 2;

/// Threads and processing parallelism factor.
const PARALLELISM_VAR: &str = "PHOTONSCAN_PARALLELISM";

#[derive(Parser)]
#[command(name = "photonscan", version, about = "Single-photon LiDAR simulation, inference and adaptive scanning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan every pixel of a phantom once and write the histogram cube.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Dwell per pixel in seconds; the phantom's unit dwell by default.
        #[arg(long)]
        dwell: Option<f64>,
        /// Cube file; `<output>/scene.cube` by default.
        #[arg(long)]
        cube: Option<PathBuf>,
    },
    /// Run an adaptive or static experiment.
    Run(RunArgs),
    /// Estimate every pixel of a cube in one shot.
    Classify {
        #[command(flatten)]
        common: Common,
        /// Cube to classify; simulated from the configured phantom otherwise.
        #[arg(long)]
        cube: Option<PathBuf>,
        /// Dwell of the simulated cube in seconds.
        #[arg(long)]
        dwell: Option<f64>,
    },
    /// Accuracy and depth RMSE over a grid of signal-to-background ratios
    /// and photon levels.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.1, 1.0, 10.0, 100.0])]
        sbr: Vec<f64>,
        /// Mean signal photons per target pixel.
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 3.0, 10.0, 30.0, 100.0])]
        photons: Vec<f64>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    strategy: Option<StrategyArg>,
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    ratio: Option<f64>,
    /// Scanned positions per iteration.
    #[arg(long)]
    points: Option<usize>,
    /// Base dwell in seconds.
    #[arg(long)]
    t0: Option<f64>,
    #[arg(long)]
    importance: Option<f64>,
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long)]
    max_iterations: Option<u64>,
    /// Per-pixel dwell budget in seconds.
    #[arg(long)]
    max_dwell: Option<f64>,
    /// Exploration floor of the sampling map.
    #[arg(long)]
    floor: Option<f64>,
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(short, long)]
    config: PathBuf,
    /// Output directory, overriding the configured one.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Adaptive,
    Uniform,
    Random,
}

fn secs(s: f64) -> Result<Duration> {
    photonscan_core::config::secs::from_f64(s).with_context(|| format!("{s} is not a valid number of seconds"))
}

fn load(common: &Common) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(o) = &common.output {
        cfg.output = o.clone();
    }
    if let Some(s) = common.seed {
        cfg.experiment.seed = s;
    }
    if let Ok(v) = std::env::var(PARALLELISM_VAR) {
        let p: usize = v.parse().with_context(|| format!("{PARALLELISM_VAR}={v} is not a positive integer"))?;
        if p == 0 {
            bail!("{PARALLELISM_VAR} must be at least 1");
        }
        cfg.experiment.processing.parallelism = p as f64;
        rayon::ThreadPoolBuilder::new().num_threads(p).build_global().ok();
    }
    fs::create_dir_all(&cfg.output).with_context(|| format!("creating {}", cfg.output.display()))?;
    Ok(cfg)
}

fn truth(resolved: &Resolved) -> Result<&photonscan_core::GroundTruthScene> {
    match &resolved.data {
        SceneData::Truth(s) => Ok(s),
        SceneData::Recorded(_) => bail!("this command needs a phantom or preset scene"),
    }
}

fn full_scan(resolved: &Resolved, dwell: Option<f64>, seed: u64) -> Result<HistogramCube> {
    let scene = truth(resolved)?;
    let dwell = secs(dwell.unwrap_or(scene.unit_dwell))?;
    let n = scene.pixels();
    let all: Vec<usize> = (0..n).collect();
    let mut cube = HistogramCube::new(scene.rows, scene.cols, scene.wavelengths, scene.bins);
    execute_plan(&Simulator::new(scene, &resolved.irf), &ScanPlan::pixels(0, &all, &vec![dwell; n]), &mut cube, seed);
    Ok(cube)
}

fn simulate(common: Common, dwell: Option<f64>, cube_path: Option<PathBuf>) -> Result<ExitCode> {
    let cfg = load(&common)?;
    let resolved = cfg.resolve()?;
    let cube = full_scan(&resolved, dwell, cfg.experiment.seed)?;
    let path = cube_path.unwrap_or_else(|| cfg.output.join("scene.cube"));
    cube.save(&path)?;
    let scene = truth(&resolved)?;
    let depth: Vec<f64> = scene.depth.iter().map(|&d| d as f64).collect();
    let class: Vec<f64> = scene.class.iter().map(|&u| u as f64).collect();
    write_matrix(cfg.output.join("truth_depth.txt"), scene.rows, scene.cols, &depth)?;
    write_matrix(cfg.output.join("truth_class.txt"), scene.rows, scene.cols, &class)?;
    let photons: u64 = (0..cube.pixels()).map(|n| cube.photons(n)).sum();
    println!("wrote {} ({}x{}x{}x{}, {photons} photons)", path.display(), cube.rows(), cube.cols(), cube.wavelengths(), cube.bins());
    Ok(ExitCode::SUCCESS)
}

fn run(args: RunArgs) -> Result<ExitCode> {
    let RunArgs { common, strategy, stride, ratio, points, t0, importance, xi, max_iterations, max_dwell, floor } = args;
    let mut cfg = load(&common)?;
    cfg.strategy = match (strategy, cfg.strategy) {
        (None, s) => s,
        (Some(StrategyArg::Adaptive), _) => Strategy::Adaptive,
        (Some(StrategyArg::Uniform), Strategy::Uniform { stride }) => Strategy::Uniform { stride },
        (Some(StrategyArg::Uniform), _) => Strategy::Uniform { stride: 1 },
        (Some(StrategyArg::Random), Strategy::Random { ratio }) => Strategy::Random { ratio },
        (Some(StrategyArg::Random), _) => Strategy::Random { ratio: 0.3 },
    };
    match (&mut cfg.strategy, stride, ratio) {
        (Strategy::Uniform { stride: s }, Some(v), _) => *s = v,
        (Strategy::Random { ratio: r }, _, Some(v)) => *r = v,
        (_, None, None) => {}
        _ => bail!("--stride applies to the uniform strategy and --ratio to the random one"),
    }
    let e = &mut cfg.experiment;
    if let Some(v) = points {
        e.scenario.points = v;
    }
    if let Some(v) = t0 {
        e.scenario.t0 = secs(v)?;
    }
    if let Some(v) = importance {
        e.scenario.importance = v;
    }
    if let Some(v) = xi {
        e.stop.xi = v;
    }
    if let Some(v) = max_iterations {
        e.stop.max_iterations = v;
    }
    if let Some(v) = max_dwell {
        e.stop.max_dwell = secs(v)?;
    }
    if let Some(v) = floor {
        e.reconstruction.floor = v;
    }
    // Re-validate with the overrides applied.
    let cfg = RunConfig::from_toml(&cfg.to_toml()?)?;
    let resolved = cfg.resolve()?;
    let trace = resolved.run(cfg.strategy, &cfg.experiment)?;

    let out = &cfg.output;
    let (rows, cols) = (resolved.rows(), resolved.cols());
    cfg.save(out.join("config.toml"))?;
    trace.save_csv(out.join("trace.csv"))?;
    let last = &trace.last;
    write_matrix(out.join("depth.txt"), rows, cols, &last.depth)?;
    write_pgm16(out.join("depth.pgm"), rows, cols, &last.depth)?;
    let labels: Vec<f64> = last.labels.iter().map(|&u| u as f64).collect();
    write_matrix(out.join("labels.txt"), rows, cols, &labels)?;
    write_matrix(out.join("samples.txt"), rows, cols, &last.samples)?;
    write_matrix(out.join("ncd.txt"), rows, cols, &last.ncd)?;
    if let Some(c) = trace.confusion.last() {
        write(out.join("confusion.csv"), &c.to_csv())?;
    }
    let plans: String = trace.plans.iter().map(ScanPlan::to_text).collect();
    write(out.join("plans.txt"), &plans)?;

    let row = trace.final_row();
    println!(
        "{}: {} after {} iterations, dwell {:.6} s, total {:.6} s, rmse {:.4} bins, acc {:.4}",
        strategy_name(cfg.strategy),
        trace.stop,
        trace.rows.len(),
        row.map_or(0.0, |r| r.dwell_s),
        row.map_or(0.0, |r| r.total_s),
        row.map_or(f64::NAN, |r| r.rmse_bins),
        row.map_or(f64::NAN, |r| r.acc),
    );
    Ok(if trace.stop.converged() { ExitCode::SUCCESS } else { ExitCode::from(EXIT_BUDGET) })
}

fn strategy_name(s: Strategy) -> String {
    match s {
        Strategy::Adaptive => "adaptive".into(),
        Strategy::Uniform { stride } => format!("uniform(stride {stride})"),
        Strategy::Random { ratio } => format!("random({ratio})"),
    }
}

fn write(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn classify(common: Common, cube_path: Option<PathBuf>, dwell: Option<f64>) -> Result<ExitCode> {
    let cfg = load(&common)?;
    let resolved = cfg.resolve()?;
    let engine = resolved.engine(&cfg.experiment)?;
    let cube = match (cube_path, &resolved.data) {
        (Some(p), _) => HistogramCube::load(p)?,
        (None, SceneData::Recorded(c)) => c.clone(),
        (None, SceneData::Truth(_)) => full_scan(&resolved, dwell, cfg.experiment.seed)?,
    };
    if cube.wavelengths() != engine.wavelengths() || cube.bins() != engine.bins() {
        return Err(Error::DimensionMismatch(format!(
            "cube is {}x{} (L x T), library and IRF are {}x{}",
            cube.wavelengths(),
            cube.bins(),
            engine.wavelengths(),
            engine.bins()
        ))
        .into());
    }
    let n = cube.pixels();
    let all: Vec<usize> = (0..n).collect();
    let classes = engine.classes();
    let path = cfg.output.join("estimates.csv");
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
    let mut header: Vec<String> = ["pixel", "row", "col", "status", "label", "depth", "ncd", "photons"].map(String::from).to_vec();
    header.extend((0..=classes).map(|k| format!("p{k}")));
    w.write_record(&header)?;
    let (mut labels, mut depth, mut no_data) = (vec![0usize; n], vec![0.0; n], 0usize);
    for (i, est) in engine.estimate_pixels(&cube, &all).into_iter().enumerate() {
        let mut rec = vec![i.to_string(), (i / cube.cols()).to_string(), (i % cube.cols()).to_string()];
        match est {
            Ok(e) => {
                labels[i] = e.label;
                depth[i] = e.depth as f64;
                rec.extend(["ok".into(), e.label.to_string(), e.depth.to_string(), e.ncd.to_string(), e.photons.to_string()]);
                rec.extend(e.class_posterior.iter().map(f64::to_string));
            }
            Err(Error::NoData(_)) => {
                no_data += 1;
                rec.push("no_data".into());
                rec.extend(std::iter::repeat_n(String::new(), 4 + classes + 1));
            }
            Err(e) => return Err(e.into()),
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    print!("classified {} pixels ({no_data} without data)", n - no_data);
    if let SceneData::Truth(scene) = &resolved.data {
        if (scene.rows, scene.cols) == (cube.rows(), cube.cols()) {
            let reference = ReferenceMaps::from_scene(scene);
            let m = metrics(&depth, &labels, &reference, classes, resolved.irf.bin_width());
            let confusion = ConfusionMatrix::from_labels(classes, &reference.class, &labels);
            write(cfg.output.join("confusion.csv"), &confusion.to_csv())?;
            print!(", accuracy {:.4}, rmse {:.4} bins", m.accuracy, m.rmse_bins);
        }
    }
    println!();
    Ok(ExitCode::SUCCESS)
}

fn run_sweep(common: Common, sbr: Vec<f64>, photons: Vec<f64>) -> Result<ExitCode> {
    let cfg = load(&common)?;
    let resolved = cfg.resolve()?;
    let spec = resolved.phantom.clone().context("sweep needs a phantom or preset scene")?;
    let preset = Preset { spec, library: resolved.library.clone(), irf: resolved.irf.clone() };
    let points = sweep(&preset, &sbr, &photons, &cfg.experiment.inference, cfg.experiment.seed)?;
    let path = cfg.output.join("sweep.csv");
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
    for p in &points {
        w.serialize(p)?;
    }
    w.flush()?;
    println!("wrote {} ({} points)", path.display(), points.len());
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { common, dwell, cube } => simulate(common, dwell, cube),
        Command::Run(args) => run(args),
        Command::Classify { common, cube, dwell } => classify(common, cube, dwell),
        Command::Sweep { common, sbr, photons } => run_sweep(common, sbr, photons),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::FAILURE
    })
}
