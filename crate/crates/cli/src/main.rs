use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::warn;

use optigrade::dataset::{scan_dataset, split_dataset, ClassList, DatasetManifest, SplitFractions, MANIFEST_FILE};
use optigrade::metrics::{evaluate, load_evaluation_set, EvalConfig};
use optigrade::optics::{kernel_for_condition, ApertureKind, ApertureSpec, DEFAULT_KERNEL_SIZE};
use optigrade::resample::{degrade, DegradeSpec, Image};
use optigrade::sweep::{
    emit_plot_data, evaluate_sweep, parse_csv, render_table, run_degradation_sweep, write_run_outputs, Metric,
    RunReport, SweepConfig, Timings,
};
use optigrade::{Error, Result};

/// Degrade aerial imagery to coarser resolutions and score detectors on it.
#[derive(Debug, Parser)]
#[command(name = "optigrade", version)]
struct Cli {
    /// Worker threads (defaults to one per core).
    #[arg(long, global = true, env = "OPTIGRADE_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a PSF kernel and write it with a PNG preview.
    Psf(PsfArgs),
    /// Degrade a single image to a coarser GSD.
    Degrade(DegradeArgs),
    /// Split a dataset directory into train/val/test and write its manifest.
    Split(SplitArgs),
    /// Score a directory of predictions against ground truth labels.
    Eval(EvalArgs),
    /// Run the degradation grid and, if configured, score predictions.
    Sweep(SweepArgs),
    /// Write gnuplot data for one metric of a results CSV.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Aperture {
    Circular,
    Cassegrain,
}

impl Aperture {
    fn spec(self, diameter: f64) -> ApertureSpec {
        match self {
            Aperture::Circular => ApertureSpec::circular(diameter),
            Aperture::Cassegrain => ApertureSpec::cassegrain(diameter),
        }
    }
}

#[derive(Debug, Args)]
struct PsfArgs {
    #[arg(long, value_enum)]
    aperture: Aperture,
    /// Sampling ratio λf/(D·p).
    #[arg(long)]
    q: f64,
    /// Kernel matrix file; the preview goes next to it as .png.
    #[arg(long)]
    out: PathBuf,
    /// Pupil diameter in metres.
    #[arg(long, default_value_t = 0.1)]
    diameter: f64,
    /// Central obscuration as a fraction of the diameter (Cassegrain only).
    #[arg(long)]
    obscuration: Option<f64>,
    /// Number of spider vanes (Cassegrain only).
    #[arg(long)]
    spiders: Option<u32>,
}

#[derive(Debug, Args)]
struct DegradeArgs {
    /// Source PNG.
    #[arg(long = "in")]
    input: PathBuf,
    /// Source GSD in m/px.
    #[arg(long)]
    src_gsd: f64,
    /// Target GSD in m/px.
    #[arg(long)]
    target_gsd: f64,
    #[arg(long)]
    q: f64,
    #[arg(long, value_enum)]
    aperture: Aperture,
    /// Output PNG; a .meta.json sidecar with the new GSD is written beside it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SplitArgs {
    /// Dataset root holding images/ and labels/.
    #[arg(long)]
    dir: PathBuf,
    /// Train, validation and test fractions.
    #[arg(long, value_delimiter = ',', num_args = 1, default_value = "0.6,0.1,0.3")]
    fractions: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Directory of prediction files, one per image stem.
    #[arg(long)]
    pred: PathBuf,
    /// Ground truth directory (a dataset root or a bare label directory).
    #[arg(long)]
    gt: PathBuf,
    /// IoU needed for a detection to count as a match.
    #[arg(long, default_value_t = 0.5)]
    iou: f64,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// JSON sweep configuration.
    #[arg(long)]
    config: PathBuf,
    /// Dataset root with a manifest.
    #[arg(long)]
    dataset: PathBuf,
    /// Output root for degraded data and runs/.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PlotArgs {
    /// Results CSV.
    #[arg(long)]
    results: PathBuf,
    /// Column to plot: f1, count_error, precision, recall, map, ap_cow, ap_sheep or ap_dog.
    #[arg(long)]
    metric: String,
    #[arg(long)]
    out: PathBuf,
}

fn require(path: &Path) -> Result<()> {
    match std::fs::metadata(path) {
        Ok(_) => Ok(()),
        Err(e) => Err(Error::Io {
            path: path.to_path_buf(),
            source: e,
        }),
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn preview_path(out: &Path) -> PathBuf {
    let p = out.with_extension("png");
    if p == out {
        out.with_extension("preview.png")
    } else {
        p
    }
}

fn run_psf(a: PsfArgs) -> Result<()> {
    let mut spec = a.aperture.spec(a.diameter);
    if spec.kind == ApertureKind::Cassegrain {
        spec.obscuration_ratio = a.obscuration.unwrap_or(spec.obscuration_ratio);
        spec.spider_count = a.spiders.unwrap_or(spec.spider_count);
    } else if a.obscuration.is_some() || a.spiders.is_some() {
        return Err(Error::Usage("--obscuration and --spiders apply to cassegrain apertures only".into()));
    }
    spec.validate()?;
    let kernel = kernel_for_condition(&spec, a.q, DEFAULT_KERNEL_SIZE)?;
    kernel.save_text(&a.out)?;
    let preview = preview_path(&a.out);
    kernel.save_preview(&preview)?;
    println!("wrote {} and {}", a.out.display(), preview.display());
    Ok(())
}

fn run_degrade(a: DegradeArgs) -> Result<()> {
    let spec = DegradeSpec::new(a.src_gsd, a.target_gsd, a.q, a.aperture.spec(0.1));
    spec.validate()?;
    require(&a.input)?;
    let image = Image::load_png(&a.input)?.with_gsd(a.src_gsd);
    let out = degrade(&image, &spec)?;
    out.save_png(&a.out)?;
    println!(
        "{}x{} -> {}x{} at {} m/px",
        image.width(),
        image.height(),
        out.width(),
        out.height(),
        a.target_gsd
    );
    Ok(())
}

fn run_split(a: SplitArgs) -> Result<()> {
    let [train, val, test] = a.fractions[..] else {
        return Err(Error::Usage(format!("--fractions takes three values, got {}", a.fractions.len())));
    };
    let fractions = SplitFractions::new(train, val, test)?;
    require(&a.dir)?;
    let manifest = split_dataset(&scan_dataset(&a.dir)?, fractions, a.seed)?;
    let path = a.dir.join(MANIFEST_FILE);
    manifest.save(&path)?;
    println!(
        "{} records: train {}, val {}, test {} -> {}",
        manifest.records.len(),
        manifest.count(optigrade::dataset::Split::Train),
        manifest.count(optigrade::dataset::Split::Val),
        manifest.count(optigrade::dataset::Split::Test),
        path.display()
    );
    Ok(())
}

fn run_eval(a: EvalArgs) -> Result<()> {
    let cfg = EvalConfig::with_iou(a.iou)?;
    require(&a.pred)?;
    require(&a.gt)?;
    let manifest = a.gt.join(MANIFEST_FILE);
    let classes = if manifest.exists() {
        DatasetManifest::load(&manifest)?.class_list
    } else {
        ClassList::default()
    };
    let set = load_evaluation_set(&a.pred, &a.gt, None)?;
    for issue in &set.issues {
        warn!("{}: {}", issue.path.display(), issue.message);
    }
    let report = evaluate(&set.images, &classes, &cfg)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}

fn run_sweep(a: SweepArgs) -> Result<()> {
    require(&a.config)?;
    require(&a.dataset.join(MANIFEST_FILE))?;
    let mut cfg = SweepConfig::load(&a.config)?;
    // Relative prediction roots are taken from the config file's directory.
    if let (Some(p), Some(base)) = (&cfg.predictions, a.config.parent()) {
        if p.is_relative() {
            cfg.predictions = Some(base.join(p));
        }
    }
    if let Some(p) = &cfg.predictions {
        require(p)?;
    }

    let started = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    let t = Instant::now();
    let degradation = run_degradation_sweep(&a.dataset, &cfg, &a.out)?;
    let degrade_s = t.elapsed().as_secs_f64();
    eprintln!(
        "degraded {} images, reused {}, skipped {}, failed {}",
        degradation.processed(),
        degradation.reused(),
        degradation.skips.len(),
        degradation.issues.len()
    );

    let t = Instant::now();
    let evaluation = match &cfg.predictions {
        Some(p) => Some(evaluate_sweep(p, &a.out, &cfg)?),
        None => None,
    };
    let evaluate_s = t.elapsed().as_secs_f64();
    let evaluation = evaluation.unwrap_or_default();
    for m in &evaluation.missing {
        warn!("no predictions for {m}");
    }
    for issue in &evaluation.issues {
        warn!("{}: {}", issue.path.display(), issue.message);
    }

    let report = RunReport {
        started,
        degradation: Some(degradation),
        missing_predictions: evaluation.missing,
        prediction_issues: evaluation.issues,
        rows: evaluation.rows.len(),
        timings: Timings { degrade_s, evaluate_s },
    };
    let dir = write_run_outputs(&a.out, &evaluation.rows, &report)?;
    if !evaluation.rows.is_empty() {
        print!("{}", render_table(&evaluation.rows));
    }
    println!("run written to {}", dir.display());
    Ok(())
}

fn run_plot(a: PlotArgs) -> Result<()> {
    let metric: Metric = a.metric.parse()?;
    require(&a.results)?;
    let text = std::fs::read_to_string(&a.results).map_err(|source| Error::Io {
        path: a.results.clone(),
        source,
    })?;
    let rows = parse_csv(&text)?;
    write(&a.out, &emit_plot_data(&rows, metric)?)?;
    println!("wrote {} ({} rows)", a.out.display(), rows.len());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Usage(format!("cannot configure {n} threads: {e}")))?;
    }
    match cli.command {
        Command::Psf(a) => run_psf(a),
        Command::Degrade(a) => run_degrade(a),
        Command::Split(a) => run_split(a),
        Command::Eval(a) => run_eval(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Plot(a) => run_plot(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}
