//! `palynseg` command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{error, info, warn};
use palynseg::phantom::DEFAULT_IOU_THRESHOLD;
use palynseg::pipeline::evaluate::{phantom_spec_from_toml, score_dirs, write_phantom};
use palynseg::{run_batch, Error, PipelineConfig};

const EXIT_CONFIG: u8 = 2;
const EXIT_OUTPUT: u8 = 3;

#[derive(Parser)]
#[command(name = "palynseg", version, about = "Segment pollen grains and their exine in microscope images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment one image or every image in a directory.
    Segment(SegmentArgs),
    /// Render a synthetic phantom and its ground-truth masks.
    Phantom {
        /// Phantom spec (TOML).
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Score segmentation reports against phantom ground truth.
    Score {
        /// Directory holding `<stem>.report.json` files.
        #[arg(long)]
        results: PathBuf,
        /// Directory holding `<stem>.truth.json` files.
        #[arg(long)]
        truth: PathBuf,
        #[arg(long, default_value_t = DEFAULT_IOU_THRESHOLD)]
        iou: f64,
    },
    /// Print configuration.
    Config {
        /// Print every option with its default value.
        #[arg(long, required = true)]
        defaults: bool,
    },
}

#[derive(Args)]
struct SegmentArgs {
    /// Image file or directory of PNG/TIFF images.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// TOML config; omitted keys keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write overlays even if the config disables them.
    #[arg(long)]
    overlay: bool,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

/// A failure with its process exit code.
struct Failure(u8, String);

impl Failure {
    fn config(msg: impl Into<String>) -> Self {
        Failure(EXIT_CONFIG, msg.into())
    }

    fn output(msg: impl Into<String>) -> Self {
        Failure(EXIT_OUTPUT, msg.into())
    }

    /// Config errors map to the config exit code, everything else to the
    /// output one.
    fn from_error(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::config(e.to_string()),
            _ => Failure::output(e.to_string()),
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig, Failure> {
    let Some(path) = path else {
        return Ok(PipelineConfig::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("cannot read config {}: {e}", path.display())))?;
    PipelineConfig::from_toml_str(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn create_dir(path: &Path) -> Result<(), Failure> {
    fs::create_dir_all(path).map_err(|e| Failure::output(format!("cannot create {}: {e}", path.display())))
}

fn set_jobs(jobs: Option<usize>) -> Result<(), Failure> {
    let Some(n) = jobs else { return Ok(()) };
    if n == 0 {
        return Err(Failure::config("--jobs must be at least 1"));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::config(format!("cannot start thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    warn!("built without parallel support; ignoring --jobs {n}");
    Ok(())
}

fn segment(args: SegmentArgs) -> Result<(), Failure> {
    let mut cfg = load_config(args.config.as_deref())?;
    if args.overlay {
        cfg.pipeline.write_overlay = true;
    }
    set_jobs(args.jobs)?;
    if !args.input.exists() {
        return Err(Failure::config(format!("input {} does not exist", args.input.display())));
    }
    create_dir(&args.output)?;
    let summary = run_batch(&args.input, &args.output, &cfg).map_err(Failure::from_error)?;
    info!(
        "{} image(s), {} grain(s), {} error(s), {} skipped",
        summary.images_processed, summary.grains_found, summary.errors, summary.skipped
    );
    if summary.errors > 0 {
        warn!("{} input(s) could not be read", summary.errors);
    }
    println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    Ok(())
}

fn phantom(spec: &Path, output: &Path) -> Result<(), Failure> {
    let text = fs::read_to_string(spec)
        .map_err(|e| Failure::config(format!("cannot read spec {}: {e}", spec.display())))?;
    let spec_val = phantom_spec_from_toml(&text).map_err(|e| Failure::config(format!("{}: {e}", spec.display())))?;
    let stem = spec.file_stem().and_then(|s| s.to_str()).unwrap_or("phantom");
    create_dir(output)?;
    let truth = write_phantom(&spec_val, stem, output).map_err(|e| match e {
        Error::SpecOverlap(..) | Error::Config(_) => Failure::config(format!("{}: {e}", spec.display())),
        other => Failure::output(other.to_string()),
    })?;
    info!("wrote {stem} with {} grain(s) to {}", truth.grains.len(), output.display());
    Ok(())
}

fn score(results: &Path, truth: &Path, iou: f64) -> Result<(), Failure> {
    if !(iou > 0.0 && iou <= 1.0) {
        return Err(Failure::config("--iou must be in (0, 1]"));
    }
    let summary = score_dirs(results, truth, iou).map_err(|e| Failure::config(e.to_string()))?;
    println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Segment(args) => segment(args),
        Command::Phantom { spec, output } => phantom(&spec, &output),
        Command::Score { results, truth, iou } => score(&results, &truth, iou),
        Command::Config { .. } => {
            print!("{}", PipelineConfig::default().to_toml_string());
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, msg)) => {
            error!("{msg}");
            ExitCode::from(code)
        }
    }
}
