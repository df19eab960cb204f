use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use augcomp::commands::{self, Matte};
use augcomp::dataset::{self, BuildOptions, DEFAULT_MAX_MEAN_RESIDUAL};
use augcomp::mask::MorphParams;
use augcomp::metrics::{serve_mock, MOCK_DIM};
use augcomp::windowing::{DEFAULT_STRIDE, DEFAULT_WINDOW};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "augcomp",
    version,
    about = "Augmented-compositing data and evaluation tools"
)]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Validate inputs and write nothing.
    #[arg(long, global = true)]
    dry_run: bool,
    /// Emit logs as JSON lines on stderr.
    #[arg(long, global = true)]
    log_json: bool,
    #[arg(long, global = true, default_value = "info")]
    log_level: log::LevelFilter,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct MorphArgs {
    #[arg(long, default_value_t = MorphParams::default().erode_iters)]
    erode: u32,
    #[arg(long, default_value_t = MorphParams::default().dilate_iters)]
    dilate: u32,
    #[arg(long, default_value_t = MorphParams::default().median_kernel)]
    median: usize,
}

impl From<MorphArgs> for MorphParams {
    fn from(a: MorphArgs) -> Self {
        MorphParams {
            erode_iters: a.erode,
            dilate_iters: a.dilate,
            median_kernel: a.median,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Composite a foreground over a background with an alpha matte or a subject mask.
    Compose {
        fg: PathBuf,
        bg: PathBuf,
        out: PathBuf,
        #[arg(long, conflicts_with = "subject", required_unless_present = "subject")]
        alpha: Option<PathBuf>,
        #[arg(long)]
        subject: Option<PathBuf>,
    },
    /// Derive the binary effect mask and tri-mask from a with/without-effect pair.
    DeriveMask {
        gt: PathBuf,
        over: PathBuf,
        subject: PathBuf,
        out: PathBuf,
        #[command(flatten)]
        morph: MorphArgs,
        #[arg(long, default_value_t = 0.0)]
        gray_prob: f64,
    },
    /// Build a dataset and manifest from a directory of per-sample layer folders.
    BuildDataset {
        layer_root: PathBuf,
        manifest_out: PathBuf,
        #[command(flatten)]
        morph: MorphArgs,
        #[arg(long, default_value_t = 0.0)]
        gray_prob: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_MEAN_RESIDUAL)]
        max_residual: f64,
    },
    /// Render procedural oracle scenes from a JSON scene spec.
    Oracle { scene_spec: PathBuf, out: PathBuf },
    /// Score a generated clip against ground truth and the no-effect input.
    Evaluate {
        gt: PathBuf,
        over: PathBuf,
        gen: PathBuf,
        report_out: PathBuf,
        /// External embedding provider command; the built-in mock when absent.
        #[arg(long)]
        provider: Option<String>,
        #[arg(long)]
        caption: Option<String>,
    },
    /// Print the temporal window plan as JSON.
    PlanWindows {
        frames: usize,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
        #[arg(long, default_value_t = DEFAULT_STRIDE)]
        stride: usize,
    },
    /// Print per-kind sample counts of a manifest.
    Stats { manifest: PathBuf },
    /// Serve the deterministic mock embedding provider on stdin/stdout.
    #[command(hide = true)]
    MockProvider {
        #[arg(long, default_value_t = MOCK_DIM)]
        dim: usize,
    },
}

fn init_logging(cli: &Cli) {
    let mut builder = env_logger::Builder::new();
    builder.filter_level(cli.log_level);
    if cli.log_json {
        builder.format(|buf, record| {
            let line = serde_json::json!({
                "level": record.level().to_string(),
                "target": record.target(),
                "message": record.args().to_string(),
            });
            writeln!(buf, "{line}")
        });
    }
    builder.target(env_logger::Target::Stderr).init();
}

fn run(cli: &Cli) -> augcomp::Result<()> {
    let dry = cli.dry_run;
    match &cli.command {
        Command::Compose {
            fg,
            bg,
            out,
            alpha,
            subject,
        } => {
            let matte = match (alpha, subject) {
                (Some(a), _) => Matte::Alpha(a),
                (None, Some(s)) => Matte::Subject(s),
                (None, None) => unreachable!("clap requires one of --alpha/--subject"),
            };
            commands::compose(fg, matte, bg, out, dry)
        }
        Command::DeriveMask {
            gt,
            over,
            subject,
            out,
            morph,
            gray_prob,
        } => {
            let meta = commands::derive_mask(
                gt,
                over,
                subject,
                &(*morph).into(),
                *gray_prob,
                cli.seed,
                out,
                dry,
            )?;
            println!("{}", serde_json::to_string(&meta)?);
            Ok(())
        }
        Command::BuildDataset {
            layer_root,
            manifest_out,
            morph,
            gray_prob,
            max_residual,
        } => {
            let opts = BuildOptions {
                params: (*morph).into(),
                max_mean_residual: *max_residual,
                gray_prob: *gray_prob,
                seed: cli.seed,
            };
            let stats = commands::build_dataset(layer_root, manifest_out, &opts, dry)?;
            println!("{}", serde_json::to_string(&stats)?);
            Ok(())
        }
        Command::Oracle { scene_spec, out } => {
            for dir in commands::oracle(scene_spec, out, dry)? {
                println!("{}", dir.display());
            }
            Ok(())
        }
        Command::Evaluate {
            gt,
            over,
            gen,
            report_out,
            provider,
            caption,
        } => {
            let report = commands::evaluate(
                gt,
                over,
                gen,
                provider.as_deref(),
                caption.as_deref(),
                report_out,
                dry,
            )?;
            println!(
                "{}",
                serde_json::json!({
                    "frames": report.frames_evaluated,
                    "ssim": report.ssim.mean,
                    "psnr": report.psnr.mean,
                    "clip_dir": report.clip_dir.mean,
                })
            );
            Ok(())
        }
        Command::PlanWindows {
            frames,
            window,
            stride,
        } => {
            println!(
                "{}",
                commands::plan_windows(*frames, *window, *stride)?.to_json()?
            );
            Ok(())
        }
        Command::Stats { manifest } => {
            let m = dataset::read_manifest(manifest)?;
            let root = manifest.parent().filter(|p| !p.as_os_str().is_empty());
            println!(
                "{}",
                serde_json::to_string(&dataset::dataset_stats(&m, root)?)?
            );
            Ok(())
        }
        Command::MockProvider { dim } => {
            let stdin = std::io::stdin().lock();
            let stdout = std::io::stdout().lock();
            serve_mock(stdin, stdout, *dim)
        }
    }
}

fn main() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    init_logging(&cli);
    match run(&cli) {
        Ok(()) => Ok(ExitCode::SUCCESS),
        Err(err) => {
            let code = commands::exit_code(&err);
            let record = serde_json::json!({
                "error": err.kind(),
                "message": err.to_string(),
                "exit_code": code,
            });
            let mut stderr = std::io::stderr().lock();
            writeln!(stderr, "{record}").context("writing error record")?;
            Ok(ExitCode::from(code as u8))
        }
    }
}
