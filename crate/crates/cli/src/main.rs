//! vprep: adaptive-DCT preprocessing math and codec RD evaluation from
//! the command line.
//!
//! Exit codes: 0 success, 1 environment/I/O problems, 2 usage or
//! contract violations (clap argument errors also exit 2).

mod config;
mod io_util;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vprep::dct::{self, DctConfig, Normalization, ThresholdDivisor};
use vprep::degrade::{self, DegradationRecipe};
use vprep::error::Error;
use vprep::frame::to_luma_with;
use vprep::metrics::{self, PlaneMode};
use vprep::rd::{self, BdInterpolation, BlendConfig, EncoderProfile, MetricKind, Preprocessor};
use vprep::vmaf::VmafScorer;

use config::FileConfig;
use io_util::{load_frames, save_frames, InputKind};

#[derive(Parser)]
#[command(
    name = "vprep",
    version,
    about = "Adaptive-DCT preprocessing, degradation simulation, quality metrics, \
             and an external-encoder RD harness",
    after_help = "Environment: VPREP_ENCODER_PATH adds directories to the encoder \
                  search path; VPREP_VMAF configures the external VMAF scorer.\n\
                  Values from --config override the corresponding flags."
)]
struct Cli {
    /// Worker threads for frame-parallel work (0 = all cores)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Seed for seeded operations (degradation sampling)
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// TOML config file; its values override flags
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Verbose diagnostics on stderr (and per-item detail on stdout)
    #[arg(short, long, global = true, default_value_t = false)]
    verbose: bool,
    /// Machine-readable JSON on stdout instead of text
    #[arg(long, global = true, default_value_t = false)]
    json: bool,
    /// Use BT.601 luma weights for RGB inputs (default BT.709)
    #[arg(long, global = true, default_value_t = false)]
    bt601: bool,
    #[command(subcommand)]
    command: Command,
}

impl Cli {
    fn luma_weights(&self) -> vprep::LumaWeights {
        if self.bt601 {
            vprep::LumaWeights::Bt601
        } else {
            vprep::LumaWeights::Bt709
        }
    }
}

#[derive(Args, Clone)]
struct DctArgs {
    /// Comma-separated block sizes, each from {4,8,16,32}
    #[arg(long, default_value = "8,16", value_delimiter = ',')]
    block_sizes: Vec<usize>,
    /// Diagonal threshold S (default: S = N per block size)
    #[arg(long)]
    s: Option<usize>,
    /// Transform normalization
    #[arg(long, default_value = "orthonormal", value_parser = ["orthonormal", "paper-raw"])]
    normalization: String,
    /// Threshold divisor: the full block area or the masked count
    #[arg(long, default_value = "full-block", value_parser = ["full-block", "masked-count"])]
    divisor: String,
    /// Frame loss reduction over blocks
    #[arg(long, default_value = "mean", value_parser = ["mean", "sum"])]
    reduction: String,
}

impl DctArgs {
    fn configs(&self) -> Result<Vec<DctConfig>, Error> {
        let normalization = match self.normalization.as_str() {
            "paper-raw" => Normalization::PaperRaw,
            _ => Normalization::Orthonormal,
        };
        let divisor = match self.divisor.as_str() {
            "masked-count" => ThresholdDivisor::MaskedCount,
            _ => ThresholdDivisor::FullBlock,
        };
        let reduction = match self.reduction.as_str() {
            "sum" => dct::BlockReduction::Sum,
            _ => dct::BlockReduction::Mean,
        };
        if self.block_sizes.is_empty() {
            return Err(Error::Config("at least one block size required".into()));
        }
        self.block_sizes
            .iter()
            .map(|&n| {
                DctConfig::new(n, self.s.unwrap_or(n)).map(|c| {
                    c.normalization(normalization)
                        .threshold_divisor(divisor)
                        .block_reduction(reduction)
                })
            })
            .collect()
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute the adaptive DCT loss of an image or video
    DctLoss {
        /// Input file (.png or .y4m)
        input: PathBuf,
        #[command(flatten)]
        dct: DctArgs,
    },
    /// Apply the adaptive DCT filter with an alpha blend
    Filter {
        /// Input file (.png or .y4m)
        input: PathBuf,
        /// Output file (same container as input)
        output: PathBuf,
        /// Fraction of each selected coefficient to remove, between 0 and 1
        #[arg(long, default_value_t = 1.0)]
        strength: f64,
        /// Blend of filtered output with the input, between 0 and 1
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[command(flatten)]
        dct: DctArgs,
    },
    /// Run the seeded degradation pipeline over a still image
    Degrade {
        /// Input PNG (converted to luma; the pipeline is luma-only)
        input: PathBuf,
        /// Output PNG (grayscale)
        output: PathBuf,
        /// Replay a recipe file instead of sampling from --seed
        #[arg(long)]
        recipe: Option<PathBuf>,
        /// Write the recipe that was applied
        #[arg(long)]
        recipe_out: Option<PathBuf>,
    },
    /// Score a distorted file against a reference
    Metric {
        reference: PathBuf,
        distorted: PathBuf,
        /// Comma-separated metrics from {psnr, ssim, msssim, vmaf}
        #[arg(long, default_value = "psnr,ssim,msssim", value_delimiter = ',')]
        metrics: Vec<String>,
        /// Score all planes (6:1:1 for YUV) instead of luma only
        #[arg(long, default_value_t = false)]
        all_planes: bool,
    },
    /// Sweep an encoder profile over its QP list and emit an RD report
    Sweep {
        /// Input video (.y4m)
        input: PathBuf,
        /// Builtin profile name (x264, x265, openh264) or a profile TOML path
        #[arg(long)]
        profile: String,
        /// Directory for bitstreams, reconstructions, and report.csv
        #[arg(long)]
        out_dir: PathBuf,
        /// Preprocess with the adaptive DCT filter + alpha blend
        #[arg(long, default_value_t = false)]
        preprocess: bool,
        /// Filter strength when preprocessing
        #[arg(long, default_value_t = 1.0)]
        strength: f64,
        /// Blend alpha when preprocessing
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// Score all planes instead of luma only
        #[arg(long, default_value_t = false)]
        all_planes: bool,
        #[command(flatten)]
        dct: DctArgs,
    },
    /// BD-rate of a test RD curve against a baseline (CSV reports)
    Bdrate {
        baseline: PathBuf,
        test: PathBuf,
        /// Quality metric to integrate over
        #[arg(long, default_value = "msssim")]
        metric: String,
        /// Interpolation of log-rate over quality
        #[arg(long, default_value = "pchip", value_parser = ["pchip", "cubic"])]
        interp: String,
        /// Curve label to select when the baseline CSV has several curves
        #[arg(long)]
        baseline_label: Option<String>,
        /// Curve label to select when the test CSV has several curves
        #[arg(long)]
        test_label: Option<String>,
    },
    /// Render RD curves from CSV reports as an SVG plot
    Plot {
        /// One or more report CSV files
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        /// Metric on the quality axis
        #[arg(long, default_value = "msssim")]
        metric: String,
        /// Output SVG path
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            if err.is_environment() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    if cli.threads > 0 {
        // Best effort; a second init in the same process is harmless.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    let file_config = match &cli.config {
        Some(path) => Some(FileConfig::load(path)?),
        None => None,
    };
    if let Some(cfg) = &file_config {
        cfg.apply_environment();
    }

    match &cli.command {
        Command::DctLoss { input, dct } => cmd_dct_loss(&cli, file_config.as_ref(), input, dct),
        Command::Filter {
            input,
            output,
            strength,
            alpha,
            dct,
        } => cmd_filter(
            &cli,
            file_config.as_ref(),
            input,
            output,
            *strength,
            *alpha,
            dct,
        ),
        Command::Degrade {
            input,
            output,
            recipe,
            recipe_out,
        } => cmd_degrade(
            &cli,
            file_config.as_ref(),
            input,
            output,
            recipe.as_deref(),
            recipe_out.as_deref(),
        ),
        Command::Metric {
            reference,
            distorted,
            metrics,
            all_planes,
        } => cmd_metric(
            &cli,
            file_config.as_ref(),
            reference,
            distorted,
            metrics,
            *all_planes,
        ),
        Command::Sweep {
            input,
            profile,
            out_dir,
            preprocess,
            strength,
            alpha,
            all_planes,
            dct,
        } => cmd_sweep(
            &cli,
            file_config.as_ref(),
            input,
            profile,
            out_dir,
            *preprocess,
            *strength,
            *alpha,
            *all_planes,
            dct,
        ),
        Command::Bdrate {
            baseline,
            test,
            metric,
            interp,
            baseline_label,
            test_label,
        } => cmd_bdrate(
            &cli,
            baseline,
            test,
            metric,
            interp,
            baseline_label.as_deref(),
            test_label.as_deref(),
        ),
        Command::Plot {
            reports,
            metric,
            out,
        } => cmd_plot(reports, metric, out),
    }
}

fn effective_dct_configs(
    file_config: Option<&FileConfig>,
    args: &DctArgs,
) -> Result<Vec<DctConfig>, Error> {
    match file_config.and_then(|c| c.dct.as_ref()) {
        Some(overrides) => overrides.to_configs(),
        None => args.configs(),
    }
}

fn cmd_dct_loss(
    cli: &Cli,
    file_config: Option<&FileConfig>,
    input: &Path,
    dct_args: &DctArgs,
) -> Result<(), Error> {
    let configs = effective_dct_configs(file_config, dct_args)?;
    let frames = load_frames(input)?;
    let weights = cli.luma_weights();
    let mut per_frame = Vec::with_capacity(frames.frames.len());
    for frame in &frames.frames {
        let luma = to_luma_with(frame, weights);
        per_frame.push(dct::adaptive_dct_loss_multi(&luma, &configs)?);
    }
    let loss = per_frame.iter().sum::<f64>() / per_frame.len() as f64;

    let mut per_scale = Vec::new();
    for cfg in &configs {
        let mut acc = 0.0;
        for frame in &frames.frames {
            acc += dct::adaptive_dct_loss(&to_luma_with(frame, weights), cfg)?;
        }
        per_scale.push((
            cfg.block_size(),
            cfg.diagonal_threshold(),
            acc / per_frame.len() as f64,
        ));
    }

    if cli.json {
        let scales: Vec<serde_json::Value> = per_scale
            .iter()
            .map(|&(n, s, l)| serde_json::json!({"n": n, "s": s, "loss": l}))
            .collect();
        println!(
            "{}",
            serde_json::json!({"loss": loss, "frames": per_frame.len(), "per_scale": scales})
        );
    } else {
        println!("loss: {loss:.9}");
        for &(n, s, l) in &per_scale {
            println!("  n={n} s={s}: {l:.9}");
        }
        if cli.verbose {
            if frames.frames.len() > 1 {
                for (i, l) in per_frame.iter().enumerate() {
                    println!("  frame {i}: {l:.9}");
                }
            } else {
                let luma = to_luma_with(&frames.frames[0], weights);
                for cfg in &configs {
                    let report = dct::adaptive_dct_loss_report(&luma, cfg)?;
                    for b in &report.blocks {
                        println!(
                            "  n={} block ({},{}): T={:.9} selected={} loss={:.9}",
                            cfg.block_size(),
                            b.block_row,
                            b.block_col,
                            b.threshold,
                            b.selected.len(),
                            b.block_loss
                        );
                    }
                }
            }
        }
    }
    Ok(())
}

fn cmd_filter(
    cli: &Cli,
    file_config: Option<&FileConfig>,
    input: &Path,
    output: &Path,
    strength: f64,
    alpha: f64,
    dct_args: &DctArgs,
) -> Result<(), Error> {
    let configs = effective_dct_configs(file_config, dct_args)?;
    let blend = BlendConfig::new(alpha)?;
    let mut frames = load_frames(input)?;
    for frame in &mut frames.frames {
        let filtered = dct::adaptive_dct_filter_frame(frame, &configs, strength)?;
        *frame = rd::alpha_blend(&filtered, frame, &blend)?;
    }
    save_frames(&frames, output)?;
    if cli.json {
        println!(
            "{}",
            serde_json::json!({
                "output": output.display().to_string(),
                "frames": frames.frames.len(),
                "strength": strength,
                "alpha": alpha,
            })
        );
    } else if cli.verbose {
        eprintln!(
            "filtered {} frame(s) -> {}",
            frames.frames.len(),
            output.display()
        );
    }
    Ok(())
}

fn cmd_degrade(
    cli: &Cli,
    file_config: Option<&FileConfig>,
    input: &Path,
    output: &Path,
    recipe_path: Option<&std::path::Path>,
    recipe_out: Option<&std::path::Path>,
) -> Result<(), Error> {
    let frames = load_frames(input)?;
    if frames.kind != InputKind::Png {
        return Err(Error::Contract(
            "degrade operates on still images (PNG)".into(),
        ));
    }
    let luma = to_luma_with(&frames.frames[0], cli.luma_weights());
    let recipe = match recipe_path {
        Some(path) => DegradationRecipe::load(path)?,
        None => {
            let ranges = file_config
                .and_then(|c| c.degrade.clone())
                .unwrap_or_default();
            degrade::sample_recipe(cli.seed, &ranges)?
        }
    };
    let degraded = degrade::apply_recipe(&luma, &recipe)?;
    vprep::png_io::write_png(&degraded, output)?;
    if let Some(path) = recipe_out {
        recipe.save(path)?;
    }
    if cli.json {
        println!(
            "{}",
            serde_json::json!({
                "output": output.display().to_string(),
                "seed": recipe.seed,
                "orders": recipe.orders.len(),
                "stages": recipe.orders.iter().map(|o| o.stages.len()).sum::<usize>(),
            })
        );
    } else if cli.verbose {
        eprintln!(
            "applied {} stage(s) across {} order(s), seed {}",
            recipe.orders.iter().map(|o| o.stages.len()).sum::<usize>(),
            recipe.orders.len(),
            recipe.seed
        );
    }
    Ok(())
}

fn cmd_metric(
    cli: &Cli,
    file_config: Option<&FileConfig>,
    reference: &Path,
    distorted: &Path,
    requested: &[String],
    all_planes: bool,
) -> Result<(), Error> {
    let kinds: Vec<MetricKind> = requested
        .iter()
        .map(|name| MetricKind::parse(name))
        .collect::<Result<_, _>>()?;
    let refs = load_frames(reference)?;
    let dists = load_frames(distorted)?;
    if refs.frames.len() != dists.frames.len() {
        return Err(Error::Contract(format!(
            "frame counts differ: {} vs {}",
            refs.frames.len(),
            dists.frames.len()
        )));
    }
    let mode = if all_planes {
        PlaneMode::All
    } else {
        PlaneMode::Luma
    };
    let weights = cli.luma_weights();
    let convert = |f: &vprep::Frame| -> vprep::Frame {
        if mode == PlaneMode::Luma && f.format() == vprep::PixelFormat::Rgb {
            to_luma_with(f, weights)
        } else {
            f.clone()
        }
    };
    let mut reports = Vec::new();
    for (a, b) in refs.frames.iter().zip(&dists.frames) {
        reports.push(metrics::metric_report(&convert(a), &convert(b), mode)?);
    }
    let n = reports.len() as f64;
    let mut pooled = metrics::MetricReport {
        psnr: reports.iter().map(|r| r.psnr).sum::<f64>() / n,
        ssim: mean_opt(&reports, |r| r.ssim),
        ms_ssim: mean_opt(&reports, |r| r.ms_ssim),
        vmaf: None,
    };

    if kinds.contains(&MetricKind::Vmaf) {
        let scorer = file_config
            .and_then(|c| c.vmaf_scorer())
            .or_else(VmafScorer::from_env);
        match (scorer, refs.kind) {
            (Some(scorer), InputKind::Y4m) => {
                let parent = reference
                    .parent()
                    .filter(|p| !p.as_os_str().is_empty())
                    .unwrap_or_else(|| Path::new("."));
                let workdir = tempfile::tempdir_in(parent).map_err(|e| Error::io(reference, e))?;
                pooled.vmaf = Some(scorer.score_files(reference, distorted, workdir.path())?);
            }
            (Some(_), _) => {
                eprintln!("warning: vmaf scoring needs y4m inputs; column omitted");
            }
            (None, _) => {
                eprintln!(
                    "warning: no VMAF scorer configured (set {} or [vmaf] in --config); column omitted",
                    vprep::vmaf::VMAF_ENV
                );
            }
        }
    }

    if cli.json {
        let mut obj = serde_json::Map::new();
        for kind in &kinds {
            let value = kind.extract(&pooled);
            obj.insert(
                kind.name().to_string(),
                match value {
                    Some(v) if v.is_finite() => serde_json::json!(v),
                    // JSON has no Infinity; identical inputs report null.
                    _ => serde_json::Value::Null,
                },
            );
        }
        println!("{}", serde_json::Value::Object(obj));
    } else {
        for kind in &kinds {
            match kind.extract(&pooled) {
                Some(v) => println!("{}: {v:.6}", kind.name()),
                None => println!("{}: n/a", kind.name()),
            }
        }
    }
    Ok(())
}

fn mean_opt(
    reports: &[metrics::MetricReport],
    get: fn(&metrics::MetricReport) -> Option<f64>,
) -> Option<f64> {
    let values: Vec<f64> = reports.iter().filter_map(get).collect();
    (values.len() == reports.len() && !values.is_empty())
        .then(|| values.iter().sum::<f64>() / values.len() as f64)
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    cli: &Cli,
    file_config: Option<&FileConfig>,
    input: &Path,
    profile_name: &str,
    out_dir: &Path,
    preprocess: bool,
    strength: f64,
    alpha: f64,
    all_planes: bool,
    dct_args: &DctArgs,
) -> Result<(), Error> {
    let profile = EncoderProfile::resolve(profile_name)?;
    let seq = vprep::y4m::read_y4m(input)?;
    let preprocessor = if preprocess {
        Some(Preprocessor {
            dct_configs: effective_dct_configs(file_config, dct_args)?,
            strength,
            blend: BlendConfig::new(alpha)?,
        })
    } else {
        None
    };
    let options = rd::SweepOptions {
        vmaf: file_config
            .and_then(|c| c.vmaf_scorer())
            .or_else(VmafScorer::from_env),
        all_planes,
    };
    let curve = rd::sweep(&seq, &profile, preprocessor.as_ref(), out_dir, &options)?;
    let report_path = out_dir.join("report.csv");
    rd::write_csv(std::slice::from_ref(&curve), &report_path)?;

    if cli.json {
        println!(
            "{}",
            serde_json::json!({
                "report": report_path.display().to_string(),
                "curve": curve,
            })
        );
    } else {
        println!(
            "sequence {} codec {} preset {} label {}",
            curve.sequence, curve.codec, curve.preset, curve.label
        );
        for p in &curve.points {
            let fmt_opt = |v: Option<f64>| match v {
                Some(v) => format!("{v:.6}"),
                None => "n/a".into(),
            };
            println!(
                "qp {:>3}  {:>12.3} kbps  psnr {:>8.3}  ssim {}  msssim {}  vmaf {}",
                p.qp,
                p.bitrate_kbps,
                p.metrics.psnr,
                fmt_opt(p.metrics.ssim),
                fmt_opt(p.metrics.ms_ssim),
                fmt_opt(p.metrics.vmaf),
            );
        }
        println!("report: {}", report_path.display());
    }
    Ok(())
}

fn cmd_bdrate(
    cli: &Cli,
    baseline: &Path,
    test: &Path,
    metric: &str,
    interp: &str,
    baseline_label: Option<&str>,
    test_label: Option<&str>,
) -> Result<(), Error> {
    let metric = MetricKind::parse(metric)?;
    let interp = BdInterpolation::parse(interp)?;
    let pick = |path: &Path, label: Option<&str>| -> Result<rd::RdCurve, Error> {
        let curves = rd::read_csv(path)?;
        match label {
            Some(label) => curves
                .into_iter()
                .find(|c| c.label == label)
                .ok_or_else(|| {
                    Error::Config(format!("{}: no curve labeled {label:?}", path.display()))
                }),
            None => {
                if curves.len() == 1 {
                    Ok(curves.into_iter().next().unwrap())
                } else {
                    Err(Error::Config(format!(
                        "{}: {} curves present; select one with --baseline-label/--test-label",
                        path.display(),
                        curves.len()
                    )))
                }
            }
        }
    };
    let base = pick(baseline, baseline_label)?;
    let tst = pick(test, test_label)?;
    let result = rd::bd_rate(&base, &tst, metric, interp)?;
    if cli.json {
        println!("{}", serde_json::json!(result));
    } else {
        println!("{:+.4}", result.percent);
        if cli.verbose {
            eprintln!(
                "metric {} overlap [{:.6}, {:.6}]",
                result.metric.name(),
                result.overlap.0,
                result.overlap.1
            );
        }
    }
    Ok(())
}

fn cmd_plot(reports: &[PathBuf], metric: &str, out: &Path) -> Result<(), Error> {
    let metric = MetricKind::parse(metric)?;
    let mut curves = Vec::new();
    for path in reports {
        curves.extend(rd::read_csv(path)?);
    }
    rd::emit_plot(&curves, metric, out)?;
    println!("plot: {}", out.display());
    Ok(())
}
