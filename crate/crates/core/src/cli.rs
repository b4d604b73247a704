//! Batch command-line front end.
//!
//! Subcommands mirror the processing stages and can be chained through files:
//!
//! ```text
//! usbeam simulate --preset cyst --seed 7 --out rf.uscd
//! usbeam augment rf.uscd --config run.json --seed 3 --out aug.uscd
//! usbeam beamform aug.uscd --method mv --out img.png
//! usbeam metrics img.png --reference ref.png --lesion rf.lesion.png --background rf.background.png
//! ```
//!
//! `pipeline` runs all four stages into one output directory.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::augment::{augment_pipeline_logged, PipelineConfig, StageRecord};
use crate::beamform::{self, MvParams, DEFAULT_DYNAMIC_RANGE_DB};
use crate::error::{Error, Result};
use crate::io;
use crate::quality::{
    cdcb_loss, contrast_metrics, feedback_loss, histogram_match, jbc_loss, ms_ssim, mse, ubb_loss,
    ContrastReport, LossParams, MsSsimParams,
};
use crate::simulate::{ground_truth_masks, make_phantom, synthesize_rf, Phantom, Preset, PulseSpec};
use crate::types::{Alignment, BModeImage, ChannelData, ProbeConfig, RegionMask};
use crate::Seed;

/// Parameter blocks shared by all subcommands. Every block is optional and
/// unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub probe: ProbeConfig,
    /// Defaults to a pulse centred on the probe frequency.
    pub pulse: Option<PulseSpec>,
    pub mv: MvParams,
    pub augment: PipelineConfig,
    pub ms_ssim: MsSsimParams,
    pub loss: LossParams,
    pub dynamic_range_db: f64,
    pub seed: Option<Seed>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            probe: ProbeConfig::default(),
            pulse: None,
            mv: MvParams::default(),
            augment: PipelineConfig::default(),
            ms_ssim: MsSsimParams::default(),
            loss: LossParams::default(),
            dynamic_range_db: DEFAULT_DYNAMIC_RANGE_DB,
            seed: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    fn pulse(&self) -> PulseSpec {
        self.pulse.unwrap_or_else(|| PulseSpec::for_probe(&self.probe))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Das,
    Mv,
}

#[derive(Debug, Parser)]
#[command(name = "usbeam", version, about = "Ultrasound channel-data simulation, augmentation, beamforming and metrics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize raw channel data for a phantom preset.
    Simulate {
        /// point, cyst or hypoechoic.
        #[arg(long, value_parser = parse_preset)]
        preset: Preset,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Form a B-mode image from channel data.
    Beamform {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "das")]
        method: Method,
        /// Log-compression range in dB; overrides the config.
        #[arg(long = "dynamic-range")]
        dynamic_range: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        /// Also write the aligned tensor next to the image as `<out>.tof.uscd`.
        #[arg(long = "save-tof")]
        save_tof: bool,
        /// Require time-of-flight correction; fails on already aligned input.
        #[arg(long)]
        tof: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Apply the seeded augmentation pipeline.
    Augment {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Contrast metrics, one JSON line per image.
    Metrics {
        #[arg(required = true)]
        images: Vec<PathBuf>,
        /// Image whose histogram the inputs are matched to.
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Lesion mask PNG.
        #[arg(long)]
        lesion: PathBuf,
        /// Background mask PNG.
        #[arg(long)]
        background: PathBuf,
        /// Beamformer label recorded in the report.
        #[arg(long, value_enum)]
        method: Option<Method>,
        /// Skip histogram matching to the reference image.
        #[arg(long = "no-match")]
        no_match: bool,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Image-similarity and task losses between a prediction and a target.
    Loss {
        prediction: PathBuf,
        target: PathBuf,
        /// JSON with `label`, `yhat`, `target` and optional `bottleneck` logits.
        #[arg(long)]
        logits: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// simulate, augment, beamform and metrics into one directory.
    Pipeline {
        /// point, cyst or hypoechoic.
        #[arg(long, value_parser = parse_preset)]
        preset: Preset,
        #[arg(long, value_enum, default_value = "das")]
        method: Method,
        /// Log-compression range in dB; overrides the config.
        #[arg(long = "dynamic-range")]
        dynamic_range: Option<f64>,
        /// Skip histogram matching to the reference image.
        #[arg(long = "no-match")]
        no_match: bool,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_preset(s: &str) -> std::result::Result<Preset, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Logits consumed by `loss --logits`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogitsInput {
    pub label: usize,
    pub yhat: Vec<f64>,
    pub target: Vec<f64>,
    #[serde(default)]
    pub bottleneck: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub mse: f64,
    pub ms_ssim: f64,
    pub ms_ssim_loss: f64,
    pub ubb_loss: f64,
    pub lambda: f64,
    pub gamma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feedback_loss: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jbc_loss: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cdcb_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub frame_id: usize,
    pub method: Option<Method>,
    #[serde(flatten)]
    pub report: ContrastReport,
}

impl Common {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = Some(Seed(seed));
        }
        Ok(cfg)
    }
}

/// `rf.uscd` + `lesion` → `rf.lesion.png`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_stem().unwrap_or_default().to_os_string();
    name.push(".");
    name.push(suffix);
    path.with_file_name(name)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_text(path, text),
        None => {
            print!("{text}");
            std::io::stdout().flush().map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn simulate(preset: Preset, cfg: &RunConfig) -> Result<(Phantom, ChannelData)> {
    cfg.probe.validate()?;
    let phantom = make_phantom(preset, cfg.seed.unwrap_or_default(), &cfg.probe);
    let rf = synthesize_rf(&phantom, &cfg.probe, &cfg.pulse())?;
    Ok((phantom, rf))
}

fn phantom_summary(phantom: &Phantom) -> String {
    let mut s = format!("scatterers: {}\n", phantom.scatterers.len());
    for l in &phantom.lesions {
        s.push_str(&format!(
            "lesion: {:?} centre ({:.4} m, {:.4} m) radii ({:.4} m, {:.4} m) scale {}\n",
            l.kind, l.center_x, l.center_z, l.radius_x, l.radius_z, l.amplitude_scale
        ));
    }
    s
}

fn write_masks(mask: &RegionMask, stem: &Path) -> Result<(PathBuf, PathBuf)> {
    let lesion = sibling(stem, "lesion.png");
    let background = sibling(stem, "background.png");
    io::write_mask(mask.lesion(), &lesion)?;
    io::write_mask(mask.background(), &background)?;
    Ok((lesion, background))
}

fn beamform_image(
    cd: &ChannelData,
    method: Method,
    dr: f64,
    force_tof: bool,
    cfg: &RunConfig,
) -> Result<(BModeImage, ChannelData)> {
    let aligned = match cd.alignment() {
        Alignment::Raw => beamform::tof_correct(cd)?,
        Alignment::TofCorrected if force_tof => {
            return Err(Error::Alignment {
                expected: Alignment::Raw,
                got: Alignment::TofCorrected,
            })
        }
        Alignment::TofCorrected => cd.clone(),
    };
    let pre = match method {
        Method::Das => beamform::das(&aligned)?,
        Method::Mv => beamform::mv(&aligned, &cfg.mv)?,
    };
    Ok((beamform::image(&pre, dr)?, aligned))
}

fn metrics_record(
    frame_id: usize,
    img: &BModeImage,
    reference: Option<&BModeImage>,
    mask: &RegionMask,
    method: Option<Method>,
) -> Result<MetricRecord> {
    let matched;
    let img = match reference {
        Some(r) => {
            matched = histogram_match(img, r)?;
            &matched
        }
        None => img,
    };
    Ok(MetricRecord {
        frame_id,
        method,
        report: contrast_metrics(img, mask)?,
    })
}

fn stage_log(log: &[StageRecord]) -> String {
    log.iter()
        .map(|r| {
            let name = serde_json::to_value(r.stage)
                .ok()
                .and_then(|v| v.as_str().map(str::to_owned))
                .unwrap_or_default();
            format!("{name}: {}\n", if r.fired { "fired" } else { "skipped" })
        })
        .collect()
}

fn augment(cd: &ChannelData, cfg: &RunConfig) -> Result<(ChannelData, Vec<StageRecord>)> {
    let mut pc = cfg.augment.clone();
    if let Some(seed) = cfg.seed {
        pc.seed = seed;
    }
    augment_pipeline_logged(cd, &pc)
}

fn json_line<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string(v).expect("report serialization");
    s.push('\n');
    s
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { preset, out, common } => {
            let cfg = common.config()?;
            let (phantom, rf) = simulate(preset, &cfg)?;
            io::write_channel_data(&rf, &out)?;
            print!("{}", phantom_summary(&phantom));
            if !phantom.lesions.is_empty() {
                let (l, b) = write_masks(&ground_truth_masks(&phantom, rf.probe())?, &out)?;
                println!("masks: {} {}", l.display(), b.display());
            }
            Ok(())
        }
        Command::Beamform {
            input,
            method,
            dynamic_range,
            out,
            save_tof,
            tof,
            common,
        } => {
            let cfg = common.config()?;
            let cd = io::read_channel_data(&input)?;
            let dr = dynamic_range.unwrap_or(cfg.dynamic_range_db);
            let (img, aligned) = beamform_image(&cd, method, dr, tof, &cfg)?;
            io::write_image(&img, &out)?;
            if save_tof {
                io::write_channel_data(&aligned, sibling(&out, "tof.uscd"))?;
            }
            Ok(())
        }
        Command::Augment { input, out, common } => {
            let cfg = common.config()?;
            let cd = io::read_channel_data(&input)?;
            let (aug, log) = augment(&cd, &cfg)?;
            io::write_channel_data(&aug, &out)?;
            print!("{}", stage_log(&log));
            Ok(())
        }
        Command::Metrics {
            images,
            reference,
            lesion,
            background,
            method,
            no_match,
            out,
            common,
        } => {
            common.config()?;
            let mask = RegionMask::new(io::read_mask(&lesion)?, io::read_mask(&background)?)?;
            let reference = match (no_match, reference) {
                (true, _) => None,
                (false, Some(path)) => Some(io::read_image(&path)?),
                (false, None) => {
                    return Err(Error::param("--reference is required unless --no-match is given"))
                }
            };
            let mut report = String::new();
            for (frame_id, path) in images.iter().enumerate() {
                let img = io::read_image(path)?;
                report.push_str(&json_line(&metrics_record(
                    frame_id,
                    &img,
                    reference.as_ref(),
                    &mask,
                    method,
                )?));
            }
            emit(out.as_deref(), &report)
        }
        Command::Loss {
            prediction,
            target,
            logits,
            out,
            common,
        } => {
            let cfg = common.config()?;
            let yhat = io::read_gray(&prediction)?;
            let y = io::read_gray(&target)?;
            let (lp, mp) = (&cfg.loss, &cfg.ms_ssim);
            let s = ms_ssim(yhat.view(), y.view(), mp)?;
            let mut report = LossReport {
                mse: mse(yhat.view(), y.view())?,
                ms_ssim: s,
                ms_ssim_loss: 1.0 - s,
                ubb_loss: ubb_loss(yhat.view(), y.view(), lp, mp)?,
                lambda: lp.lambda,
                gamma: lp.gamma,
                feedback_loss: None,
                jbc_loss: None,
                cdcb_loss: None,
            };
            if let Some(path) = logits {
                let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                let li: LogitsInput = serde_json::from_str(&text).map_err(|e| Error::Config {
                    path: path.clone(),
                    message: e.to_string(),
                })?;
                report.feedback_loss = Some(feedback_loss(&li.yhat, &li.target, li.label)?);
                report.jbc_loss = Some(jbc_loss(yhat.view(), y.view(), &li.yhat, &li.target, li.label, lp, mp)?);
                if let Some(b) = &li.bottleneck {
                    report.cdcb_loss = Some(cdcb_loss(yhat.view(), y.view(), b, li.label, lp, mp)?);
                }
            }
            emit(out.as_deref(), &json_line(&report))
        }
        Command::Pipeline {
            preset,
            method,
            dynamic_range,
            no_match,
            out,
            common,
        } => {
            let cfg = common.config()?;
            let dr = dynamic_range.unwrap_or(cfg.dynamic_range_db);
            fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
            let (phantom, rf) = simulate(preset, &cfg)?;
            io::write_channel_data(&rf, out.join("channel.uscd"))?;
            print!("{}", phantom_summary(&phantom));

            let (aug, log) = augment(&rf, &cfg)?;
            io::write_channel_data(&aug, out.join("augmented.uscd"))?;
            print!("{}", stage_log(&log));

            let (img, _) = beamform_image(&aug, method, dr, false, &cfg)?;
            io::write_image(&img, out.join("image.png"))?;
            let reference = if no_match {
                None
            } else {
                let (clean, _) = beamform_image(&rf, method, dr, false, &cfg)?;
                io::write_image(&clean, out.join("reference.png"))?;
                Some(clean)
            };

            if phantom.lesions.is_empty() {
                println!("metrics: skipped (phantom has no lesion)");
                return Ok(());
            }
            let mask = ground_truth_masks(&phantom, rf.probe())?;
            write_masks(&mask, &out.join("mask"))?;
            let record = metrics_record(0, &img, reference.as_ref(), &mask, Some(method))?;
            let line = json_line(&record);
            write_text(&out.join("metrics.jsonl"), &line)?;
            print!("{line}");
            Ok(())
        }
    }
}

/// Usage line of the subcommand named in `args`, or of the root command.
fn usage_for(args: &[String]) -> String {
    let mut cmd = Cli::command();
    cmd.build();
    let sub = args.get(1).and_then(|name| cmd.find_subcommand(name).cloned());
    match sub {
        Some(mut sub) => sub.render_usage().to_string(),
        None => cmd.render_usage().to_string(),
    }
}

/// Parses the process arguments, runs the command and maps failures to a
/// nonzero exit code.
pub fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let rendered = e.render().to_string();
            eprint!("{rendered}");
            if !rendered.contains("Usage:") {
                eprintln!("\n{}", usage_for(&args));
            }
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
