//! Subcommands of the `signbot` binary.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for runtime or data
//! errors. Every file written goes through a temporary file and a rename.

use std::ffi::OsString;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::corpus::ParallelCorpus;
use crate::fsutil::write_atomic;
use crate::motion::{self, compile_plan, log_to_csv, simulate_execution, JointLimits, MotionLut};
use crate::rnn::OutputActivation;
use crate::seq2seq::{train, LossHistory, Seq2SeqModel, TrainingConfig};
use crate::skeleton3d::{
    self, calibrate_limbs, io as skio, lift_keypoints, reconstruct_stream, sensors, Limb, LimbCalibration,
    ReconstructionParams, SensorRequirements,
};
use crate::tokenizer::SPECIALS;
use crate::DATA_DIR_ENV;

type CliResult = Result<(), Box<dyn std::error::Error>>;

#[derive(Debug, Parser)]
#[command(name = "signbot", version, about = "Spanish text to LSE glosses to humanoid motion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train the translator and write a checkpoint plus loss history.
    Train(TrainArgs),
    /// Translate sentences into glosses, optionally compiling a motion plan.
    Translate(TranslateArgs),
    /// Score a checkpoint on a corpus.
    Eval(EvalArgs),
    /// Lift keypoint and depth streams to 3D skeletons.
    Reconstruct(ReconstructArgs),
    /// Compile glosses into a plan and write the simulated joint log.
    Plan(PlanArgs),
    /// Pick an RGB-D sensor from the registry.
    Sensors(SensorArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Parallel corpus (TSV); defaults to the shipped corpus.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Checkpoint to write.
    #[arg(long, default_value = "model.ckpt")]
    pub model: PathBuf,
    /// Loss history CSV; defaults to `<model>.loss.csv`.
    #[arg(long)]
    pub history: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-4)]
    pub lr: f64,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    /// RMSprop decay.
    #[arg(long, default_value_t = 0.9)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.2)]
    pub val_fraction: f64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 256)]
    pub hidden: usize,
    /// Global gradient-norm clip.
    #[arg(long, default_value_t = 5.0)]
    pub clip: f64,
    /// Feed source sentences to the encoder back to front.
    #[arg(long)]
    pub reverse_source: bool,
    /// Use `a = Γo ∗ tanh(c)` instead of `a = Γo ∗ c`.
    #[arg(long)]
    pub tanh_output: bool,
    /// Write `<PREFIX>.dat` and a gnuplot script `<PREFIX>.gp`.
    #[arg(long, value_name = "PREFIX")]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TranslateArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Sentence to translate; repeatable. Reads stdin lines when absent.
    #[arg(long)]
    pub text: Vec<String>,
    /// Compile the glosses into a plan and write its joint log (CSV) here.
    #[arg(long, value_name = "CSV")]
    pub plan: Option<PathBuf>,
    #[command(flatten)]
    pub motion: MotionArgs,
}

#[derive(Debug, Args)]
pub struct MotionArgs {
    /// Motion table; defaults to the demonstration table.
    #[arg(long)]
    pub lut: Option<PathBuf>,
    /// Joint limits; defaults to the shipped table.
    #[arg(long)]
    pub limits: Option<PathBuf>,
    /// Simulation sample rate in Hz.
    #[arg(long, default_value_t = 50.0)]
    pub rate: f64,
    /// Pause between signs in seconds.
    #[arg(long, default_value_t = motion::DEFAULT_INTER_SIGN_PAUSE)]
    pub pause: f64,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Print every pair with its prediction.
    #[arg(long)]
    pub table: bool,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    /// Keypoint stream (`frame_index part u v confidence`).
    #[arg(long)]
    pub keypoints: PathBuf,
    /// Directory of 16-bit PGM depth frames.
    #[arg(long)]
    pub depth: PathBuf,
    /// Limb calibration to use for occlusion recovery.
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    /// Skeleton output (`frame_index part x y z valid`).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Measure limb lengths from the frames and write them here instead of
    /// reconstructing.
    #[arg(long, value_name = "FILE")]
    pub calibrate: Option<PathBuf>,
    /// Calibrate legs as well as the upper body.
    #[arg(long)]
    pub all_limbs: bool,
    #[arg(long, default_value_t = 3)]
    pub dilation: u32,
    #[arg(long, default_value_t = 5)]
    pub median: usize,
    /// Occlusion pixel threshold.
    #[arg(long, default_value_t = 8.0)]
    pub threshold: f64,
    #[arg(long, default_value_t = 0.0)]
    pub min_confidence: f64,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// Whitespace-separated glosses.
    #[arg(long)]
    pub tokens: String,
    /// Joint log CSV to write.
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub motion: MotionArgs,
}

#[derive(Debug, Args)]
pub struct SensorArgs {
    #[arg(long)]
    pub registry: Option<PathBuf>,
    #[arg(long, default_value_t = 0.2)]
    pub min_range: f64,
    #[arg(long, default_value_t = 3.0)]
    pub max_range: f64,
    #[arg(long, default_value_t = 0)]
    pub min_depth_pixels: u64,
    #[arg(long)]
    pub allow_discontinued: bool,
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct UsageError(String);

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Train(a) => cmd_train(&a, out),
        Command::Translate(a) => cmd_translate(&a, out),
        Command::Eval(a) => cmd_eval(&a, out),
        Command::Reconstruct(a) => cmd_reconstruct(&a, out),
        Command::Plan(a) => cmd_plan(&a, out),
        Command::Sensors(a) => cmd_sensors(&a, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is::<UsageError>() {
                1
            } else {
                2
            }
        }
    }
}

fn data_file(name: &str) -> Option<PathBuf> {
    std::env::var_os(DATA_DIR_ENV).map(|d| Path::new(&d).join(name))
}

fn load_corpus(path: &Option<PathBuf>) -> Result<ParallelCorpus, Box<dyn std::error::Error>> {
    match path.clone().or_else(|| data_file("lse_corpus.tsv")) {
        Some(p) => Ok(ParallelCorpus::load(&p)?),
        None => Ok(ParallelCorpus::builtin()),
    }
}

fn load_motion(args: &MotionArgs) -> Result<MotionLut, Box<dyn std::error::Error>> {
    let limits = match args.limits.clone().or_else(|| data_file("joint_limits.txt")) {
        Some(p) => JointLimits::load(&p)?,
        None => JointLimits::default(),
    };
    match args.lut.clone().or_else(|| data_file("demo_lut.txt")) {
        Some(p) => Ok(MotionLut::load(&p, limits)?),
        None => Ok(MotionLut::parse(motion::DEMO_LUT, limits)?),
    }
}

fn write_file(path: &Path, text: &str) -> CliResult {
    write_atomic(path, text.as_bytes()).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(())
}

pub fn cmd_train(a: &TrainArgs, out: &mut dyn Write) -> CliResult {
    let config = TrainingConfig {
        learning_rate: a.lr,
        epochs: a.epochs,
        beta: a.beta,
        val_fraction: a.val_fraction,
        seed: a.seed,
        n_hidden: a.hidden,
        clip_norm: a.clip,
        reverse_source: a.reverse_source,
        output_activation: if a.tanh_output {
            OutputActivation::Tanh
        } else {
            OutputActivation::Identity
        },
        ..TrainingConfig::default()
    };
    config.validate().map_err(|e| UsageError(e.to_string()))?;
    let corpus = load_corpus(&a.corpus)?;
    let (model, history) = train(&corpus, &config)?;
    model.save(&a.model)?;
    let history_path = a.history.clone().unwrap_or_else(|| {
        let mut p = a.model.clone().into_os_string();
        p.push(".loss.csv");
        PathBuf::from(p)
    });
    write_file(&history_path, &history.to_csv())?;
    if let Some(prefix) = &a.plot {
        write_plot(prefix, &history)?;
    }
    let last = history.len() - 1;
    write!(
        out,
        "epochs {} final train loss {:.6}",
        history.len(),
        history.train[last]
    )?;
    match history.val[last] {
        Some(v) => writeln!(out, " val loss {v:.6}")?,
        None => writeln!(out, " (no validation split)")?,
    }
    writeln!(out, "model {} history {}", a.model.display(), history_path.display())?;
    Ok(())
}

fn write_plot(prefix: &Path, history: &LossHistory) -> CliResult {
    let with_ext = |ext: &str| {
        let mut p = prefix.as_os_str().to_owned();
        p.push(ext);
        PathBuf::from(p)
    };
    let (dat, script, png) = (with_ext(".dat"), with_ext(".gp"), with_ext(".png"));
    let mut data = String::from("# epoch train_loss val_loss\n");
    for (i, (t, v)) in history.train.iter().zip(&history.val).enumerate() {
        let v = v.map_or("NaN".to_string(), |v| v.to_string());
        data.push_str(&format!("{} {t} {v}\n", i + 1));
    }
    write_file(&dat, &data)?;
    let name = |p: &Path| {
        p.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default()
    };
    let gp = format!(
        "set terminal pngcairo size 800,500\nset output '{png}'\nset xlabel 'epoch'\nset ylabel 'loss'\nset key top right\n\
         plot '{dat}' using 1:2 with lines title 'train', '{dat}' using 1:3 with lines title 'validation'\n",
        png = name(&png),
        dat = name(&dat),
    );
    write_file(&script, &gp)
}

fn read_inputs(texts: &[String]) -> Result<Vec<String>, std::io::Error> {
    if !texts.is_empty() {
        return Ok(texts.to_vec());
    }
    std::io::stdin().lock().lines().collect()
}

pub fn cmd_translate(a: &TranslateArgs, out: &mut dyn Write) -> CliResult {
    let model = Seq2SeqModel::load(&a.model)?;
    let lut = a.plan.as_ref().map(|_| load_motion(&a.motion)).transpose()?;
    let mut all_glosses = Vec::new();
    for text in read_inputs(&a.text)? {
        if text.trim().is_empty() {
            continue;
        }
        let glosses = model.translate(&text)?;
        writeln!(out, "{}", glosses.join(" "))?;
        all_glosses.extend(glosses);
    }
    if let (Some(path), Some(lut)) = (&a.plan, &lut) {
        write_plan(&all_glosses, lut, &a.motion, path, out)?;
    }
    Ok(())
}

fn write_plan(tokens: &[String], lut: &MotionLut, m: &MotionArgs, path: &Path, out: &mut dyn Write) -> CliResult {
    // question and exclamation marks are carried by the face, not the arms
    let signs: Vec<&String> = tokens.iter().filter(|t| !SPECIALS.contains(&t.as_str())).collect();
    let plan = compile_plan(&signs, lut)?;
    let samples = simulate_execution(&plan, m.rate, m.pause)?;
    write_file(path, &log_to_csv(&samples))?;
    writeln!(
        out,
        "plan: {} signs, {:.3} s of motion, {:.3} s with pauses, {} samples -> {}",
        plan.len(),
        plan.duration(),
        plan.playback_duration(m.pause),
        samples.len(),
        path.display()
    )?;
    Ok(())
}

pub fn cmd_plan(a: &PlanArgs, out: &mut dyn Write) -> CliResult {
    let lut = load_motion(&a.motion)?;
    let tokens: Vec<String> = a.tokens.split_whitespace().map(str::to_string).collect();
    write_plan(&tokens, &lut, &a.motion, &a.output, out)
}

pub fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> CliResult {
    let model = Seq2SeqModel::load(&a.model)?;
    let corpus = load_corpus(&a.corpus)?;
    if a.table {
        writeln!(out, "Input\tExpected output\tPrediction")?;
        for pair in corpus.iter() {
            let pred = model.translate(pair.source())?;
            writeln!(
                out,
                "{}\t{}\t{}",
                pair.source(),
                pair.target().join(" "),
                pred.join(" ")
            )?;
        }
    }
    let m = model.evaluate(&corpus)?;
    writeln!(
        out,
        "pairs {} exact_match {:.4} token_accuracy {:.4}",
        corpus.len(),
        m.exact_match_rate,
        m.token_accuracy
    )?;
    Ok(())
}

pub fn cmd_reconstruct(a: &ReconstructArgs, out: &mut dyn Write) -> CliResult {
    if a.calibrate.is_none() && a.output.is_none() {
        return Err(UsageError("reconstruct needs --output or --calibrate".into()).into());
    }
    let keypoints = skio::load_keypoints(&a.keypoints)?;
    let (depth, k) = skio::load_depth_dir(&a.depth)?;
    if keypoints.len() != depth.len() {
        return Err(skeleton3d::SkeletonError::FrameMismatch {
            keypoints: keypoints.len(),
            depth: depth.len(),
        }
        .into());
    }
    let params = ReconstructionParams {
        dilation_radius: a.dilation,
        median_order: a.median,
        occlusion_threshold_px: a.threshold,
        min_confidence: a.min_confidence,
        ..ReconstructionParams::default()
    };
    let Some(k) = k else {
        writeln!(out, "frames 0")?;
        if let Some(path) = &a.output {
            skio::save_skeletons(path, &[])?;
        }
        return Ok(());
    };

    if let Some(path) = &a.calibrate {
        let frames: Vec<_> = keypoints
            .iter()
            .zip(&depth)
            .map(|(kps, img)| lift_keypoints(kps, &img.dilate(a.dilation), &k, &params))
            .collect();
        let limbs = if a.all_limbs {
            Limb::all()
        } else {
            Limb::UPPER_BODY.to_vec()
        };
        let calib = calibrate_limbs(&frames, &limbs)?;
        calib.save(path)?;
        writeln!(
            out,
            "calibrated {} limbs from {} frames -> {}",
            calib.len(),
            frames.len(),
            path.display()
        )?;
        return Ok(());
    }

    let calib = match &a.calibration {
        Some(p) => LimbCalibration::load(p)?,
        None => LimbCalibration::default(),
    };
    let (skeletons, summary) = reconstruct_stream(&keypoints, &depth, &k, &calib, &params)?;
    if let Some(path) = &a.output {
        skio::save_skeletons(path, &skeletons)?;
    }
    writeln!(
        out,
        "frames {} valid_points {} occlusion_groups {} resolved {} not_converged {} unresolved {}",
        summary.frames,
        summary.valid_points,
        summary.occlusion_groups,
        summary.resolved,
        summary.not_converged,
        summary.unresolved
    )?;
    Ok(())
}

pub fn cmd_sensors(a: &SensorArgs, out: &mut dyn Write) -> CliResult {
    let registry = match a.registry.clone().or_else(|| data_file("sensors.toml")) {
        Some(p) => sensors::load_registry(&p)?,
        None => sensors::default_registry(),
    };
    let req = SensorRequirements {
        min_range: a.min_range,
        max_range: a.max_range,
        min_depth_pixels: a.min_depth_pixels,
        allow_discontinued: a.allow_discontinued,
    };
    for s in &registry {
        let acc = s
            .depth_accuracy_mm
            .map_or("unspecified".to_string(), |v| format!("{v} mm"));
        writeln!(
            out,
            "{:<22} depth {}x{} accuracy {:<12} range {}-{} m{}{}",
            s.name,
            s.depth_resolution[0],
            s.depth_resolution[1],
            acc,
            s.depth_range_m[0],
            s.depth_range_m[1],
            if s.discontinued { " discontinued" } else { "" },
            if req.accepts(s) { "" } else { " (rejected)" },
        )?;
    }
    let pick = skeleton3d::select_sensor(&registry, &req)?;
    writeln!(out, "selected: {}", pick.name)?;
    Ok(())
}
