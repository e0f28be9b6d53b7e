use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lanetune::commands::{
    clip_output_dirs, evaluate_files, format_eval, load_scene_spec, process_clip_files,
    write_synth_clip, ProcessOptions,
};
use lanetune::config::{config_to_toml, effective_config, parse_channel_spec, ConfigOverrides};
use lanetune::synth::SceneSpec;
use lanetune::Result;
use lanetune_core::eval::EvalParams;
use lanetune_core::pipeline::ChannelSpec;

/// Adaptive edge preprocessing for lane-detection frames.
#[derive(Parser)]
#[command(name = "lanetune", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enhance clips of PNG frames, writing frames, trace.jsonl and summary.json.
    Process(ProcessArgs),
    /// Score Tusimple-format predictions against ground truth.
    Eval(EvalArgs),
    /// Render a synthetic road clip with ground truth.
    Synth(SynthArgs),
    /// Print the effective pipeline config as TOML.
    DumpConfig(ConfigArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML pipeline config; omitted keys keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Canny high threshold for the first frame of each clip.
    #[arg(long)]
    initial_threshold: Option<f64>,
    /// Bilateral kernel side (odd).
    #[arg(long)]
    kernel_size: Option<usize>,
    #[arg(long)]
    sigma_spatial: Option<f64>,
    #[arg(long)]
    sigma_intensity: Option<f64>,
    /// Minimum Hough votes for a line.
    #[arg(long)]
    vote_threshold: Option<u32>,
    /// ROI apex position as fractions of width and height.
    #[arg(long, num_args = 2, value_names = ["X", "Y"])]
    roi_apex: Option<Vec<f64>>,
    /// Output plane sources, e.g. `edge,green,edge`.
    #[arg(long, value_parser = parse_channels)]
    channels: Option<ChannelSpec>,
    /// Allocate the ROI-masked edge map instead of the full one.
    #[arg(long)]
    allocate_masked: bool,
}

fn parse_channels(s: &str) -> std::result::Result<ChannelSpec, String> {
    parse_channel_spec(s).map_err(|e| e.to_string())
}

impl ConfigArgs {
    fn overrides(&self) -> ConfigOverrides {
        ConfigOverrides {
            initial_threshold: self.initial_threshold,
            kernel_size: self.kernel_size,
            sigma_spatial: self.sigma_spatial,
            sigma_intensity: self.sigma_intensity,
            vote_threshold: self.vote_threshold,
            roi_apex_x: self.roi_apex.as_ref().map(|v| v[0]),
            roi_apex_y: self.roi_apex.as_ref().map(|v| v[1]),
            channels: self.channels,
            allocate_masked_edges: self.allocate_masked.then_some(true),
        }
    }
}

#[derive(Args)]
struct ProcessArgs {
    /// Clips: directories of PNG frames (filename order) or list files of
    /// frame paths (file order).
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Output directory; with several clips each gets a subdirectory.
    #[arg(short, long)]
    out: PathBuf,
    /// Write zero stage times so traces are reproducible byte for byte.
    #[arg(long)]
    no_timings: bool,
    /// Print the effective config and exit.
    #[arg(long)]
    dump_config: bool,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct EvalArgs {
    /// Predicted lanes, one JSON record per line.
    pred: PathBuf,
    /// Ground-truth lanes, one JSON record per line.
    gt: PathBuf,
    /// Largest horizontal error, exclusive, for a correct point.
    #[arg(long, default_value_t = EvalParams::default().px_threshold)]
    px_threshold: f64,
    /// Point accuracy a matched lane needs to count as found.
    #[arg(long, default_value_t = EvalParams::default().match_threshold)]
    match_threshold: f64,
}

#[derive(Args)]
struct SynthArgs {
    /// TOML scene description; omitted keys keep their defaults.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Number of frames.
    #[arg(short = 'n', long, default_value_t = 20)]
    frames: usize,
    #[arg(short, long)]
    out: PathBuf,
    /// Overrides the scene's seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Process(args) => {
            let config = effective_config(args.config.config.as_deref(), &args.config.overrides())?;
            if args.dump_config {
                print!("{}", config_to_toml(&config));
                return Ok(());
            }
            let options = ProcessOptions {
                timings: !args.no_timings,
            };
            let dirs = clip_output_dirs(&args.inputs, &args.out)?;
            for (input, out) in args.inputs.iter().zip(&dirs) {
                let traces = process_clip_files(input, out, &config, options)?;
                eprintln!(
                    "{}: {} frames -> {}",
                    input.display(),
                    traces.len(),
                    out.display()
                );
            }
        }
        Command::Eval(args) => {
            let params = EvalParams {
                px_threshold: args.px_threshold,
                match_threshold: args.match_threshold,
            };
            let summary = evaluate_files(&args.pred, &args.gt, &params)?;
            println!("{}", format_eval(&summary));
        }
        Command::Synth(args) => {
            let mut spec = match &args.spec {
                Some(path) => load_scene_spec(path)?,
                None => SceneSpec::default(),
            };
            if let Some(seed) = args.seed {
                spec.seed = seed;
            }
            write_synth_clip(&spec, args.frames, &args.out)?;
        }
        Command::DumpConfig(args) => {
            let config = effective_config(args.config.as_deref(), &args.overrides())?;
            print!("{}", config_to_toml(&config));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
