//! The work behind each subcommand.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use lanetune_core::eval::{evaluate_clip, EvalParams, EvalSummary};
use lanetune_core::pipeline::{ClipProcessor, Clock, FrameTrace, PipelineConfig};

use crate::error::{Error, Result};
use crate::frames::{clip_frames, output_name, read_frame, write_frame};
use crate::lanes::{read_lane_records, write_lane_records};
use crate::synth::{generate_clip, SceneSpec};
use crate::trace::{format_summary, format_traces};

pub const TRACE_FILE: &str = "trace.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProcessOptions {
    /// Record wall-clock stage times in the trace. Without them the trace
    /// depends only on the frames and the config.
    pub timings: bool,
}

impl Default for ProcessOptions {
    fn default() -> Self {
        Self { timings: true }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Processes one clip from a fresh tuner state, writing the output frames,
/// `trace.jsonl` and `summary.json` into `out_dir`.
pub fn process_clip_files(
    input: &Path,
    out_dir: &Path,
    config: &PipelineConfig,
    options: ProcessOptions,
) -> Result<Vec<FrameTrace>> {
    let frames = clip_frames(input)?;
    let mut names = HashSet::new();
    for f in &frames {
        if !names.insert(output_name(f)) {
            return Err(Error::Config {
                path: f.clone(),
                reason: "two frames map to the same output name".into(),
            });
        }
    }
    create_dir(out_dir)?;
    let traces = if options.timings {
        let start = Instant::now();
        let clock = move || start.elapsed().as_secs_f64() * 1e3;
        run_clip(&frames, out_dir, ClipProcessor::with_clock(config, clock)?)?
    } else {
        run_clip(&frames, out_dir, ClipProcessor::new(config)?)?
    };
    let write = |name: &str, text: String| {
        let path = out_dir.join(name);
        fs::write(&path, text).map_err(|e| Error::io(path, e))
    };
    write(TRACE_FILE, format_traces(&traces))?;
    write(SUMMARY_FILE, format_summary(&traces))?;
    Ok(traces)
}

fn run_clip<C: Clock>(
    frames: &[PathBuf],
    out_dir: &Path,
    mut processor: ClipProcessor<'_, C>,
) -> Result<Vec<FrameTrace>> {
    let mut traces = Vec::with_capacity(frames.len());
    let mut dims = None;
    for path in frames {
        let frame = read_frame(path)?;
        let expected = *dims.get_or_insert(frame.dims());
        if frame.dims() != expected {
            return Err(Error::FrameSize {
                path: path.clone(),
                expected,
                found: frame.dims(),
            });
        }
        let (out, trace) = processor.process(&frame)?;
        write_frame(&out_dir.join(output_name(path)), &out)?;
        traces.push(trace);
    }
    Ok(traces)
}

/// Output directory for each input clip: `out` itself for a single clip,
/// otherwise one subdirectory per clip named after its input.
pub fn clip_output_dirs(inputs: &[PathBuf], out: &Path) -> Result<Vec<PathBuf>> {
    if inputs.len() == 1 {
        return Ok(vec![out.to_owned()]);
    }
    let mut seen = HashSet::new();
    inputs
        .iter()
        .map(|input| {
            let stem = input.file_stem().ok_or_else(|| Error::Config {
                path: input.clone(),
                reason: "input has no file name".into(),
            })?;
            if !seen.insert(stem.to_owned()) {
                return Err(Error::Config {
                    path: input.clone(),
                    reason: "another input uses the same name".into(),
                });
            }
            Ok(out.join(stem))
        })
        .collect()
}

pub fn load_scene_spec(path: &Path) -> Result<SceneSpec> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::Config {
        path: path.to_owned(),
        reason: e.message().to_owned(),
    })
}

/// Renders a synthetic clip into `out_dir` as numbered PNG frames plus
/// `ground_truth.json`.
pub fn write_synth_clip(spec: &SceneSpec, n_frames: usize, out_dir: &Path) -> Result<()> {
    let clip = generate_clip(spec, n_frames)?;
    create_dir(out_dir)?;
    for (frame, record) in clip.frames.iter().zip(&clip.ground_truth) {
        write_frame(&out_dir.join(&record.raw_file), frame)?;
    }
    write_lane_records(&out_dir.join(GROUND_TRUTH_FILE), &clip.ground_truth)
}

pub fn evaluate_files(pred: &Path, gt: &Path, params: &EvalParams) -> Result<EvalSummary> {
    let preds = read_lane_records(pred)?;
    let gts = read_lane_records(gt)?;
    Ok(evaluate_clip(&preds, &gts, params)?)
}

/// `{"accuracy":…,"precision":…,"recall":…}` on one line.
pub fn format_eval(summary: &EvalSummary) -> String {
    serde_json::json!({
        "accuracy": summary.accuracy,
        "precision": summary.precision,
        "recall": summary.recall,
    })
    .to_string()
}
