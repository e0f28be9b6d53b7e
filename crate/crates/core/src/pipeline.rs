//! Per-frame orchestration and channel allocation.
//!
//! Frame `N` is processed with the threshold chosen after frame `N - 1`:
//!
//! ```text
//! gray -> bilateral -> canny(th) -> roi mask -> hough count -> tune(th)
//!                          \
//!                           +-> channel allocation -> output frame
//! ```
//!
//! Every clip starts from a fresh [`TunerState`].

use alloc::vec;
use alloc::vec::Vec;
use core::borrow::Borrow;

use crate::edges::{canny, CannyThresholds};
use crate::error::{Error, Result};
use crate::filter::{bilateral_filter_u8, BilateralParams};
use crate::fuzzy::{tune_within, ClampRange, FuzzySystem, TunerState};
use crate::hough::{hough_count_capped, HoughParams};
use crate::image::{to_grayscale_u8, EdgeMap, FrameRgb, LumaWeights};
use crate::roi::{roi_mask, RoiConfig, TriangleRoi};

/// What feeds one plane of the output frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ChannelSource {
    Edge,
    Blue,
    Green,
    Red,
}

/// Sources for output planes 0 (blue), 1 (green) and 2 (red).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct ChannelSpec(pub [ChannelSource; 3]);

impl ChannelSpec {
    /// Output equals input.
    pub const IDENTITY: Self = Self([
        ChannelSource::Blue,
        ChannelSource::Green,
        ChannelSource::Red,
    ]);
    /// Edges replace blue and red, green is kept.
    pub const EDGE_GREEN_EDGE: Self = Self([
        ChannelSource::Edge,
        ChannelSource::Green,
        ChannelSource::Edge,
    ]);
}

impl Default for ChannelSpec {
    fn default() -> Self {
        Self::EDGE_GREEN_EDGE
    }
}

/// Output level of edge pixels, matching a min-max normalization of the 0/1
/// edge image to `[0, 255]`: a uniform map normalizes to all zeros.
fn edge_level(edges: &EdgeMap) -> u8 {
    let on = edges.count();
    if on == 0 || on == edges.as_slice().len() {
        0
    } else {
        255
    }
}

/// Builds the output frame: each plane is either the edge map scaled to
/// `[0, 255]` or a verbatim copy of an input plane.
pub fn channel_allocate(frame: &FrameRgb, edges: &EdgeMap, spec: &ChannelSpec) -> Result<FrameRgb> {
    if frame.dims() != edges.dims() {
        return Err(Error::DimensionMismatch {
            expected: frame.dims(),
            found: edges.dims(),
        });
    }
    let level = edge_level(edges);
    let src = frame.as_bgr();
    let mut out = vec![0; src.len()];
    for (plane, source) in spec.0.into_iter().enumerate() {
        let channel = match source {
            ChannelSource::Edge => {
                for (px, &e) in out.chunks_exact_mut(3).zip(edges.as_slice()) {
                    px[plane] = if e { level } else { 0 };
                }
                continue;
            }
            ChannelSource::Blue => 0,
            ChannelSource::Green => 1,
            ChannelSource::Red => 2,
        };
        for (px, input) in out.chunks_exact_mut(3).zip(src.chunks_exact(3)) {
            px[plane] = input[channel];
        }
    }
    FrameRgb::from_bgr(frame.width(), frame.height(), out)
}

/// Everything the pipeline needs besides the frames.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct PipelineConfig {
    pub luma: LumaWeights,
    pub bilateral: BilateralParams,
    pub roi: RoiConfig,
    pub hough: HoughParams,
    pub fuzzy: FuzzySystem,
    pub channels: ChannelSpec,
    /// Threshold used on the first frame of every clip.
    pub initial_threshold: f64,
    pub clamp: ClampRange,
    /// Upper bound on the line count handed to the fuzzy system.
    pub line_count_cap: usize,
    /// Allocate the ROI-masked edges instead of the full-frame edges.
    pub allocate_masked_edges: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            luma: LumaWeights::default(),
            bilateral: BilateralParams::default(),
            roi: RoiConfig::default(),
            hough: HoughParams::default(),
            fuzzy: FuzzySystem::default(),
            channels: ChannelSpec::default(),
            initial_threshold: 1.0,
            clamp: ClampRange::default(),
            line_count_cap: 1000,
            allocate_masked_edges: false,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.bilateral.validate()?;
        self.roi.validate()?;
        self.hough.validate()?;
        self.fuzzy.validate()?;
        self.clamp.validate()?;
        if !(self.clamp.min..=self.clamp.max).contains(&self.initial_threshold) {
            return Err(Error::param(
                "initial_threshold",
                "must lie within the clamp bounds",
            ));
        }
        Ok(())
    }

    pub fn initial_state(&self) -> TunerState {
        TunerState::new(self.initial_threshold)
    }
}

/// Wall-clock source for stage timings, in milliseconds.
pub trait Clock {
    fn now_ms(&self) -> f64;
}

/// A clock that never advances; traces report zero durations.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn now_ms(&self) -> f64 {
        0.0
    }
}

impl<F: Fn() -> f64> Clock for F {
    fn now_ms(&self) -> f64 {
        self()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StageTimings {
    pub grayscale_ms: f64,
    pub bilateral_ms: f64,
    pub canny_ms: f64,
    pub roi_ms: f64,
    pub hough_ms: f64,
    pub tune_ms: f64,
    pub allocate_ms: f64,
    pub total_ms: f64,
}

/// Observables of one processed frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameTrace {
    pub frame_index: u64,
    pub th_high_used: f64,
    pub line_count: usize,
    /// Fuzzy output, before clamping the next threshold.
    pub delta_applied: f64,
    /// Threshold the following frame will use.
    pub next_th_high: f64,
    pub edge_pixels_pre_roi: usize,
    pub edge_pixels_post_roi: usize,
    pub timings: StageTimings,
}

/// Runs one frame with no timing.
pub fn process_frame(
    state: &TunerState,
    frame: &FrameRgb,
    config: &PipelineConfig,
) -> Result<(FrameRgb, TunerState, FrameTrace)> {
    config.validate()?;
    let roi = TriangleRoi::new(frame.width(), frame.height(), &config.roi)?;
    run_frame(state, frame, config, &roi, &NoClock)
}

fn run_frame(
    state: &TunerState,
    frame: &FrameRgb,
    config: &PipelineConfig,
    roi: &TriangleRoi,
    clock: &impl Clock,
) -> Result<(FrameRgb, TunerState, FrameTrace)> {
    let thresholds = CannyThresholds::new(state.th_high)?;
    let t0 = clock.now_ms();
    let gray = to_grayscale_u8(frame, config.luma);
    let t1 = clock.now_ms();
    let smooth = bilateral_filter_u8(&gray, &config.bilateral)?;
    let t2 = clock.now_ms();
    let edges = canny(&smooth, thresholds.high())?;
    let t3 = clock.now_ms();
    let masked = roi_mask(&edges, roi)?;
    let t4 = clock.now_ms();
    let lines = hough_count_capped(&masked, &config.hough, config.line_count_cap)?;
    let t5 = clock.now_ms();
    let line_count = lines.count();
    let next = tune_within(state, line_count, &config.fuzzy, &config.clamp);
    let t6 = clock.now_ms();
    let allocated = if config.allocate_masked_edges {
        &masked
    } else {
        &edges
    };
    let output = channel_allocate(frame, allocated, &config.channels)?;
    let t7 = clock.now_ms();

    let trace = FrameTrace {
        frame_index: state.frame_index,
        th_high_used: state.th_high,
        line_count,
        delta_applied: next.last_delta,
        next_th_high: next.th_high,
        edge_pixels_pre_roi: edges.count(),
        edge_pixels_post_roi: masked.count(),
        timings: StageTimings {
            grayscale_ms: t1 - t0,
            bilateral_ms: t2 - t1,
            canny_ms: t3 - t2,
            roi_ms: t4 - t3,
            hough_ms: t5 - t4,
            tune_ms: t6 - t5,
            allocate_ms: t7 - t6,
            total_ms: t7 - t0,
        },
    };
    Ok((output, next, trace))
}

/// Sequential state machine for one clip.
#[derive(Debug)]
pub struct ClipProcessor<'a, C = NoClock> {
    config: &'a PipelineConfig,
    clock: C,
    state: TunerState,
    roi: Option<TriangleRoi>,
}

impl<'a> ClipProcessor<'a, NoClock> {
    pub fn new(config: &'a PipelineConfig) -> Result<Self> {
        Self::with_clock(config, NoClock)
    }
}

impl<'a, C: Clock> ClipProcessor<'a, C> {
    pub fn with_clock(config: &'a PipelineConfig, clock: C) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            clock,
            state: config.initial_state(),
            roi: None,
        })
    }

    /// State that the next frame will be processed with.
    pub fn state(&self) -> &TunerState {
        &self.state
    }

    /// Processes the next frame of the clip. Every frame must have the
    /// dimensions of the first.
    pub fn process(&mut self, frame: &FrameRgb) -> Result<(FrameRgb, FrameTrace)> {
        let roi = match self.roi {
            Some(roi) if roi.dims() == frame.dims() => roi,
            Some(roi) => {
                return Err(Error::DimensionMismatch {
                    expected: roi.dims(),
                    found: frame.dims(),
                })
            }
            None => *self.roi.insert(TriangleRoi::new(
                frame.width(),
                frame.height(),
                &self.config.roi,
            )?),
        };
        let (out, next, trace) = run_frame(&self.state, frame, self.config, &roi, &self.clock)?;
        self.state = next;
        Ok((out, trace))
    }
}

/// Processes a whole clip from a fresh state.
pub fn process_clip<I>(
    frames: I,
    config: &PipelineConfig,
) -> Result<(Vec<FrameRgb>, Vec<FrameTrace>)>
where
    I: IntoIterator,
    I::Item: Borrow<FrameRgb>,
{
    let mut processor = ClipProcessor::new(config)?;
    let mut outputs = Vec::new();
    let mut traces = Vec::new();
    for frame in frames {
        let (out, trace) = processor.process(frame.borrow())?;
        outputs.push(out);
        traces.push(trace);
    }
    if traces.is_empty() {
        return Err(Error::EmptyClip);
    }
    Ok((outputs, traces))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::{normalize_to_u8, Plane};

    #[test]
    fn edge_planes_match_normalization() {
        let mut partial = EdgeMap::empty(4, 3);
        partial.set(1, 2, true);
        let mut full = EdgeMap::empty(3, 3);
        for y in 0..3 {
            for x in 0..3 {
                full.set(x, y, true);
            }
        }
        for m in [EdgeMap::empty(5, 4), partial, full] {
            let (w, h) = m.dims();
            let frame = FrameRgb::filled(w, h, [10, 20, 30]).unwrap();
            let out = channel_allocate(&frame, &m, &ChannelSpec::EDGE_GREEN_EDGE).unwrap();
            let expected = normalize_to_u8(&m.to_gray()).into_vec();
            assert_eq!(out.plane(Plane::Blue), expected);
            assert_eq!(out.plane(Plane::Red), expected);
        }
    }

    fn gradient_frame(w: usize, h: usize) -> FrameRgb {
        let mut data = Vec::with_capacity(w * h * 3);
        for y in 0..h {
            for x in 0..w {
                data.extend_from_slice(&[
                    (x * 7 % 256) as u8,
                    (y * 5 % 256) as u8,
                    ((x + y) % 256) as u8,
                ]);
            }
        }
        FrameRgb::from_bgr(w, h, data).unwrap()
    }

    #[test]
    fn identity_spec_copies_input() {
        let f = gradient_frame(8, 6);
        let e = EdgeMap::empty(8, 6);
        assert_eq!(channel_allocate(&f, &e, &ChannelSpec::IDENTITY).unwrap(), f);
    }

    #[test]
    fn empty_edges_zero_the_edge_planes() {
        let f = gradient_frame(8, 6);
        let out = channel_allocate(&f, &EdgeMap::empty(8, 6), &ChannelSpec::default()).unwrap();
        assert!(out.plane(Plane::Blue).iter().all(|&v| v == 0));
        assert!(out.plane(Plane::Red).iter().all(|&v| v == 0));
        assert_eq!(out.plane(Plane::Green), f.plane(Plane::Green));
    }

    #[test]
    fn single_edge_pixel_is_saturated() {
        let f = gradient_frame(8, 6);
        let mut e = EdgeMap::empty(8, 6);
        e.set(3, 2, true);
        let out = channel_allocate(&f, &e, &ChannelSpec::default()).unwrap();
        for y in 0..6 {
            for x in 0..8 {
                let want = if (x, y) == (3, 2) { 255 } else { 0 };
                let [b, _, r] = out.pixel(x, y);
                assert_eq!((b, r), (want, want));
            }
        }
    }

    #[test]
    fn allocation_dimension_mismatch() {
        let f = gradient_frame(8, 6);
        assert!(channel_allocate(&f, &EdgeMap::empty(6, 8), &ChannelSpec::default()).is_err());
    }

    #[test]
    fn flat_frame_keeps_floor_threshold() {
        let f = FrameRgb::filled(32, 24, [128, 128, 128]).unwrap();
        let cfg = PipelineConfig::default();
        let (out, next, trace) = process_frame(&cfg.initial_state(), &f, &cfg).unwrap();
        assert_eq!(trace.th_high_used, 1.0);
        assert_eq!(trace.line_count, 0);
        assert_eq!(trace.edge_pixels_pre_roi, 0);
        assert_eq!(next.th_high, 1.0);
        assert_eq!(out.dims(), f.dims());
    }

    #[test]
    fn repeated_frame_is_deterministic() {
        let f = gradient_frame(40, 30);
        let cfg = PipelineConfig::default();
        let a = process_frame(&cfg.initial_state(), &f, &cfg).unwrap();
        let b = process_frame(&cfg.initial_state(), &f, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn clip_rules() {
        let cfg = PipelineConfig::default();
        let empty: Vec<FrameRgb> = vec![];
        assert_eq!(process_clip(&empty, &cfg), Err(Error::EmptyClip));

        let (outs, traces) = process_clip([gradient_frame(20, 20)], &cfg).unwrap();
        assert_eq!(outs.len(), 1);
        assert_eq!(traces[0].th_high_used, 1.0);

        let mixed = vec![gradient_frame(20, 20), gradient_frame(21, 20)];
        assert!(matches!(
            process_clip(&mixed, &cfg),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn config_validation() {
        let cfg = PipelineConfig {
            initial_threshold: 0.0,
            ..PipelineConfig::default()
        };
        assert!(cfg.validate().is_err());
        let mut cfg = PipelineConfig::default();
        cfg.bilateral.kernel_size = 4;
        assert!(ClipProcessor::new(&cfg).is_err());
    }
}
