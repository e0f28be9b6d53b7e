//! Deterministic road-like test clips.
//!
//! Frames show straight lane marks on flat asphalt, converging on a vanishing
//! point at the image centre. Every frame gets fresh Gaussian sensor noise and,
//! optionally, bright rain streaks. Ground truth is emitted at the Tusimple
//! anchor rows (160..=710 step 10 on a 720-row image) scaled to the frame
//! height.

use lanetune_core::eval::{LaneRecord, ABSENT};
use lanetune_core::image::FrameRgb;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tusimple anchor rows for 720-row frames.
pub const TUSIMPLE_ANCHORS: std::ops::RangeInclusive<u32> = 16..=71;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    /// Number of lane marks, 1 to 3.
    pub lane_marks: usize,
    /// Bottom-row centre of each mark as a fraction of the width. Empty means
    /// evenly spread defaults for `lane_marks`.
    pub mark_positions: Vec<f64>,
    /// Mark width at the bottom row in pixels; it tapers to zero at the
    /// vanishing point.
    pub mark_width: f64,
    pub line_intensity: f64,
    pub asphalt_intensity: f64,
    /// Standard deviation of per-sample Gaussian noise.
    pub noise_sigma: f64,
    /// Rain streaks per frame.
    pub rain_streaks: usize,
    /// Mean streak length in pixels.
    pub rain_length: f64,
    pub seed: u64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            width: 1280,
            height: 720,
            lane_marks: 2,
            mark_positions: Vec::new(),
            mark_width: 24.0,
            line_intensity: 220.0,
            asphalt_intensity: 90.0,
            noise_sigma: 5.0,
            rain_streaks: 0,
            rain_length: 40.0,
            seed: 7,
        }
    }
}

fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidSpec {
        field,
        reason: reason.into(),
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width < 16 || self.height < 16 {
            return Err(invalid("width", "frames must be at least 16x16"));
        }
        if !(1..=3).contains(&self.lane_marks) {
            return Err(invalid("lane_marks", "must be 1, 2 or 3"));
        }
        if !self.mark_positions.is_empty() && self.mark_positions.len() != self.lane_marks {
            return Err(invalid("mark_positions", "needs one entry per lane mark"));
        }
        if self.mark_positions.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(invalid("mark_positions", "fractions must lie in [0, 1]"));
        }
        if !(self.mark_width > 0.0 && self.mark_width.is_finite()) {
            return Err(invalid("mark_width", "must be positive"));
        }
        for (field, v) in [
            ("line_intensity", self.line_intensity),
            ("asphalt_intensity", self.asphalt_intensity),
        ] {
            if !(0.0..=255.0).contains(&v) {
                return Err(invalid(field, "must lie in [0, 255]"));
            }
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(invalid("noise_sigma", "must be non-negative"));
        }
        if !(self.rain_length > 0.0 && self.rain_length.is_finite()) {
            return Err(invalid("rain_length", "must be positive"));
        }
        Ok(())
    }

    fn positions(&self) -> Vec<f64> {
        if !self.mark_positions.is_empty() {
            return self.mark_positions.clone();
        }
        match self.lane_marks {
            1 => vec![0.3],
            2 => vec![0.25, 0.75],
            _ => vec![0.1, 0.45, 0.85],
        }
    }

    fn vanishing_point(&self) -> (f64, f64) {
        (self.width as f64 / 2.0, self.height as f64 / 2.0)
    }

    /// Centre x of mark `bottom_x` at row `y`, and its half width; `None`
    /// above the vanishing point.
    fn mark_at(&self, bottom_x: f64, y: f64) -> Option<(f64, f64)> {
        let (vx, vy) = self.vanishing_point();
        let bottom = (self.height - 1) as f64;
        if y <= vy {
            return None;
        }
        let t = (y - vy) / (bottom - vy);
        Some((vx + (bottom_x - vx) * t, self.mark_width * t / 2.0))
    }

    /// Anchor rows scaled to the frame height.
    pub fn h_samples(&self) -> Vec<f64> {
        TUSIMPLE_ANCHORS
            .map(|a| (f64::from(a * 10) * self.height as f64 / 720.0).round())
            .collect()
    }
}

/// A rendered clip and its ground truth, one record per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Clip {
    pub frames: Vec<FrameRgb>,
    pub ground_truth: Vec<LaneRecord>,
}

/// File name used for frame `index` of a generated clip.
pub fn frame_name(index: usize) -> String {
    format!("{:05}.png", index + 1)
}

pub fn generate_clip(spec: &SceneSpec, n_frames: usize) -> Result<Clip> {
    spec.validate()?;
    if n_frames == 0 {
        return Err(invalid("n_frames", "must be at least 1"));
    }
    let base = render_base(spec);
    let lanes = ground_truth_lanes(spec);
    let h_samples = spec.h_samples();

    let mut frames = Vec::with_capacity(n_frames);
    let mut ground_truth = Vec::with_capacity(n_frames);
    for i in 0..n_frames {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(i as u64);
        let mut plane = base.clone();
        add_rain(spec, &mut plane, &mut rng);
        frames.push(finish_frame(spec, &plane, &mut rng)?);
        ground_truth.push(LaneRecord {
            raw_file: frame_name(i),
            h_samples: h_samples.clone(),
            lanes: lanes.clone(),
        });
    }
    Ok(Clip {
        frames,
        ground_truth,
    })
}

/// Noise-free intensity image.
fn render_base(spec: &SceneSpec) -> Vec<f64> {
    let (w, h) = (spec.width, spec.height);
    let mut plane = vec![spec.asphalt_intensity; w * h];
    let contrast = spec.line_intensity - spec.asphalt_intensity;
    for bottom_frac in spec.positions() {
        let bottom_x = bottom_frac * (w - 1) as f64;
        for y in 0..h {
            let Some((cx, hw)) = spec.mark_at(bottom_x, y as f64) else {
                continue;
            };
            let (left, right) = (cx - hw, cx + hw);
            let x0 = (left - 0.5).floor().max(0.0) as usize;
            let x1 = ((right + 0.5).ceil() as usize).min(w - 1);
            for x in x0..=x1 {
                // horizontal overlap of the mark with the pixel's footprint
                let xf = x as f64;
                let cover = (right.min(xf + 0.5) - left.max(xf - 0.5)).clamp(0.0, 1.0);
                let v = &mut plane[y * w + x];
                *v = (*v + contrast * cover).min(spec.line_intensity.max(spec.asphalt_intensity));
            }
        }
    }
    plane
}

fn ground_truth_lanes(spec: &SceneSpec) -> Vec<Vec<f64>> {
    let h_samples = spec.h_samples();
    spec.positions()
        .into_iter()
        .map(|frac| {
            let bottom_x = frac * (spec.width - 1) as f64;
            h_samples
                .iter()
                .map(|&y| match spec.mark_at(bottom_x, y) {
                    Some((cx, _)) if cx >= 0.0 && cx < spec.width as f64 => cx.round(),
                    _ => ABSENT,
                })
                .collect()
        })
        .collect()
}

/// Near-vertical bright streaks, splatted with bilinear weights.
fn add_rain(spec: &SceneSpec, plane: &mut [f64], rng: &mut ChaCha8Rng) {
    let (w, h) = (spec.width, spec.height);
    for _ in 0..spec.rain_streaks {
        let x0 = rng.random_range(0.0..w as f64);
        let y0 = rng.random_range(0.0..h as f64);
        let len = spec.rain_length * rng.random_range(0.5..1.5);
        let angle = rng.random_range(-15.0f64..15.0).to_radians();
        let brightness = rng.random_range(40.0..80.0);
        let (dx, dy) = (angle.sin(), angle.cos());
        let steps = (len * 4.0) as usize;
        for s in 0..steps {
            let d = s as f64 / 4.0;
            let (px, py) = (x0 + dx * d, y0 + dy * d);
            let (fx, fy) = (px.floor(), py.floor());
            let (ax, ay) = (px - fx, py - fy);
            for (ox, oy, wgt) in [
                (0, 0, (1.0 - ax) * (1.0 - ay)),
                (1, 0, ax * (1.0 - ay)),
                (0, 1, (1.0 - ax) * ay),
                (1, 1, ax * ay),
            ] {
                let (xi, yi) = (fx as isize + ox, fy as isize + oy);
                if xi < 0 || yi < 0 || xi >= w as isize || yi >= h as isize {
                    continue;
                }
                let v = &mut plane[yi as usize * w + xi as usize];
                // brighten towards the streak level without exceeding it
                let target = (*v + brightness).min(255.0);
                *v = v.max(*v + (target - *v) * wgt * 0.25);
            }
        }
    }
}

/// Adds per-channel noise and quantizes to an 8-bit frame.
fn finish_frame(spec: &SceneSpec, plane: &[f64], rng: &mut ChaCha8Rng) -> Result<FrameRgb> {
    let noise = if spec.noise_sigma > 0.0 {
        Some(Normal::new(0.0, spec.noise_sigma).expect("sigma validated"))
    } else {
        None
    };
    let mut data = Vec::with_capacity(plane.len() * 3);
    for &v in plane {
        for _ in 0..3 {
            let n = noise.as_ref().map_or(0.0, |d| d.sample(rng));
            data.push((v + n).round().clamp(0.0, 255.0) as u8);
        }
    }
    Ok(FrameRgb::from_bgr(spec.width, spec.height, data)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SceneSpec {
        SceneSpec {
            width: 160,
            height: 90,
            ..SceneSpec::default()
        }
    }

    #[test]
    fn noiseless_frames_repeat() {
        let spec = SceneSpec {
            noise_sigma: 0.0,
            ..small()
        };
        let clip = generate_clip(&spec, 2).unwrap();
        assert_eq!(clip.frames[0], clip.frames[1]);
    }

    #[test]
    fn noisy_frames_differ_but_replay() {
        let clip = generate_clip(&small(), 2).unwrap();
        assert_ne!(clip.frames[0], clip.frames[1]);
        assert_eq!(clip, generate_clip(&small(), 2).unwrap());
    }

    #[test]
    fn ground_truth_lane_count() {
        for marks in 1..=3 {
            let spec = SceneSpec {
                lane_marks: marks,
                ..small()
            };
            let clip = generate_clip(&spec, 1).unwrap();
            assert_eq!(clip.ground_truth[0].lanes.len(), marks);
            clip.ground_truth[0].validate().unwrap();
        }
    }

    #[test]
    fn anchors_for_720_rows() {
        let spec = SceneSpec::default();
        let h = spec.h_samples();
        assert_eq!(h.len(), 56);
        assert_eq!(h[0], 160.0);
        assert_eq!(h[55], 710.0);
    }

    #[test]
    fn ground_truth_sits_on_mark_centres() {
        let spec = SceneSpec {
            noise_sigma: 0.0,
            ..SceneSpec::default()
        };
        let clip = generate_clip(&spec, 1).unwrap();
        let frame = &clip.frames[0];
        let rec = &clip.ground_truth[0];
        for lane in &rec.lanes {
            for (&x, &y) in lane.iter().zip(&rec.h_samples) {
                if x == ABSENT || y < 400.0 {
                    continue;
                }
                // the brightest pixel of the row near the mark is its centre
                let (xi, yi) = (x as usize, y as usize);
                let centre = frame.pixel(xi, yi)[1];
                assert!(centre >= frame.pixel(xi - 3, yi)[1]);
                assert!(centre >= frame.pixel(xi + 3, yi)[1]);
                assert!(f64::from(centre) > spec.asphalt_intensity + 50.0);
            }
        }
    }

    #[test]
    fn invalid_specs_name_the_field() {
        let cases = [
            (
                SceneSpec {
                    lane_marks: 0,
                    ..small()
                },
                "lane_marks",
            ),
            (
                SceneSpec {
                    noise_sigma: -1.0,
                    ..small()
                },
                "noise_sigma",
            ),
            (
                SceneSpec {
                    line_intensity: 300.0,
                    ..small()
                },
                "line_intensity",
            ),
            (
                SceneSpec {
                    width: 4,
                    ..small()
                },
                "width",
            ),
        ];
        for (spec, field) in cases {
            match generate_clip(&spec, 1) {
                Err(Error::InvalidSpec { field: f, .. }) => assert_eq!(f, field),
                other => panic!("expected error on {field}, got {other:?}"),
            }
        }
        assert!(generate_clip(&small(), 0).is_err());
    }
}
