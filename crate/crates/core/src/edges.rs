//! Sobel gradients and Canny edge detection with an externally supplied high
//! threshold. The low threshold is always one third of the high one.
//!
//! No Gaussian smoothing happens here; callers are expected to denoise first.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::image::{check_min_size, EdgeMap, GrayImage};
use crate::math;

/// Largest Sobel magnitude an 8-bit image can produce, `sqrt(2) * 1020`,
/// rounded up.
pub const MAX_GRADIENT: f64 = 1443.0;
/// Smallest admissible high threshold.
pub const MIN_THRESHOLD: f64 = 1.0;

// tan(22.5 deg) and tan(67.5 deg)
const TAN_22_5: f64 = 0.414_213_562_373_095_03;
const TAN_67_5: f64 = 2.414_213_562_373_095;

/// Per-pixel Sobel responses. `gy` is positive when intensity increases
/// downwards (image rows grow downwards).
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    width: usize,
    height: usize,
    gx: Vec<f64>,
    gy: Vec<f64>,
    magnitude: Vec<f64>,
}

impl GradientField {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn gx(&self, x: usize, y: usize) -> f64 {
        self.gx[y * self.width + x]
    }

    pub fn gy(&self, x: usize, y: usize) -> f64 {
        self.gy[y * self.width + x]
    }

    pub fn magnitude(&self, x: usize, y: usize) -> f64 {
        self.magnitude[y * self.width + x]
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitude
    }

    /// Gradient angle `atan2(gy, gx)` in radians.
    pub fn direction(&self, x: usize, y: usize) -> f64 {
        math::atan2(self.gy(x, y), self.gx(x, y))
    }

    pub fn directions(&self) -> Vec<f64> {
        self.gx
            .iter()
            .zip(&self.gy)
            .map(|(&gx, &gy)| math::atan2(gy, gx))
            .collect()
    }
}

/// Copy of the image with a one-sample mirrored border.
fn pad1(image: &GrayImage) -> Vec<f64> {
    let (w, h) = image.dims();
    let src = image.as_slice();
    let pw = w + 2;
    let mut out = Vec::with_capacity(pw * (h + 2));
    for py in 0..h + 2 {
        let row = &src[math::reflect(py as isize - 1, h) * w..][..w];
        out.push(row[0]);
        out.extend_from_slice(row);
        out.push(row[w - 1]);
    }
    out
}

/// Runs `f(i, gx, gy)` for every pixel in row-major order.
#[inline]
fn sobel_each(image: &GrayImage, mut f: impl FnMut(usize, f64, f64)) {
    let (w, h) = image.dims();
    let padded = pad1(image);
    let pw = w + 2;
    for y in 0..h {
        let up = &padded[y * pw..][..pw];
        let mid = &padded[(y + 1) * pw..][..pw];
        let down = &padded[(y + 2) * pw..][..pw];
        for x in 0..w {
            let (tl, t, tr) = (up[x], up[x + 1], up[x + 2]);
            let (l, r) = (mid[x], mid[x + 2]);
            let (bl, b, br) = (down[x], down[x + 1], down[x + 2]);
            let sx = (tr + 2.0 * r + br) - (tl + 2.0 * l + bl);
            let sy = (bl + 2.0 * b + br) - (tl + 2.0 * t + tr);
            f(y * w + x, sx, sy);
        }
    }
}

/// 3x3 Sobel gradients with mirrored borders.
pub fn sobel_gradients(image: &GrayImage) -> Result<GradientField> {
    let (w, h) = image.dims();
    check_min_size(w, h)?;
    let n = w * h;
    let mut gx = vec![0.0; n];
    let mut gy = vec![0.0; n];
    let mut magnitude = vec![0.0; n];
    sobel_each(image, |i, sx, sy| {
        gx[i] = sx;
        gy[i] = sy;
        magnitude[i] = math::sqrt(sx * sx + sy * sy);
    });
    Ok(GradientField {
        width: w,
        height: h,
        gx,
        gy,
        magnitude,
    })
}

/// Hysteresis thresholds; `low` is always `high / 3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CannyThresholds {
    high: f64,
    low: f64,
}

impl CannyThresholds {
    pub fn new(high: f64) -> Result<Self> {
        if !(MIN_THRESHOLD..=MAX_GRADIENT).contains(&high) {
            return Err(Error::ThresholdOutOfRange(high));
        }
        Ok(Self {
            high,
            low: high / 3.0,
        })
    }

    pub fn high(&self) -> f64 {
        self.high
    }

    pub fn low(&self) -> f64 {
        self.low
    }
}

/// Gradient direction quantized to the four neighbour axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionBin {
    Deg0,
    Deg45,
    Deg90,
    Deg135,
}

impl DirectionBin {
    /// Bin of an angle in radians, folded into `[0, 180)` degrees.
    pub fn from_angle(theta: f64) -> Self {
        let mut deg = theta.to_degrees();
        while deg < 0.0 {
            deg += 180.0;
        }
        while deg >= 180.0 {
            deg -= 180.0;
        }
        if !(22.5..157.5).contains(&deg) {
            DirectionBin::Deg0
        } else if deg < 67.5 {
            DirectionBin::Deg45
        } else if deg < 112.5 {
            DirectionBin::Deg90
        } else {
            DirectionBin::Deg135
        }
    }

    /// Same binning as [`from_angle`](Self::from_angle), computed from the
    /// gradient components without a trigonometric call.
    #[inline]
    pub fn from_components(gx: f64, gy: f64) -> Self {
        let ax = gx.abs();
        let ay = gy.abs();
        // written as selects so the compiler can avoid unpredictable branches
        let diagonal = if (gx > 0.0) == (gy > 0.0) {
            DirectionBin::Deg45
        } else {
            DirectionBin::Deg135
        };
        let steep = if ay >= ax * TAN_67_5 {
            DirectionBin::Deg90
        } else {
            diagonal
        };
        if ay < ax * TAN_22_5 {
            DirectionBin::Deg0
        } else {
            steep
        }
    }

    /// Neighbour offset along the gradient; the opposite neighbour is the
    /// negated offset.
    #[inline]
    fn offset(self) -> (isize, isize) {
        match self {
            DirectionBin::Deg0 => (1, 0),
            DirectionBin::Deg45 => (1, 1),
            DirectionBin::Deg90 => (0, 1),
            DirectionBin::Deg135 => (-1, 1),
        }
    }
}

/// Canny edge map for the given high threshold.
///
/// Streams over the image keeping three rows of gradient magnitudes, so no
/// full-size gradient arrays are built.
pub fn canny(image: &GrayImage, th_high: f64) -> Result<EdgeMap> {
    let t = CannyThresholds::new(th_high)?;
    let (w, h) = image.dims();
    check_min_size(w, h)?;
    let mut mags = [vec![0.0; w], vec![0.0; w], vec![0.0; w]];
    let mut bins = [
        vec![DirectionBin::Deg0; w],
        vec![DirectionBin::Deg0; w],
        vec![DirectionBin::Deg0; w],
    ];
    let mut class = vec![0u8; w * h];
    // slots of the rows above, at and below y
    let (mut above, mut at, mut below) = (0, 1, 2);
    gradient_row(image, 0, &mut mags[at], &mut bins[at]);
    mags[above] = mags[at].clone();
    for y in 0..h {
        if y + 1 < h {
            let (m, b) = (&mut mags[below], &mut bins[below]);
            gradient_row(image, y + 1, m, b);
        } else {
            mags[below] = mags[at].clone();
        }
        let rows = [&mags[above][..], &mags[at][..], &mags[below][..]];
        let out = &mut class[y * w..(y + 1) * w];
        for x in 0..w {
            let m = rows[1][x];
            if m < t.low {
                continue;
            }
            let (dx, dy) = bins[at][x].offset();
            let ahead = rows[(1 + dy) as usize][clamp_index(x as isize + dx, w)];
            let behind = rows[(1 - dy) as usize][clamp_index(x as isize - dx, w)];
            if m > behind && m >= ahead {
                out[x] = classify(m, t);
            }
        }
        (above, at, below) = (at, below, above);
    }
    Ok(hysteresis(w, h, &class))
}

/// Mirrored index for offsets of at most one sample past either end.
#[inline]
fn clamp_index(i: isize, len: usize) -> usize {
    i.clamp(0, len as isize - 1) as usize
}

/// Sobel magnitudes and direction bins of row `y`.
fn gradient_row(image: &GrayImage, y: usize, mag: &mut [f64], bins: &mut [DirectionBin]) {
    let (w, h) = image.dims();
    let src = image.as_slice();
    let row = |r: isize| &src[math::reflect(r, h) * w..][..w];
    let (up, mid, down) = (row(y as isize - 1), row(y as isize), row(y as isize + 1));
    // columns left, centre and right of one pixel
    let sobel = |u: [f64; 3], m: [f64; 3], d: [f64; 3]| {
        let sx = (u[2] + 2.0 * m[2] + d[2]) - (u[0] + 2.0 * m[0] + d[0]);
        let sy = (d[0] + 2.0 * d[1] + d[2]) - (u[0] + 2.0 * u[1] + u[2]);
        (
            math::sqrt(sx * sx + sy * sy),
            DirectionBin::from_components(sx, sy),
        )
    };
    let at = |r: &[f64], l: usize, x: usize, rr: usize| [r[l], r[x], r[rr]];

    (mag[0], bins[0]) = sobel(at(up, 0, 0, 1), at(mid, 0, 0, 1), at(down, 0, 0, 1));
    let interior = up
        .windows(3)
        .zip(mid.windows(3))
        .zip(down.windows(3))
        .zip(mag[1..w - 1].iter_mut().zip(&mut bins[1..w - 1]));
    for (((u, m), d), (mg, b)) in interior {
        (*mg, *b) = sobel([u[0], u[1], u[2]], [m[0], m[1], m[2]], [d[0], d[1], d[2]]);
    }
    let (l, x) = (w - 2, w - 1);
    (mag[x], bins[x]) = sobel(at(up, l, x, x), at(mid, l, x, x), at(down, l, x, x));
}

const WEAK: u8 = 1;
const STRONG: u8 = 2;

#[inline]
fn classify(m: f64, t: CannyThresholds) -> u8 {
    if m > t.high {
        STRONG
    } else if m >= t.low {
        WEAK
    } else {
        0
    }
}

/// Non-maximum suppression followed by hysteresis on precomputed gradients.
pub fn canny_from_gradients(gradients: &GradientField, thresholds: CannyThresholds) -> EdgeMap {
    let thinned = non_maximum_suppression(gradients);
    let class: Vec<u8> = thinned
        .iter()
        .zip(&gradients.magnitude)
        .map(|(&keep, &m)| if keep { classify(m, thresholds) } else { 0 })
        .collect();
    hysteresis(gradients.width, gradients.height, &class)
}

/// Marks pixels that are local maxima along their quantized gradient
/// direction. A pixel must be strictly greater than the neighbour behind it
/// and at least equal to the one ahead, so a plateau two pixels wide yields a
/// single-pixel ridge.
pub fn non_maximum_suppression(gradients: &GradientField) -> Vec<bool> {
    let bins: Vec<DirectionBin> = gradients
        .gx
        .iter()
        .zip(&gradients.gy)
        .map(|(&gx, &gy)| DirectionBin::from_components(gx, gy))
        .collect();
    suppress(
        gradients.width,
        gradients.height,
        &gradients.magnitude,
        &bins,
    )
}

fn suppress(w: usize, h: usize, mag: &[f64], bins: &[DirectionBin]) -> Vec<bool> {
    let mut keep = vec![false; w * h];
    for y in 0..h {
        let interior_row = y > 0 && y + 1 < h;
        for x in 0..w {
            let i = y * w + x;
            let m = mag[i];
            if m == 0.0 {
                continue;
            }
            let (dx, dy) = bins[i].offset();
            let (ahead, behind) = if interior_row && x > 0 && x + 1 < w {
                let step = dy * w as isize + dx;
                (
                    mag[(i as isize + step) as usize],
                    mag[(i as isize - step) as usize],
                )
            } else {
                let (xi, yi) = (x as isize, y as isize);
                (
                    mag[math::reflect(yi + dy, h) * w + math::reflect(xi + dx, w)],
                    mag[math::reflect(yi - dy, h) * w + math::reflect(xi - dx, w)],
                )
            };
            keep[i] = m > behind && m >= ahead;
        }
    }
    keep
}

/// Keeps strong pixels (`> high`) and weak pixels (`[low, high]`) that are
/// 8-connected, possibly through other weak pixels, to a strong one.
fn hysteresis(w: usize, h: usize, class: &[u8]) -> EdgeMap {
    let mut edges = EdgeMap::empty(w, h);
    let out = edges.as_mut_slice();
    let mut stack = Vec::new();
    for i in 0..w * h {
        if class[i] == STRONG && !out[i] {
            out[i] = true;
            stack.push(i);
            while let Some(j) = stack.pop() {
                let (x, y) = (j % w, j / w);
                for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                    for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                        let k = ny * w + nx;
                        if !out[k] && class[k] != 0 {
                            out[k] = true;
                            stack.push(k);
                        }
                    }
                }
            }
        }
    }
    edges
}
