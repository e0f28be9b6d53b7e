//! Image containers and the intensity conversions shared by every stage.
//!
//! Colour frames store their planes in Blue, Green, Red order: plane 0 is
//! blue, plane 1 green, plane 2 red. Samples are interleaved per pixel.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Smallest frame side the 3x3 gradient stage can run on.
pub const MIN_SIDE: usize = 3;

/// Colour plane index of a [`FrameRgb`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Plane {
    Blue = 0,
    Green = 1,
    Red = 2,
}

/// An 8-bit, 3-plane colour frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameRgb {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl FrameRgb {
    /// Wraps interleaved B,G,R samples.
    pub fn from_bgr(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_min_size(width, height)?;
        let expected = width * height * 3;
        if data.len() != expected {
            return Err(Error::BufferSize {
                width,
                height,
                expected,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Wraps interleaved R,G,B samples (the usual order of image files).
    pub fn from_rgb(width: usize, height: usize, mut data: Vec<u8>) -> Result<Self> {
        for px in data.chunks_exact_mut(3) {
            px.swap(0, 2);
        }
        Self::from_bgr(width, height, data)
    }

    /// A frame with every pixel set to `(b, g, r)`.
    pub fn filled(width: usize, height: usize, bgr: [u8; 3]) -> Result<Self> {
        let data = bgr
            .iter()
            .copied()
            .cycle()
            .take(width * height * 3)
            .collect();
        Self::from_bgr(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Interleaved B,G,R samples.
    pub fn as_bgr(&self) -> &[u8] {
        &self.data
    }

    pub fn into_bgr(self) -> Vec<u8> {
        self.data
    }

    /// Interleaved R,G,B copy of the samples.
    pub fn to_rgb(&self) -> Vec<u8> {
        let mut out = self.data.clone();
        for px in out.chunks_exact_mut(3) {
            px.swap(0, 2);
        }
        out
    }

    /// `[b, g, r]` at `(x, y)`.
    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, bgr: [u8; 3]) {
        let i = (y * self.width + x) * 3;
        self.data[i..i + 3].copy_from_slice(&bgr);
    }

    /// Copy of one colour plane, row-major.
    pub fn plane(&self, plane: Plane) -> Vec<u8> {
        self.data
            .iter()
            .skip(plane as usize)
            .step_by(3)
            .copied()
            .collect()
    }
}

/// Real-valued single-channel image, the working type of the filter stages.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ImageTooSmall {
                width,
                height,
                min: 1,
            });
        }
        if data.len() != width * height {
            return Err(Error::BufferSize {
                width,
                height,
                expected: width * height,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }
}

/// 8-bit single-channel image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gray8 {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Gray8 {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::BufferSize {
                width,
                height,
                expected: width * height,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<u8> {
        self.data
    }

    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f64::from(v)).collect(),
        }
    }
}

/// Binary edge / non-edge map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMap {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl EdgeMap {
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::BufferSize {
                width,
                height,
                expected: width * height,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, edge: bool) {
        self.data[y * self.width + x] = edge;
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [bool] {
        &mut self.data
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&e| e).count()
    }

    /// Coordinates of all edge pixels in row-major order.
    pub fn edge_pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &e)| e)
            .map(move |(i, _)| (i % w, i / w))
    }

    /// The map as a `{0, 1}` real image.
    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .map(|&e| if e { 1.0 } else { 0.0 })
                .collect(),
        }
    }
}

/// Weights applied to red, green and blue when forming luma.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LumaWeights {
    pub red: f64,
    pub green: f64,
    pub blue: f64,
}

impl LumaWeights {
    /// ITU-R BT.601.
    pub const BT601: Self = Self {
        red: 0.299,
        green: 0.587,
        blue: 0.114,
    };
}

impl Default for LumaWeights {
    fn default() -> Self {
        Self::BT601
    }
}

/// Unrounded luma of every pixel.
pub fn to_grayscale(frame: &FrameRgb, weights: LumaWeights) -> GrayImage {
    let data = frame
        .data
        .chunks_exact(3)
        .map(|p| luma(p, weights))
        .collect();
    GrayImage {
        width: frame.width,
        height: frame.height,
        data,
    }
}

/// Luma rounded half-up to 8 bits.
pub fn to_grayscale_u8(frame: &FrameRgb, weights: LumaWeights) -> Gray8 {
    // Per-channel products, summed in the same order as `luma`.
    let table = |k: f64| -> [f64; 256] { core::array::from_fn(|v| k * f64::from(v as u8)) };
    let (red, green, blue) = (
        table(weights.red),
        table(weights.green),
        table(weights.blue),
    );
    let data = frame
        .data
        .chunks_exact(3)
        .map(|p| math::to_u8(red[p[2] as usize] + green[p[1] as usize] + blue[p[0] as usize]))
        .collect();
    Gray8 {
        width: frame.width,
        height: frame.height,
        data,
    }
}

#[inline]
fn luma(bgr: &[u8], w: LumaWeights) -> f64 {
    w.red * f64::from(bgr[2]) + w.green * f64::from(bgr[1]) + w.blue * f64::from(bgr[0])
}

/// Linearly maps `[min, max]` of the image onto `[0, 255]`. A constant image
/// maps to all zeros.
pub fn normalize_to_u8(image: &GrayImage) -> Gray8 {
    let (lo, hi) = image
        .data
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let data = if hi > lo {
        let scale = 255.0 / (hi - lo);
        image
            .data
            .iter()
            .map(|&v| math::to_u8((v - lo) * scale))
            .collect()
    } else {
        vec![0; image.data.len()]
    };
    Gray8 {
        width: image.width,
        height: image.height,
        data,
    }
}

pub(crate) fn check_min_size(width: usize, height: usize) -> Result<()> {
    if width < MIN_SIDE || height < MIN_SIDE {
        return Err(Error::ImageTooSmall {
            width,
            height,
            min: MIN_SIDE,
        });
    }
    Ok(())
}
