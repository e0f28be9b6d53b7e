//! Bilateral noise reduction.
//!
//! Each output pixel is the normalized weighted mean of its `k x k`
//! neighbourhood, with weight
//!
//! ```text
//! w(x_i) = exp(-|x_i - x|^2 / (2 sigma_s^2)) * exp(-(I(x_i) - I(x))^2 / (2 sigma_i^2))
//! ```
//!
//! Note the negative exponents and the `2 sigma^2` denominators: the sigmas
//! are standard-deviation-like, as in most imaging libraries. Sums are
//! accumulated in `f64` in row-major window order, so results are bitwise
//! reproducible.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::image::{Gray8, GrayImage};
use crate::math;

/// How samples outside the image are synthesized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BorderMode {
    /// Mirror across the border, repeating the edge sample.
    #[default]
    Reflect,
    /// Repeat the nearest edge sample.
    Replicate,
}

impl BorderMode {
    #[inline]
    pub(crate) fn index(self, i: isize, len: usize) -> usize {
        match self {
            BorderMode::Reflect => math::reflect(i, len),
            BorderMode::Replicate => i.clamp(0, len as isize - 1) as usize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct BilateralParams {
    /// Odd window side, at least 3.
    pub kernel_size: usize,
    pub sigma_spatial: f64,
    pub sigma_intensity: f64,
    pub border: BorderMode,
}

impl Default for BilateralParams {
    fn default() -> Self {
        Self {
            kernel_size: 7,
            sigma_spatial: 50.0,
            sigma_intensity: 25.0,
            border: BorderMode::Reflect,
        }
    }
}

impl BilateralParams {
    pub fn validate(&self) -> Result<()> {
        if self.kernel_size < 3 || self.kernel_size.is_multiple_of(2) {
            return Err(Error::param(
                "kernel_size",
                alloc::format!("must be odd and >= 3, got {}", self.kernel_size),
            ));
        }
        if !(self.sigma_spatial > 0.0 && self.sigma_spatial.is_finite()) {
            return Err(Error::param("sigma_spatial", "must be positive"));
        }
        if !(self.sigma_intensity > 0.0 && self.sigma_intensity.is_finite()) {
            return Err(Error::param("sigma_intensity", "must be positive"));
        }
        Ok(())
    }

    fn radius(&self) -> usize {
        self.kernel_size / 2
    }

    /// Spatial weights of the window in row-major order.
    fn spatial_weights(&self) -> Vec<f64> {
        let r = self.radius() as isize;
        let denom = 2.0 * self.sigma_spatial * self.sigma_spatial;
        let mut out = Vec::with_capacity(self.kernel_size * self.kernel_size);
        for dy in -r..=r {
            for dx in -r..=r {
                let d2 = (dx * dx + dy * dy) as f64;
                out.push(math::exp(-d2 / denom));
            }
        }
        out
    }
}

/// Applies the bilateral filter.
///
/// Images whose samples are all integers in `0..=255` take a table-driven
/// path; its intensity weights are evaluated with the same expression as the
/// general path, so both produce identical output for such inputs.
pub fn bilateral_filter(image: &GrayImage, params: &BilateralParams) -> Result<GrayImage> {
    params.validate()?;
    let spatial = params.spatial_weights();
    let (w, h) = image.dims();
    let data = if is_8bit_integral(image.as_slice()) {
        let padded = pad(w, h, params.radius(), params.border, |x, y| {
            image.get(x, y) as u8
        });
        filter_u8(w, h, &padded, params, &spatial)
    } else {
        filter_real(image, params, &spatial)
    };
    GrayImage::new(w, h, data)
}

/// [`bilateral_filter`] on an 8-bit image, without the detour through `f64`
/// samples.
pub fn bilateral_filter_u8(image: &Gray8, params: &BilateralParams) -> Result<GrayImage> {
    params.validate()?;
    let spatial = params.spatial_weights();
    let (w, h) = (image.width(), image.height());
    let padded = pad(w, h, params.radius(), params.border, |x, y| image.get(x, y));
    GrayImage::new(w, h, filter_u8(w, h, &padded, params, &spatial))
}

fn is_8bit_integral(samples: &[f64]) -> bool {
    samples
        .iter()
        .all(|&v| (0.0..=255.0).contains(&v) && math::floor(v) == v)
}

/// Border-extended copy of the image, `radius` samples on every side.
fn pad<T: Copy>(
    width: usize,
    height: usize,
    radius: usize,
    border: BorderMode,
    sample: impl Fn(usize, usize) -> T,
) -> Vec<T> {
    let pw = width + 2 * radius;
    let ph = height + 2 * radius;
    let mut out = Vec::with_capacity(pw * ph);
    for py in 0..ph {
        let sy = border.index(py as isize - radius as isize, height);
        for px in 0..pw {
            let sx = border.index(px as isize - radius as isize, width);
            out.push(sample(sx, sy));
        }
    }
    out
}

// Both paths evaluate `c + sum(s * r(d) * d) / sum(s * r(d))` with
// `d = v - c`, which equals the weighted mean of the window. Tabulating the
// pair `(r(d), r(d) * d)` leaves one load and a packed multiply-add per tap.

/// Intensity weight and weighted offset of an intensity difference.
#[inline]
fn range_pair(d: f64, denom: f64) -> [f64; 2] {
    let r = math::exp(-(d * d) / denom);
    [r, r * d]
}

/// Filters a border-extended 8-bit image of `w x h` interior samples.
fn filter_u8(
    w: usize,
    h: usize,
    padded: &[u8],
    params: &BilateralParams,
    spatial: &[f64],
) -> Vec<f64> {
    let k = params.kernel_size;
    let r = params.radius();
    let pw = w + 2 * r;

    // Indexed by `v - c + 255`.
    let denom = 2.0 * params.sigma_intensity * params.sigma_intensity;
    let table: Vec<[f64; 2]> = (0..511)
        .map(|i| range_pair(i as f64 - 255.0, denom))
        .collect();
    let row_table = |c: u8| -> &[[f64; 2]; 256] {
        let off = 255 - c as usize;
        table[off..off + 256]
            .try_into()
            .expect("table spans 256 entries")
    };

    #[cfg(target_arch = "x86_64")]
    let packed: Vec<sse2::Pair> = table.iter().map(|&p| sse2::pack(p)).collect();
    #[cfg(target_arch = "x86_64")]
    let spatial_packed: Vec<sse2::Pair> = spatial.iter().map(|&s| sse2::splat(s)).collect();

    let mut out = vec![0.0; w * h];
    for y in 0..h {
        let centre = &padded[(y + r) * pw + r..(y + r) * pw + r + w];
        let rows = &padded[y * pw..(y + k) * pw];
        let out_row = &mut out[y * w..(y + 1) * w];

        #[cfg(target_arch = "x86_64")]
        // SAFETY: SSE2 is part of the x86_64 baseline.
        let x = unsafe { sse2::filter_row(&packed, rows, pw, centre, &spatial_packed, k, out_row) };
        #[cfg(not(target_arch = "x86_64"))]
        let x = 0;

        for x in x..w {
            let t = row_table(centre[x]);
            let mut sum = [0.0; 2];
            for dy in 0..k {
                let row = &rows[dy * pw + x..dy * pw + x + k];
                let sw = &spatial[dy * k..dy * k + k];
                for (&v, &s) in row.iter().zip(sw) {
                    let [rw, rd] = t[v as usize];
                    sum[0] += s * rw;
                    sum[1] += s * rd;
                }
            }
            out_row[x] = f64::from(centre[x]) + sum[1] / sum[0];
        }
    }
    out
}

#[cfg(target_arch = "x86_64")]
mod sse2 {
    use core::arch::x86_64::{
        __m128d, _mm_add_pd, _mm_cvtsd_f64, _mm_mul_pd, _mm_set_pd, _mm_setzero_pd, _mm_unpackhi_pd,
    };

    /// `[weight, weighted offset]` in one register.
    pub(super) type Pair = __m128d;

    pub(super) fn pack([rw, rd]: [f64; 2]) -> Pair {
        // SAFETY: SSE2 is part of the x86_64 baseline.
        unsafe { set(rd, rw) }
    }

    pub(super) fn splat(v: f64) -> Pair {
        // SAFETY: as above.
        unsafe { set(v, v) }
    }

    #[target_feature(enable = "sse2")]
    fn set(hi: f64, lo: f64) -> Pair {
        _mm_set_pd(hi, lo)
    }

    const LANES: usize = 8;

    /// Filters the row whose window rows start at `rows`, four pixels at a
    /// time, and returns how many leading pixels were written. The sums per
    /// pixel match the scalar path operation for operation.
    #[target_feature(enable = "sse2")]
    pub(super) fn filter_row(
        table: &[Pair],
        rows: &[u8],
        pw: usize,
        centre: &[u8],
        spatial: &[Pair],
        k: usize,
        out: &mut [f64],
    ) -> usize {
        let w = out.len();
        let mut x = 0;
        while x + LANES <= w {
            let tables: [&[Pair; 256]; LANES] = core::array::from_fn(|j| {
                let off = 255 - centre[x + j] as usize;
                table[off..off + 256]
                    .try_into()
                    .expect("table spans 256 entries")
            });
            let mut sums = [_mm_setzero_pd(); LANES];
            for dy in 0..k {
                let row = &rows[dy * pw + x..dy * pw + x + k + LANES - 1];
                let sw = &spatial[dy * k..dy * k + k];
                for (dx, &s) in sw.iter().enumerate() {
                    let vs: &[u8; LANES] = row[dx..dx + LANES].try_into().expect("window in row");
                    for j in 0..LANES {
                        sums[j] = _mm_add_pd(sums[j], _mm_mul_pd(s, tables[j][vs[j] as usize]));
                    }
                }
            }
            for j in 0..LANES {
                let norm = _mm_cvtsd_f64(sums[j]);
                let offset = _mm_cvtsd_f64(_mm_unpackhi_pd(sums[j], sums[j]));
                out[x + j] = f64::from(centre[x + j]) + offset / norm;
            }
            x += LANES;
        }
        x
    }
}

fn filter_real(image: &GrayImage, params: &BilateralParams, spatial: &[f64]) -> Vec<f64> {
    let (w, h) = image.dims();
    let k = params.kernel_size;
    let r = params.radius();
    let pw = w + 2 * r;
    let padded = pad(w, h, r, params.border, |x, y| image.get(x, y));
    let denom = 2.0 * params.sigma_intensity * params.sigma_intensity;

    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let c = padded[(y + r) * pw + x + r];
            let mut sum = [0.0; 2];
            for dy in 0..k {
                let row = &padded[(y + dy) * pw + x..(y + dy) * pw + x + k];
                let sw = &spatial[dy * k..dy * k + k];
                for (&v, &s) in row.iter().zip(sw) {
                    let [rw, rd] = range_pair(v - c, denom);
                    sum[0] += s * rw;
                    sum[1] += s * rd;
                }
            }
            out[y * w + x] = c + sum[1] / sum[0];
        }
    }
    out
}
