//! Triangular region of interest.
//!
//! The triangle's base is the full bottom row of the image and its apex sits
//! at fractions of the width and height measured from the top-left corner.
//! With the default fractions the apex is horizontally centred, one quarter of
//! the height below the top edge, so the triangle covers the vanishing point
//! of a level road with some margin.

use crate::error::{Error, Result};
use crate::image::EdgeMap;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct RoiConfig {
    /// Apex x as a fraction of the width.
    pub apex_x: f64,
    /// Apex y as a fraction of the height, measured from the top.
    pub apex_y: f64,
}

impl Default for RoiConfig {
    fn default() -> Self {
        Self {
            apex_x: 0.5,
            apex_y: 0.25,
        }
    }
}

impl RoiConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.apex_x) {
            return Err(Error::param("roi.apex_x", "must lie in [0, 1]"));
        }
        if !(0.0..1.0).contains(&self.apex_y) {
            return Err(Error::param("roi.apex_y", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// A triangle in pixel coordinates (x right, y down).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleRoi {
    width: usize,
    height: usize,
    vertices: [(f64, f64); 3],
}

impl TriangleRoi {
    /// Triangle with apex at `(apex_x * width, apex_y * height)` and base
    /// corners `(0, height - 1)` and `(width - 1, height - 1)`.
    pub fn new(width: usize, height: usize, config: &RoiConfig) -> Result<Self> {
        config.validate()?;
        if width < 2 || height < 2 {
            return Err(Error::ImageTooSmall {
                width,
                height,
                min: 2,
            });
        }
        let base_y = (height - 1) as f64;
        let apex = (config.apex_x * width as f64, config.apex_y * height as f64);
        let apex = (apex.0.min((width - 1) as f64), apex.1);
        if apex.1 >= base_y {
            return Err(Error::param(
                "roi.apex_y",
                "apex must lie above the bottom row",
            ));
        }
        Ok(Self {
            width,
            height,
            vertices: [apex, (0.0, base_y), ((width - 1) as f64, base_y)],
        })
    }

    pub fn with_defaults(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, &RoiConfig::default())
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Apex, bottom-left, bottom-right.
    pub fn vertices(&self) -> [(f64, f64); 3] {
        self.vertices
    }

    /// Closed point-in-triangle test: boundary points are inside.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let [a, b, c] = self.vertices;
        let d1 = cross(a, b, (x, y));
        let d2 = cross(b, c, (x, y));
        let d3 = cross(c, a, (x, y));
        let has_neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
        let has_pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
        !(has_neg && has_pos)
    }

    /// Inclusive x-range of row `y` inside the triangle, if any. The edges'
    /// analytic crossings narrow the search; `contains` has the last word.
    fn row_span(&self, y: usize) -> Option<(usize, usize)> {
        let [apex, _, _] = self.vertices;
        let base_y = (self.height - 1) as f64;
        let t = ((y as f64 - apex.1) / (base_y - apex.1)).clamp(0.0, 1.0);
        let lo = apex.0 * (1.0 - t);
        let hi = apex.0 + ((self.width - 1) as f64 - apex.0) * t;
        let first = (libm::floor(lo) - 2.0).max(0.0) as usize;
        let last = ((libm::ceil(hi) + 2.0) as usize).min(self.width - 1);
        let yf = y as f64;
        let x0 = (first..=last).find(|&x| self.contains(x as f64, yf))?;
        let x1 = (x0..=last).rev().find(|&x| self.contains(x as f64, yf))?;
        Some((x0, x1))
    }
}

#[inline]
fn cross(p: (f64, f64), q: (f64, f64), r: (f64, f64)) -> f64 {
    (q.0 - p.0) * (r.1 - p.1) - (q.1 - p.1) * (r.0 - p.0)
}

/// Clears every edge pixel outside the triangle.
pub fn roi_mask(edges: &EdgeMap, roi: &TriangleRoi) -> Result<EdgeMap> {
    if edges.dims() != roi.dims() {
        return Err(Error::DimensionMismatch {
            expected: roi.dims(),
            found: edges.dims(),
        });
    }
    let (w, h) = edges.dims();
    let mut out = EdgeMap::empty(w, h);
    let src = edges.as_slice();
    let dst = out.as_mut_slice();
    for y in 0..h {
        // A triangle row is one convex run, so only the span needs copying.
        if let Some((x0, x1)) = roi.row_span(y) {
            dst[y * w + x0..=y * w + x1].copy_from_slice(&src[y * w + x0..=y * w + x1]);
        }
    }
    Ok(out)
}
