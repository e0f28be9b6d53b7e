//! Rho-theta Hough accumulator and line counting.
//!
//! Each edge pixel `(x, y)` votes once per theta bin for
//! `rho = x cos(theta) + y sin(theta)`, rounded half-up to the nearest rho
//! bin. Origin is the top-left pixel, theta covers `[0, 180)` degrees.
//!
//! Lines are extracted strongest first. Once a cell is taken as a line, the
//! pixels voting for it withdraw every one of their votes, so each pixel
//! supports at most one line and the side lobes a line spreads across the
//! accumulator vanish with it. Equal vote counts go to the smaller rho index,
//! then the smaller theta index. Extraction ends when no cell reaches the
//! vote threshold.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::image::EdgeMap;
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct HoughParams {
    /// Pixels per rho bin.
    pub rho_resolution: f64,
    /// Degrees per theta bin.
    pub theta_resolution: f64,
    /// Minimum votes for a reported line.
    pub vote_threshold: u32,
}

impl Default for HoughParams {
    fn default() -> Self {
        Self {
            rho_resolution: 1.0,
            theta_resolution: 1.0,
            vote_threshold: 3,
        }
    }
}

impl HoughParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho_resolution > 0.0 && self.rho_resolution.is_finite()) {
            return Err(Error::param("hough.rho_resolution", "must be positive"));
        }
        if !(self.theta_resolution > 0.0 && self.theta_resolution <= 180.0) {
            return Err(Error::param(
                "hough.theta_resolution",
                "must lie in (0, 180]",
            ));
        }
        if self.vote_threshold == 0 {
            return Err(Error::param("hough.vote_threshold", "must be at least 1"));
        }
        Ok(())
    }

    fn theta_bins(&self) -> usize {
        let n = 180.0 / self.theta_resolution;
        (libm::ceil(n - 1e-9) as usize).max(1)
    }
}

/// A detected line in normal form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarLine {
    /// Signed distance from the top-left origin, in pixels.
    pub rho: f64,
    /// Normal angle in degrees, `[0, 180)`.
    pub theta: f64,
    /// Pixels claimed by this line.
    pub votes: u32,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LineSet {
    pub lines: Vec<PolarLine>,
}

impl LineSet {
    pub fn count(&self) -> usize {
        self.lines.len()
    }
}

/// Vote accumulator over `(rho, theta)` cells.
#[derive(Debug, Clone)]
pub struct Accumulator {
    width: usize,
    height: usize,
    rho_bins: usize,
    theta_bins: usize,
    /// Rho index of `rho = 0`.
    rho_offset: usize,
    rho_resolution: f64,
    theta_resolution: f64,
    /// `(cos, sin)` of each theta bin, divided by the rho resolution.
    trig: Vec<(f64, f64)>,
    /// `rho_offset + 0.5`, turning `floor` into round-half-up.
    bias: f64,
    /// Theta-major: `votes[t * rho_bins + r]`.
    votes: Vec<u32>,
}

impl Accumulator {
    /// Fills the accumulator from every edge pixel.
    pub fn build(edges: &EdgeMap, params: &HoughParams) -> Result<Self> {
        params.validate()?;
        let (w, h) = edges.dims();
        let diagonal = math::sqrt((w * w + h * h) as f64);
        if diagonal / params.rho_resolution * 180.0 / params.theta_resolution
            > f64::from(u32::MAX / 4)
        {
            return Err(Error::param("hough", "accumulator would exceed 2^30 cells"));
        }
        let rho_offset = libm::ceil(diagonal / params.rho_resolution) as usize;
        let theta_bins = params.theta_bins();
        let inv = 1.0 / params.rho_resolution;
        let trig = (0..theta_bins)
            .map(|t| {
                let rad = (t as f64 * params.theta_resolution).to_radians();
                (math::cos(rad) * inv, math::sin(rad) * inv)
            })
            .collect();
        let mut acc = Self {
            width: w,
            height: h,
            rho_bins: 2 * rho_offset + 1,
            theta_bins,
            rho_offset,
            rho_resolution: params.rho_resolution,
            theta_resolution: params.theta_resolution,
            trig,
            bias: rho_offset as f64 + 0.5,
            votes: vec![0; (2 * rho_offset + 1) * theta_bins],
        };
        let pixels: Vec<(usize, usize)> = edges.edge_pixels().collect();
        acc.cast(&pixels, true);
        Ok(acc)
    }

    pub fn rho_bins(&self) -> usize {
        self.rho_bins
    }

    pub fn theta_bins(&self) -> usize {
        self.theta_bins
    }

    pub fn votes(&self, rho_index: usize, theta_index: usize) -> u32 {
        self.votes[theta_index * self.rho_bins + rho_index]
    }

    pub fn rho_of(&self, rho_index: usize) -> f64 {
        (rho_index as f64 - self.rho_offset as f64) * self.rho_resolution
    }

    pub fn theta_of(&self, theta_index: usize) -> f64 {
        theta_index as f64 * self.theta_resolution
    }

    /// Rho bin of `(x, y)` in theta bin `t`.
    #[inline]
    pub fn rho_index(&self, x: usize, y: usize, t: usize) -> usize {
        let (c, s) = self.trig[t];
        Self::bin(x, y, c, s, self.bias)
    }

    /// The biased rho is always positive, so truncation is the floor.
    #[inline]
    fn bin(x: usize, y: usize, c: f64, s: f64, bias: f64) -> usize {
        let v = x as f64 * c + y as f64 * s + bias;
        debug_assert!(v >= 0.0);
        v as usize
    }

    /// Adds or withdraws one vote per theta bin for each pixel.
    fn cast(&mut self, pixels: &[(usize, usize)], add: bool) {
        let rb = self.rho_bins;
        for (t, &(c, s)) in self.trig.iter().enumerate() {
            let row = &mut self.votes[t * rb..(t + 1) * rb];
            for &(x, y) in pixels {
                let cell = &mut row[Self::bin(x, y, c, s, self.bias)];
                if add {
                    *cell += 1;
                } else {
                    *cell -= 1;
                }
            }
        }
    }

    /// Calls `f` for every pixel position whose vote in theta bin `t` lands
    /// in rho bin `r`.
    fn for_each_on_line(&self, r: usize, t: usize, mut f: impl FnMut(usize, usize)) {
        let (c, s) = self.trig[t];
        // members satisfy r <= x*c + y*s + bias < r + 1
        let lo = r as f64 - self.bias;
        // Walk the axis the line is closer to parallel with; the band is then
        // at most ~1.5 pixels wide across it.
        let (steps, span, along, across) = if s.abs() >= c.abs() {
            (self.width, self.height, c, s)
        } else {
            (self.height, self.width, s, c)
        };
        for i in 0..steps {
            let base = i as f64 * along;
            let a = (lo - base) / across;
            let b = (lo + 1.0 - base) / across;
            let first = math::floor(a.min(b)) - 1.0;
            let last = math::floor(a.max(b)) + 1.0;
            if last < 0.0 || first >= span as f64 {
                continue;
            }
            let first = first.max(0.0) as usize;
            let last = (last as usize).min(span - 1);
            for j in first..=last {
                let (x, y) = if s.abs() >= c.abs() { (i, j) } else { (j, i) };
                if self.rho_index(x, y, t) == r {
                    f(x, y);
                }
            }
        }
    }
}

/// Lines found in `edges`.
pub fn hough_count(edges: &EdgeMap, params: &HoughParams) -> Result<LineSet> {
    hough_count_capped(edges, params, usize::MAX)
}

/// As [`hough_count`], stopping after `max_lines` lines.
pub fn hough_count_capped(
    edges: &EdgeMap,
    params: &HoughParams,
    max_lines: usize,
) -> Result<LineSet> {
    let mut acc = Accumulator::build(edges, params)?;
    let w = acc.width;
    let nt = acc.theta_bins;
    let rb = acc.rho_bins;
    let threshold = params.vote_threshold;
    let mut active = edges.as_slice().to_vec();

    // Bucket queue over vote counts, holding keys `r * nt + t` so that key
    // order is rho index, then theta index. Votes only decrease, so a cell
    // whose count dropped is moved to its new bucket when it is next visited.
    // When a bucket becomes the highest one nothing can join it any more;
    // sorting it then yields the extraction order.
    let top = acc.votes.iter().copied().max().unwrap_or(0);
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); top as usize + 1];
    if top >= threshold {
        for (t, row) in acc.votes.chunks_exact(rb).enumerate() {
            for (r, &v) in row.iter().enumerate() {
                if v >= threshold {
                    buckets[v as usize].push((r * nt + t) as u32);
                }
            }
        }
    }

    let mut lines = Vec::new();
    let mut claimed = Vec::new();
    let mut level = top;
    'levels: while level >= threshold {
        let mut bucket = core::mem::take(&mut buckets[level as usize]);
        bucket.sort_unstable();
        for key in bucket {
            let (r, t) = (key as usize / nt, key as usize % nt);
            let current = acc.votes(r, t);
            if current != level {
                if current >= threshold {
                    buckets[current as usize].push(key);
                }
                continue;
            }
            if lines.len() >= max_lines {
                break 'levels;
            }
            claimed.clear();
            acc.for_each_on_line(r, t, |x, y| {
                if active[y * w + x] {
                    claimed.push((x, y));
                }
            });
            debug_assert_eq!(claimed.len(), level as usize);
            for &(x, y) in &claimed {
                active[y * w + x] = false;
            }
            acc.cast(&claimed, false);
            lines.push(PolarLine {
                rho: acc.rho_of(r),
                theta: acc.theta_of(t),
                votes: level,
            });
        }
        level -= 1;
    }
    Ok(LineSet { lines })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map_with(w: usize, h: usize, pts: &[(usize, usize)]) -> EdgeMap {
        let mut m = EdgeMap::empty(w, h);
        for &(x, y) in pts {
            m.set(x, y, true);
        }
        m
    }

    #[test]
    fn empty_map_has_no_lines() {
        let set = hough_count(&EdgeMap::empty(40, 30), &HoughParams::default()).unwrap();
        assert_eq!(set.count(), 0);
    }

    // Pixels spread over 36 columns: at theta 89 and 91 the run already
    // straddles two rho bins, so theta 90 is the unique maximum.
    fn spaced_row() -> Vec<(usize, usize)> {
        (0..10).map(|i| (4 * i, 5)).collect()
    }

    fn spaced_column() -> Vec<(usize, usize)> {
        (0..10).map(|i| (30, 10 + 5 * i)).collect()
    }

    #[test]
    fn horizontal_run_is_one_line() {
        let set = hough_count(&map_with(64, 64, &spaced_row()), &HoughParams::default()).unwrap();
        assert_eq!(
            set.lines,
            [PolarLine {
                rho: 5.0,
                theta: 90.0,
                votes: 10
            }]
        );
    }

    #[test]
    fn perpendicular_runs_are_two_lines() {
        let mut pts = spaced_row();
        pts.extend(spaced_column());
        let set = hough_count(&map_with(64, 64, &pts), &HoughParams::default()).unwrap();
        assert_eq!(
            set.lines,
            [
                PolarLine {
                    rho: 5.0,
                    theta: 90.0,
                    votes: 10
                },
                PolarLine {
                    rho: 30.0,
                    theta: 0.0,
                    votes: 10
                },
            ]
        );
    }

    #[test]
    fn contiguous_run_is_one_line() {
        let pts: Vec<_> = (20..30).map(|x| (x, 5)).collect();
        let set = hough_count(&map_with(40, 30, &pts), &HoughParams::default()).unwrap();
        assert_eq!(set.count(), 1);
        assert_eq!(set.lines[0].votes, 10);
        assert!((set.lines[0].theta - 90.0).abs() <= 3.0);
    }

    #[test]
    fn plateau_resolves_to_lowest_theta() {
        // Pixels next to the origin tie across theta 87..=93; the tie rule
        // keeps the smallest theta.
        let pts: Vec<_> = (0..10).map(|x| (x, 5)).collect();
        let set = hough_count(&map_with(40, 30, &pts), &HoughParams::default()).unwrap();
        assert_eq!(set.count(), 1);
        assert_eq!(set.lines[0].votes, 10);
        assert!(set.lines[0].theta < 90.0);
    }

    #[test]
    fn cap_stops_extraction() {
        let mut pts = spaced_row();
        pts.extend(spaced_column());
        let m = map_with(64, 64, &pts);
        let set = hough_count_capped(&m, &HoughParams::default(), 1).unwrap();
        assert_eq!(set.count(), 1);
    }

    #[test]
    fn line_walk_finds_exactly_the_cell_members() {
        let mut all = EdgeMap::empty(23, 17);
        for y in 0..17 {
            for x in 0..23 {
                all.set(x, y, true);
            }
        }
        let acc = Accumulator::build(&all, &HoughParams::default()).unwrap();
        for t in (0..180).step_by(7) {
            for r in (0..acc.rho_bins()).step_by(5) {
                let mut n = 0;
                acc.for_each_on_line(r, t, |_, _| n += 1);
                assert_eq!(n, acc.votes(r, t) as usize, "cell ({r}, {t})");
            }
        }
    }

    #[test]
    fn invalid_params_rejected() {
        let e = EdgeMap::empty(5, 5);
        for p in [
            HoughParams {
                rho_resolution: 0.0,
                ..Default::default()
            },
            HoughParams {
                theta_resolution: -1.0,
                ..Default::default()
            },
            HoughParams {
                vote_threshold: 0,
                ..Default::default()
            },
        ] {
            assert!(hough_count(&e, &p).is_err());
        }
    }
}
