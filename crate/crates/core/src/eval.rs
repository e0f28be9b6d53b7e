//! Lane accuracy, precision and recall in the Tusimple convention.
//!
//! A lane is a list of x-coordinates sampled at the record's `h_samples`
//! rows, with `-2` marking rows where the lane is absent. A predicted point
//! is correct when it is present and within `px_threshold` pixels of the
//! ground truth. Lanes without a single valid point are ignored on both
//! sides.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Marker for "no lane at this row".
pub const ABSENT: f64 = -2.0;
/// Most lanes a record may carry.
pub const MAX_LANES: usize = 4;

/// One frame's lanes.
#[derive(Debug, Clone, PartialEq)]
pub struct LaneRecord {
    pub raw_file: String,
    pub h_samples: Vec<f64>,
    pub lanes: Vec<Vec<f64>>,
}

impl LaneRecord {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Error::InvalidRecord {
            raw_file: self.raw_file.clone(),
            reason,
        };
        if self.lanes.len() > MAX_LANES {
            return Err(bad(alloc::format!(
                "{} lanes exceed the limit of {MAX_LANES}",
                self.lanes.len()
            )));
        }
        if self.h_samples.iter().any(|y| !y.is_finite()) {
            return Err(bad("h_samples must be finite".into()));
        }
        for (i, lane) in self.lanes.iter().enumerate() {
            if lane.len() != self.h_samples.len() {
                return Err(bad(alloc::format!(
                    "lane {i} has {} points but h_samples has {}",
                    lane.len(),
                    self.h_samples.len()
                )));
            }
            if let Some(x) = lane
                .iter()
                .find(|&&x| !(x == ABSENT || (x >= 0.0 && x.is_finite())))
            {
                return Err(bad(alloc::format!(
                    "lane {i} has x = {x}; expected -2 or a non-negative coordinate"
                )));
            }
        }
        Ok(())
    }

    /// Lanes with at least one valid point.
    fn scored_lanes(&self) -> impl Iterator<Item = &[f64]> {
        self.lanes
            .iter()
            .filter(|l| l.iter().any(|&x| x != ABSENT))
            .map(Vec::as_slice)
    }
}

/// Fraction of the ground-truth lane's valid points matched by `pred`.
///
/// Returns 0 when the ground truth has no valid point.
pub fn lane_point_accuracy(pred: &[f64], gt: &[f64], px_threshold: f64) -> Result<f64> {
    if pred.len() != gt.len() {
        return Err(Error::LaneLength {
            expected: gt.len(),
            found: pred.len(),
        });
    }
    let mut total = 0usize;
    let mut correct = 0usize;
    for (&p, &g) in pred.iter().zip(gt) {
        if g == ABSENT {
            continue;
        }
        total += 1;
        if p != ABSENT && (p - g).abs() < px_threshold {
            correct += 1;
        }
    }
    Ok(if total == 0 {
        0.0
    } else {
        correct as f64 / total as f64
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalParams {
    /// Maximum horizontal error for a point to count as correct, exclusive.
    pub px_threshold: f64,
    /// Point accuracy a matched pair needs to be a true positive.
    pub match_threshold: f64,
}

impl Default for EvalParams {
    fn default() -> Self {
        Self {
            px_threshold: 20.0,
            match_threshold: 0.85,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EvalSummary {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub frames: usize,
    pub gt_lanes: usize,
    pub pred_lanes: usize,
    pub true_positives: usize,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    accuracy_sum: f64,
    gt_lanes: usize,
    pred_lanes: usize,
    true_positives: usize,
}

/// Scores one frame: greedy one-to-one matching by descending point
/// accuracy, ties going to the lower ground-truth index, then the lower
/// prediction index.
fn evaluate_frame(pred: &LaneRecord, gt: &LaneRecord, params: &EvalParams) -> Result<Tally> {
    if pred.h_samples != gt.h_samples {
        return Err(Error::InvalidRecord {
            raw_file: gt.raw_file.clone(),
            reason: "prediction and ground truth use different h_samples".into(),
        });
    }
    let gts: Vec<&[f64]> = gt.scored_lanes().collect();
    let preds: Vec<&[f64]> = pred.scored_lanes().collect();

    let mut pairs = Vec::with_capacity(gts.len() * preds.len());
    for (gi, g) in gts.iter().enumerate() {
        for (pi, p) in preds.iter().enumerate() {
            pairs.push((lane_point_accuracy(p, g, params.px_threshold)?, gi, pi));
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut tally = Tally {
        gt_lanes: gts.len(),
        pred_lanes: preds.len(),
        ..Tally::default()
    };
    let mut gt_used = [false; MAX_LANES];
    let mut pred_used = [false; MAX_LANES];
    for (acc, gi, pi) in pairs {
        if gt_used[gi] || pred_used[pi] {
            continue;
        }
        gt_used[gi] = true;
        pred_used[pi] = true;
        tally.accuracy_sum += acc;
        if acc >= params.match_threshold {
            tally.true_positives += 1;
        }
    }
    Ok(tally)
}

fn index_by_file(records: &[LaneRecord]) -> Result<BTreeMap<&str, &LaneRecord>> {
    let mut map = BTreeMap::new();
    for r in records {
        r.validate()?;
        if map.insert(r.raw_file.as_str(), r).is_some() {
            return Err(Error::DuplicateFrame(r.raw_file.clone()));
        }
    }
    Ok(map)
}

fn ratio(num: f64, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num / den as f64
    }
}

/// Scores predictions against ground truth, joining records on `raw_file`.
///
/// Accuracy is the mean matched point accuracy over all ground-truth lanes,
/// unmatched lanes counting as zero. Counts are summed over frames before
/// dividing. Predictions for frames absent from the ground truth are
/// ignored.
pub fn evaluate_clip(
    preds: &[LaneRecord],
    gts: &[LaneRecord],
    params: &EvalParams,
) -> Result<EvalSummary> {
    let pred_index = index_by_file(preds)?;
    let gt_index = index_by_file(gts)?;

    let missing: Vec<String> = gt_index
        .keys()
        .filter(|k| !pred_index.contains_key(*k))
        .map(|k| String::from(*k))
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingFrames(missing));
    }

    let mut total = Tally::default();
    for (file, gt) in &gt_index {
        let t = evaluate_frame(pred_index[file], gt, params)?;
        total.accuracy_sum += t.accuracy_sum;
        total.gt_lanes += t.gt_lanes;
        total.pred_lanes += t.pred_lanes;
        total.true_positives += t.true_positives;
    }
    Ok(EvalSummary {
        accuracy: ratio(total.accuracy_sum, total.gt_lanes),
        precision: ratio(total.true_positives as f64, total.pred_lanes),
        recall: ratio(total.true_positives as f64, total.gt_lanes),
        frames: gt_index.len(),
        gt_lanes: total.gt_lanes,
        pred_lanes: total.pred_lanes,
        true_positives: total.true_positives,
    })
}
