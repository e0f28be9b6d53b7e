//! Single-input Mamdani fuzzy system driving the Canny threshold.
//!
//! The detected line count is fuzzified against five input terms, each rule
//! clips (min) its output term at the rule's firing strength, the clipped
//! terms are merged with max, and the crisp threshold change is the centroid
//! of the merged set sampled on a fixed uniform grid.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::edges::{MAX_GRADIENT, MIN_THRESHOLD};
use crate::error::{Error, Result};

/// Piecewise-linear membership function. Breakpoints may be infinite to form
/// open shoulders.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "shape", rename_all = "snake_case"))]
pub enum MembershipFunction {
    /// Zero at `a` and `c`, one at `b`.
    Triangle { a: f64, b: f64, c: f64 },
    /// Rises over `[a, b]`, one on `[b, c]`, falls over `[c, d]`.
    Trapezoid { a: f64, b: f64, c: f64, d: f64 },
}

impl MembershipFunction {
    pub fn triangle(a: f64, b: f64, c: f64) -> Self {
        Self::Triangle { a, b, c }
    }

    pub fn trapezoid(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::Trapezoid { a, b, c, d }
    }

    fn breakpoints(&self) -> [f64; 4] {
        match *self {
            Self::Triangle { a, b, c } => [a, b, b, c],
            Self::Trapezoid { a, b, c, d } => [a, b, c, d],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.breakpoints();
        if p.iter().any(|v| v.is_nan()) {
            return Err(Error::param("membership", "breakpoint is NaN"));
        }
        if p.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::param(
                "membership",
                "breakpoints must be non-decreasing",
            ));
        }
        if p[1] == f64::INFINITY || p[2] == f64::NEG_INFINITY {
            return Err(Error::param("membership", "plateau must be reachable"));
        }
        Ok(())
    }

    /// Degree of membership of `x`, in `[0, 1]`.
    pub fn degree(&self, x: f64) -> f64 {
        let [a, b, c, d] = self.breakpoints();
        if x >= b && x <= c {
            1.0
        } else if x <= a || x >= d {
            0.0
        } else if x < b {
            (x - a) / (b - a)
        } else {
            (d - x) / (d - c)
        }
    }
}

/// Degree of `x` in `mf`.
pub fn membership(mf: &MembershipFunction, x: f64) -> f64 {
    mf.degree(x)
}

/// A labelled membership function.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Term {
    pub label: String,
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub mf: MembershipFunction,
}

impl Term {
    pub fn new(label: &str, mf: MembershipFunction) -> Self {
        Self {
            label: label.to_string(),
            mf,
        }
    }
}

/// `if input is <input> then change is <output>`.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct FuzzyRule {
    pub input: String,
    pub output: String,
}

impl FuzzyRule {
    pub fn new(input: &str, output: &str) -> Self {
        Self {
            input: input.to_string(),
            output: output.to_string(),
        }
    }
}

/// Input terms, output terms, rulebase and the defuzzification grid.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct FuzzySystem {
    pub inputs: Vec<Term>,
    pub outputs: Vec<Term>,
    pub rules: Vec<FuzzyRule>,
    /// Lower end of the centroid grid.
    pub output_min: f64,
    /// Upper end of the centroid grid.
    pub output_max: f64,
    /// Number of grid samples, endpoints included.
    pub samples: usize,
}

impl Default for FuzzySystem {
    fn default() -> Self {
        let inf = f64::INFINITY;
        Self {
            inputs: alloc::vec![
                Term::new(
                    "too_few",
                    MembershipFunction::trapezoid(-inf, -inf, 2.0, 5.0)
                ),
                Term::new("few", MembershipFunction::triangle(2.0, 5.0, 10.0)),
                Term::new("good", MembershipFunction::trapezoid(5.0, 10.0, 20.0, 25.0)),
                Term::new("many", MembershipFunction::triangle(20.0, 30.0, 40.0)),
                Term::new(
                    "too_many",
                    MembershipFunction::trapezoid(30.0, 40.0, inf, inf)
                ),
            ],
            outputs: alloc::vec![
                Term::new("minus2", MembershipFunction::triangle(-1.5, -1.0, -0.5)),
                Term::new("minus1", MembershipFunction::triangle(-0.5, -0.25, 0.0)),
                Term::new("zero", MembershipFunction::triangle(-0.5, 0.0, 0.5)),
                Term::new("add1", MembershipFunction::triangle(0.0, 0.25, 0.5)),
                Term::new("add2", MembershipFunction::triangle(3.5, 4.0, 4.5)),
            ],
            rules: alloc::vec![
                FuzzyRule::new("too_few", "minus2"),
                FuzzyRule::new("few", "minus1"),
                FuzzyRule::new("good", "zero"),
                FuzzyRule::new("many", "add1"),
                FuzzyRule::new("too_many", "add2"),
            ],
            output_min: -1.5,
            output_max: 4.5,
            samples: 4096,
        }
    }
}

impl FuzzySystem {
    pub fn validate(&self) -> Result<()> {
        for term in self.inputs.iter().chain(&self.outputs) {
            term.mf.validate().map_err(|_| {
                Error::param(
                    "fuzzy",
                    alloc::format!("term `{}` has invalid breakpoints", term.label),
                )
            })?;
        }
        for term in &self.inputs {
            let n = self.rules.iter().filter(|r| r.input == term.label).count();
            if n != 1 {
                return Err(Error::param(
                    "fuzzy.rules",
                    alloc::format!(
                        "input `{}` must appear in exactly one rule, found {n}",
                        term.label
                    ),
                ));
            }
        }
        for rule in &self.rules {
            if !self.inputs.iter().any(|t| t.label == rule.input) {
                return Err(Error::param(
                    "fuzzy.rules",
                    alloc::format!("unknown input term `{}`", rule.input),
                ));
            }
            if !self.outputs.iter().any(|t| t.label == rule.output) {
                return Err(Error::param(
                    "fuzzy.rules",
                    alloc::format!("unknown output term `{}`", rule.output),
                ));
            }
        }
        if self.output_min.partial_cmp(&self.output_max) != Some(core::cmp::Ordering::Less)
            || !self.output_min.is_finite()
            || !self.output_max.is_finite()
        {
            return Err(Error::param(
                "fuzzy.output_min",
                "output range must be finite and non-empty",
            ));
        }
        if self.samples < 2 {
            return Err(Error::param("fuzzy.samples", "need at least 2 samples"));
        }
        Ok(())
    }

    fn input(&self, label: &str) -> Option<&MembershipFunction> {
        self.inputs.iter().find(|t| t.label == label).map(|t| &t.mf)
    }

    fn output(&self, label: &str) -> Option<&MembershipFunction> {
        self.outputs
            .iter()
            .find(|t| t.label == label)
            .map(|t| &t.mf)
    }

    /// Degree of `line_count` in every input term, in declaration order.
    pub fn fuzzify(&self, line_count: f64) -> Vec<(&str, f64)> {
        self.inputs
            .iter()
            .map(|t| (t.label.as_str(), t.mf.degree(line_count)))
            .collect()
    }

    /// `i`-th centroid grid abscissa.
    #[inline]
    pub fn grid_point(&self, i: usize) -> f64 {
        let step = (self.output_max - self.output_min) / (self.samples - 1) as f64;
        self.output_min + i as f64 * step
    }
}

/// Crisp threshold change for `line_count`.
///
/// Returns 0 when no rule fires anywhere on the grid.
pub fn fis_delta(line_count: f64, system: &FuzzySystem) -> f64 {
    // (firing strength, consequent) for every rule that fires
    let fired: Vec<(f64, &MembershipFunction)> = system
        .rules
        .iter()
        .filter_map(|rule| {
            let strength = system.input(&rule.input)?.degree(line_count);
            let out = system.output(&rule.output)?;
            (strength > 0.0).then_some((strength, out))
        })
        .collect();
    if fired.is_empty() {
        return 0.0;
    }

    let mut moment = 0.0;
    let mut area = 0.0;
    for i in 0..system.samples {
        let z = system.grid_point(i);
        let mu = fired
            .iter()
            .map(|&(s, mf)| s.min(mf.degree(z)))
            .fold(0.0, f64::max);
        moment += z * mu;
        area += mu;
    }
    if area > 0.0 {
        moment / area
    } else {
        0.0
    }
}

/// Inclusive bounds for the tuned threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ClampRange {
    pub min: f64,
    pub max: f64,
}

impl Default for ClampRange {
    fn default() -> Self {
        Self {
            min: MIN_THRESHOLD,
            max: MAX_GRADIENT,
        }
    }
}

impl ClampRange {
    pub fn validate(&self) -> Result<()> {
        if !(MIN_THRESHOLD <= self.min && self.min <= self.max && self.max <= MAX_GRADIENT) {
            return Err(Error::param(
                "clamp",
                "bounds must satisfy 1 <= min <= max <= 1443",
            ));
        }
        Ok(())
    }

    pub fn apply(&self, v: f64) -> f64 {
        v.clamp(self.min, self.max)
    }
}

/// Closed-loop state carried from one frame to the next.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TunerState {
    /// Threshold the next frame will use.
    pub th_high: f64,
    /// Frames tuned so far.
    pub frame_index: u64,
    pub last_line_count: usize,
    pub last_delta: f64,
}

impl TunerState {
    pub fn new(th_high: f64) -> Self {
        Self {
            th_high,
            frame_index: 0,
            last_line_count: 0,
            last_delta: 0.0,
        }
    }
}

impl Default for TunerState {
    /// Starts at threshold 1 so the first frame keeps as much detail as
    /// possible.
    fn default() -> Self {
        Self::new(1.0)
    }
}

/// One feedback step with the default `[1, 1443]` clamp.
pub fn tune(state: &TunerState, line_count: usize, system: &FuzzySystem) -> TunerState {
    tune_within(state, line_count, system, &ClampRange::default())
}

/// One feedback step: shifts the threshold by the fuzzy output and clamps.
pub fn tune_within(
    state: &TunerState,
    line_count: usize,
    system: &FuzzySystem,
    clamp: &ClampRange,
) -> TunerState {
    let delta = fis_delta(line_count as f64, system);
    TunerState {
        th_high: clamp.apply(state.th_high + delta),
        frame_index: state.frame_index + 1,
        last_line_count: line_count,
        last_delta: delta,
    }
}
