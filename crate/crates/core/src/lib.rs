//! Adaptive edge preprocessing for lane detection.
//!
//! Each frame is converted to grayscale, denoised with a bilateral filter and
//! run through Canny edge detection. The Canny high threshold is not fixed: a
//! Hough line count taken inside a triangular region of interest is fed to a
//! single-input Mamdani fuzzy system, whose crisp output nudges the threshold
//! used for the *next* frame. The edge map finally replaces selected colour
//! planes of the input frame.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature. File formats, the CLI and the synthetic clip generator live in the
//! `lanetune` companion crate.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod edges;
pub mod error;
pub mod eval;
pub mod filter;
pub mod fuzzy;
pub mod hough;
pub mod image;
mod math;
pub mod pipeline;
pub mod roi;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::edges::{canny, sobel_gradients, CannyThresholds, GradientField};
    pub use crate::error::{Error, Result};
    pub use crate::eval::{evaluate_clip, lane_point_accuracy, EvalSummary, LaneRecord};
    pub use crate::filter::{bilateral_filter, BilateralParams};
    pub use crate::fuzzy::{fis_delta, tune, FuzzySystem, MembershipFunction, TunerState};
    pub use crate::hough::{hough_count, HoughParams, LineSet, PolarLine};
    pub use crate::image::{normalize_to_u8, to_grayscale, EdgeMap, FrameRgb, Gray8, GrayImage};
    pub use crate::pipeline::{
        channel_allocate, process_clip, process_frame, ChannelSource, ChannelSpec, ClipProcessor,
        FrameTrace, PipelineConfig,
    };
    pub use crate::roi::{roi_mask, TriangleRoi};
}
