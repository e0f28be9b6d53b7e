//! Times each pipeline stage on one synthetic 1280x720 frame. `REPS` sets the repetitions.

use std::time::Instant;

use lanetune::synth::{generate_clip, SceneSpec};
use lanetune_core::edges::non_maximum_suppression;
use lanetune_core::image::{to_grayscale_u8, LumaWeights};
use lanetune_core::prelude::*;

fn best<T>(label: &str, mut f: impl FnMut() -> T) -> T {
    let mut best = f64::MAX;
    let mut total = 0.0;
    let mut out = None;
    let reps: usize = std::env::var("REPS")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(7);
    for _ in 0..reps {
        let t = Instant::now();
        out = Some(f());
        let ms = t.elapsed().as_secs_f64() * 1e3;
        total += ms;
        best = best.min(ms);
    }
    println!("{label:12} {best:7.2} ms (mean {:.2})", total / reps as f64);
    out.unwrap()
}

fn main() {
    let clip = generate_clip(&SceneSpec::default(), 1).unwrap();
    let frame = &clip.frames[0];
    let gray = best("gray", || {
        to_grayscale_u8(frame, LumaWeights::default()).to_gray()
    });
    let smooth = best("bilateral", || {
        bilateral_filter(&gray, &BilateralParams::default()).unwrap()
    });
    let grad = best("sobel", || sobel_gradients(&smooth).unwrap());
    best("nms", || non_maximum_suppression(&grad));
    let th: f64 = std::env::args().nth(1).map_or(14.0, |s| s.parse().unwrap());
    let edges = best("canny", || canny(&smooth, th).unwrap());
    let roi = TriangleRoi::with_defaults(1280, 720).unwrap();
    let masked = best("roi", || roi_mask(&edges, &roi).unwrap());
    println!("edges {}", masked.count());
    best("accum", || {
        lanetune_core::hough::Accumulator::build(&masked, &HoughParams::default())
            .unwrap()
            .rho_bins()
    });
    let lines = best("hough", || {
        hough_count(&masked, &HoughParams::default()).unwrap()
    });
    println!("lines {}", lines.count());
    best("allocate", || {
        channel_allocate(frame, &edges, &ChannelSpec::default()).unwrap()
    });
}
