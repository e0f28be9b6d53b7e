//! `trace.jsonl` and `summary.json`. Every real number is written with six
//! decimals so runs can be compared textually.

use std::fmt::Write as _;

use lanetune_core::pipeline::{FrameTrace, StageTimings};

const STAGES: [&str; 8] = [
    "grayscale_ms",
    "bilateral_ms",
    "canny_ms",
    "roi_ms",
    "hough_ms",
    "tune_ms",
    "allocate_ms",
    "total_ms",
];

fn stage_values(t: &StageTimings) -> [f64; 8] {
    [
        t.grayscale_ms,
        t.bilateral_ms,
        t.canny_ms,
        t.roi_ms,
        t.hough_ms,
        t.tune_ms,
        t.allocate_ms,
        t.total_ms,
    ]
}

/// Six decimals, with negative zero folded into zero.
fn fixed(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

fn push_stages(out: &mut String, values: [f64; 8]) {
    out.push('{');
    for (i, (name, v)) in STAGES.iter().zip(values).enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write!(out, "\"{name}\": {}", fixed(v)).unwrap();
    }
    out.push('}');
}

/// One trace as a single JSON line, without the newline.
pub fn format_trace(trace: &FrameTrace) -> String {
    let mut out = String::new();
    write!(
        out,
        "{{\"frame_index\": {}, \"th_high_used\": {}, \"line_count\": {}, \
         \"delta_applied\": {}, \"next_th_high\": {}, \
         \"edge_pixel_count_pre_roi\": {}, \"edge_pixel_count_post_roi\": {}, \
         \"stage_ms\": ",
        trace.frame_index,
        fixed(trace.th_high_used),
        trace.line_count,
        fixed(trace.delta_applied),
        fixed(trace.next_th_high),
        trace.edge_pixels_pre_roi,
        trace.edge_pixels_post_roi,
    )
    .unwrap();
    push_stages(&mut out, stage_values(&trace.timings));
    out.push('}');
    out
}

pub fn format_traces(traces: &[FrameTrace]) -> String {
    traces.iter().map(|t| format_trace(t) + "\n").collect()
}

/// Clip-level digest: frame count, mean and max of each stage time and the
/// threshold the clip ended on.
pub fn format_summary(traces: &[FrameTrace]) -> String {
    let n = traces.len();
    let mut sum = [0.0; 8];
    let mut max = [0.0f64; 8];
    for t in traces {
        for (i, v) in stage_values(&t.timings).into_iter().enumerate() {
            sum[i] += v;
            max[i] = max[i].max(v);
        }
    }
    let mean = sum.map(|s| if n == 0 { 0.0 } else { s / n as f64 });
    let final_th = traces.last().map_or(0.0, |t| t.next_th_high);
    let last_used = traces.last().map_or(0.0, |t| t.th_high_used);

    let mut out = String::from("{\n");
    writeln!(out, "  \"frame_count\": {n},").unwrap();
    writeln!(out, "  \"final_th_high\": {},", fixed(final_th)).unwrap();
    writeln!(out, "  \"last_th_high_used\": {},", fixed(last_used)).unwrap();
    out.push_str("  \"mean_stage_ms\": ");
    push_stages(&mut out, mean);
    out.push_str(",\n  \"max_stage_ms\": ");
    push_stages(&mut out, max);
    out.push_str("\n}\n");
    out
}
