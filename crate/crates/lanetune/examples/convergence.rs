//! Runs 100 synthetic frames and prints the per-frame threshold, line count and timing.
//! Optional arguments: mark width, then line intensity.

use std::time::Instant;

use lanetune::synth::{generate_clip, SceneSpec};
use lanetune_core::pipeline::{ClipProcessor, PipelineConfig};

fn main() {
    let mut spec = SceneSpec::default();
    let args: Vec<String> = std::env::args().collect();
    if let Some(w) = args.get(1) {
        spec.mark_width = w.parse().unwrap();
    }
    if let Some(c) = args.get(2) {
        spec.line_intensity = c.parse().unwrap();
    }
    let n = 100;
    let clip = generate_clip(&spec, n).unwrap();
    let config = PipelineConfig::default();
    let start = Instant::now();
    let clock = move || start.elapsed().as_secs_f64() * 1e3;
    let mut proc = ClipProcessor::with_clock(&config, clock).unwrap();
    let mut total = 0.0;
    for (i, f) in clip.frames.iter().enumerate() {
        let t = Instant::now();
        let (_, tr) = proc.process(f).unwrap();
        let ms = t.elapsed().as_secs_f64() * 1e3;
        total += ms;
        println!(
            "{i:3} th={:8.3} lines={:4} delta={:+.4} edges={} ms={ms:.1} {:?}",
            tr.th_high_used, tr.line_count, tr.delta_applied, tr.edge_pixels_post_roi, tr.timings
        );
    }
    println!("mean ms {:.1}", total / n as f64);
}
