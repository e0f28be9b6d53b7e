//! End-to-end acceptance checks. Runs without the libtest harness so every
//! criterion prints exactly one PASS or FAIL line; the process fails if any
//! criterion does.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use lanetune::commands::{GROUND_TRUTH_FILE, TRACE_FILE};
use lanetune::lanes::{format_lane_records, parse_lane_records, read_lane_records};
use lanetune::synth::{generate_clip, SceneSpec};
use lanetune_core::edges::canny;
use lanetune_core::eval::{evaluate_clip, EvalParams, LaneRecord};
use lanetune_core::filter::{bilateral_filter_u8, BilateralParams};
use lanetune_core::fuzzy::{fis_delta, FuzzySystem};
use lanetune_core::image::{Gray8, GrayImage, Plane};
use lanetune_core::pipeline::{ClipProcessor, FrameTrace, PipelineConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || {
        format!("took {elapsed:.2?}, limit {limit:.0?}")
    })
}

// 1 -------------------------------------------------------------------------

fn mirror(i: isize, n: usize) -> usize {
    if i < 0 {
        (-i - 1) as usize
    } else if i as usize >= n {
        2 * n - i as usize - 1
    } else {
        i as usize
    }
}

fn bilateral_brute_force(img: &Gray8, p: &BilateralParams) -> Vec<f64> {
    let (w, h) = (img.width(), img.height());
    let r = (p.kernel_size / 2) as isize;
    let at = |x: isize, y: isize| f64::from(img.get(mirror(x, w), mirror(y, h)));
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let c = at(x, y);
            let (mut num, mut den) = (0.0, 0.0);
            for dy in -r..=r {
                for dx in -r..=r {
                    let v = at(x + dx, y + dy);
                    let d2 = (dx * dx + dy * dy) as f64;
                    let wgt = (-d2 / (2.0 * p.sigma_spatial.powi(2))).exp()
                        * (-(v - c).powi(2) / (2.0 * p.sigma_intensity.powi(2))).exp();
                    num += wgt * v;
                    den += wgt;
                }
            }
            out.push(num / den);
        }
    }
    out
}

fn bilateral_oracle() -> Check {
    let start = Instant::now();
    let params = BilateralParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let img = Gray8::new(64, 64, (0..64 * 64).map(|_| rng.random()).collect()).unwrap();
        let got = bilateral_filter_u8(&img, &params).unwrap();
        let want = bilateral_brute_force(&img, &params);
        for (a, b) in got.as_slice().iter().zip(&want) {
            worst = worst.max((a - b).abs());
        }
    }
    ensure(worst <= 1e-6, || format!("max |diff| {worst:e}"))?;
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!(
        "20 images 64x64, max |diff| {worst:.1e}, {:.2?}",
        start.elapsed()
    ))
}

// 2 -------------------------------------------------------------------------

fn canny_suite() -> Check {
    let start = Instant::now();
    let flat = GrayImage::filled(64, 48, 128.0).unwrap();
    let n = canny(&flat, 1.0).unwrap().count();
    ensure(n == 0, || format!("constant image gave {n} edge pixels"))?;

    let (w, h) = (64, 48);
    let step = GrayImage::from_fn(w, h, |x, _| if x < 32 { 0.0 } else { 255.0 }).unwrap();
    let edges = canny(&step, 100.0).unwrap();
    let cols: Vec<usize> = (0..w)
        .filter(|&x| (0..h).any(|y| edges.get(x, y)))
        .collect();
    ensure(cols.len() == 1, || {
        format!("step at 100 lit columns {cols:?}")
    })?;
    ensure((0..h).all(|y| edges.get(cols[0], y)), || {
        "edge column has gaps".into()
    })?;
    let n = canny(&step, 1100.0).unwrap().count();
    ensure(n == 0, || format!("step at 1100 gave {n} edge pixels"))?;
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!(
        "flat 0 px, step@100 one full column (x={}), step@1100 0 px, {:.2?}",
        cols[0],
        start.elapsed()
    ))
}

// 3 -------------------------------------------------------------------------

fn ramp(x: f64, [a, b, c, d]: [f64; 4]) -> f64 {
    if (b..=c).contains(&x) {
        1.0
    } else if x <= a || x >= d {
        0.0
    } else if x < b {
        (x - a) / (b - a)
    } else {
        (d - x) / (d - c)
    }
}

/// Mamdani min/max/centroid over 4096 uniform samples of [-1.5, 4.5].
fn fis_oracle(count: f64) -> f64 {
    const INF: f64 = f64::INFINITY;
    let inputs = [
        [-INF, -INF, 2.0, 5.0],
        [2.0, 5.0, 5.0, 10.0],
        [5.0, 10.0, 20.0, 25.0],
        [20.0, 30.0, 30.0, 40.0],
        [30.0, 40.0, INF, INF],
    ];
    let outputs = [
        [-1.5, -1.0, -1.0, -0.5],
        [-0.5, -0.25, -0.25, 0.0],
        [-0.5, 0.0, 0.0, 0.5],
        [0.0, 0.25, 0.25, 0.5],
        [3.5, 4.0, 4.0, 4.5],
    ];
    let (mut moment, mut area) = (0.0, 0.0);
    for i in 0..4096 {
        let z = -1.5 + 6.0 * f64::from(i) / 4095.0;
        let mu = inputs
            .iter()
            .zip(&outputs)
            .map(|(inp, out)| ramp(count, *inp).min(ramp(z, *out)))
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

fn fis_equivalence() -> Check {
    let start = Instant::now();
    let system = FuzzySystem::default();
    let mut worst = 0.0f64;
    for k in 0..=160 {
        let c = f64::from(k) * 0.5;
        worst = worst.max((fis_delta(c, &system) - fis_oracle(c)).abs());
    }
    ensure(worst <= 1e-6, || format!("max |diff| {worst:e}"))?;
    for (c, want) in [(0.0, -1.0), (15.0, 0.0), (60.0, 4.0)] {
        let got = fis_delta(c, &system);
        ensure((got - want).abs() <= 1e-6, || {
            format!("delta({c}) = {got}, expected {want}")
        })?;
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!(
        "161 counts, max |diff| {worst:.1e}; delta(0,15,60) = ({:.6}, {:.6}, {:.6}), {:.2?}",
        fis_delta(0.0, &system),
        fis_delta(15.0, &system),
        fis_delta(60.0, &system),
        start.elapsed()
    ))
}

// 4, 5, 8 -------------------------------------------------------------------

struct ClosedLoopRun {
    traces: Vec<FrameTrace>,
    elapsed: Duration,
    invariant_failure: Option<String>,
}

fn closed_loop_run() -> ClosedLoopRun {
    let start = Instant::now();
    let spec = SceneSpec {
        width: 1280,
        height: 720,
        lane_marks: 2,
        noise_sigma: 5.0,
        ..SceneSpec::default()
    };
    let clip = generate_clip(&spec, 100).unwrap();
    let config = PipelineConfig::default();
    let origin = Instant::now();
    let clock = move || origin.elapsed().as_secs_f64() * 1e3;
    let mut processor = ClipProcessor::with_clock(&config, clock).unwrap();
    let mut traces: Vec<FrameTrace> = Vec::new();
    let mut invariant_failure = None;
    for (i, frame) in clip.frames.iter().enumerate() {
        let (out, trace) = processor.process(frame).unwrap();
        let problem = if out.dims() != frame.dims() || out.as_bgr().len() != frame.as_bgr().len() {
            Some("shape changed")
        } else if out.plane(Plane::Green) != frame.plane(Plane::Green) {
            Some("green plane differs")
        } else if traces.last().is_some_and(|prev| {
            trace.th_high_used != (prev.th_high_used + prev.delta_applied).clamp(1.0, 1443.0)
        }) {
            Some("threshold recurrence broken")
        } else {
            None
        };
        if let Some(p) = problem {
            invariant_failure.get_or_insert_with(|| format!("frame {i}: {p}"));
        }
        traces.push(trace);
    }
    ClosedLoopRun {
        traces,
        elapsed: start.elapsed(),
        invariant_failure,
    }
}

fn convergence(run: &ClosedLoopRun) -> Check {
    let th: Vec<f64> = run.traces.iter().map(|t| t.th_high_used).collect();
    ensure(th[0] == 1.0, || format!("first frame used {}", th[0]))?;
    let worst_step = th[30..]
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max);
    ensure(worst_step <= 0.5, || {
        format!("|dth| reached {worst_step} after frame 30")
    })?;
    let counts: Vec<usize> = run.traces[30..].iter().map(|t| t.line_count).collect();
    let (lo, hi) = (*counts.iter().min().unwrap(), *counts.iter().max().unwrap());
    ensure(lo >= 5 && hi <= 25, || {
        format!("steady-state line counts span [{lo}, {hi}]")
    })?;
    within(run.elapsed, Duration::from_secs(60))?;
    Ok(format!(
        "th 1 -> {:.3}, max |dth| after frame 30 = {worst_step:.4}, lines in [{lo}, {hi}], {:.1?}",
        th[99], run.elapsed
    ))
}

fn output_invariants(run: &ClosedLoopRun) -> Check {
    match &run.invariant_failure {
        Some(f) => Err(f.clone()),
        None => Ok(format!(
            "{} frames: shape kept, green plane identical, th recurrence exact",
            run.traces.len()
        )),
    }
}

fn throughput(run: &ClosedLoopRun) -> Check {
    let n = run.traces.len() as f64;
    let mean = run.traces.iter().map(|t| t.timings.total_ms).sum::<f64>() / n;
    let max = run
        .traces
        .iter()
        .map(|t| t.timings.total_ms)
        .fold(0.0, f64::max);
    ensure(mean <= 100.0, || format!("mean {mean:.1} ms per frame"))?;
    Ok(format!(
        "mean {mean:.1} ms, max {max:.1} ms per 1280x720 frame"
    ))
}

// 6 -------------------------------------------------------------------------

fn cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_lanetune"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!(
            "lanetune {} failed: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn digests(dir: &Path) -> Vec<(String, String)> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "png") || p.ends_with(TRACE_FILE))
        .collect();
    files.sort();
    files
        .iter()
        .map(|p| {
            let digest = Sha256::digest(fs::read(p).unwrap());
            let hex = digest.iter().map(|b| format!("{b:02x}")).collect();
            (p.file_name().unwrap().to_string_lossy().into_owned(), hex)
        })
        .collect()
}

fn determinism() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = |name: &str| tmp.path().join(name).to_string_lossy().into_owned();
    cli(&["synth", "-n", "6", "-o", &p("clip")])?;
    cli(&["process", &p("clip"), "-o", &p("run1"), "--no-timings"])?;
    cli(&["process", &p("clip"), "-o", &p("run2"), "--no-timings"])?;
    let (a, b) = (
        digests(&tmp.path().join("run1")),
        digests(&tmp.path().join("run2")),
    );
    ensure(a.len() == 7, || {
        format!("expected 6 PNGs + trace, found {}", a.len())
    })?;
    for ((name, x), (_, y)) in a.iter().zip(&b) {
        ensure(x == y, || format!("{name} differs: {x} vs {y}"))?;
    }
    ensure(a == b, || "file sets differ".into())?;
    Ok("6 PNGs + trace.jsonl, SHA-256 identical across 2 runs".into())
}

// 7 -------------------------------------------------------------------------

fn evaluator() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let clip_dir = tmp.path().join("clip");
    cli(&["synth", "-n", "3", "-o", &clip_dir.to_string_lossy()])?;
    let gt_path = clip_dir.join(GROUND_TRUTH_FILE);
    let gts = read_lane_records(&gt_path).map_err(|e| e.to_string())?;
    let params = EvalParams::default();
    let s = evaluate_clip(&gts, &gts, &params).map_err(|e| e.to_string())?;
    ensure(
        (s.accuracy, s.precision, s.recall) == (1.0, 1.0, 1.0),
        || format!("self-test gave {s:?}"),
    )?;

    let out = Command::new(env!("CARGO_BIN_EXE_lanetune"))
        .args(["eval"])
        .arg(&gt_path)
        .arg(&gt_path)
        .output()
        .map_err(|e| e.to_string())?;
    let printed = String::from_utf8_lossy(&out.stdout);
    ensure(
        printed.trim() == r#"{"accuracy":1.0,"precision":1.0,"recall":1.0}"#,
        || format!("CLI printed {printed}"),
    )?;

    let two: Vec<LaneRecord> = gts.iter().filter(|r| r.lanes.len() == 2).cloned().collect();
    ensure(!two.is_empty(), || {
        "synthetic ground truth lacks 2-lane frames".into()
    })?;
    let one: Vec<LaneRecord> = two
        .iter()
        .map(|r| LaneRecord {
            lanes: r.lanes[..1].to_vec(),
            ..r.clone()
        })
        .collect();
    let one =
        parse_lane_records(format_lane_records(&one).as_bytes()).map_err(|e| e.to_string())?;
    let s = evaluate_clip(&one, &two, &params).map_err(|e| e.to_string())?;
    ensure(
        (s.accuracy, s.precision, s.recall) == (0.5, 1.0, 0.5),
        || format!("2 gt / 1 perfect pred gave {s:?}"),
    )?;
    Ok("self-test (1, 1, 1) via library and CLI; 2 gt / 1 perfect pred (0.5, 1, 0.5)".into())
}

// ---------------------------------------------------------------------------

fn report(number: u32, name: &str, check: impl FnOnce() -> Check) -> bool {
    let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
        let msg = panic
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into());
        Err(format!("panic: {msg}"))
    });
    let (tag, detail) = match &outcome {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    println!("criterion {number} [{tag}] {name}: {detail}");
    outcome.is_ok()
}

fn main() {
    // quiet the default hook; panics are reported through `report`
    std::panic::set_hook(Box::new(|_| {}));
    let mut ok = true;
    ok &= report(1, "bilateral oracle", bilateral_oracle);
    ok &= report(2, "canny suite", canny_suite);
    ok &= report(3, "fuzzy equivalence", fis_equivalence);
    let run = catch_unwind(closed_loop_run);
    let run_failed = || Err::<String, _>("closed-loop run panicked".to_string());
    match &run {
        Ok(run) => {
            ok &= report(4, "closed-loop convergence", || convergence(run));
            ok &= report(5, "output invariants", || output_invariants(run));
        }
        Err(_) => {
            ok &= report(4, "closed-loop convergence", run_failed);
            ok &= report(5, "output invariants", run_failed);
        }
    }
    ok &= report(6, "determinism", determinism);
    ok &= report(7, "evaluator", evaluator);
    match &run {
        Ok(run) => ok &= report(8, "throughput", || throughput(run)),
        Err(_) => ok &= report(8, "throughput", run_failed),
    }
    if !ok {
        std::process::exit(1);
    }
}
