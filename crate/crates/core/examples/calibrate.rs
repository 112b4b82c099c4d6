//! Segments random phantoms and prints per-grain accuracy.
//!
//! cargo run --release -p palynseg --example calibrate -- [first_seed] [end_seed]

use palynseg::phantom::{generate, random_spec, score, DEFAULT_IOU_THRESHOLD};
use palynseg::{segment_image, PipelineConfig};

fn main() {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("seed")).collect();
    let from = args.first().copied().unwrap_or(0);
    let to = args.get(1).copied().unwrap_or(from + 10);
    let cfg = PipelineConfig::default();
    for seed in from..to {
        let spec = random_spec(seed, 1024, 1024, 1 + (seed as usize % 3));
        let (img, truth) = generate(&spec).unwrap();
        let t0 = std::time::Instant::now();
        let seg = segment_image(&img, &cfg).unwrap();
        let secs = t0.elapsed().as_secs_f64();
        let scored: Vec<_> = seg.records.iter().map(|r| r.to_scored(1024, 1024)).collect();
        let s = score(&scored, &truth, DEFAULT_IOU_THRESHOLD);
        println!(
            "seed {seed}: {secs:.2} s, matched {}/{}, {} false positive(s), {} rejected",
            s.n_matched,
            s.n_truth,
            s.false_positives,
            seg.rejected.len()
        );
        for g in &s.grains {
            let tg = &truth.grains[g.truth_index];
            let fmt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.2}"));
            println!(
                "  {:?} r_in {:.0} t {:.0}: iou {} grain rms {} inner rms {} thickness err {}",
                spec.grains[g.truth_index].interior_style,
                tg.inner_radius,
                tg.thickness(),
                fmt(Some(g.iou)),
                fmt(g.grain_rms),
                fmt(g.inner_rms),
                fmt(g.thickness_error),
            );
        }
    }
}
