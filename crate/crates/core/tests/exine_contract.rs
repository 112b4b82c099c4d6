use std::path::PathBuf;

use palynseg::exine::{
    detect_gap, edge_ratio_profile, segment_exine, EdgeRatioProfile, ExineConfig,
};
use palynseg::imgcore::{BinaryMask, Raster};
use palynseg::morpho::DiskSE;
use palynseg::phantom::{generate, PhantomGrain, PhantomSpec};
use palynseg::preproc::PreprocConfig;
use palynseg::snake::{GvfConfig, SnakeConfig};
use palynseg::Error;
use proptest::prelude::*;

const SIZE: usize = 141;
const C: f64 = 70.0;

fn radius_at(x: usize, y: usize) -> f64 {
    (x as f64 - C).hypot(y as f64 - C)
}

/// Grain of radius 60 whose outer 15 px are solid edges over an edge-free
/// interior.
fn golden_annulus() -> (BinaryMask, BinaryMask) {
    let grain = BinaryMask::from_fn(SIZE, SIZE, |x, y| radius_at(x, y) <= 60.0);
    let edges = BinaryMask::from_fn(SIZE, SIZE, |x, y| {
        let r = radius_at(x, y);
        r > 45.0 && r <= 60.0
    });
    (edges, grain)
}

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/annulus_profile.json")
}

#[test]
fn golden_annulus_profile() {
    let (edges, grain) = golden_annulus();
    let profile = edge_ratio_profile(&edges, &grain, &DiskSE::new(2), ExineConfig::default().min_profile_px).unwrap();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        let json = serde_json::to_string_pretty(&profile.ratios).unwrap() + "\n";
        std::fs::create_dir_all(golden_path().parent().unwrap()).unwrap();
        std::fs::write(golden_path(), json).unwrap();
    }
    let golden: Vec<f64> = serde_json::from_str(&std::fs::read_to_string(golden_path()).unwrap()).unwrap();
    assert_eq!(profile.ratios.len(), golden.len());
    for (a, b) in profile.ratios.iter().zip(&golden) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    // Largest drop lies between erosion indices 6 and 9, then the profile
    // is flat at zero.
    let d = &profile.derivative;
    let peak = d.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    assert!((6..9).contains(&peak), "peak at {peak}: {d:?}");
    assert!(profile.ratios[peak + 2..].iter().all(|&r| r == 0.0));
    assert!((profile.ratios[0] - (1.0 - (45.0f64 / 60.0).powi(2))).abs() < 0.03);

    // The backward scan stops on the steep fall, not on its tail.
    let cfg = ExineConfig::default();
    let gap = detect_gap(&profile, &cfg);
    assert!(gap.found);
    let j = gap.erosion_index - 1;
    assert!(j == peak || j == peak + 1, "stopped at {j}, peak {peak}");
    assert!(d[j] > cfg.tau_r && d[j + 1..].iter().all(|&v| v <= cfg.tau_r));
    let est = (gap.erosion_index * cfg.erosion_se_radius) as f64;
    assert!((est - 15.0).abs() <= (cfg.erosion_se_radius + 1) as f64, "estimate {est}");
}

fn single_grain(grain: PhantomGrain, size: usize) -> (Raster, BinaryMask, PhantomGrain) {
    let spec = PhantomSpec {
        width: size,
        height: size,
        grains: vec![grain.clone()],
        ..Default::default()
    };
    let (img, truth) = generate(&spec).unwrap();
    (img, truth.grains[0].grain_mask(size, size), grain)
}

fn run_exine(img: &Raster, grain: &BinaryMask) -> palynseg::Result<palynseg::exine::ExineSegmentation> {
    segment_exine(
        grain,
        img,
        &PreprocConfig::default(),
        &ExineConfig::default(),
        &SnakeConfig::default(),
        &GvfConfig::default(),
    )
}

#[test]
fn textured_annulus_inner_boundary() {
    let (img, grain, g) = single_grain(
        PhantomGrain {
            center: [100.3, 99.6],
            inner_radius: 45.0,
            exine_thickness: 15.0,
            edge_density: 0.12,
            ..Default::default()
        },
        200,
    );
    let seg = run_exine(&img, &grain).unwrap();
    let pts = seg.inner_contour.points();
    let rms = (pts
        .iter()
        .map(|p| ((p.x - g.center[0]).hypot(p.y - g.center[1]) - 45.0).powi(2))
        .sum::<f64>()
        / pts.len() as f64)
        .sqrt();
    assert!(rms <= 3.0, "inner RMS {rms}");
    assert_eq!(seg.exine_mask.and(&seg.inner_mask).count(), 0);
    assert_eq!(seg.exine_mask.or(&seg.inner_mask), grain);
}

#[test]
fn uniform_interior_thickness() {
    let cfg = ExineConfig::default();
    for (rin, t) in [(40.0, 10.0), (60.0, 18.0), (80.0, 25.0)] {
        let size = (2.0 * (rin + t) + 40.0) as usize;
        let c = size as f64 / 2.0;
        let (img, grain, _) = single_grain(
            PhantomGrain {
                center: [c, c],
                inner_radius: rin,
                exine_thickness: t,
                interior_sd: 0.0,
                ..Default::default()
            },
            size,
        );
        let seg = run_exine(&img, &grain).unwrap();
        let est = seg.thickness_estimate(&cfg);
        assert!((est - t).abs() <= (cfg.erosion_se_radius + 1) as f64, "r {rin} t {t} est {est}");
    }
}

#[test]
fn edge_free_disk_has_no_exine_boundary() {
    let img = Raster::from_fn(160, 160, |x, y| if (x as f64 - 80.0).hypot(y as f64 - 80.0) <= 50.0 { 90 } else { 200 });
    let grain = BinaryMask::from_fn(160, 160, |x, y| (x as f64 - 80.0).hypot(y as f64 - 80.0) <= 50.0);
    assert!(matches!(run_exine(&img, &grain), Err(Error::NoExineBoundary)));
}

#[test]
fn thick_texture_hits_guard() {
    // Texture over the whole grain: any gap would imply an exine thicker
    // than half the radius.
    let (img, grain, _) = single_grain(
        PhantomGrain {
            center: [100.0, 100.0],
            inner_radius: 10.0,
            exine_thickness: 50.0,
            edge_density: 0.12,
            ..Default::default()
        },
        200,
    );
    assert!(matches!(run_exine(&img, &grain), Err(Error::NoExineBoundary)));
}

fn ratios_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, 2..40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    /// Raising tau can only move the backward scan's stop earlier in the
    /// profile, so the erosion index never grows.
    #[test]
    fn erosion_index_never_grows_with_tau(ratios in ratios_strategy(), t1 in 0.01f64..1.0, t2 in 0.01f64..1.0) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let p = EdgeRatioProfile::from_ratios(ratios);
        let cfg = |tau_r| ExineConfig { tau_r, min_exine_px: 0, ..Default::default() };
        let a = detect_gap(&p, &cfg(lo));
        let b = detect_gap(&p, &cfg(hi));
        if b.found {
            prop_assert!(a.found);
            prop_assert!(b.erosion_index <= a.erosion_index);
        }
    }

    #[test]
    fn gap_invariant_under_scaling(ratios in ratios_strategy(), k in 0.01f64..100.0) {
        let cfg = ExineConfig::default();
        let a = detect_gap(&EdgeRatioProfile::from_ratios(ratios.clone()), &cfg);
        let scaled: Vec<f64> = ratios.iter().map(|r| r * k).collect();
        let b = detect_gap(&EdgeRatioProfile::from_ratios(scaled), &cfg);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn ratios_invariant_under_translation(bits in prop::collection::vec(any::<bool>(), 24 * 24), dx in 0usize..10, dy in 0usize..10) {
        let grain = BinaryMask::from_fn(24, 24, |x, y| (x as f64 - 11.5).hypot(y as f64 - 11.5) <= 10.0);
        let edges = BinaryMask::from_vec(24, 24, bits);
        let se = DiskSE::new(2);
        let a = edge_ratio_profile(&edges, &grain, &se, 1).unwrap();
        let off = palynseg::imgcore::Offset { x: dx, y: dy };
        let b = edge_ratio_profile(&edges.embed(off, 40, 40), &grain.embed(off, 40, 40), &se, 1).unwrap();
        prop_assert_eq!(a.ratios, b.ratios);
    }
}
