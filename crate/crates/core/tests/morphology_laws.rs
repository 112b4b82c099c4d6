use std::collections::VecDeque;

use palynseg::imgcore::{connected_components, BinaryMask, Connectivity};
use palynseg::morpho::{close, dilate, erode, erosion_sequence, fill_holes, open, DiskSE};
use proptest::prelude::*;

/// Random masks from 4 to 40 px a side. Foreground density varies per case
/// so both sparse speckle and mostly-solid blobs show up.
fn mask_strategy() -> impl Strategy<Value = BinaryMask> {
    (4usize..40, 4usize..40, 1u32..9).prop_flat_map(|(w, h, density)| {
        prop::collection::vec(0u32..10, w * h)
            .prop_map(move |v| BinaryMask::from_vec(w, h, v.into_iter().map(|d| d < density).collect()))
    })
}

/// Flood-fill labeling used as an oracle for `connected_components`.
fn flood_components(mask: &BinaryMask, eight: bool) -> Vec<Vec<(usize, usize)>> {
    let (w, h) = mask.dims();
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if !mask.get(x, y) || seen[y * w + x] {
                continue;
            }
            let mut comp = Vec::new();
            let mut queue = VecDeque::from([(x, y)]);
            seen[y * w + x] = true;
            while let Some((cx, cy)) = queue.pop_front() {
                comp.push((cx, cy));
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        if (dx == 0 && dy == 0) || (!eight && dx != 0 && dy != 0) {
                            continue;
                        }
                        let (nx, ny) = (cx as i64 + dx, cy as i64 + dy);
                        if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                            continue;
                        }
                        let (nx, ny) = (nx as usize, ny as usize);
                        if mask.get(nx, ny) && !seen[ny * w + nx] {
                            seen[ny * w + nx] = true;
                            queue.push_back((nx, ny));
                        }
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
    }
    out.sort();
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn erosion_dilation_duality(m in mask_strategy(), r in 1usize..4) {
        // Duality holds exactly when the frame band of width r is background.
        let m = m.padded(r);
        let se = DiskSE::new(r);
        prop_assert_eq!(erode(&m, &se), dilate(&m.not(), &se).not());
    }

    #[test]
    fn opening_and_closing_are_idempotent(m in mask_strategy(), r in 1usize..4) {
        let se = DiskSE::new(r);
        let o = open(&m, &se);
        let c = close(&m, &se);
        prop_assert_eq!(&open(&o, &se), &o);
        prop_assert_eq!(&close(&c, &se), &c);
        prop_assert!(o.is_subset_of(&m));
        prop_assert!(m.is_subset_of(&c));
    }

    #[test]
    fn fill_holes_is_extensive_and_idempotent(m in mask_strategy()) {
        let f = fill_holes(&m);
        prop_assert!(m.is_subset_of(&f));
        prop_assert_eq!(fill_holes(&f), f);
    }

    #[test]
    fn erosion_sequence_is_nested(m in mask_strategy(), r in 1usize..4) {
        prop_assume!(!m.is_empty());
        let se = DiskSE::new(r);
        let seq = erosion_sequence(&m, &se).unwrap();
        prop_assert_eq!(&seq[1], &erode(&m, &se));
        prop_assert!(seq.last().unwrap().is_empty());
        for pair in seq.windows(2) {
            prop_assert!(pair[1].is_subset_of(&pair[0]));
            prop_assert!(pair[1].count() < pair[0].count());
        }
    }

    #[test]
    fn labeling_matches_flood_fill(m in mask_strategy(), eight in any::<bool>()) {
        let conn = if eight { Connectivity::Eight } else { Connectivity::Four };
        let labeling = connected_components(&m, conn);
        let mut got: Vec<Vec<(usize, usize)>> = labeling
            .components
            .iter()
            .map(|c| {
                let mut p = c.pixels.clone();
                p.sort_unstable();
                p
            })
            .collect();
        got.sort();
        prop_assert_eq!(got, flood_components(&m, eight));
        let total: usize = labeling.components.iter().map(|c| c.area()).sum();
        prop_assert_eq!(total, m.count());
    }
}

fn disk(size: usize, r: f64) -> BinaryMask {
    let c = (size / 2) as f64;
    BinaryMask::from_fn(size, size, |x, y| (x as f64 - c).hypot(y as f64 - c) <= r)
}

#[test]
fn eroded_disk_radius() {
    let eroded = erode(&disk(81, 30.0), &DiskSE::new(3));
    let expect = std::f64::consts::PI * 27.0 * 27.0;
    assert!((eroded.count() as f64 - expect).abs() / expect < 0.05);
}

#[test]
fn sequence_length_scales_with_radius() {
    let lens: Vec<f64> = [20.0, 30.0, 40.0, 50.0]
        .iter()
        .map(|&r| erosion_sequence(&disk(121, r), &DiskSE::new(2)).unwrap().len() as f64)
        .collect();
    let slope = (lens[3] - lens[0]) / 30.0;
    assert!((slope - 0.5).abs() <= 0.1, "slope {slope}");
}
