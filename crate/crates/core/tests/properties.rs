use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spc_core::disparity::{block_match, sad_cost, subpixel_refine, MatchParams};
use spc_core::lightfield::{decode, flatten, RawLightFieldImage};
use spc_core::optics::{exit_pupil_at_focus, solve_image_distance, CameraConfig, FocusSetting};
use spc_core::presets;
use spc_core::ray_model::{Geometry, TriangulationQuery, VirtualCameraArray};
use spc_core::GrayImage;

fn lens(index: usize) -> spc_core::MainLensSpec {
    [
        presets::main_lens_f193(),
        presets::main_lens_f90(),
        presets::main_lens_f197(),
    ][index]
}

fn camera(lens_index: usize, short_mla: bool, d_f: f64) -> CameraConfig {
    let mla = if short_mla {
        presets::mla_i()
    } else {
        presets::mla_ii()
    };
    presets::camera(lens(lens_index), mla, FocusSetting::from_mm(d_f), 13)
}

fn focus_strategy() -> impl Strategy<Value = f64> {
    prop_oneof![Just(f64::INFINITY), 1000.0..20_000.0f64]
}

fn random_image(w: usize, h: usize, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GrayImage::from_fn(w, h, |_, _| rng.random_range(0..256) as f32)
}

fn shift_right(image: &GrayImage, shift: usize, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GrayImage::from_fn(image.width(), image.height(), |x, y| {
        if x >= shift {
            image.get(x - shift, y)
        } else {
            rng.random_range(0..256) as f32
        }
    })
}

/// Straightforward SAD matcher used as a reference.
fn brute_force_map(
    left: &GrayImage,
    right: &GrayImage,
    block: usize,
    max_d: i32,
) -> Vec<Option<i32>> {
    let (w, h) = (left.width() as i32, left.height() as i32);
    let r = (block / 2) as i32;
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let mut best: Option<(f64, i32)> = None;
            let mut complete = true;
            for d in -max_d..=max_d {
                let mut total = 0.0f64;
                for v in -r..=r {
                    for u in -r..=r {
                        let (xl, xr, yy) = (x + u, x + u + d, y + v);
                        if xl < 0 || xr < 0 || xl >= w || xr >= w || yy < 0 || yy >= h {
                            complete = false;
                            continue;
                        }
                        let a = left.get(xl as usize, yy as usize) as f64;
                        let b = right.get(xr as usize, yy as usize) as f64;
                        total += (a - b).abs();
                    }
                }
                let better = match best {
                    None => true,
                    Some((c, bd)) => total < c || (total == c && d.abs() < bd.abs()),
                };
                if better {
                    best = Some((total, d));
                }
            }
            out.push(if complete { best.map(|(_, d)| d) } else { None });
        }
    }
    out
}

#[test]
fn sad_map_matches_brute_force_on_random_pairs() {
    for seed in 0..8u64 {
        let left = random_image(32, 32, seed);
        let right = random_image(32, 32, seed + 100);
        for (block, max_d) in [(3usize, 3usize), (5, 4), (7, 2)] {
            let params = MatchParams::new(block, max_d, false).unwrap();
            let map = block_match(&left, &right, &params).unwrap();
            let reference = brute_force_map(&left, &right, block, max_d as i32);
            for (idx, expected) in reference.iter().enumerate() {
                let (x, y) = (idx % 32, idx / 32);
                assert_eq!(
                    map.get(x, y),
                    expected.map(|d| d as f64),
                    "seed {seed} at ({x}, {y})"
                );
            }
        }
    }
}

#[test]
fn sad_cost_matches_brute_force_on_11x11_windows() {
    let left = random_image(40, 20, 7);
    let right = random_image(40, 20, 8);
    for d in -3..=3 {
        let mut total = 0.0f64;
        for y in 10 - 5..=10 + 5 {
            for x in 20 - 5..=20 + 5 {
                total +=
                    (left.get(x, y) as f64 - right.get((x as i32 + d) as usize, y) as f64).abs();
            }
        }
        assert_eq!(sad_cost(&left, &right, 20, 10, d, 11).unwrap(), total);
    }
}

#[test]
fn parabolic_offset_tracks_dense_subpixel_search() {
    let profile = |x: f64| (x * 0.7).sin() * 40.0 + (x * 0.23).cos() * 25.0 + 100.0;
    for true_shift in [0.2, -0.35, 1.3, 2.45] {
        let left = GrayImage::from_fn(80, 9, |x, _| profile(x as f64) as f32);
        let right = GrayImage::from_fn(80, 9, |x, _| profile(x as f64 - true_shift) as f32);
        // Dense search at 0.01 px over the continuous right image.
        let (x0, y0, r) = (40usize, 4usize, 4i32);
        // Rows are identical, so one row of the window suffices.
        let cost_at = |d: f64| -> f64 {
            (-r..=r)
                .map(|u| {
                    let xl = x0 as f64 + u as f64;
                    (profile(xl) - profile(xl + d - true_shift)).abs()
                })
                .sum()
        };
        let dense = (-400..=400)
            .map(|k| k as f64 * 0.01)
            .min_by(|a, b| cost_at(*a).total_cmp(&cost_at(*b)))
            .unwrap();
        let map = block_match(&left, &right, &MatchParams::new(9, 4, true).unwrap()).unwrap();
        let measured = map.get(x0, y0).unwrap();
        assert!((dense - true_shift).abs() < 0.02);
        assert!(
            (measured - dense).abs() < 0.15,
            "shift {true_shift}: {measured} vs {dense}"
        );
    }
    assert_eq!(subpixel_refine(4.0, 1.0, 2.0), 0.25);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn triangulation_ignores_virtual_image_distance(
        lens_index in 0usize..3,
        short_mla in any::<bool>(),
        d_f in focus_strategy(),
        gap in 1usize..=12,
        dx in -3.0..6.0f64,
    ) {
        let config = camera(lens_index, short_mla, d_f);
        let g = Geometry::horizontal(&config).unwrap();
        let query = TriangulationQuery::new(gap, dx);
        let reference = g.virtual_camera_array(1.0).unwrap().triangulate(&query).unwrap();
        for b_n in [0.1, 1000.0] {
            let z = g.virtual_camera_array(b_n).unwrap().triangulate(&query).unwrap();
            if reference.is_infinite() {
                prop_assert!(z.is_infinite());
            } else {
                prop_assert!(((z - reference) / reference).abs() < 1e-12, "{z} vs {reference}");
            }
        }
    }

    #[test]
    fn virtual_cameras_are_equally_spaced(
        lens_index in 0usize..3,
        short_mla in any::<bool>(),
        d_f in focus_strategy(),
    ) {
        let config = camera(lens_index, short_mla, d_f);
        let array = Geometry::horizontal(&config).unwrap().virtual_camera_array(1.0).unwrap();
        let b1 = array.baseline(0, 1).unwrap();
        for i in -6..6 {
            prop_assert!((array.baseline(i, 1).unwrap() - b1).abs() < 1e-9);
        }
        prop_assert_eq!(array.position(0).unwrap(), 0.0);
        prop_assert_eq!(array.tilt(0).unwrap(), 0.0);
        for i in 1..=6 {
            prop_assert!((array.tilt(-i).unwrap() + array.tilt(i).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn measurement_inversions_round_trip(
        lens_index in 0usize..3,
        short_mla in any::<bool>(),
        d_f in focus_strategy(),
        gap in 1usize..=12,
        dx in 0.0..6.0f64,
    ) {
        let config = camera(lens_index, short_mla, d_f);
        let array = Geometry::horizontal(&config).unwrap().virtual_camera_array(1.0).unwrap();
        let query = TriangulationQuery::new(gap, dx);
        let z = array.triangulate(&query).unwrap();
        prop_assume!(z.is_finite() && z > 0.0);
        let origin = VirtualCameraArray::default_origin(gap);
        let baseline = array.baseline(origin, gap).unwrap();
        let tilt = array.signed_relative_tilt(origin, gap).unwrap();
        let measured_b = array.measure_baseline(&query, z).unwrap();
        prop_assert!(((measured_b - baseline) / baseline).abs() < 1e-9);
        let measured_tilt = array.measure_tilt(&query, z, baseline).unwrap();
        prop_assert!((measured_tilt - tilt).abs() <= 1e-9 * tilt.abs().max(1e-6));
    }

    #[test]
    fn focus_solver_fixed_point_and_monotonicity(
        lens_index in 0usize..3,
        d_f in 900.0..50_000.0f64,
        step in 1.0..500.0f64,
    ) {
        let l = lens(lens_index);
        let b = solve_image_distance(l.focal_length, l.principal_gap, d_f).unwrap();
        let a = d_f - b - l.principal_gap;
        prop_assert!((1.0 / l.focal_length - 1.0 / b - 1.0 / a).abs() < 1e-12);
        prop_assert!(b > l.focal_length);
        let nearer = solve_image_distance(l.focal_length, l.principal_gap, d_f - step).unwrap();
        prop_assert!(nearer > b);
        let d_ap = exit_pupil_at_focus(b, l.focal_length, l.exit_pupil_dist_inf);
        prop_assert!(((d_ap - b) - (l.exit_pupil_dist_inf - l.focal_length)).abs() < 1e-9);
    }

    #[test]
    fn decode_flatten_is_bit_exact(
        lenses_h in 1usize..8,
        lenses_v in 1usize..8,
        half in 0usize..4,
        seed in any::<u64>(),
    ) {
        let m = 2 * half + 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let image = GrayImage::from_fn(lenses_h * m, lenses_v * m, |_, _| rng.random::<f32>());
        let raw = RawLightFieldImage::new(image, m).unwrap();
        let back = flatten(&decode(&raw));
        prop_assert_eq!(back, raw);
    }

    #[test]
    fn integer_shifts_are_recovered(shift in 0usize..=5, seed in any::<u64>()) {
        let left = random_image(64, 24, seed);
        // The right view holds the left content `shift` pixels further right.
        let right = shift_right(&left, shift, seed ^ 1);
        let map = block_match(&left, &right, &MatchParams::new(7, 5, false).unwrap()).unwrap();
        let exact = map.valid_values().filter(|&v| v == shift as f64).count();
        prop_assert!(exact as f64 >= 0.99 * map.valid_count() as f64);
    }

    #[test]
    fn swapping_views_negates_disparity(shift in 0usize..=4, seed in any::<u64>()) {
        let left = random_image(64, 24, seed);
        let right = shift_right(&left, shift, seed ^ 2);
        let params = MatchParams::new(7, 5, true).unwrap();
        let forward = block_match(&left, &right, &params).unwrap();
        let backward = block_match(&right, &left, &params).unwrap();
        // A point at x in the left view sits at x + shift in the right view.
        let mut compared = 0;
        for y in 0..24 {
            for x in 0..64 - shift {
                if let (Some(a), Some(b)) = (forward.get(x, y), backward.get(x + shift, y)) {
                    prop_assert!((a + b).abs() <= 1.0, "{a} {b}");
                    compared += 1;
                }
            }
        }
        prop_assert!(compared > 0);
    }
}
