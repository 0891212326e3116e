use spc_core::disparity::{block_match, MatchParams};
use spc_core::lightfield::{decode, extract_view};
use spc_core::optics::{CameraConfig, FocusSetting};
use spc_core::oracle::render_synthetic_scene;
use spc_core::presets;
use spc_core::ray_model::{Geometry, TriangulationQuery};
use spc_core::scene::{Plane, Scene, TextureSpec};
use spc_core::{DisparityMap, LightField4D};

fn f197(focus: FocusSetting) -> CameraConfig {
    presets::camera(presets::main_lens_f197(), presets::mla_ii(), focus, 13)
}

fn noise_plane(depth_mm: f64) -> Plane {
    Plane::new(
        depth_mm,
        TextureSpec::Noise {
            cell_mm: 3.0,
            seed: 11,
        },
    )
}

fn render(config: &CameraConfig, planes: Vec<Plane>) -> LightField4D {
    decode(&render_synthetic_scene(config, &Scene::new(planes)).unwrap())
}

/// Disparity between views `i` and `i + gap` on the central row.
fn match_views(lf: &LightField4D, i: i32, gap: usize, params: &MatchParams) -> DisparityMap {
    let near = extract_view(lf, i, 0).unwrap().image;
    let far = extract_view(lf, i + gap as i32, 0).unwrap().image;
    block_match(&far, &near, params).unwrap()
}

fn params(max_disparity: usize) -> MatchParams {
    MatchParams::new(15, max_disparity, true).unwrap()
}

#[test]
fn plane_at_predicted_depth_shows_predicted_disparity() {
    let config = f197(FocusSetting::Infinity);
    let array = Geometry::horizontal(&config)
        .unwrap()
        .virtual_camera_array(1.0)
        .unwrap();
    let depth = array.triangulate(&TriangulationQuery::new(4, 2.0)).unwrap();
    let lf = render(&config, vec![noise_plane(depth)]);
    let (j, h) = lf.lens_counts();
    assert_eq!((j, h), (281, 188));

    let map = match_views(&lf, -2, 4, &params(5));
    let mean = map.mean_valid().unwrap();
    assert!((mean - 2.0).abs() < 0.25, "mean disparity {mean}");
    let exact = map
        .valid_values()
        .filter(|v| (v - 2.0).abs() < 1e-6)
        .count();
    assert!(exact as f64 >= 0.99 * map.valid_count() as f64);

    // Equal spacing of the virtual cameras: any pair with the same gap sees
    // the same disparity.
    let shifted = match_views(&lf, 0, 4, &params(5));
    for (a, b) in map.valid_values().zip(shifted.valid_values()) {
        assert!((a - b).abs() < 0.1);
    }

    // Doubling the gap doubles the disparity.
    let wide = match_views(&lf, -4, 8, &params(9));
    let wide_mean = wide.mean_valid().unwrap();
    assert!(
        (wide_mean - 2.0 * mean).abs() < 0.1,
        "{wide_mean} vs {mean}"
    );
}

#[test]
fn focused_plane_has_no_disparity_and_beyond_is_negative() {
    let config = f197(FocusSetting::Finite(4000.0));
    let array = Geometry::horizontal(&config)
        .unwrap()
        .virtual_camera_array(1.0)
        .unwrap();
    let zero_plane = array.triangulate(&TriangulationQuery::new(4, 0.0)).unwrap();

    let lf = render(&config, vec![noise_plane(zero_plane)]);
    let at_focus = match_views(&lf, -2, 4, &params(5)).mean_valid().unwrap();
    assert!(at_focus.abs() < 0.05, "{at_focus}");

    let lf = render(&config, vec![noise_plane(2.0 * zero_plane)]);
    let beyond = match_views(&lf, -2, 4, &params(5)).mean_valid().unwrap();
    // Disparity for which triangulation returns twice the zero-disparity depth.
    let b_n = array.virtual_image_distance;
    let tilt = array.signed_relative_tilt(-2, 4).unwrap();
    let expected = (b_n * array.baseline(-2, 4).unwrap() / (2.0 * zero_plane) - b_n * tilt.tan())
        / array.virtual_pixel_pitch;
    assert!(beyond < -0.1, "{beyond}");
    assert!((beyond - expected).abs() < 0.25, "{beyond} vs {expected}");
}

#[test]
fn two_planes_are_separated() {
    let config = f197(FocusSetting::Infinity);
    let array = Geometry::horizontal(&config)
        .unwrap()
        .virtual_camera_array(1.0)
        .unwrap();
    let near = array.triangulate(&TriangulationQuery::new(4, 4.0)).unwrap();
    let far = array.triangulate(&TriangulationQuery::new(4, 1.0)).unwrap();
    let mut left_half = noise_plane(near);
    left_half.x_max_mm = Some(0.0);
    let lf = render(&config, vec![left_half, noise_plane(far)]);
    let map = match_views(&lf, -2, 4, &MatchParams::new(9, 6, false).unwrap());
    let values: Vec<f64> = map.valid_values().collect();
    let ones = values.iter().filter(|&&v| v == 1.0).count();
    let fours = values.iter().filter(|&&v| v == 4.0).count();
    assert!(
        ones > values.len() / 3 && fours > values.len() / 3,
        "{ones} {fours} of {}",
        values.len()
    );
    assert!(ones + fours >= values.len() * 9 / 10);
}
