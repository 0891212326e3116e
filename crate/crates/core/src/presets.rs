//! Reference lens data for the custom-built camera and the first-generation
//! Lytro estimate. Values are at 550 nm.

use crate::optics::{
    CameraConfig, FocusSetting, MainLensSpec, MicroLensSpec, Prescription, SensorSpec,
};

pub const PIXEL_PITCH_MM: f64 = 0.009;
pub const LENS_PITCH_MM: f64 = 0.125;
pub const LENSES_H: usize = 281;
pub const LENSES_V: usize = 188;

/// Published principal-plane-to-front-vertex distances are not available;
/// these are implied by the published front-vertex-to-entrance-pupil
/// distances (240.2113 mm and 27.4627 mm).
pub const F193_FRONT_VERTEX_TO_H1: f64 = 383.417_571;
pub const F90_FRONT_VERTEX_TO_H1: f64 = 33.074_491;

fn mla(radius_front: f64, focal_length: f64) -> MicroLensSpec {
    let prescription = Prescription {
        thickness: 1.1,
        refractive_index: 1.5626,
        radius_front,
        radius_back: f64::NEG_INFINITY,
    };
    MicroLensSpec {
        focal_length,
        pitch: LENS_PITCH_MM,
        prescription: Some(prescription),
        principal_gap: 0.396,
        count_h: LENSES_H,
        count_v: LENSES_V,
    }
}

/// Short focal length array, `f_s = 1.25 mm`.
pub fn mla_i() -> MicroLensSpec {
    mla(0.70325, 1.25)
}

/// Long focal length array, `f_s = 2.75 mm`.
pub fn mla_ii() -> MicroLensSpec {
    mla(1.54715, 2.75)
}

pub fn main_lens_f193() -> MainLensSpec {
    MainLensSpec {
        focal_length: 193.2935,
        exit_pupil_dist_inf: 111.0324,
        principal_gap: -65.5563,
        front_vertex_to_h1: Some(F193_FRONT_VERTEX_TO_H1),
        entrance_pupil_diameter: None,
    }
}

pub fn main_lens_f90() -> MainLensSpec {
    MainLensSpec {
        focal_length: 90.4036,
        exit_pupil_dist_inf: 85.1198,
        principal_gap: -1.2273,
        front_vertex_to_h1: Some(F90_FRONT_VERTEX_TO_H1),
        entrance_pupil_diameter: None,
    }
}

pub fn main_lens_f197() -> MainLensSpec {
    MainLensSpec {
        focal_length: 197.1264,
        exit_pupil_dist_inf: 100.5,
        principal_gap: 147.4618,
        front_vertex_to_h1: None,
        entrance_pupil_diameter: None,
    }
}

/// Camera built on the custom sensor with `micro_image_size` pixels per
/// micro image.
pub fn camera(
    main_lens: MainLensSpec,
    mla: MicroLensSpec,
    focus: FocusSetting,
    micro_image_size: usize,
) -> CameraConfig {
    CameraConfig {
        sensor: SensorSpec {
            pixel_pitch: PIXEL_PITCH_MM,
            micro_image_size,
            image_width_px: mla.count_h * micro_image_size,
            image_height_px: mla.count_v * micro_image_size,
        },
        mla,
        main_lens,
        focus,
    }
}

/// First-generation Lytro at infinity focus with main lens focal length
/// `f_u`. Pupil positions are undisclosed; the pupils are placed on the
/// principal planes, which does not affect baselines at infinity focus.
pub fn lytro(f_u: f64) -> CameraConfig {
    let mla = MicroLensSpec {
        focal_length: 0.025,
        pitch: 0.0139,
        prescription: None,
        principal_gap: 0.0,
        count_h: 329,
        count_v: 329,
    };
    let micro_image_size = 9;
    CameraConfig {
        sensor: SensorSpec {
            pixel_pitch: 0.0014,
            micro_image_size,
            image_width_px: mla.count_h * micro_image_size,
            image_height_px: mla.count_v * micro_image_size,
        },
        mla,
        main_lens: MainLensSpec {
            focal_length: f_u,
            exit_pupil_dist_inf: f_u,
            principal_gap: 0.0,
            front_vertex_to_h1: None,
            entrance_pupil_diameter: None,
        },
        focus: FocusSetting::Infinity,
    }
}
