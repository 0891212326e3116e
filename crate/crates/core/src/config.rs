//! Camera description files.
//!
//! ```toml
//! [sensor]
//! pixel_pitch_mm = 0.009
//! micro_image_px = 13
//!
//! [mla]
//! lenses_h = 281
//! lenses_v = 188
//! pitch_mm = 0.125
//! f_s_mm = 2.75
//! # or a prescription: r1_mm, r2_mm, t_mm, n
//!
//! [main_lens]
//! f_u_mm = 197.1264
//! exit_pupil_inf_mm = 100.5
//! h1h2_mm = 147.4618
//!
//! [focus]
//! d_f_mm = inf
//! ```
//!
//! An optional `[reference]` table lists published values that
//! `spc verify` compares against.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::optics::{
    mla_cardinal_points, CameraConfig, FocusSetting, MainLensSpec, MicroLensSpec, Prescription,
    SensorSpec,
};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SensorSection {
    pixel_pitch_mm: f64,
    micro_image_px: usize,
    width_px: Option<usize>,
    height_px: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MlaSection {
    lenses_h: usize,
    lenses_v: usize,
    pitch_mm: f64,
    f_s_mm: Option<f64>,
    r1_mm: Option<f64>,
    r2_mm: Option<f64>,
    t_mm: Option<f64>,
    n: Option<f64>,
    h1h2_mm: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MainLensSection {
    f_u_mm: f64,
    b_u_inf_mm: Option<f64>,
    exit_pupil_inf_mm: f64,
    h1h2_mm: f64,
    v1h1_mm: Option<f64>,
    pupil_diameter_mm: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FocusSection {
    d_f_mm: Option<f64>,
    d_f: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CameraFileRaw {
    sensor: SensorSection,
    mla: MlaSection,
    main_lens: MainLensSection,
    focus: FocusSection,
    reference: Option<Reference>,
}

/// Expected baseline between viewpoints `from` and `from + gap`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineRef {
    pub gap: usize,
    pub mm: f64,
    pub from: Option<i32>,
}

/// Expected relative tilt magnitude in degrees; the sign as printed is
/// ignored.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TiltRef {
    pub gap: usize,
    pub deg: f64,
    pub from: Option<i32>,
}

/// Expected triangulated distance (mm from the entrance pupil, possibly
/// infinite).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceRef {
    pub gap: usize,
    pub dx: f64,
    pub mm: f64,
    pub from: Option<i32>,
}

/// Published values for one camera setup.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reference {
    pub b_u_mm: Option<f64>,
    pub exit_pupil_mm: Option<f64>,
    /// Front vertex to entrance pupil distance.
    pub v1_a_mm: Option<f64>,
    #[serde(default)]
    pub baselines: Vec<BaselineRef>,
    #[serde(default)]
    pub tilts: Vec<TiltRef>,
    #[serde(default)]
    pub distances: Vec<DistanceRef>,
    /// Values measured in a real-lens simulation; compared loosely.
    pub simulation: Option<Box<Reference>>,
}

/// A parsed camera file.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraFile {
    pub camera: CameraConfig,
    pub reference: Option<Reference>,
}

impl CameraFile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: CameraFileRaw = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let camera = build(&raw)?;
        camera.validate()?;
        Ok(Self {
            camera,
            reference: raw.reference,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }
}

/// Parses only the camera description.
pub fn load_camera(path: impl AsRef<Path>) -> Result<CameraConfig> {
    Ok(CameraFile::load(path)?.camera)
}

fn build(raw: &CameraFileRaw) -> Result<CameraConfig> {
    let mla = &raw.mla;
    let prescription = match (mla.r1_mm, mla.r2_mm, mla.t_mm, mla.n) {
        (Some(r1), Some(r2), Some(t), Some(n)) => Some(Prescription {
            thickness: t,
            refractive_index: n,
            radius_front: r1,
            radius_back: r2,
        }),
        (None, None, None, None) => None,
        _ => {
            return Err(Error::config(
                "mla",
                "a prescription needs all of r1_mm, r2_mm, t_mm and n",
            ))
        }
    };
    let derived = prescription
        .map(|p| {
            mla_cardinal_points(
                p.thickness,
                p.refractive_index,
                p.radius_front,
                p.radius_back,
            )
            .map_err(|e| Error::config("mla", e.to_string()))
        })
        .transpose()?;
    let focal_length = match (mla.f_s_mm, derived) {
        (Some(f), _) => f,
        (None, Some((f, _))) => f,
        (None, None) => {
            return Err(Error::config(
                "mla.f_s_mm",
                "give f_s_mm or a full prescription",
            ))
        }
    };
    let principal_gap = mla.h1h2_mm.or(derived.map(|(_, gap)| gap)).unwrap_or(0.0);

    let m = raw.sensor.micro_image_px;
    let sensor = SensorSpec {
        pixel_pitch: raw.sensor.pixel_pitch_mm,
        micro_image_size: m,
        image_width_px: raw.sensor.width_px.unwrap_or(mla.lenses_h * m),
        image_height_px: raw.sensor.height_px.unwrap_or(mla.lenses_v * m),
    };

    let lens = &raw.main_lens;
    if let Some(b_inf) = lens.b_u_inf_mm {
        if (b_inf - lens.f_u_mm).abs() > 1e-9 {
            return Err(Error::config(
                "main_lens.b_u_inf_mm",
                format!(
                    "image distance at infinity focus must equal f_u_mm = {}, got {b_inf}",
                    lens.f_u_mm
                ),
            ));
        }
    }

    let d_f = match (raw.focus.d_f_mm, raw.focus.d_f) {
        (Some(d), None) | (None, Some(d)) => d,
        (Some(_), Some(_)) => {
            return Err(Error::config(
                "focus",
                "give either d_f_mm or d_f, not both",
            ))
        }
        (None, None) => return Err(Error::config("focus.d_f_mm", "missing")),
    };
    if d_f.is_nan() || d_f == f64::NEG_INFINITY {
        return Err(Error::config(
            "focus.d_f_mm",
            format!("invalid focus distance {d_f}"),
        ));
    }

    Ok(CameraConfig {
        sensor,
        mla: MicroLensSpec {
            focal_length,
            pitch: mla.pitch_mm,
            prescription,
            principal_gap,
            count_h: mla.lenses_h,
            count_v: mla.lenses_v,
        },
        main_lens: MainLensSpec {
            focal_length: lens.f_u_mm,
            exit_pupil_dist_inf: lens.exit_pupil_inf_mm,
            principal_gap: lens.h1h2_mm,
            front_vertex_to_h1: lens.v1h1_mm,
            entrance_pupil_diameter: lens.pupil_diameter_mm,
        },
        focus: FocusSetting::from_mm(d_f),
    })
}
