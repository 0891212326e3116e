//! Geometry of the standard plenoptic camera.
//!
//! A plenoptic camera with its micro lens array one focal length in front of
//! the sensor behaves like an array of virtual cameras sitting on the main
//! lens entrance pupil. This crate predicts where those cameras sit and how
//! they are tilted, and turns measured disparities into object distances.
//! The decoding side splits raw captures into sub-aperture views and matches
//! them. A paraxial ray tracer in [`oracle`] reproduces every prediction
//! independently.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod disparity;
pub mod error;
pub mod image;
pub mod lightfield;
pub mod optics;
pub mod oracle;
pub mod pgm;
pub mod presets;
pub mod ray_model;
pub mod scene;

pub use config::{CameraFile, Reference};
pub use disparity::{block_match, sad_cost, subpixel_refine, DisparityMap, MatchParams};
pub use error::{Error, Result};
pub use image::GrayImage;
pub use lightfield::{
    decode, extract_all_views, extract_view, flatten, LightField4D, RawLightFieldImage,
    SubApertureImage,
};
pub use optics::{
    derive_focus_state, CameraConfig, FocusSetting, FocusState, MainLensSpec, MicroLensSpec,
    SensorSpec,
};
pub use ray_model::{Geometry, TriangulationQuery, VirtualCameraArray};
