//! Synthetic scenes made of textured frontal planes.
//!
//! ```toml
//! background = 0.0
//!
//! [[plane]]
//! depth_mm = 2034.8
//! texture = { kind = "noise", cell_mm = 3.0, seed = 7 }
//!
//! [[plane]]
//! depth_mm = 1200.0
//! x_min_mm = 0.0
//! texture = { kind = "checker", period_mm = 10.0 }
//! ```
//!
//! Depths are measured from the entrance pupil. Object coordinates `x`, `y`
//! are in millimetres on the plane, centred on the optical axis.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::pgm;

const NOISE_LATTICE: usize = 256;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TextureSpec {
    Checker { period_mm: f64 },
    Noise { cell_mm: f64, seed: u64 },
    Image { path: PathBuf, pixel_mm: f64 },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Plane {
    pub depth_mm: f64,
    pub texture: TextureSpec,
    #[serde(default)]
    pub x_min_mm: Option<f64>,
    #[serde(default)]
    pub x_max_mm: Option<f64>,
    #[serde(default)]
    pub y_min_mm: Option<f64>,
    #[serde(default)]
    pub y_max_mm: Option<f64>,
}

impl Plane {
    pub fn new(depth_mm: f64, texture: TextureSpec) -> Self {
        Self {
            depth_mm,
            texture,
            x_min_mm: None,
            x_max_mm: None,
            y_min_mm: None,
            y_max_mm: None,
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.x_min_mm.is_none_or(|v| x >= v)
            && self.x_max_mm.is_none_or(|v| x < v)
            && self.y_min_mm.is_none_or(|v| y >= v)
            && self.y_max_mm.is_none_or(|v| y < v)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    #[serde(default)]
    pub background: f32,
    #[serde(rename = "plane", default)]
    pub planes: Vec<Plane>,
    /// Directory that relative image paths are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

/// A texture ready for sampling.
#[derive(Debug, Clone)]
pub enum Texture {
    Checker { period: f64 },
    Lattice { image: GrayImage, scale: f64 },
}

impl Texture {
    pub fn sample(&self, x: f64, y: f64) -> f32 {
        match self {
            Texture::Checker { period } => {
                let cx = (x / period).floor() as i64;
                let cy = (y / period).floor() as i64;
                if (cx + cy).rem_euclid(2) == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            Texture::Lattice { image, scale } => image.sample_wrapped(x / scale, y / scale),
        }
    }
}

impl Scene {
    pub fn new(planes: Vec<Plane>) -> Self {
        Self {
            background: 0.0,
            planes,
            base_dir: None,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let scene: Scene = toml::from_str(text).map_err(|e| Error::Scene(e.to_string()))?;
        scene.check()?;
        Ok(scene)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut scene = Self::from_toml_str(&std::fs::read_to_string(path)?)?;
        scene.base_dir = path.parent().map(Path::to_path_buf);
        Ok(scene)
    }

    fn check(&self) -> Result<()> {
        if self.planes.is_empty() {
            return Err(Error::Scene("scene has no planes".into()));
        }
        for plane in &self.planes {
            let scale = match plane.texture {
                TextureSpec::Checker { period_mm } => period_mm,
                TextureSpec::Noise { cell_mm, .. } => cell_mm,
                TextureSpec::Image { pixel_mm, .. } => pixel_mm,
            };
            if !(scale > 0.0) || !scale.is_finite() {
                return Err(Error::Scene(format!(
                    "texture scale must be positive, got {scale}"
                )));
            }
        }
        Ok(())
    }

    /// Textures in plane order.
    pub fn load_textures(&self) -> Result<Vec<Texture>> {
        self.check()?;
        self.planes
            .iter()
            .map(|plane| match &plane.texture {
                TextureSpec::Checker { period_mm } => Ok(Texture::Checker { period: *period_mm }),
                TextureSpec::Noise { cell_mm, seed } => Ok(Texture::Lattice {
                    image: noise_lattice(*seed),
                    scale: *cell_mm,
                }),
                TextureSpec::Image { path, pixel_mm } => {
                    let full = match &self.base_dir {
                        Some(dir) if path.is_relative() => dir.join(path),
                        _ => path.clone(),
                    };
                    let graymap = pgm::read(&full)?;
                    let max = graymap.maxval as f32;
                    let mut image = graymap.image;
                    image.as_mut_slice().iter_mut().for_each(|v| *v /= max);
                    Ok(Texture::Lattice {
                        image,
                        scale: *pixel_mm,
                    })
                }
            })
            .collect()
    }
}

fn noise_lattice(seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GrayImage::from_fn(NOISE_LATTICE, NOISE_LATTICE, |_, _| rng.random::<f32>())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_planes_and_bounds() {
        let scene = Scene::from_toml_str(
            r#"
            background = 0.25
            [[plane]]
            depth_mm = 1000.0
            x_min_mm = 0.0
            texture = { kind = "checker", period_mm = 5.0 }
            [[plane]]
            depth_mm = 2000.0
            texture = { kind = "noise", cell_mm = 2.0, seed = 3 }
            "#,
        )
        .unwrap();
        assert_eq!(scene.planes.len(), 2);
        assert_eq!(scene.background, 0.25);
        assert!(scene.planes[0].contains(1.0, -50.0));
        assert!(!scene.planes[0].contains(-1.0, 0.0));
        let textures = scene.load_textures().unwrap();
        assert_eq!(textures[0].sample(1.0, 1.0), 1.0);
        assert_eq!(textures[0].sample(6.0, 1.0), 0.0);
        let v = textures[1].sample(3.3, -7.1);
        assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn rejects_bad_scenes() {
        assert!(Scene::from_toml_str("background = 0.0").is_err());
        assert!(Scene::from_toml_str(
            "[[plane]]\ndepth_mm = 1.0\ntexture = { kind = \"checker\", period_mm = 0.0 }"
        )
        .is_err());
        assert!(Scene::from_toml_str(
            "[[plane]]\ndepth_mm = 1.0\ntexture = { kind = \"stripes\" }"
        )
        .is_err());
    }

    #[test]
    fn noise_is_deterministic() {
        assert_eq!(noise_lattice(9), noise_lattice(9));
        assert_ne!(noise_lattice(9), noise_lattice(10));
    }
}
