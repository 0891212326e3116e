//! Reorganising calibrated raw captures into a 4-D light field and
//! sub-aperture (viewpoint) images.
//!
//! The raw image is assumed rectified so that every micro image is exactly
//! `M × M` pixels with its centre on the central pixel. Raw column `k` maps
//! to lens `j` and viewpoint `i` through `k = j·M + c + i`, rows likewise
//! through `l = h·M + c + g`.

use ndarray::Array4;

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::optics::CameraConfig;

/// Raw index `k` of viewpoint `i` under lens `j`.
pub fn index_translate(j: usize, i: i32, micro_image_size: usize) -> Result<usize> {
    let c = (micro_image_size / 2) as i32;
    if micro_image_size.is_multiple_of(2) || i.abs() > c {
        return Err(Error::out_of_range(
            "viewpoint",
            i as i64,
            -c as i64,
            c as i64,
        ));
    }
    Ok(j * micro_image_size + (c + i) as usize)
}

/// Inverse of [`index_translate`]: `(j, i)` for raw index `k`.
pub fn index_inverse(k: usize, micro_image_size: usize) -> Result<(usize, i32)> {
    if micro_image_size == 0 || micro_image_size.is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "micro image size must be odd, got {micro_image_size}"
        )));
    }
    let c = (micro_image_size / 2) as i32;
    Ok((k / micro_image_size, (k % micro_image_size) as i32 - c))
}

/// Calibrated raw capture `K × L` with `M`-pixel micro images.
#[derive(Debug, Clone, PartialEq)]
pub struct RawLightFieldImage {
    image: GrayImage,
    micro_image_size: usize,
}

impl RawLightFieldImage {
    pub fn new(image: GrayImage, micro_image_size: usize) -> Result<Self> {
        if micro_image_size == 0 || micro_image_size.is_multiple_of(2) {
            return Err(Error::Domain(format!(
                "micro image size must be odd, got {micro_image_size}"
            )));
        }
        let (w, h) = (image.width(), image.height());
        if w % micro_image_size != 0 || h % micro_image_size != 0 {
            return Err(Error::DimensionMismatch(format!(
                "raw image {w}x{h} is not a whole number of {micro_image_size}-pixel micro images"
            )));
        }
        Ok(Self {
            image,
            micro_image_size,
        })
    }

    /// Checks the image against the lens counts of `config`.
    pub fn for_config(image: GrayImage, config: &CameraConfig) -> Result<Self> {
        let m = config.sensor.micro_image_size;
        let expected = (config.mla.count_h * m, config.mla.count_v * m);
        if (image.width(), image.height()) != expected {
            return Err(Error::DimensionMismatch(format!(
                "raw image is {}x{}, configuration expects {}x{}",
                image.width(),
                image.height(),
                expected.0,
                expected.1
            )));
        }
        Self::new(image, m)
    }

    pub fn image(&self) -> &GrayImage {
        &self.image
    }

    pub fn into_image(self) -> GrayImage {
        self.image
    }

    pub fn micro_image_size(&self) -> usize {
        self.micro_image_size
    }

    pub fn lens_counts(&self) -> (usize, usize) {
        (
            self.image.width() / self.micro_image_size,
            self.image.height() / self.micro_image_size,
        )
    }

    /// Rotates the capture by 180°; applying it twice restores the original.
    pub fn rotate_180(&self) -> Self {
        let mut data = self.image.as_slice().to_vec();
        data.reverse();
        Self {
            image: GrayImage::from_vec(self.image.width(), self.image.height(), data)
                .expect("same dimensions"),
            micro_image_size: self.micro_image_size,
        }
    }
}

/// Samples `[j, h, c + i, c + g]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LightField4D {
    samples: Array4<f32>,
}

impl LightField4D {
    pub fn micro_image_size(&self) -> usize {
        self.samples.shape()[2]
    }

    pub fn max_view(&self) -> i32 {
        (self.micro_image_size() / 2) as i32
    }

    /// `(J, H)`.
    pub fn lens_counts(&self) -> (usize, usize) {
        (self.samples.shape()[0], self.samples.shape()[1])
    }

    fn slot(&self, i: i32) -> Result<usize> {
        let c = self.max_view();
        if i.abs() > c {
            return Err(Error::out_of_range(
                "viewpoint",
                i as i64,
                -c as i64,
                c as i64,
            ));
        }
        Ok((i + c) as usize)
    }

    pub fn get(&self, j: usize, h: usize, i: i32, g: i32) -> Result<f32> {
        let (si, sg) = (self.slot(i)?, self.slot(g)?);
        self.samples
            .get([j, h, si, sg])
            .copied()
            .ok_or_else(|| Error::Domain(format!("lens ({j}, {h}) outside the array")))
    }

    pub fn samples(&self) -> &Array4<f32> {
        &self.samples
    }
}

pub fn decode(raw: &RawLightFieldImage) -> LightField4D {
    let m = raw.micro_image_size;
    let (lenses_h, lenses_v) = raw.lens_counts();
    let image = raw.image();
    let samples = Array4::from_shape_fn((lenses_h, lenses_v, m, m), |(j, h, u, v)| {
        image.get(j * m + u, h * m + v)
    });
    LightField4D { samples }
}

/// Inverse of [`decode`].
pub fn flatten(lf: &LightField4D) -> RawLightFieldImage {
    let m = lf.micro_image_size();
    let (lenses_h, lenses_v) = lf.lens_counts();
    let image = GrayImage::from_fn(lenses_h * m, lenses_v * m, |k, l| {
        lf.samples[[k / m, l / m, k % m, l % m]]
    });
    RawLightFieldImage {
        image,
        micro_image_size: m,
    }
}

/// Image gathered from one micro-image position `(i, g)` of every lens.
#[derive(Debug, Clone, PartialEq)]
pub struct SubApertureImage {
    pub i: i32,
    pub g: i32,
    pub image: GrayImage,
}

pub fn extract_view(lf: &LightField4D, i: i32, g: i32) -> Result<SubApertureImage> {
    let (si, sg) = (lf.slot(i)?, lf.slot(g)?);
    let (lenses_h, lenses_v) = lf.lens_counts();
    let image = GrayImage::from_fn(lenses_h, lenses_v, |j, h| lf.samples[[j, h, si, sg]]);
    Ok(SubApertureImage { i, g, image })
}

/// All `M × M` views, ordered by `g` then `i`.
pub fn extract_all_views(lf: &LightField4D) -> Vec<SubApertureImage> {
    let c = lf.max_view();
    (-c..=c)
        .flat_map(|g| (-c..=c).map(move |i| (i, g)))
        .map(|(i, g)| extract_view(lf, i, g).expect("viewpoint within range"))
        .collect()
}

/// Reassembles a raw mosaic from a per-viewpoint sampling function
/// `f(j, h, i, g)`.
pub fn assemble_raw(
    lenses_h: usize,
    lenses_v: usize,
    micro_image_size: usize,
    f: impl Fn(usize, usize, i32, i32) -> f32,
) -> Result<RawLightFieldImage> {
    let m = micro_image_size;
    let c = (m / 2) as i32;
    let image = GrayImage::from_fn(lenses_h * m, lenses_v * m, |k, l| {
        f(k / m, l / m, (k % m) as i32 - c, (l % m) as i32 - c)
    });
    RawLightFieldImage::new(image, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ramp(k_count: usize, l_count: usize) -> GrayImage {
        GrayImage::from_fn(k_count, l_count, |k, l| (k * l_count + l) as f32)
    }

    #[test]
    fn index_examples() {
        assert_eq!(index_translate(0, 0, 3).unwrap(), 1);
        assert_eq!(index_translate(2, 1, 3).unwrap(), 8);
        assert!(index_translate(0, 2, 3).is_err());
        assert!(index_translate(0, 0, 4).is_err());
        for k in 0..27 {
            let (j, i) = index_inverse(k, 3).unwrap();
            assert_eq!(index_translate(j, i, 3).unwrap(), k);
        }
    }

    #[test]
    fn decode_matches_loop_oracle() {
        let raw = RawLightFieldImage::new(ramp(9, 9), 3).unwrap();
        let lf = decode(&raw);
        // Walk the raw image micro image by micro image, tracking the offset
        // within each block with plain counters.
        let mut visited = 0;
        for block_y in 0..3 {
            for block_x in 0..3 {
                for dy in 0..3 {
                    for dx in 0..3 {
                        let (k, l) = (block_x * 3 + dx, block_y * 3 + dy);
                        let expected = (k * 9 + l) as f32;
                        let got = lf
                            .get(block_x, block_y, dx as i32 - 1, dy as i32 - 1)
                            .unwrap();
                        assert_eq!(got, expected);
                        visited += 1;
                    }
                }
            }
        }
        assert_eq!(visited, 81);
    }

    #[test]
    fn views_match_loop_oracle() {
        let raw = RawLightFieldImage::new(ramp(9, 9), 3).unwrap();
        let lf = decode(&raw);
        for g in -1..=1 {
            for i in -1..=1 {
                let view = extract_view(&lf, i, g).unwrap();
                assert_eq!((view.image.width(), view.image.height()), (3, 3));
                let mut expected = Vec::new();
                let mut l = (1 + g) as usize;
                while l < 9 {
                    let mut k = (1 + i) as usize;
                    while k < 9 {
                        expected.push((k * 9 + l) as f32);
                        k += 3;
                    }
                    l += 3;
                }
                assert_eq!(view.image.as_slice(), expected.as_slice());
            }
        }
    }

    #[test]
    fn colour_pattern_lands_in_its_view() {
        // Mark every pixel at micro-image offset (-1, -1).
        let image = GrayImage::from_fn(
            9,
            9,
            |k, l| if k % 3 == 0 && l % 3 == 0 { 1.0 } else { 0.0 },
        );
        let lf = decode(&RawLightFieldImage::new(image, 3).unwrap());
        for view in extract_all_views(&lf) {
            let expected = if (view.i, view.g) == (-1, -1) {
                1.0
            } else {
                0.0
            };
            assert!(view.image.as_slice().iter().all(|&v| v == expected));
        }
    }

    #[test]
    fn degenerate_single_pixel_micro_images() {
        let image = ramp(4, 5);
        let lf = decode(&RawLightFieldImage::new(image.clone(), 1).unwrap());
        assert_eq!(extract_view(&lf, 0, 0).unwrap().image, image);
    }

    #[test]
    fn constant_view_and_counts() {
        let raw = RawLightFieldImage::new(GrayImage::from_fn(15, 12, |_, _| 0.5), 5);
        assert!(raw.is_err(), "12 rows are not a multiple of 5");
        let raw = RawLightFieldImage::new(GrayImage::from_fn(15, 20, |_, _| 0.5), 5).unwrap();
        let lf = decode(&raw);
        let views = extract_all_views(&lf);
        assert_eq!(views.len(), 25);
        let total: usize = views
            .iter()
            .map(|v| v.image.width() * v.image.height())
            .sum();
        assert_eq!(total, 15 * 20);
        assert!(views[12].image.as_slice().iter().all(|&v| v == 0.5));
        assert!(extract_view(&lf, 3, 0).is_err());
    }

    #[test]
    fn rotation_is_an_involution() {
        let raw = RawLightFieldImage::new(ramp(9, 6), 3).unwrap();
        let rotated = raw.rotate_180();
        assert_ne!(rotated, raw);
        assert_eq!(rotated.image().get(0, 0), raw.image().get(8, 5));
        assert_eq!(rotated.rotate_180(), raw);
    }

    proptest! {
        #[test]
        fn decode_flatten_round_trip(
            lenses_h in 1usize..6,
            lenses_v in 1usize..6,
            half in 0usize..3,
            seed in any::<u32>(),
        ) {
            let m = 2 * half + 1;
            let image = GrayImage::from_fn(lenses_h * m, lenses_v * m, |x, y| {
                f32::from_bits((seed ^ (x as u32).wrapping_mul(2654435761) ^ (y as u32).wrapping_mul(40503)) & 0x7f7f_ffff)
            });
            let raw = RawLightFieldImage::new(image, m).unwrap();
            let back = flatten(&decode(&raw));
            prop_assert_eq!(
                back.image().as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                raw.image().as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
            );
        }

        #[test]
        fn index_bijection(k in 0usize..10_000, half in 0usize..8) {
            let m = 2 * half + 1;
            let (j, i) = index_inverse(k, m).unwrap();
            prop_assert_eq!(index_translate(j, i, m).unwrap(), k);
        }
    }
}
