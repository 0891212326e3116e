//! Horizontal disparity between two sub-aperture views by SAD block matching.
//!
//! For a pixel `(x, y)` of the left view and a candidate shift `d`, the cost
//! compares the left window centred on `(x, y)` with the right window centred
//! on `(x + d, y)`. The reported disparity is therefore `x_right − x_left`.
//! Pass the view of the larger viewpoint index as `left` to obtain the
//! disparity convention used for triangulation (position in view `i` minus
//! position in view `i + G`).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchParams {
    /// Odd window edge length in pixels.
    pub block_size: usize,
    /// Candidates span `-max_disparity..=max_disparity`.
    pub max_disparity: usize,
    pub subpixel: bool,
}

impl MatchParams {
    pub fn new(block_size: usize, max_disparity: usize, subpixel: bool) -> Result<Self> {
        let params = Self {
            block_size,
            max_disparity,
            subpixel,
        };
        params.validate(None)?;
        Ok(params)
    }

    fn validate(&self, width: Option<usize>) -> Result<()> {
        if self.block_size == 0 || self.block_size.is_multiple_of(2) {
            return Err(Error::InvalidParams(format!(
                "block size must be odd and positive, got {}",
                self.block_size
            )));
        }
        if self.max_disparity == 0 {
            return Err(Error::InvalidParams(
                "max disparity must be positive".into(),
            ));
        }
        if let Some(w) = width {
            if self.max_disparity >= w {
                return Err(Error::InvalidParams(format!(
                    "max disparity {} must be smaller than the view width {w}",
                    self.max_disparity
                )));
            }
        }
        Ok(())
    }

    fn radius(&self) -> usize {
        self.block_size / 2
    }
}

impl Default for MatchParams {
    fn default() -> Self {
        Self {
            block_size: 29,
            max_disparity: 5,
            subpixel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisparityMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
    valid: Vec<bool>,
}

impl DisparityMap {
    /// Builds a map from row-major values; non-finite values are invalid.
    pub fn from_values(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {width}x{height} map",
                values.len()
            )));
        }
        let valid = values.iter().map(|v| v.is_finite()).collect();
        Ok(Self {
            width,
            height,
            values,
            valid,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Disparity at `(x, y)`, `None` where no full window exists.
    pub fn get(&self, x: usize, y: usize) -> Option<f64> {
        let idx = y * self.width + x;
        self.valid[idx].then(|| self.values[idx])
    }

    /// Row-major values with NaN at invalid pixels.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn valid_mask(&self) -> &[bool] {
        &self.valid
    }

    pub fn valid_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values
            .iter()
            .zip(&self.valid)
            .filter_map(|(&v, &ok)| ok.then_some(v))
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    pub fn mean_valid(&self) -> Option<f64> {
        let n = self.valid_count();
        (n > 0).then(|| self.valid_values().sum::<f64>() / n as f64)
    }
}

fn check_sizes(left: &GrayImage, right: &GrayImage) -> Result<()> {
    if (left.width(), left.height()) != (right.width(), right.height()) {
        return Err(Error::DimensionMismatch(format!(
            "left view is {}x{}, right view is {}x{}",
            left.width(),
            left.height(),
            right.width(),
            right.height()
        )));
    }
    Ok(())
}

/// Sum of absolute differences between the `block × block` window of `left`
/// at `(x, y)` and the window of `right` at `(x + d, y)`.
pub fn sad_cost(
    left: &GrayImage,
    right: &GrayImage,
    x: usize,
    y: usize,
    d: i32,
    block: usize,
) -> Result<f64> {
    check_sizes(left, right)?;
    if block.is_multiple_of(2) {
        return Err(Error::InvalidParams(format!(
            "block size must be odd, got {block}"
        )));
    }
    let r = (block / 2) as i64;
    let (w, h) = (left.width() as i64, left.height() as i64);
    let (xi, yi) = (x as i64, y as i64);
    let shifted = xi + d as i64;
    let inside = |cx: i64| cx - r >= 0 && cx + r < w;
    if !inside(xi) || !inside(shifted) || yi - r < 0 || yi + r >= h {
        return Err(Error::WindowOutOfBounds { x, y, d });
    }
    Ok(window_sad(left, right, x, y, d, block / 2))
}

fn window_sad(left: &GrayImage, right: &GrayImage, x: usize, y: usize, d: i32, r: usize) -> f64 {
    let xr = (x as i64 + d as i64) as usize;
    let mut sum = 0.0f64;
    for yy in y - r..=y + r {
        let lrow = &left.row(yy)[x - r..=x + r];
        let rrow = &right.row(yy)[xr - r..=xr + r];
        sum += lrow
            .iter()
            .zip(rrow)
            .map(|(a, b)| (a - b).abs() as f64)
            .sum::<f64>();
    }
    sum
}

/// Parabolic vertex offset for costs at `d − 1`, `d`, `d + 1`, clamped to
/// `[-0.5, 0.5]`. A flat triple gives 0.
pub fn subpixel_refine(c_minus: f64, c_zero: f64, c_plus: f64) -> f64 {
    let curvature = c_minus - 2.0 * c_zero + c_plus;
    if curvature.abs() <= f64::EPSILON * (c_minus.abs() + c_zero.abs() + c_plus.abs()) {
        return 0.0;
    }
    ((c_minus - c_plus) / (2.0 * curvature)).clamp(-0.5, 0.5)
}

/// Winner-take-all SAD disparity for every pixel of `left`. Pixels whose
/// window does not fit for every candidate shift are invalid (NaN).
pub fn block_match(
    left: &GrayImage,
    right: &GrayImage,
    params: &MatchParams,
) -> Result<DisparityMap> {
    check_sizes(left, right)?;
    let (w, h) = (left.width(), left.height());
    params.validate(Some(w))?;
    let r = params.radius();
    let max_d = params.max_disparity;
    let candidates: Vec<i32> = {
        let m = max_d as i32;
        let mut c: Vec<i32> = (-m..=m).collect();
        // Stable order by |d| keeps the smaller shift on ties.
        c.sort_by_key(|d| (d.abs(), *d));
        c
    };

    let rows: Vec<Vec<f64>> = (0..h)
        .into_par_iter()
        .map(|y| {
            let mut row = vec![f64::NAN; w];
            if y < r || y + r >= h || w < 2 * (r + max_d) + 1 {
                return row;
            }
            let mut costs = vec![0.0; 2 * max_d + 1];
            for (x, out) in row
                .iter_mut()
                .enumerate()
                .take(w - r - max_d)
                .skip(r + max_d)
            {
                for d in -(max_d as i32)..=max_d as i32 {
                    costs[(d + max_d as i32) as usize] = window_sad(left, right, x, y, d, r);
                }
                let cost = |d: i32| costs[(d + max_d as i32) as usize];
                let mut best = candidates[0];
                for &d in &candidates[1..] {
                    if cost(d) < cost(best) {
                        best = d;
                    }
                }
                let mut value = best as f64;
                if params.subpixel && cost(best) > 0.0 && best.unsigned_abs() as usize != max_d {
                    value += subpixel_refine(cost(best - 1), cost(best), cost(best + 1));
                }
                *out = value;
            }
            row
        })
        .collect();

    DisparityMap::from_values(w, h, rows.concat())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textured(w: usize, h: usize, seed: u64) -> GrayImage {
        let mut state = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        GrayImage::from_fn(w, h, |_, _| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 33) % 256) as f32
        })
    }

    #[test]
    fn refine_examples() {
        assert_eq!(subpixel_refine(5.0, 1.0, 5.0), 0.0);
        assert_eq!(subpixel_refine(4.0, 1.0, 2.0), 0.25);
        assert_eq!(subpixel_refine(1.0, 1.0, 1.0), 0.0);
        assert_eq!(subpixel_refine(100.0, 0.0, 0.0), 0.5);
    }

    #[test]
    fn sad_zero_for_matching_shift() {
        let left = textured(20, 9, 1);
        let right = GrayImage::from_fn(20, 9, |x, y| if x >= 3 { left.get(x - 3, y) } else { 0.0 });
        assert_eq!(sad_cost(&left, &left, 10, 4, 0, 5).unwrap(), 0.0);
        assert_eq!(sad_cost(&left, &right, 8, 4, 3, 5).unwrap(), 0.0);
        assert!(sad_cost(&left, &right, 1, 4, 0, 5).is_err());
        assert!(sad_cost(&left, &right, 15, 4, 3, 5).is_err());
    }

    #[test]
    fn rejects_bad_params() {
        assert!(MatchParams::new(4, 3, false).is_err());
        assert!(MatchParams::new(5, 0, false).is_err());
        let img = textured(8, 8, 2);
        let p = MatchParams {
            block_size: 3,
            max_disparity: 8,
            subpixel: false,
        };
        assert!(block_match(&img, &img, &p).is_err());
        assert!(block_match(
            &img,
            &textured(9, 8, 2),
            &MatchParams::new(3, 2, false).unwrap()
        )
        .is_err());
    }

    #[test]
    fn identical_views_give_zero() {
        let img = textured(40, 20, 3);
        let map = block_match(&img, &img, &MatchParams::new(5, 4, true).unwrap()).unwrap();
        assert!(map.valid_count() > 0);
        assert!(map.valid_values().all(|v| v == 0.0));
        assert!(map.get(0, 0).is_none());
        assert!(map.values()[0].is_nan());
    }
}
