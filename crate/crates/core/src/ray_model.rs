//! Chief-ray geometry of a standard plenoptic camera and the virtual camera
//! array it induces on the main lens entrance pupil.
//!
//! Coordinates follow one axis (horizontal by default). On the image side a
//! chief ray is parameterised from the MLA plane towards the main lens; on
//! the object side from the object-side principal plane `H1U` outwards.
//! Positive heights are on the same side for both.

use crate::error::{Error, Result};
use crate::optics::{CameraConfig, FocusState};

/// Default virtual image distance `b_N` (mm). Any positive value gives the
/// same triangulated distances.
pub const DEFAULT_VIRTUAL_IMAGE_DISTANCE: f64 = 1.0;

/// Classical two-camera rig with coplanar sensors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StereoRig {
    pub baseline: f64,
    pub image_distance: f64,
    /// Tilt of the second camera's axis towards the first (radians).
    pub tilt: f64,
}

impl StereoRig {
    /// Distance at which the two optical axes cross, `B / tan(Φ)`.
    /// Infinite for parallel axes.
    pub fn convergence_distance(&self) -> f64 {
        let t = self.tilt.tan();
        if t == 0.0 {
            f64::INFINITY
        } else {
            self.baseline / t
        }
    }
}

/// Depth `Z = b·B / (Δx + b·tan Φ)` of a point seen with disparity `delta_x`
/// (same unit as the image distance). Returns infinity when the rays are
/// parallel.
pub fn stereo_depth(rig: &StereoRig, delta_x: f64) -> Result<f64> {
    if !(rig.baseline > 0.0) || !(rig.image_distance > 0.0) {
        return Err(Error::Domain(
            "stereo rig needs positive baseline and image distance".into(),
        ));
    }
    let denominator = delta_x + rig.image_distance * rig.tilt.tan();
    if denominator == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(rig.image_distance * rig.baseline / denominator)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RayReference {
    /// Height measured at the MLA plane, slope along the image space.
    MlaPlane,
    /// Height measured at the object-side principal plane `H1U`.
    MainLensObjectSide,
}

/// A chief ray written as `h(z) = slope·z + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiefRay {
    pub slope: f64,
    pub intercept: f64,
    pub reference: RayReference,
}

impl ChiefRay {
    pub fn at(&self, z: f64) -> f64 {
        self.slope * z + self.intercept
    }

    /// Depth at which two rays meet.
    pub fn intersect(&self, other: &ChiefRay) -> Result<f64> {
        let ds = self.slope - other.slope;
        if ds == 0.0 {
            return Err(Error::ParallelRays);
        }
        Ok((other.intercept - self.intercept) / ds)
    }
}

/// Closed-form ray model along one sensor axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pixel_pitch: f64,
    max_view: i32,
    lens_count: usize,
    lens_pitch: f64,
    f_s: f64,
    f_u: f64,
    state: FocusState,
}

impl Geometry {
    /// Horizontal geometry at the configured focus.
    pub fn horizontal(config: &CameraConfig) -> Result<Self> {
        Ok(Self::with_state(config, config.focus_state()?))
    }

    /// Vertical geometry: identical model with the vertical lens count.
    pub fn vertical(config: &CameraConfig) -> Result<Self> {
        let mut geometry = Self::horizontal(config)?;
        geometry.lens_count = config.mla.count_v;
        Ok(geometry)
    }

    /// Horizontal geometry for an explicitly given focus state.
    pub fn with_state(config: &CameraConfig, state: FocusState) -> Self {
        Self {
            pixel_pitch: config.sensor.pixel_pitch,
            max_view: config.sensor.max_view(),
            lens_count: config.mla.count_h,
            lens_pitch: config.mla.pitch,
            f_s: config.mla.focal_length,
            f_u: config.main_lens.focal_length,
            state,
        }
    }

    pub fn state(&self) -> &FocusState {
        &self.state
    }

    /// Largest viewpoint offset `c`.
    pub fn max_view(&self) -> i32 {
        self.max_view
    }

    pub fn lens_count(&self) -> usize {
        self.lens_count
    }

    /// Index `o` of the central lens (half-integral for even counts).
    pub fn central_lens(&self) -> f64 {
        (self.lens_count as f64 - 1.0) / 2.0
    }

    fn check_lens(&self, j: usize) -> Result<()> {
        if j >= self.lens_count {
            return Err(Error::out_of_range(
                "lens",
                j as i64,
                0,
                self.lens_count as i64 - 1,
            ));
        }
        Ok(())
    }

    fn check_view(&self, i: i32) -> Result<()> {
        if i.abs() > self.max_view {
            return Err(Error::out_of_range(
                "viewpoint",
                i as i64,
                -self.max_view as i64,
                self.max_view as i64,
            ));
        }
        Ok(())
    }

    // The unchecked helpers accept a fractional lens coordinate.

    fn lens_height(&self, j: f64) -> f64 {
        (j - self.central_lens()) * self.lens_pitch
    }

    fn mic(&self, j: f64) -> f64 {
        let s = self.lens_height(j);
        s / self.state.d_ap * self.f_s + s
    }

    fn slope(&self, j: f64, i: i32) -> f64 {
        let u = self.mic(j) + i as f64 * self.pixel_pitch;
        (self.lens_height(j) - u) / self.f_s
    }

    fn object_ray_at(&self, j: f64, i: i32) -> ChiefRay {
        let m = self.slope(j, i);
        let main_lens_height = m * self.state.b_u + self.lens_height(j);
        let focal_plane_height = m * self.f_u;
        ChiefRay {
            slope: (focal_plane_height - main_lens_height) / self.f_u,
            intercept: main_lens_height,
            reference: RayReference::MainLensObjectSide,
        }
    }

    /// Height `s_j` of the optical centre of lens `j`.
    pub fn micro_lens_height(&self, j: usize) -> Result<f64> {
        self.check_lens(j)?;
        Ok(self.lens_height(j as f64))
    }

    /// Micro image centre `u_{c,j}`: where the chief ray from the exit pupil
    /// centre through lens `j` meets the sensor.
    pub fn mic_position(&self, j: usize) -> Result<f64> {
        self.check_lens(j)?;
        Ok(self.mic(j as f64))
    }

    /// Sensor position `u_{c+i,j}` of viewpoint `i` under lens `j`.
    pub fn micro_image_sample(&self, j: usize, i: i32) -> Result<f64> {
        self.check_lens(j)?;
        self.check_view(i)?;
        Ok(self.mic(j as f64) + i as f64 * self.pixel_pitch)
    }

    /// Image-side chief ray slope `m_{c+i,j}`.
    pub fn chief_slope(&self, j: usize, i: i32) -> Result<f64> {
        self.check_lens(j)?;
        self.check_view(i)?;
        Ok(self.slope(j as f64, i))
    }

    /// Image-side chief ray, referenced to the MLA plane.
    pub fn image_ray(&self, j: usize, i: i32) -> Result<ChiefRay> {
        Ok(ChiefRay {
            slope: self.chief_slope(j, i)?,
            intercept: self.lens_height(j as f64),
            reference: RayReference::MlaPlane,
        })
    }

    /// Object-side chief ray of pixel `(j, i)`, referenced to `H1U`.
    pub fn object_ray(&self, j: usize, i: i32) -> Result<ChiefRay> {
        self.check_lens(j)?;
        self.check_view(i)?;
        Ok(self.object_ray_at(j as f64, i))
    }

    /// Image-side baseline between viewpoints `i` and `i + gap` at the exit
    /// pupil plane.
    pub fn exit_pupil_baseline(&self, i: i32, gap: usize) -> Result<f64> {
        self.check_view(i)?;
        let last = i + gap as i32;
        self.check_view(last)?;
        let o = self.central_lens();
        Ok((self.slope(o, last) - self.slope(o, i)).abs() * self.state.d_ap)
    }

    /// Signed distance `A''H1U` from `H1U` to the entrance pupil, where the
    /// object rays of viewpoint `i` through neighbouring lenses `j` and
    /// `j + 1` cross.
    pub fn entrance_pupil_distance_from(&self, i: i32, j: f64) -> Result<f64> {
        self.check_view(i)?;
        self.object_ray_at(j, i)
            .intersect(&self.object_ray_at(j + 1.0, i))
    }

    /// `A''H1U` evaluated with the axial viewpoint and the central lens pair.
    pub fn entrance_pupil_distance(&self) -> Result<f64> {
        self.entrance_pupil_distance_from(0, self.central_lens())
    }

    /// Virtual camera positions and tilts on the entrance pupil, with a
    /// virtual image plane `b_n` behind them.
    pub fn virtual_camera_array(&self, b_n: f64) -> Result<VirtualCameraArray> {
        if !(b_n > 0.0) || !b_n.is_finite() {
            return Err(Error::Domain(format!(
                "virtual image distance must be positive, got {b_n}"
            )));
        }
        let pupil = self.entrance_pupil_distance()?;
        let o = self.central_lens();
        let c = self.max_view;
        let mut positions = Vec::with_capacity(2 * c as usize + 1);
        let mut tilts = Vec::with_capacity(2 * c as usize + 1);
        for i in -c..=c {
            let ray = self.object_ray_at(o, i);
            positions.push(ray.at(pupil));
            tilts.push(ray.slope.atan());
        }
        // Virtual image points N of the axial camera; A''_0 = 0 so no
        // cancellation against the camera position.
        let centre = positions[c as usize];
        let n_central = -self.object_ray_at(o, 0).slope * b_n + centre;
        let n_next = -self.object_ray_at(o + 1.0, 0).slope * b_n + centre;
        Ok(VirtualCameraArray {
            positions,
            tilt_angles: tilts,
            entrance_pupil_to_h1: pupil,
            virtual_image_distance: b_n,
            virtual_pixel_pitch: (n_central - n_next).abs(),
            max_view: c,
        })
    }
}

/// Pair of viewpoints `gap` apart and the disparity measured between them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangulationQuery {
    pub gap: usize,
    /// Disparity in view pixels (position in view `i` minus position in
    /// view `i + gap`).
    pub disparity: f64,
}

impl TriangulationQuery {
    pub fn new(gap: usize, disparity: f64) -> Self {
        Self { gap, disparity }
    }
}

/// Virtual cameras located on the entrance pupil.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualCameraArray {
    /// `A''_i` for `i` in `-c..=c`.
    pub positions: Vec<f64>,
    /// `Φ_i` (radians), positive when the axis of a camera with `i > 0`
    /// turns towards the main optical axis.
    pub tilt_angles: Vec<f64>,
    /// `A''H1U`: signed distance from `H1U` to the entrance pupil.
    pub entrance_pupil_to_h1: f64,
    /// `b_N`.
    pub virtual_image_distance: f64,
    /// `p_N`.
    pub virtual_pixel_pitch: f64,
    max_view: i32,
}

impl VirtualCameraArray {
    pub fn max_view(&self) -> i32 {
        self.max_view
    }

    fn slot(&self, i: i32) -> Result<usize> {
        if i.abs() > self.max_view {
            return Err(Error::out_of_range(
                "viewpoint",
                i as i64,
                -self.max_view as i64,
                self.max_view as i64,
            ));
        }
        Ok((i + self.max_view) as usize)
    }

    pub fn position(&self, i: i32) -> Result<f64> {
        Ok(self.positions[self.slot(i)?])
    }

    pub fn tilt(&self, i: i32) -> Result<f64> {
        Ok(self.tilt_angles[self.slot(i)?])
    }

    /// Symmetric starting viewpoint `-⌊gap/2⌋` used when none is given.
    pub fn default_origin(gap: usize) -> i32 {
        -((gap / 2) as i32)
    }

    fn check_gap(&self, gap: usize) -> Result<()> {
        let max = 2 * self.max_view as usize;
        if gap == 0 || gap > max {
            return Err(Error::out_of_range("gap", gap as i64, 1, max as i64));
        }
        Ok(())
    }

    /// `B_G = |A''_{i+G} - A''_i|`.
    pub fn baseline(&self, i: i32, gap: usize) -> Result<f64> {
        Ok((self.position(i + gap as i32)? - self.position(i)?).abs())
    }

    /// `Φ_{i+G} - Φ_i`; positive when the two axes converge in object space.
    pub fn signed_relative_tilt(&self, i: i32, gap: usize) -> Result<f64> {
        Ok(self.tilt(i + gap as i32)? - self.tilt(i)?)
    }

    /// Magnitude of the relative tilt `Φ_G`.
    pub fn relative_tilt(&self, i: i32, gap: usize) -> Result<f64> {
        Ok(self.signed_relative_tilt(i, gap)?.abs())
    }

    /// Whether the axes of viewpoints `i` and `i + gap` converge in object space.
    pub fn converging(&self, i: i32, gap: usize) -> Result<bool> {
        Ok(self.signed_relative_tilt(i, gap)? > 0.0)
    }

    /// Triangulated distance from the entrance pupil using the symmetric
    /// viewpoint pair for the query's gap.
    pub fn triangulate(&self, query: &TriangulationQuery) -> Result<f64> {
        self.triangulate_from(Self::default_origin(query.gap), query)
    }

    /// `Z = b_N·B_G / (Δx·p_N + b_N·tan Φ_G)` for viewpoints `origin` and
    /// `origin + gap`. Infinite when the rays are parallel, negative when they
    /// meet behind the cameras.
    pub fn triangulate_from(&self, origin: i32, query: &TriangulationQuery) -> Result<f64> {
        self.check_gap(query.gap)?;
        let b_n = self.virtual_image_distance;
        let baseline = self.baseline(origin, query.gap)?;
        let tilt = self.signed_relative_tilt(origin, query.gap)?;
        let denominator = query.disparity * self.virtual_pixel_pitch + b_n * tilt.tan();
        if denominator == 0.0 {
            return Ok(f64::INFINITY);
        }
        Ok(b_n * baseline / denominator)
    }

    /// Baseline implied by observing `query.disparity` for an object at
    /// distance `z`.
    pub fn measure_baseline(&self, query: &TriangulationQuery, z: f64) -> Result<f64> {
        self.measure_baseline_from(Self::default_origin(query.gap), query, z)
    }

    pub fn measure_baseline_from(
        &self,
        origin: i32,
        query: &TriangulationQuery,
        z: f64,
    ) -> Result<f64> {
        check_distance(z)?;
        self.check_gap(query.gap)?;
        let b_n = self.virtual_image_distance;
        let tilt = self.signed_relative_tilt(origin, query.gap)?;
        Ok(z * (query.disparity * self.virtual_pixel_pitch + b_n * tilt.tan()) / b_n)
    }

    /// Relative tilt (radians) implied by observing `query.disparity` for an
    /// object at distance `z` with the given baseline.
    pub fn measure_tilt(&self, query: &TriangulationQuery, z: f64, baseline: f64) -> Result<f64> {
        check_distance(z)?;
        self.check_gap(query.gap)?;
        let b_n = self.virtual_image_distance;
        Ok(((baseline * b_n / z - query.disparity * self.virtual_pixel_pitch) / b_n).atan())
    }
}

fn check_distance(z: f64) -> Result<()> {
    if z > 0.0 && z.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "object distance must be positive and finite, got {z}"
        )))
    }
}

/// `V1UA'' = V1UH1U + A''H1U`.
pub fn front_vertex_to_entrance_pupil(v1_h1: f64, a_h1: f64) -> f64 {
    v1_h1 + a_h1
}
