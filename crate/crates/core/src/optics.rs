//! Lens and camera parameter types together with the focus solver that
//! yields the image distance and exit pupil position.
//!
//! All lengths are millimetres. Distances on the image side are measured from
//! the micro lens array (MLA) towards the main lens, so that every quantity in
//! a [`FocusState`] is positive for a real camera.

use crate::error::{Error, Result};

/// Absolute convergence tolerance of the image-distance fixed point (mm).
pub const FOCUS_TOLERANCE_MM: f64 = 1e-9;
/// Iteration cap of the image-distance fixed point.
pub const FOCUS_MAX_ITERATIONS: usize = 1000;
/// Allowed disagreement between a stated micro-lens focal length and the one
/// derived from its prescription (mm).
pub const PRESCRIPTION_TOLERANCE_MM: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorSpec {
    /// Pixel pitch `p_p`.
    pub pixel_pitch: f64,
    /// Pixels per micro image along one axis (`M`, odd).
    pub micro_image_size: usize,
    /// Raw image width `K` in pixels.
    pub image_width_px: usize,
    /// Raw image height `L` in pixels.
    pub image_height_px: usize,
}

impl SensorSpec {
    /// Index offset `c = (M - 1) / 2` of the central micro-image pixel.
    pub fn center(&self) -> usize {
        (self.micro_image_size - 1) / 2
    }

    /// Largest viewpoint offset `c` as a signed value.
    pub fn max_view(&self) -> i32 {
        self.center() as i32
    }
}

/// Thick-lens prescription of a single micro lens.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prescription {
    pub thickness: f64,
    pub refractive_index: f64,
    /// Signed front radius of curvature.
    pub radius_front: f64,
    /// Signed back radius of curvature; infinite for a plane surface.
    pub radius_back: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicroLensSpec {
    /// Focal length `f_s`.
    pub focal_length: f64,
    /// Lens pitch `p_M`.
    pub pitch: f64,
    pub prescription: Option<Prescription>,
    /// Separation of the micro lens principal planes.
    pub principal_gap: f64,
    /// Number of lenses in the horizontal direction (`J`).
    pub count_h: usize,
    /// Number of lenses in the vertical direction (`H`).
    pub count_v: usize,
}

impl MicroLensSpec {
    /// Builds the array description from a prescription, deriving focal length and
    /// principal-plane gap.
    pub fn from_prescription(
        prescription: Prescription,
        pitch: f64,
        count_h: usize,
        count_v: usize,
    ) -> Result<Self> {
        let (focal_length, principal_gap) = mla_cardinal_points(
            prescription.thickness,
            prescription.refractive_index,
            prescription.radius_front,
            prescription.radius_back,
        )?;
        Ok(Self {
            focal_length,
            pitch,
            prescription: Some(prescription),
            principal_gap,
            count_h,
            count_v,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MainLensSpec {
    /// Focal length `f_U`.
    pub focal_length: f64,
    /// MLA-to-exit-pupil distance with the lens focused at infinity.
    pub exit_pupil_dist_inf: f64,
    /// Signed separation between object- and image-side principal planes.
    pub principal_gap: f64,
    /// Distance from the front vertex to the object-side principal plane, when known.
    pub front_vertex_to_h1: Option<f64>,
    /// Entrance pupil diameter, used only to warn about baselines the pupil
    /// cannot accommodate.
    pub entrance_pupil_diameter: Option<f64>,
}

/// Distance from the MLA front vertex to the plane the main lens focuses on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FocusSetting {
    Infinity,
    Finite(f64),
}

impl FocusSetting {
    pub fn from_mm(d_f: f64) -> Self {
        if d_f.is_infinite() {
            FocusSetting::Infinity
        } else {
            FocusSetting::Finite(d_f)
        }
    }

    /// The focus distance, `f64::INFINITY` for infinity focus.
    pub fn mm(&self) -> f64 {
        match *self {
            FocusSetting::Infinity => f64::INFINITY,
            FocusSetting::Finite(d) => d,
        }
    }
}

/// Quantities that follow from the focus setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocusState {
    /// Main lens image distance `b_U`.
    pub b_u: f64,
    /// MLA-to-exit-pupil distance `d_A'` at this focus.
    pub d_ap: f64,
    /// Object distance `a_U`; infinite for infinity focus.
    pub a_u: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraConfig {
    pub sensor: SensorSpec,
    pub mla: MicroLensSpec,
    pub main_lens: MainLensSpec,
    pub focus: FocusSetting,
}

impl CameraConfig {
    /// Checks every component invariant and that the focus state is solvable.
    pub fn validate(&self) -> Result<()> {
        let s = &self.sensor;
        positive("sensor.pixel_pitch_mm", s.pixel_pitch)?;
        let m = s.micro_image_size;
        if m < 3 || m.is_multiple_of(2) {
            return Err(Error::config(
                "sensor.micro_image_px",
                format!("must be odd and at least 3, got {m}"),
            ));
        }

        let mla = &self.mla;
        positive("mla.f_s_mm", mla.focal_length)?;
        positive("mla.pitch_mm", mla.pitch)?;
        if mla.count_h == 0 || mla.count_h.is_multiple_of(2) {
            return Err(Error::config(
                "mla.lenses_h",
                format!("must be odd so a central lens exists, got {}", mla.count_h),
            ));
        }
        if mla.count_v == 0 {
            return Err(Error::config("mla.lenses_v", "must be positive"));
        }
        if let Some(p) = mla.prescription {
            let (f, _) = mla_cardinal_points(
                p.thickness,
                p.refractive_index,
                p.radius_front,
                p.radius_back,
            )
            .map_err(|e| Error::config("mla", e.to_string()))?;
            if (f - mla.focal_length).abs() > PRESCRIPTION_TOLERANCE_MM {
                return Err(Error::config(
                    "mla.f_s_mm",
                    format!(
                        "prescription gives focal length {f:.6} mm, stated {:.6} mm",
                        mla.focal_length
                    ),
                ));
            }
        }
        if s.image_width_px != mla.count_h * m {
            return Err(Error::config(
                "sensor.width_px",
                format!(
                    "width {} is not lenses_h * micro_image_px = {}",
                    s.image_width_px,
                    mla.count_h * m
                ),
            ));
        }
        if s.image_height_px != mla.count_v * m {
            return Err(Error::config(
                "sensor.height_px",
                format!(
                    "height {} is not lenses_v * micro_image_px = {}",
                    s.image_height_px,
                    mla.count_v * m
                ),
            ));
        }

        let lens = &self.main_lens;
        positive("main_lens.f_u_mm", lens.focal_length)?;
        positive("main_lens.exit_pupil_inf_mm", lens.exit_pupil_dist_inf)?;
        if !lens.principal_gap.is_finite() {
            return Err(Error::config("main_lens.h1h2_mm", "must be finite"));
        }
        if let Some(d) = lens.entrance_pupil_diameter {
            positive("main_lens.pupil_diameter_mm", d)?;
        }
        if let FocusSetting::Finite(d_f) = self.focus {
            if !(d_f > lens.focal_length + lens.principal_gap) {
                return Err(Error::config(
                    "focus.d_f_mm",
                    format!(
                        "{d_f} mm must exceed f_U + H1H2 = {} mm",
                        lens.focal_length + lens.principal_gap
                    ),
                ));
            }
        }
        derive_focus_state(self).map_err(|e| Error::config("focus.d_f_mm", e.to_string()))?;
        Ok(())
    }

    pub fn focus_state(&self) -> Result<FocusState> {
        derive_focus_state(self)
    }

    /// Copy of this configuration with a different focus setting.
    pub fn with_focus(&self, focus: FocusSetting) -> Self {
        Self { focus, ..*self }
    }
}

fn positive(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::config(
            field,
            format!("must be a positive length, got {value}"),
        ))
    }
}

/// Paraxial ray-transfer matrix `[[a, b], [c, d]]` acting on
/// `(height, reduced slope)`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Abcd {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl Abcd {
    fn refraction(power: f64) -> Self {
        Self {
            a: 1.0,
            b: 0.0,
            c: -power,
            d: 1.0,
        }
    }

    fn translation(reduced_distance: f64) -> Self {
        Self {
            a: 1.0,
            b: reduced_distance,
            c: 0.0,
            d: 1.0,
        }
    }

    /// `self` applied after `first`.
    fn after(self, first: Abcd) -> Abcd {
        Abcd {
            a: self.a * first.a + self.b * first.c,
            b: self.a * first.b + self.b * first.d,
            c: self.c * first.a + self.d * first.c,
            d: self.c * first.b + self.d * first.d,
        }
    }
}

/// Effective focal length and principal-plane separation of a thick lens in
/// air with front radius `r1`, back radius `r2` (may be infinite), centre
/// thickness `t` and refractive index `n`.
///
/// The gap is the distance from the object-side to the image-side principal
/// plane, positive when the image-side plane lies further along the light
/// path.
pub fn mla_cardinal_points(t: f64, n: f64, r1: f64, r2: f64) -> Result<(f64, f64)> {
    if !(n > 1.0) {
        return Err(Error::config(
            "mla.n",
            format!("refractive index must exceed 1, got {n}"),
        ));
    }
    if r1 == 0.0 || r2 == 0.0 {
        return Err(Error::config(
            "mla.r1_mm",
            "radius of curvature must be non-zero",
        ));
    }
    if !(t >= 0.0) {
        return Err(Error::config(
            "mla.t_mm",
            format!("thickness must be non-negative, got {t}"),
        ));
    }
    let front = Abcd::refraction((n - 1.0) / r1);
    let back = Abcd::refraction((1.0 - n) / r2);
    let system = back.after(Abcd::translation(t / n)).after(front);
    if system.c == 0.0 {
        return Err(Error::NonFocusing);
    }
    let focal_length = -1.0 / system.c;
    // Principal plane positions relative to their own vertices.
    let h1 = (system.d - 1.0) / system.c;
    let h2 = t + (1.0 - system.a) / system.c;
    Ok((focal_length, h2 - h1))
}

/// Main-lens image distance for an object plane `d_f` away from the MLA,
/// found by fixed-point iteration of the thin-lens equation with
/// `a_U = d_f - b_U - gap`, starting from `b_U = f_U`.
pub fn solve_image_distance(f_u: f64, principal_gap: f64, d_f: f64) -> Result<f64> {
    if d_f.is_infinite() && d_f > 0.0 {
        return Ok(f_u);
    }
    if !d_f.is_finite() {
        return Err(Error::Unfocusable(format!(
            "focus distance {d_f} is not a length"
        )));
    }
    let mut b_u = f_u;
    for _ in 0..FOCUS_MAX_ITERATIONS {
        let a_u = d_f - b_u - principal_gap;
        if !(a_u > f_u) {
            return Err(Error::Unfocusable(format!(
                "object distance {a_u:.6} mm does not exceed the focal length {f_u} mm"
            )));
        }
        let next = 1.0 / (1.0 / f_u - 1.0 / a_u);
        if (next - b_u).abs() < FOCUS_TOLERANCE_MM {
            return Ok(next);
        }
        b_u = next;
    }
    Err(Error::Unfocusable(format!(
        "image distance did not converge within {FOCUS_MAX_ITERATIONS} iterations"
    )))
}

/// Exit pupil distance after refocusing; the lens-internal offset
/// `b_U - d_A'` stays constant.
pub fn exit_pupil_at_focus(b_u: f64, b_u_inf: f64, d_ap_inf: f64) -> f64 {
    b_u - (b_u_inf - d_ap_inf)
}

pub fn derive_focus_state(config: &CameraConfig) -> Result<FocusState> {
    let lens = &config.main_lens;
    let b_u_inf = lens.focal_length;
    let (b_u, a_u) = match config.focus {
        FocusSetting::Infinity => (b_u_inf, f64::INFINITY),
        FocusSetting::Finite(d_f) => {
            let b_u = solve_image_distance(lens.focal_length, lens.principal_gap, d_f)?;
            (b_u, d_f - b_u - lens.principal_gap)
        }
    };
    Ok(FocusState {
        b_u,
        d_ap: exit_pupil_at_focus(b_u, b_u_inf, lens.exit_pupil_dist_inf),
        a_u,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cardinal_points_match_table_rows() {
        let (f, gap) = mla_cardinal_points(1.1, 1.5626, 0.70325, f64::NEG_INFINITY).unwrap();
        assert_abs_diff_eq!(f, 1.25, epsilon = 1e-3);
        assert_abs_diff_eq!(gap, 0.396, epsilon = 1e-3);
        let (f, gap) = mla_cardinal_points(1.1, 1.5626, 1.54715, f64::NEG_INFINITY).unwrap();
        assert_abs_diff_eq!(f, 2.75, epsilon = 1e-3);
        assert_abs_diff_eq!(gap, 0.396, epsilon = 1e-3);
    }

    #[test]
    fn thin_plano_convex_limit() {
        let (f, gap) = mla_cardinal_points(0.0, 1.5, 0.5, f64::NEG_INFINITY).unwrap();
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(gap, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_power_prescription_is_rejected() {
        // Thin meniscus with equal radii has no power.
        let err = mla_cardinal_points(0.0, 1.5, 1.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::NonFocusing));
        assert!(mla_cardinal_points(1.0, 1.0, 1.0, 2.0).is_err());
        assert!(mla_cardinal_points(1.0, 1.5, 0.0, 2.0).is_err());
    }

    #[test]
    fn infinity_focus_returns_focal_length() {
        assert_eq!(
            solve_image_distance(193.2935, -65.5563, f64::INFINITY).unwrap(),
            193.2935
        );
    }

    #[test]
    fn finite_focus_rows() {
        let b = solve_image_distance(90.4036, -1.2273, 1500.0).unwrap();
        assert_abs_diff_eq!(b, 96.6224, epsilon = 5e-4);
        let b = solve_image_distance(193.2935, -65.5563, 3000.0).unwrap();
        assert_abs_diff_eq!(b, 207.3134, epsilon = 5e-4);
    }

    #[test]
    fn fixed_point_residual() {
        let (f, gap, d_f) = (193.2935, -65.5563, 1500.0);
        let b = solve_image_distance(f, gap, d_f).unwrap();
        let a = d_f - b - gap;
        assert!((1.0 / f - 1.0 / b - 1.0 / a).abs() < 1e-12);
    }

    #[test]
    fn unreachable_focus_is_an_error() {
        assert!(matches!(
            solve_image_distance(100.0, 0.0, 150.0),
            Err(Error::Unfocusable(_))
        ));
        assert!(solve_image_distance(100.0, 0.0, f64::NAN).is_err());
    }

    #[test]
    fn exit_pupil_tracks_image_distance() {
        assert_abs_diff_eq!(
            exit_pupil_at_focus(208.3930, 197.1264, 100.5),
            111.7666,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            exit_pupil_at_focus(225.8852, 193.2935, 111.0324),
            143.6241,
            epsilon = 1e-9
        );
        assert_eq!(exit_pupil_at_focus(197.1264, 197.1264, 100.5), 100.5);
    }
}
