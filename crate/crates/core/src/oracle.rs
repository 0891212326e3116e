//! Paraxial ray tracer used as an independent reference for the closed-form
//! camera model, plus a synthetic raw-capture renderer built on it.
//!
//! Rays travel from the sensor towards object space along `+z`. Every lens
//! is represented by its cardinal points: a refracting plane (optionally
//! decentred) followed by a jump between the two principal planes.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::lightfield::RawLightFieldImage;
use crate::optics::{CameraConfig, FocusState, Prescription};
use crate::scene::Scene;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Element {
    /// Propagation over `distance` in a medium of refractive `index`.
    Translation { distance: f64, index: f64 },
    /// Refracting plane of the given power whose optical axis sits at
    /// height `center`.
    Refraction { power: f64, center: f64 },
    /// Passage from one principal plane to the other: the axial position
    /// advances while height and angle are kept.
    PrincipalJump { distance: f64 },
}

/// Paraxial ray state. `angle` is the reduced angle `n·u`, equal to the
/// slope in air.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracedRay {
    pub height: f64,
    pub angle: f64,
    pub z: f64,
}

impl TracedRay {
    pub fn new(height: f64, angle: f64) -> Self {
        Self {
            height,
            angle,
            z: 0.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParaxialSystem {
    pub elements: Vec<Element>,
}

impl ParaxialSystem {
    pub fn new(elements: Vec<Element>) -> Self {
        Self { elements }
    }

    /// Surfaces of a singlet in air, front surface first.
    pub fn singlet(prescription: &Prescription) -> Self {
        let n = prescription.refractive_index;
        let power = |n1: f64, n2: f64, r: f64| if r.is_infinite() { 0.0 } else { (n2 - n1) / r };
        Self::new(vec![
            Element::Refraction {
                power: power(1.0, n, prescription.radius_front),
                center: 0.0,
            },
            Element::Translation {
                distance: prescription.thickness,
                index: n,
            },
            Element::Refraction {
                power: power(n, 1.0, prescription.radius_back),
                center: 0.0,
            },
        ])
    }

    pub fn push(&mut self, element: Element) -> &mut Self {
        self.elements.push(element);
        self
    }
}

pub fn trace(system: &ParaxialSystem, ray: TracedRay) -> TracedRay {
    system
        .elements
        .iter()
        .fold(ray, |r, element| match *element {
            Element::Translation { distance, index } => TracedRay {
                height: r.height + r.angle / index * distance,
                angle: r.angle,
                z: r.z + distance,
            },
            Element::Refraction { power, center } => TracedRay {
                height: r.height,
                angle: r.angle - (r.height - center) * power,
                z: r.z,
            },
            Element::PrincipalJump { distance } => TracedRay {
                z: r.z + distance,
                ..r
            },
        })
}

/// Output height and angle as affine functions of the launch state:
/// `[∂/∂height, ∂/∂angle, constant]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineRay {
    pub height: [f64; 3],
    pub angle: [f64; 3],
}

/// Traces the affine dependence of the output ray on the input ray.
pub fn trace_affine(system: &ParaxialSystem) -> AffineRay {
    let start = AffineRay {
        height: [1.0, 0.0, 0.0],
        angle: [0.0, 1.0, 0.0],
    };
    system
        .elements
        .iter()
        .fold(start, |r, element| match *element {
            Element::Translation { distance, index } => AffineRay {
                height: std::array::from_fn(|k| r.height[k] + r.angle[k] / index * distance),
                angle: r.angle,
            },
            Element::Refraction { power, center } => {
                let offset = [0.0, 0.0, center];
                AffineRay {
                    height: r.height,
                    angle: std::array::from_fn(|k| r.angle[k] - (r.height[k] - offset[k]) * power),
                }
            }
            Element::PrincipalJump { .. } => r,
        })
}

/// Effective focal length and back focal distance of a system in air,
/// found by tracing a ray parallel to the axis.
pub fn focal_lengths(system: &ParaxialSystem) -> Result<(f64, f64)> {
    let out = trace(system, TracedRay::new(1.0, 0.0));
    if out.angle == 0.0 {
        return Err(Error::NonFocusing);
    }
    Ok((-1.0 / out.angle, -out.height / out.angle))
}

/// Object-space line `h(z) = height + slope·z` with `z` measured from the
/// main lens object-side principal plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectLine {
    pub height: f64,
    pub slope: f64,
}

impl ObjectLine {
    pub fn at(&self, z: f64) -> f64 {
        self.height + self.slope * z
    }
}

fn intersect(a: &ObjectLine, b: &ObjectLine) -> Option<f64> {
    let ds = a.slope - b.slope;
    (ds.abs() >= 1e-14).then(|| (b.height - a.height) / ds)
}

/// The camera's optics along one sensor axis, expressed as traceable
/// element sequences.
#[derive(Debug, Clone)]
pub struct OracleAxis {
    pixel_pitch: f64,
    lens_count: usize,
    lens_pitch: f64,
    max_view: i32,
    f_s: f64,
    mla_gap: f64,
    f_u: f64,
    main_gap: f64,
    state: FocusState,
}

impl OracleAxis {
    fn build(config: &CameraConfig, lens_count: usize) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            pixel_pitch: config.sensor.pixel_pitch,
            lens_count,
            lens_pitch: config.mla.pitch,
            max_view: config.sensor.max_view(),
            f_s: config.mla.focal_length,
            mla_gap: config.mla.principal_gap,
            f_u: config.main_lens.focal_length,
            main_gap: config.main_lens.principal_gap,
            state: config.focus_state()?,
        })
    }

    pub fn horizontal(config: &CameraConfig) -> Result<Self> {
        Self::build(config, config.mla.count_h)
    }

    pub fn vertical(config: &CameraConfig) -> Result<Self> {
        Self::build(config, config.mla.count_v)
    }

    pub fn max_view(&self) -> i32 {
        self.max_view
    }

    pub fn lens_count(&self) -> usize {
        self.lens_count
    }

    pub fn central_lens(&self) -> f64 {
        (self.lens_count as f64 - 1.0) / 2.0
    }

    fn lens_center(&self, j: f64) -> f64 {
        (j - self.central_lens()) * self.lens_pitch
    }

    // The micro lens part is traced in the frame of the lens itself, with
    // heights measured from its optical axis.

    fn sensor_to_mla(&self) -> ParaxialSystem {
        ParaxialSystem::new(vec![Element::Translation {
            distance: self.f_s,
            index: 1.0,
        }])
    }

    fn through_micro_lens(&self) -> ParaxialSystem {
        ParaxialSystem::new(vec![
            Element::Translation {
                distance: self.f_s,
                index: 1.0,
            },
            Element::Refraction {
                power: 1.0 / self.f_s,
                center: 0.0,
            },
            Element::PrincipalJump {
                distance: self.mla_gap,
            },
        ])
    }

    fn to_exit_pupil(&self) -> ParaxialSystem {
        let mut system = self.through_micro_lens();
        system.push(Element::Translation {
            distance: self.state.d_ap,
            index: 1.0,
        });
        system
    }

    fn through_main_lens(&self) -> ParaxialSystem {
        ParaxialSystem::new(vec![
            Element::Translation {
                distance: self.state.b_u,
                index: 1.0,
            },
            Element::Refraction {
                power: 1.0 / self.f_u,
                center: 0.0,
            },
            Element::PrincipalJump {
                distance: self.main_gap,
            },
        ])
    }

    /// MIC relative to the axis of lens `j`.
    fn local_mic(&self, j: f64) -> f64 {
        let at_mla = trace_affine(&self.sensor_to_mla());
        let at_pupil = trace_affine(&self.to_exit_pupil());
        // Launch state (u, slope) that crosses the lens axis at the MLA and
        // the global axis at the exit pupil.
        let [a11, a12, a10] = at_mla.height;
        let [a21, a22, a20] = at_pupil.height;
        let r1 = -a10;
        let r2 = -self.lens_center(j) - a20;
        (r1 * a22 - a12 * r2) / (a11 * a22 - a12 * a21)
    }

    /// Micro image centre under lens `j`: the sensor point whose ray through
    /// the lens centre passes through the exit pupil centre.
    pub fn mic(&self, j: f64) -> f64 {
        self.lens_center(j) + self.local_mic(j)
    }

    /// Object-space chief ray of viewpoint `i` under (fractional) lens `j`.
    pub fn object_line(&self, j: f64, i: i32) -> ObjectLine {
        let u = self.local_mic(j) + i as f64 * self.pixel_pitch;
        let [h_u, h_m, h_1] = trace_affine(&self.sensor_to_mla()).height;
        let slope = (-h_1 - h_u * u) / h_m;
        let local = trace(&self.through_micro_lens(), TracedRay::new(u, slope));
        let global = TracedRay {
            height: local.height + self.lens_center(j),
            ..local
        };
        let out = trace(&self.through_main_lens(), global);
        ObjectLine {
            height: out.height,
            slope: out.angle,
        }
    }

    /// Mean and spread (max − min) of the crossings of every same-viewpoint
    /// pair of rays through adjacent lenses.
    pub fn pupil_crossings(&self) -> Result<(f64, f64)> {
        let mut crossings = Vec::new();
        for i in -self.max_view..=self.max_view {
            let lines: Vec<ObjectLine> = (0..self.lens_count)
                .map(|j| self.object_line(j as f64, i))
                .collect();
            for pair in lines.windows(2) {
                crossings.push(intersect(&pair[0], &pair[1]).ok_or(Error::ParallelRays)?);
            }
        }
        if crossings.is_empty() {
            return Err(Error::Domain("at least two micro lenses are needed".into()));
        }
        let mean = crossings.iter().sum::<f64>() / crossings.len() as f64;
        let (lo, hi) = crossings
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &z| {
                (lo.min(z), hi.max(z))
            });
        Ok((mean, hi - lo))
    }
}

/// Virtual cameras recovered by brute-force ray intersection.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedCameras {
    pub entrance_pupil_to_h1: f64,
    /// Largest deviation between individual pairwise crossings.
    pub spread: f64,
    pub positions: Vec<f64>,
    /// Radians.
    pub tilt_angles: Vec<f64>,
    max_view: i32,
}

impl SimulatedCameras {
    fn slot(&self, i: i32) -> Result<usize> {
        let c = self.max_view;
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

    pub fn position(&self, i: i32) -> Result<f64> {
        Ok(self.positions[self.slot(i)?])
    }

    pub fn tilt(&self, i: i32) -> Result<f64> {
        Ok(self.tilt_angles[self.slot(i)?])
    }

    pub fn baseline(&self, i: i32, gap: usize) -> Result<f64> {
        Ok((self.position(i + gap as i32)? - self.position(i)?).abs())
    }

    pub fn relative_tilt(&self, i: i32, gap: usize) -> Result<f64> {
        Ok((self.tilt(i + gap as i32)? - self.tilt(i)?).abs())
    }
}

pub fn simulate_virtual_cameras(config: &CameraConfig) -> Result<SimulatedCameras> {
    let axis = OracleAxis::horizontal(config)?;
    let (pupil, spread) = axis.pupil_crossings()?;
    let o = axis.central_lens();
    let c = axis.max_view;
    let lines: Vec<ObjectLine> = (-c..=c).map(|i| axis.object_line(o, i)).collect();
    Ok(SimulatedCameras {
        entrance_pupil_to_h1: pupil,
        spread,
        positions: lines.iter().map(|l| l.at(pupil)).collect(),
        tilt_angles: lines.iter().map(|l| l.slope.atan()).collect(),
        max_view: c,
    })
}

/// Distance from the entrance pupil at which the ray of viewpoint `origin`
/// through the central lens meets the ray of viewpoint `origin + gap`
/// displaced by `disparity` lenses. Parallel rays give infinity.
pub fn simulate_distance_from(
    config: &CameraConfig,
    origin: i32,
    gap: usize,
    disparity: f64,
) -> Result<f64> {
    let axis = OracleAxis::horizontal(config)?;
    let c = axis.max_view;
    let last = origin + gap as i32;
    if gap == 0 || origin.abs() > c || last.abs() > c {
        return Err(Error::out_of_range(
            "viewpoint",
            last as i64,
            -c as i64,
            c as i64,
        ));
    }
    let (pupil, _) = axis.pupil_crossings()?;
    let o = axis.central_lens();
    let first = axis.object_line(o, origin);
    let second = axis.object_line(o - disparity, last);
    Ok(match intersect(&first, &second) {
        Some(z) => z - pupil,
        None => f64::INFINITY,
    })
}

/// [`simulate_distance_from`] with the symmetric origin `-⌊gap/2⌋`.
pub fn simulate_distance(config: &CameraConfig, gap: usize, disparity: f64) -> Result<f64> {
    simulate_distance_from(config, -((gap / 2) as i32), gap, disparity)
}

/// Renders a calibrated raw capture of `scene` by casting the chief ray of
/// every sensor pixel into object space. Intensities lie in `[0, 1]`.
pub fn render_synthetic_scene(config: &CameraConfig, scene: &Scene) -> Result<RawLightFieldImage> {
    let horizontal = OracleAxis::horizontal(config)?;
    let vertical = OracleAxis::vertical(config)?;
    let (pupil, _) = horizontal.pupil_crossings()?;
    for plane in &scene.planes {
        if !(plane.depth_mm > 0.0) || !plane.depth_mm.is_finite() {
            return Err(Error::Scene(format!(
                "plane depth {} mm must lie in front of the entrance pupil",
                plane.depth_mm
            )));
        }
    }
    let c = horizontal.max_view;
    let m = config.sensor.micro_image_size;
    let lines = |axis: &OracleAxis| -> Vec<ObjectLine> {
        (0..axis.lens_count)
            .into_par_iter()
            .flat_map_iter(|j| (-c..=c).map(move |i| (j, i)).collect::<Vec<_>>())
            .map(|(j, i)| axis.object_line(j as f64, i))
            .collect()
    };
    let h_lines = lines(&horizontal);
    let v_lines = lines(&vertical);
    let textures = scene.load_textures()?;
    let mut planes: Vec<_> = scene.planes.iter().zip(textures).collect();
    planes.sort_by(|a, b| a.0.depth_mm.total_cmp(&b.0.depth_mm));

    let (lenses_h, lenses_v) = (config.mla.count_h, config.mla.count_v);
    let width = lenses_h * m;
    let rows: Vec<Vec<f32>> = (0..lenses_v * m)
        .into_par_iter()
        .map(|l| {
            let v_line = v_lines[l];
            (0..width)
                .map(|k| {
                    let h_line = h_lines[k];
                    planes
                        .iter()
                        .find_map(|(plane, texture)| {
                            let z = plane.depth_mm + pupil;
                            let (x, y) = (h_line.at(z), v_line.at(z));
                            plane.contains(x, y).then(|| texture.sample(x, y))
                        })
                        .unwrap_or(scene.background)
                })
                .collect()
        })
        .collect();
    let image = GrayImage::from_vec(width, lenses_v * m, rows.concat()).expect("full mosaic");
    RawLightFieldImage::new(image, m)
}
