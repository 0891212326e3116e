//! Library side of the `spc` command. Every command writes to a caller
//! supplied sink.
//!
//! Lengths are millimetres and angles are degrees throughout.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use spc_core::lightfield::{decode, extract_all_views};
use spc_core::oracle::render_synthetic_scene;
use spc_core::pgm::{self, Encoding};
use spc_core::ray_model::front_vertex_to_entrance_pupil;
use spc_core::scene::Scene;
use spc_core::{
    block_match, CameraConfig, CameraFile, DisparityMap, Geometry, GrayImage, MatchParams,
    RawLightFieldImage, TriangulationQuery, VirtualCameraArray,
};

mod verify;

pub use verify::{cmd_verify, verify, Check, Tolerance, VerifyReport};

/// Origin of reported distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DepthReference {
    /// Entrance pupil of the main lens.
    Pupil,
    /// Micro lens array plane.
    Mla,
    /// Front vertex of the main lens (needs `v1h1_mm`).
    FrontVertex,
}

impl DepthReference {
    fn name(self) -> &'static str {
        match self {
            DepthReference::Pupil => "pupil",
            DepthReference::Mla => "mla",
            DepthReference::FrontVertex => "front-vertex",
        }
    }
}

pub fn load_config(path: &Path) -> Result<CameraFile> {
    CameraFile::load(path).with_context(|| format!("loading camera file {}", path.display()))
}

/// Virtual camera array along the horizontal axis with `b_N = 1`.
pub fn camera_array(config: &CameraConfig) -> Result<VirtualCameraArray> {
    Ok(Geometry::horizontal(config)?.virtual_camera_array(1.0)?)
}

/// Fixed four-decimal rendering; infinities print as `inf` and `-inf`.
pub fn fmt_mm(value: f64) -> String {
    if value.is_nan() {
        "nan".to_string()
    } else {
        format!("{value:.4}")
    }
}

fn focus_header(config: &CameraConfig, array: &VirtualCameraArray) -> Result<String> {
    let state = config.focus_state()?;
    let tilt = match array.signed_relative_tilt(-1, 1)? {
        t if t > 0.0 => "converging",
        t if t < 0.0 => "diverging",
        _ => "parallel",
    };
    Ok(format!(
        "# d_f_mm={} b_u_mm={} d_ap_mm={} a_u_mm={} entrance_pupil_to_h1_mm={} p_n={:.6e} tilt={tilt}\n",
        fmt_mm(config.focus.mm()),
        fmt_mm(state.b_u),
        fmt_mm(state.d_ap),
        fmt_mm(state.a_u),
        fmt_mm(array.entrance_pupil_to_h1),
        array.virtual_pixel_pitch,
    ))
}

/// Prediction table over the symmetric viewpoint pair of every gap. Rows
/// without a disparity leave `dx` and `Z_mm` empty.
pub fn cmd_predict(
    config_path: &Path,
    gaps: &[usize],
    disparities: &[f64],
    out: &mut dyn Write,
) -> Result<()> {
    let file = load_config(config_path)?;
    let array = camera_array(&file.camera)?;
    out.write_all(focus_header(&file.camera, &array)?.as_bytes())?;
    let mut csv = csv::Writer::from_writer(out);
    csv.write_record(["G", "dx", "B_mm", "Phi_deg", "Z_mm"])?;
    for &gap in gaps {
        let origin = VirtualCameraArray::default_origin(gap);
        let baseline = array
            .baseline(origin, gap)
            .with_context(|| format!("gap {gap}"))?;
        let tilt = array.relative_tilt(origin, gap)?.to_degrees();
        let (b, phi) = (fmt_mm(baseline), fmt_mm(tilt));
        if disparities.is_empty() {
            csv.write_record([gap.to_string().as_str(), "", &b, &phi, ""])?;
        }
        for &dx in disparities {
            let z = array.triangulate(&TriangulationQuery::new(gap, dx))?;
            csv.write_record([
                gap.to_string(),
                dx.to_string(),
                b.clone(),
                phi.clone(),
                fmt_mm(z),
            ])?;
        }
    }
    csv.flush()?;
    Ok(())
}

/// Writes `view_{i}_{g}.pgm` for every viewpoint of a calibrated raw capture.
pub fn cmd_extract(
    config_path: &Path,
    raw_path: &Path,
    out_dir: &Path,
    rotate180: bool,
) -> Result<Vec<PathBuf>> {
    let file = load_config(config_path)?;
    let graymap = pgm::read(raw_path)?;
    let mut raw = RawLightFieldImage::for_config(graymap.image, &file.camera)?;
    if rotate180 {
        raw = raw.rotate_180();
    }
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mut written = Vec::new();
    for view in extract_all_views(&decode(&raw)) {
        let path = out_dir.join(format!("view_{}_{}.pgm", view.i, view.g));
        pgm::write(&path, &view.image, graymap.maxval, Encoding::Raw)?;
        written.push(path);
    }
    Ok(written)
}

/// Serialises a disparity or depth map row by row with a `#` header line.
pub fn write_map(header: &str, map: &DisparityMap, out: &mut dyn Write) -> Result<()> {
    writeln!(out, "# {header}")?;
    let mut csv = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    for row in map.values().chunks(map.width()) {
        csv.write_record(row.iter().map(|&v| fmt_mm(v)))?;
    }
    csv.flush()?;
    Ok(())
}

/// Parses a map written by [`write_map`]; `#` lines are ignored.
pub fn read_map(input: impl Read) -> Result<DisparityMap> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut values = Vec::new();
    let mut width = None;
    let mut height = 0;
    for record in reader.records() {
        let record = record?;
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                bail!(
                    "row {} has {} cells, expected {w}",
                    height + 1,
                    record.len()
                )
            }
            Some(_) => {}
        }
        for cell in record.iter() {
            let value: f64 = cell
                .parse()
                .with_context(|| format!("row {}: `{cell}` is not a number", height + 1))?;
            values.push(value);
        }
        height += 1;
    }
    let width = width.context("disparity map is empty")?;
    Ok(DisparityMap::from_values(width, height, values)?)
}

/// Linear 16-bit rendering of a disparity map over `[-D, D]`; invalid
/// pixels are black.
pub fn disparity_visualisation(map: &DisparityMap, max_disparity: usize) -> GrayImage {
    let d = max_disparity as f64;
    GrayImage::from_fn(map.width(), map.height(), |x, y| match map.get(x, y) {
        Some(v) => (((v + d) / (2.0 * d)).clamp(0.0, 1.0) * 65535.0) as f32,
        None => 0.0,
    })
}

/// Block matching of `left` (viewpoint `i + G`) against `right`
/// (viewpoint `i`).
pub fn cmd_disparity(
    left_path: &Path,
    right_path: &Path,
    params: &MatchParams,
    out: &mut dyn Write,
    view_path: Option<&Path>,
) -> Result<DisparityMap> {
    let left = pgm::read(left_path)?.image;
    let right = pgm::read(right_path)?.image;
    let map = block_match(&left, &right, params)?;
    let header = format!(
        "width={} height={} block={} maxd={} subpixel={}",
        map.width(),
        map.height(),
        params.block_size,
        params.max_disparity,
        params.subpixel
    );
    write_map(&header, &map, out)?;
    if let Some(path) = view_path {
        pgm::write(
            path,
            &disparity_visualisation(&map, params.max_disparity),
            u16::MAX,
            Encoding::Raw,
        )?;
    }
    Ok(map)
}

/// Distance of the entrance pupil in front of the chosen reference.
pub fn reference_offset(file: &CameraFile, reference: DepthReference) -> Result<f64> {
    let config = &file.camera;
    let array = camera_array(config)?;
    Ok(match reference {
        DepthReference::Pupil => 0.0,
        DepthReference::Mla => {
            config.focus_state()?.b_u + config.main_lens.principal_gap + array.entrance_pupil_to_h1
        }
        DepthReference::FrontVertex => {
            let v1_h1 = config
                .main_lens
                .front_vertex_to_h1
                .context("front-vertex distances need main_lens.v1h1_mm")?;
            -front_vertex_to_entrance_pupil(v1_h1, array.entrance_pupil_to_h1)
        }
    })
}

/// Triangulates every valid cell of a disparity map.
pub fn depth_map(
    file: &CameraFile,
    map: &DisparityMap,
    gap: usize,
    origin: Option<i32>,
    reference: DepthReference,
) -> Result<DisparityMap> {
    let array = camera_array(&file.camera)?;
    let origin = origin.unwrap_or_else(|| VirtualCameraArray::default_origin(gap));
    let offset = reference_offset(file, reference)?;
    let mut values = Vec::with_capacity(map.values().len());
    for &dx in map.values() {
        values.push(if dx.is_nan() {
            f64::NAN
        } else {
            array.triangulate_from(origin, &TriangulationQuery::new(gap, dx))? + offset
        });
    }
    Ok(DisparityMap::from_values(
        map.width(),
        map.height(),
        values,
    )?)
}

pub fn cmd_depth(
    config_path: &Path,
    disparity_path: &Path,
    gap: usize,
    origin: Option<i32>,
    reference: DepthReference,
    out: &mut dyn Write,
) -> Result<DisparityMap> {
    let file = load_config(config_path)?;
    let input = std::fs::File::open(disparity_path)
        .with_context(|| format!("opening {}", disparity_path.display()))?;
    let map = read_map(input)?;
    let depth = depth_map(&file, &map, gap, origin, reference)?;
    let mut header = String::new();
    write!(
        header,
        "unit=mm reference={} gap={gap} origin={}",
        reference.name(),
        origin.unwrap_or_else(|| VirtualCameraArray::default_origin(gap))
    )?;
    write_map(&header, &depth, out)?;
    Ok(depth)
}

/// Renders a scene description into a 16-bit calibrated raw capture.
pub fn cmd_render(config_path: &Path, scene_path: &Path, out_path: &Path) -> Result<()> {
    let file = load_config(config_path)?;
    let scene = Scene::load(scene_path)?;
    let raw = render_synthetic_scene(&file.camera, &scene)?;
    let image = raw.into_image();
    let scaled = GrayImage::from_fn(image.width(), image.height(), |x, y| {
        image.get(x, y) * f32::from(u16::MAX)
    });
    pgm::write(out_path, &scaled, u16::MAX, Encoding::Raw)?;
    Ok(())
}
