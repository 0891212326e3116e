use std::io::Write;
use std::path::Path;

use anyhow::Result;
use spc_core::config::Reference;
use spc_core::oracle::simulate_virtual_cameras;
use spc_core::ray_model::front_vertex_to_entrance_pupil;
use spc_core::{CameraFile, TriangulationQuery, VirtualCameraArray};

use crate::{camera_array, load_config};

const LENGTH_TOL_MM: f64 = 5e-4;
const ANGLE_TOL_DEG: f64 = 5e-4;
const DISTANCE_REL_TOL: f64 = 1e-4;
const ORACLE_REL_TOL: f64 = 1e-9;
const SPREAD_TOL_MM: f64 = 1e-9;
const SIMULATION_REL_TOL: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    Absolute(f64),
    Relative(f64),
    /// `|actual − expected| ≤ rel·|expected| + abs`.
    Band {
        relative: f64,
        absolute: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub expected: f64,
    pub actual: f64,
    pub tolerance: Tolerance,
}

impl Check {
    fn new(name: impl Into<String>, expected: f64, actual: f64, tolerance: Tolerance) -> Self {
        Self {
            name: name.into(),
            expected,
            actual,
            tolerance,
        }
    }

    pub fn deviation(&self) -> f64 {
        if self.expected.is_infinite() || self.actual.is_infinite() {
            return if self.expected == self.actual {
                0.0
            } else {
                f64::INFINITY
            };
        }
        (self.actual - self.expected).abs()
    }

    pub fn passed(&self) -> bool {
        let dev = self.deviation();
        let bound = match self.tolerance {
            Tolerance::Absolute(t) => t,
            Tolerance::Relative(r) => r * self.expected.abs(),
            Tolerance::Band { relative, absolute } => relative * self.expected.abs() + absolute,
        };
        dev <= bound
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub notices: Vec<String>,
    pub warnings: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn write(&self, out: &mut dyn Write) -> std::io::Result<()> {
        for check in &self.checks {
            let tol = match check.tolerance {
                Tolerance::Absolute(t) => format!("abs {t:.1e}"),
                Tolerance::Relative(r) => format!("rel {r:.1e}"),
                Tolerance::Band { relative, absolute } => {
                    format!("rel {relative:.1e} + abs {absolute:.1e}")
                }
            };
            writeln!(
                out,
                "{} {}: expected {} actual {:.6} deviation {:.3e} ({tol})",
                if check.passed() { "PASS" } else { "FAIL" },
                check.name,
                crate::fmt_mm(check.expected),
                check.actual,
                check.deviation(),
            )?;
        }
        for notice in &self.notices {
            writeln!(out, "NOTE {notice}")?;
        }
        for warning in &self.warnings {
            writeln!(out, "WARN {warning}")?;
        }
        let failed = self.failures().count();
        writeln!(
            out,
            "{}: {} of {} checks passed",
            if failed == 0 { "OK" } else { "MISMATCH" },
            self.checks.len() - failed,
            self.checks.len()
        )
    }
}

/// `|a − b|` relative to the larger magnitude, never below `scale`.
fn relative_deviation(a: f64, b: f64, scale: f64) -> f64 {
    let diff = (a - b).abs();
    if diff < 1e-12 {
        0.0
    } else {
        diff / a.abs().max(b.abs()).max(scale)
    }
}

#[derive(Clone, Copy)]
struct Tolerances {
    length: Tolerance,
    angle: Tolerance,
    distance: Tolerance,
}

fn reference_checks(
    file: &CameraFile,
    array: &VirtualCameraArray,
    reference: &Reference,
    label: &str,
    tol: Tolerances,
    report: &mut VerifyReport,
) -> Result<()> {
    let Tolerances {
        length,
        angle,
        distance,
    } = tol;
    let config = &file.camera;
    let state = config.focus_state()?;
    if let Some(b_u) = reference.b_u_mm {
        report
            .checks
            .push(Check::new(format!("{label}b_u_mm"), b_u, state.b_u, length));
    }
    if let Some(d_ap) = reference.exit_pupil_mm {
        report.checks.push(Check::new(
            format!("{label}exit_pupil_mm"),
            d_ap,
            state.d_ap,
            length,
        ));
    }
    if let Some(v1_a) = reference.v1_a_mm {
        match config.main_lens.front_vertex_to_h1 {
            Some(v1_h1) => report.checks.push(Check::new(
                format!("{label}v1_a_mm"),
                v1_a,
                front_vertex_to_entrance_pupil(v1_h1, array.entrance_pupil_to_h1),
                length,
            )),
            None => report.notices.push(format!(
                "{label}v1_a_mm skipped: main_lens.v1h1_mm is not given"
            )),
        }
    }
    for b in &reference.baselines {
        let from = b.from.unwrap_or(VirtualCameraArray::default_origin(b.gap));
        report.checks.push(Check::new(
            format!("{label}B[from={from},G={}]", b.gap),
            b.mm,
            array.baseline(from, b.gap)?,
            length,
        ));
    }
    for t in &reference.tilts {
        let from = t.from.unwrap_or(VirtualCameraArray::default_origin(t.gap));
        report.checks.push(Check::new(
            format!("{label}Phi_deg[from={from},G={}]", t.gap),
            t.deg.abs(),
            array.relative_tilt(from, t.gap)?.to_degrees(),
            angle,
        ));
    }
    for d in &reference.distances {
        let from = d.from.unwrap_or(VirtualCameraArray::default_origin(d.gap));
        report.checks.push(Check::new(
            format!("{label}Z[from={from},G={},dx={}]", d.gap, d.dx),
            d.mm,
            array.triangulate_from(from, &TriangulationQuery::new(d.gap, d.dx))?,
            distance,
        ));
    }
    Ok(())
}

/// Compares the closed-form model against the published values of the
/// `[reference]` table and against the paraxial ray tracer.
pub fn verify(file: &CameraFile) -> Result<VerifyReport> {
    let config = &file.camera;
    let array = camera_array(config)?;
    let mut report = VerifyReport::default();

    match &file.reference {
        Some(reference) => {
            reference_checks(
                file,
                &array,
                reference,
                "",
                Tolerances {
                    length: Tolerance::Absolute(LENGTH_TOL_MM),
                    angle: Tolerance::Absolute(ANGLE_TOL_DEG),
                    distance: Tolerance::Relative(DISTANCE_REL_TOL),
                },
                &mut report,
            )?;
            if let Some(sim) = &reference.simulation {
                let band = |absolute| Tolerance::Band {
                    relative: SIMULATION_REL_TOL,
                    absolute,
                };
                reference_checks(
                    file,
                    &array,
                    sim,
                    "simulation ",
                    Tolerances {
                        length: band(LENGTH_TOL_MM),
                        angle: band(ANGLE_TOL_DEG),
                        distance: band(0.0),
                    },
                    &mut report,
                )?;
            }
        }
        None => report
            .notices
            .push("no [reference] table; only the oracle is checked".into()),
    }

    let sim = simulate_virtual_cameras(config)?;
    let c = array.max_view();
    let length_scale = config.main_lens.focal_length;
    let worst = |f: &dyn Fn(i32) -> Result<(f64, f64)>,
                 range: std::ops::RangeInclusive<i32>,
                 scale: f64| {
        range.map(f).try_fold(0.0f64, |acc, pair| {
            pair.map(|(a, b)| acc.max(relative_deviation(a, b, scale)))
        })
    };
    let rel = Tolerance::Absolute(ORACLE_REL_TOL);
    report.checks.push(Check::new(
        "oracle A''H1U relative deviation",
        0.0,
        relative_deviation(
            sim.entrance_pupil_to_h1,
            array.entrance_pupil_to_h1,
            length_scale,
        ),
        rel,
    ));
    let positions = worst(
        &|i| Ok((sim.position(i)?, array.position(i)?)),
        -c..=c,
        length_scale,
    )?;
    report.checks.push(Check::new(
        "oracle A''_i max relative deviation",
        0.0,
        positions,
        rel,
    ));
    let tilts = worst(&|i| Ok((sim.tilt(i)?, array.tilt(i)?)), -c..=c, 0.0)?;
    report.checks.push(Check::new(
        "oracle Phi_i max relative deviation",
        0.0,
        tilts,
        rel,
    ));
    let baselines = worst(
        &|g| {
            let gap = g as usize;
            let from = VirtualCameraArray::default_origin(gap);
            Ok((sim.baseline(from, gap)?, array.baseline(from, gap)?))
        },
        1..=2 * c,
        length_scale,
    )?;
    report.checks.push(Check::new(
        "oracle B_G max relative deviation",
        0.0,
        baselines,
        rel,
    ));
    report.checks.push(Check::new(
        "oracle same-i pupil crossing spread mm",
        0.0,
        sim.spread,
        Tolerance::Absolute(SPREAD_TOL_MM),
    ));

    if let Some(diameter) = config.main_lens.entrance_pupil_diameter {
        let widest = array.baseline(-c, 2 * c as usize)?;
        if widest > diameter {
            report.warnings.push(format!(
                "widest baseline {widest:.4} mm exceeds the entrance pupil diameter {diameter:.4} mm"
            ));
        }
    }
    Ok(report)
}

/// Runs [`verify`] on a camera file and writes the report; returns whether
/// every check passed.
pub fn cmd_verify(config_path: &Path, out: &mut dyn Write) -> Result<bool> {
    let report = verify(&load_config(config_path)?)?;
    report.write(out)?;
    Ok(report.passed())
}
