//! Reporting helpers for the acceptance suite: tolerance rows grouped into
//! numbered criteria, and access to the shipped camera fixtures.

use std::path::{Path, PathBuf};

use spc_core::{CameraConfig, CameraFile, VirtualCameraArray};

/// One compared quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub label: String,
    pub expected: f64,
    pub actual: f64,
    /// Largest admissible `|actual − expected|`.
    pub tolerance: f64,
}

impl Row {
    pub fn new(label: impl Into<String>, expected: f64, actual: f64, tolerance: f64) -> Self {
        Self {
            label: label.into(),
            expected,
            actual,
            tolerance,
        }
    }

    /// A row whose `actual` is itself a deviation that should stay within
    /// `tolerance` of zero.
    pub fn bound(label: impl Into<String>, deviation: f64, tolerance: f64) -> Self {
        Self::new(label, 0.0, deviation, tolerance)
    }

    /// Infinite values only match an identical infinity.
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

    pub fn ok(&self) -> bool {
        self.deviation() <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Criterion {
    pub number: u32,
    pub title: &'static str,
    pub rows: Vec<Row>,
}

impl Criterion {
    pub fn passed(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(Row::ok)
    }

    /// Summary line followed by one indented line per red row.
    pub fn report(&self) -> String {
        let passed = self.rows.iter().filter(|r| r.ok()).count();
        let mut text = format!(
            "criterion {} {}: {} ({}/{} checks within tolerance)\n",
            self.number,
            self.title,
            if self.passed() { "PASS" } else { "FAIL" },
            passed,
            self.rows.len()
        );
        for row in self.rows.iter().filter(|r| !r.ok()) {
            text.push_str(&format!(
                "    red: {} expected {:.4} got {:.6} deviation {:.3e} > {:.1e}\n",
                row.label,
                row.expected,
                row.actual,
                row.deviation(),
                row.tolerance
            ));
        }
        text
    }
}

/// `|a − b|` over the larger magnitude, never dividing by less than `scale`.
pub fn relative_deviation(a: f64, b: f64, scale: f64) -> f64 {
    let diff = (a - b).abs();
    if diff < 1e-12 {
        0.0
    } else {
        diff / a.abs().max(b.abs()).max(scale)
    }
}

pub fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

pub fn fixture_path(name: &str) -> PathBuf {
    configs_dir().join(format!("{name}.toml"))
}

pub fn fixture(name: &str) -> CameraConfig {
    CameraFile::load(fixture_path(name))
        .unwrap_or_else(|e| panic!("fixture {name}: {e}"))
        .camera
}

pub fn fixture_array(name: &str) -> VirtualCameraArray {
    spc_cli::camera_array(&fixture(name)).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}
