#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use spc_core::pgm::{self, Encoding};
use spc_core::GrayImage;

pub fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

pub fn config(name: &str) -> PathBuf {
    configs_dir().join(format!("{name}.toml"))
}

pub fn run_spc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spc"))
        .args(args)
        .output()
        .expect("spc runs")
}

pub fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 output")
}

pub fn write_pgm(path: &Path, image: &GrayImage, maxval: u16) {
    pgm::write(path, image, maxval, Encoding::Raw).expect("graymap written");
}

/// Camera file text with a custom sensor and array, main lens f197.
pub fn small_camera(lenses_h: usize, lenses_v: usize, micro_image_px: usize) -> String {
    format!(
        "[sensor]\npixel_pitch_mm = 0.009\nmicro_image_px = {micro_image_px}\n\n\
         [mla]\nlenses_h = {lenses_h}\nlenses_v = {lenses_v}\npitch_mm = 0.125\nf_s_mm = 2.75\n\n\
         [main_lens]\nf_u_mm = 197.1264\nexit_pupil_inf_mm = 100.5\nh1h2_mm = 147.4618\n\n\
         [focus]\nd_f_mm = inf\n"
    )
}
