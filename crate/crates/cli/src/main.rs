use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use spc_cli::DepthReference;
use spc_core::MatchParams;

/// Standard plenoptic camera toolkit.
///
/// All lengths are in millimetres and all angles in degrees. Camera files
/// are TOML documents; see the README for their layout.
#[derive(Parser)]
#[command(name = "spc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Predicted baselines and tilt magnitudes for symmetric viewpoint pairs
    /// as CSV. Distances Z_mm are measured from the entrance pupil.
    Predict {
        config: PathBuf,
        /// Viewpoint gaps G, comma separated.
        #[arg(long, value_delimiter = ',')]
        gaps: Vec<usize>,
        /// Disparities in pixels, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        disparities: Vec<f64>,
        /// Output file (stdout when omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Decode a calibrated raw graymap and write view_{i}_{g}.pgm files.
    Extract {
        config: PathBuf,
        raw: PathBuf,
        out_dir: PathBuf,
        /// Rotate the raw capture by 180 degrees before decoding.
        #[arg(long)]
        rotate180: bool,
    },
    /// SAD block matching; LEFT is viewpoint i+G and RIGHT is viewpoint i.
    /// Writes disparities in pixels as CSV with `nan` for invalid pixels.
    Disparity {
        left: PathBuf,
        right: PathBuf,
        /// Odd matching window edge in pixels.
        #[arg(long, default_value_t = 29)]
        block: usize,
        /// Largest disparity magnitude searched, in pixels.
        #[arg(long, default_value_t = 5)]
        maxd: usize,
        /// Parabolic sub-pixel refinement.
        #[arg(long)]
        subpixel: bool,
        /// Also write a 16-bit graymap mapping [-maxd, maxd] to [0, 65535].
        #[arg(long)]
        view: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Convert a disparity CSV into distances in millimetres.
    Depth {
        config: PathBuf,
        disparity: PathBuf,
        /// Viewpoint gap G the disparities were measured with.
        #[arg(long)]
        gap: usize,
        /// First viewpoint of the pair (default -floor(G/2)).
        #[arg(long, allow_negative_numbers = true)]
        origin: Option<i32>,
        /// Plane the distances are measured from.
        #[arg(long, value_enum, default_value = "pupil")]
        reference: DepthReference,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check the model against published reference values and the ray
    /// tracer. Exits non-zero on any mismatch.
    Verify { config: PathBuf },
    /// Render a synthetic scene into a 16-bit calibrated raw graymap.
    Render {
        config: PathBuf,
        scene: PathBuf,
        output: PathBuf,
    },
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Predict {
            config,
            gaps,
            disparities,
            output,
        } => {
            let mut out = sink(output.as_deref())?;
            spc_cli::cmd_predict(&config, &gaps, &disparities, &mut out)?;
            out.flush()?;
        }
        Command::Extract {
            config,
            raw,
            out_dir,
            rotate180,
        } => {
            let written = spc_cli::cmd_extract(&config, &raw, &out_dir, rotate180)?;
            eprintln!("wrote {} views to {}", written.len(), out_dir.display());
        }
        Command::Disparity {
            left,
            right,
            block,
            maxd,
            subpixel,
            view,
            output,
        } => {
            let params = MatchParams::new(block, maxd, subpixel)?;
            let mut out = sink(output.as_deref())?;
            spc_cli::cmd_disparity(&left, &right, &params, &mut out, view.as_deref())?;
            out.flush()?;
        }
        Command::Depth {
            config,
            disparity,
            gap,
            origin,
            reference,
            output,
        } => {
            let mut out = sink(output.as_deref())?;
            spc_cli::cmd_depth(&config, &disparity, gap, origin, reference, &mut out)?;
            out.flush()?;
        }
        Command::Verify { config } => {
            let mut out = sink(None)?;
            let passed = spc_cli::cmd_verify(&config, &mut out)?;
            out.flush()?;
            return Ok(passed);
        }
        Command::Render {
            config,
            scene,
            output,
        } => {
            spc_cli::cmd_render(&config, &scene, &output)?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
