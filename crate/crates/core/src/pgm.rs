//! Portable graymap reading and writing (plain `P2` and raw `P5`, 8 or 16 bit).
//!
//! Samples are kept as integer counts in `0..=maxval` and read/write
//! round trips are exact.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    /// `P2`, whitespace separated decimal samples.
    Plain,
    /// `P5`, big-endian binary samples.
    Raw,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graymap {
    pub image: GrayImage,
    pub maxval: u16,
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Header<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn token(&mut self) -> Option<&'a str> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .filter(|t| !t.is_empty())
    }

    fn number(&mut self) -> Option<usize> {
        self.token()?.parse().ok()
    }
}

pub fn decode(bytes: &[u8], path: &Path) -> Result<Graymap> {
    let bad = |message: &str| Error::Pgm {
        path: path.to_path_buf(),
        message: message.to_string(),
    };
    let mut header = Header { bytes, pos: 0 };
    let encoding = match header.token() {
        Some("P2") => Encoding::Plain,
        Some("P5") => Encoding::Raw,
        _ => return Err(bad("expected magic number P2 or P5")),
    };
    let width = header.number().ok_or_else(|| bad("missing width"))?;
    let height = header.number().ok_or_else(|| bad("missing height"))?;
    let maxval = header.number().ok_or_else(|| bad("missing maxval"))?;
    if maxval == 0 || maxval > u16::MAX as usize {
        return Err(bad("maxval must be in 1..=65535"));
    }
    let count = width * height;
    let mut data = Vec::with_capacity(count);
    match encoding {
        Encoding::Plain => {
            for _ in 0..count {
                let v = header
                    .number()
                    .ok_or_else(|| bad("truncated sample data"))?;
                if v > maxval {
                    return Err(bad("sample exceeds maxval"));
                }
                data.push(v as f32);
            }
        }
        Encoding::Raw => {
            // Exactly one whitespace byte separates the header from the data.
            let start = header.pos + 1;
            let wide = maxval > 255;
            let needed = count * if wide { 2 } else { 1 };
            let body = bytes
                .get(start..start + needed)
                .ok_or_else(|| bad("truncated sample data"))?;
            if wide {
                data.extend(
                    body.chunks_exact(2)
                        .map(|b| u16::from_be_bytes([b[0], b[1]]) as f32),
                );
            } else {
                data.extend(body.iter().map(|&b| b as f32));
            }
        }
    }
    let image = GrayImage::from_vec(width, height, data).expect("sample count checked");
    Ok(Graymap {
        image,
        maxval: maxval as u16,
    })
}

pub fn read(path: impl AsRef<Path>) -> Result<Graymap> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    decode(&bytes, path)
}

/// Serialises samples rounded and clamped to `0..=maxval`.
pub fn encode(image: &GrayImage, maxval: u16, encoding: Encoding) -> Vec<u8> {
    let maxval = maxval.max(1);
    let quantise = |v: f32| -> u16 {
        if v.is_nan() {
            0
        } else {
            v.round().clamp(0.0, maxval as f32) as u16
        }
    };
    let magic = match encoding {
        Encoding::Plain => "P2",
        Encoding::Raw => "P5",
    };
    let mut out = format!("{magic}\n{} {}\n{maxval}\n", image.width(), image.height()).into_bytes();
    match encoding {
        Encoding::Plain => {
            for y in 0..image.height() {
                let line: Vec<String> = image
                    .row(y)
                    .iter()
                    .map(|&v| quantise(v).to_string())
                    .collect();
                out.extend_from_slice(line.join(" ").as_bytes());
                out.push(b'\n');
            }
        }
        Encoding::Raw => {
            for &v in image.as_slice() {
                let q = quantise(v);
                if maxval > 255 {
                    out.extend_from_slice(&q.to_be_bytes());
                } else {
                    out.push(q as u8);
                }
            }
        }
    }
    out
}

pub fn write(
    path: impl AsRef<Path>,
    image: &GrayImage,
    maxval: u16,
    encoding: Encoding,
) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(&encode(image, maxval, encoding))?;
    Ok(())
}
