//! Binary netpbm: P5 gray in, P5 and P6 out. Only maxval 255 is accepted.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::Field;

struct Header {
    magic: [u8; 2],
    width: usize,
    height: usize,
    maxval: usize,
    data_start: usize,
}

fn parse_header(bytes: &[u8], path: &Path) -> Result<Header> {
    let fail = |m: &str| Error::Format {
        path: path.to_path_buf(),
        message: m.to_string(),
    };
    if bytes.len() < 2 {
        return Err(fail("file too short for a netpbm header"));
    }
    let magic = [bytes[0], bytes[1]];
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for f in &mut fields {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(fail("expected a header number"));
        }
        *f = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| fail("header number out of range"))?;
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(fail("missing whitespace after maxval"));
    }
    Ok(Header {
        magic,
        width: fields[0],
        height: fields[1],
        maxval: fields[2],
        data_start: pos + 1,
    })
}

/// Parses a P5 image into raw gray levels.
pub fn parse_pgm(bytes: &[u8], path: &Path) -> Result<Field> {
    let h = parse_header(bytes, path)?;
    if &h.magic != b"P5" {
        return Err(Error::Unsupported {
            path: path.to_path_buf(),
            message: format!(
                "magic {:?}, only binary P5 is read",
                String::from_utf8_lossy(&h.magic)
            ),
        });
    }
    if h.maxval != 255 {
        return Err(Error::Unsupported {
            path: path.to_path_buf(),
            message: format!("maxval {}, only 255 is read", h.maxval),
        });
    }
    if h.width == 0 || h.height == 0 {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: "zero image dimension".into(),
        });
    }
    let n = h.width * h.height;
    let data = &bytes[h.data_start..];
    if data.len() < n {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: format!("expected {n} pixel bytes, found {}", data.len()),
        });
    }
    Field::from_vec(
        h.width,
        h.height,
        data[..n].iter().map(|&b| f64::from(b)).collect(),
    )
}

pub fn read_pgm(path: &Path) -> Result<Field> {
    parse_pgm(&fs::read(path)?, path)
}

/// Rounds and clamps to `0..=255`.
pub fn to_gray(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

pub fn encode_pgm(raw: &Field) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", raw.width(), raw.height()).into_bytes();
    out.extend(raw.as_slice().iter().map(|&v| to_gray(v)));
    out
}

pub fn write_pgm(path: &Path, raw: &Field) -> Result<()> {
    fs::write(path, encode_pgm(raw))?;
    Ok(())
}

/// An 8-bit RGB raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rgb {
    pub width: usize,
    pub height: usize,
    pub data: Vec<[u8; 3]>,
}

impl Rgb {
    pub fn from_gray(raw: &Field) -> Self {
        Self {
            width: raw.width(),
            height: raw.height(),
            data: raw.as_slice().iter().map(|&v| [to_gray(v); 3]).collect(),
        }
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        self.data[y * self.width + x]
    }

    /// Ignores points outside the image.
    pub fn put(&mut self, x: i64, y: i64, c: [u8; 3]) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            self.data[y as usize * self.width + x as usize] = c;
        }
    }

    pub fn encode_ppm(&self, comments: &[String]) -> Vec<u8> {
        let mut header = String::from("P6\n");
        for c in comments {
            header.push_str("# ");
            header.push_str(c);
            header.push('\n');
        }
        header.push_str(&format!("{} {}\n255\n", self.width, self.height));
        let mut out = header.into_bytes();
        out.extend(self.data.iter().flatten());
        out
    }
}
