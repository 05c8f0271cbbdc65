//! Numbered PGM frame directories.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::io::pgm::{read_pgm, write_pgm};

/// Name of the scenario sidecar written next to synthesized frames.
pub const SIDECAR_NAME: &str = "scenario.cfg";

fn frame_number(path: &Path) -> Result<u64> {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("");
    let digits: String = stem
        .chars()
        .rev()
        .take_while(char::is_ascii_digit)
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .collect();
    digits.parse().map_err(|_| Error::Format {
        path: path.to_path_buf(),
        message: "frame file name must end in a number".into(),
    })
}

/// The `.pgm` files of a directory, lexicographically ordered and checked
/// for gapless numbering.
#[derive(Debug, Clone)]
pub struct FrameDir {
    paths: Vec<PathBuf>,
}

impl FrameDir {
    pub fn open(dir: &Path) -> Result<Self> {
        let mut paths = Vec::new();
        for entry in fs::read_dir(dir)? {
            let path = entry?.path();
            if path.is_file()
                && path
                    .extension()
                    .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
            {
                paths.push(path);
            }
        }
        paths.sort();
        let mut expected = None;
        for p in &paths {
            let n = frame_number(p)?;
            if let Some(e) = expected {
                if n != e {
                    return Err(Error::NumberingGap {
                        expected: e,
                        found: n,
                    });
                }
            }
            expected = Some(n + 1);
        }
        Ok(Self { paths })
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn paths(&self) -> &[PathBuf] {
        &self.paths
    }

    /// Raw gray frames in order. Every frame must match the first one's size.
    pub fn raw(&self) -> impl Iterator<Item = Result<Field>> + '_ {
        let mut dims = None;
        self.paths.iter().map(move |p| {
            let f = read_pgm(p)?;
            match dims {
                None => dims = Some(f.dims()),
                Some((w, h)) => f.ensure_dims(w, h).map_err(|e| Error::Format {
                    path: p.clone(),
                    message: e.to_string(),
                })?,
            }
            Ok(f)
        })
    }

    /// Frames scaled to `[0, 1]`.
    pub fn normalized(&self) -> impl Iterator<Item = Result<Field>> + '_ {
        self.raw()
            .map(|r| r.map(|f| crate::pipeline::normalize(&f)))
    }
}

pub fn frame_file_name(index: usize, total: usize) -> String {
    let width = total.to_string().len().max(4);
    format!("frame_{index:0width$}.pgm")
}

/// Writes `frame_0001.pgm`, `frame_0002.pgm`, ... into `dir`.
pub fn write_frames(dir: &Path, frames: &[Field]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    frames
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let path = dir.join(frame_file_name(i + 1, frames.len()));
            write_pgm(&path, f)?;
            Ok(path)
        })
        .collect()
}
