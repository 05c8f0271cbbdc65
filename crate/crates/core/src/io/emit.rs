//! Time-series CSV and target JSON-lines output.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::pipeline::FrameReport;

pub const CSV_HEADER: &str = "t,u,out,spike,collision,n_targets";

/// Fixed-point decimal with `sig` significant digits.
pub fn format_sig(v: f64, sig: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 {
            format!("{:.*}", sig.saturating_sub(1), 0.0)
        } else {
            v.to_string()
        };
    }
    let digits = |exp: i32| (sig as i32 - 1 - exp).max(0) as usize;
    let exp = v.abs().log10().floor() as i32;
    let s = format!("{:.*}", digits(exp), v);
    // Rounding can carry into a new leading digit, e.g. 9.9999999996.
    let carried: f64 = s.parse().unwrap_or(v);
    if carried.abs() >= 10f64.powi(exp + 1) {
        format!("{:.*}", digits(exp + 1), v)
    } else {
        s
    }
}

pub fn write_csv_row(w: &mut impl Write, r: &FrameReport) -> Result<()> {
    writeln!(
        w,
        "{},{},{},{},{},{}",
        r.t,
        format_sig(r.u, 9),
        format_sig(r.out, 9),
        r.spike,
        r.collision,
        r.targets.len()
    )?;
    Ok(())
}

pub fn write_csv<'a>(
    w: &mut impl Write,
    reports: impl IntoIterator<Item = &'a FrameReport>,
) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in reports {
        write_csv_row(w, r)?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct TargetRecord {
    t: u64,
    #[serde(rename = "X")]
    x: f64,
    #[serde(rename = "Y")]
    y: f64,
    phi: f64,
    energy: f64,
    n_points: usize,
}

/// One line per target of the report.
pub fn write_target_lines(w: &mut impl Write, r: &FrameReport) -> Result<()> {
    for t in &r.targets {
        let rec = TargetRecord {
            t: r.t,
            x: t.x,
            y: t.y,
            phi: t.phi,
            energy: t.energy,
            n_points: t.member_count,
        };
        serde_json::to_writer(&mut *w, &rec).map_err(std::io::Error::from)?;
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_jsonl<'a>(
    w: &mut impl Write,
    reports: impl IntoIterator<Item = &'a FrameReport>,
) -> Result<()> {
    for r in reports {
        write_target_lines(w, r)?;
    }
    Ok(())
}
