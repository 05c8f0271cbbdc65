//! Target overlays and debug-map dumps.

use std::fs;
use std::path::Path;

use crate::detection::TargetEstimate;
use crate::error::Result;
use crate::field::Field;
use crate::io::pgm::{write_pgm, Rgb};
use crate::pipeline::DebugMaps;

pub const BOX_COLOR: [u8; 3] = [0, 255, 0];
pub const ARROW_COLOR: [u8; 3] = [0, 0, 255];
/// Default arrow length in pixels per unit of cluster energy.
pub const DEFAULT_ARROW_SCALE: f64 = 200.0;

/// Pixels of the straight segment from `a` to `b`, endpoints included.
pub fn line_points(a: (f64, f64), b: (f64, f64)) -> Vec<(i64, i64)> {
    let steps = (b.0 - a.0).abs().max((b.1 - a.1).abs()).ceil().max(1.0) as usize;
    let mut out: Vec<(i64, i64)> = (0..=steps)
        .map(|i| {
            let s = i as f64 / steps as f64;
            (
                (a.0 + s * (b.0 - a.0)).round() as i64,
                (a.1 + s * (b.1 - a.1)).round() as i64,
            )
        })
        .collect();
    out.dedup();
    out
}

/// Arrow tip for a target: from the centroid along `phi`, `scale * energy`
/// pixels long.
pub fn arrow_tip(t: &TargetEstimate, scale: f64) -> (f64, f64) {
    let len = scale * t.energy;
    (t.x + len * t.phi.cos(), t.y + len * t.phi.sin())
}

pub fn render_overlay(raw: &Field, targets: &[TargetEstimate], scale: f64) -> Rgb {
    let mut img = Rgb::from_gray(raw);
    for t in targets {
        let (x0, y0, x1, y1) = t.bounding_box();
        let (x0, y0, x1, y1) = (x0 as i64, y0 as i64, x1 as i64, y1 as i64);
        for x in x0..=x1 {
            img.put(x, y0, BOX_COLOR);
            img.put(x, y1, BOX_COLOR);
        }
        for y in y0..=y1 {
            img.put(x0, y, BOX_COLOR);
            img.put(x1, y, BOX_COLOR);
        }
    }
    for t in targets {
        let tip = arrow_tip(t, scale);
        for (x, y) in line_points((t.x, t.y), tip) {
            img.put(x, y, ARROW_COLOR);
        }
        for side in [-1.0, 1.0] {
            let a = t.phi + std::f64::consts::PI + side * 0.5;
            let barb = (tip.0 + 3.0 * a.cos(), tip.1 + 3.0 * a.sin());
            for (x, y) in line_points(tip, barb) {
                img.put(x, y, ARROW_COLOR);
            }
        }
    }
    img
}

pub fn write_overlay(
    path: &Path,
    raw: &Field,
    targets: &[TargetEstimate],
    scale: f64,
) -> Result<()> {
    let comment = format!("arrow_scale {scale} px per unit energy");
    fs::write(
        path,
        render_overlay(raw, targets, scale).encode_ppm(&[comment]),
    )?;
    Ok(())
}

/// Linearly stretches `[min, max]` to `[0, 255]`; a flat map becomes 0.
pub fn stretch(f: &Field) -> Field {
    let (lo, hi) = (f.min(), f.max());
    if hi > lo {
        f.map(|v| 255.0 * (v - lo) / (hi - lo))
    } else {
        Field::zeros(f.width(), f.height())
    }
}

/// Writes each intermediate map of frame `t` as a contrast-stretched PGM.
pub fn write_debug_maps(dir: &Path, t: u64, maps: &DebugMaps) -> Result<()> {
    fs::create_dir_all(dir)?;
    let a = &maps.approach;
    let named: [(&str, &Field); 14] = [
        ("p", &maps.photoreceptor),
        ("b_plus", &maps.bipolar_plus),
        ("b_minus", &maps.bipolar_minus),
        ("b_plus_fast", &maps.bundle.plus_fast),
        ("b_plus_slow", &maps.bundle.plus_slow),
        ("b_minus_fast", &maps.bundle.minus_fast),
        ("b_minus_slow", &maps.bundle.minus_slow),
        ("v", &maps.direction.v),
        ("phi", &maps.direction.phi_hat),
        ("g", &a.g),
        ("m_a", &a.m_a),
        ("m_d", &a.m_d),
        ("v_prime", &a.v_prime),
        ("g_prime", &a.g_prime),
    ];
    for (name, f) in named {
        write_pgm(&dir.join(format!("t{t:04}_{name}.pgm")), &stretch(f))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn target(phi: f64, energy: f64) -> TargetEstimate {
        TargetEstimate {
            x: 20.0,
            y: 20.0,
            phi,
            energy,
            member_count: 4,
            members: vec![(15, 15), (25, 15), (15, 25), (25, 25)],
        }
    }

    #[test]
    fn no_targets_is_plain_rgb() {
        let f = Field::from_fn(8, 8, |x, y| (x * 30 + y) as f64);
        let img = render_overlay(&f, &[], 1.0);
        assert_eq!(img, Rgb::from_gray(&f));
    }

    #[test]
    fn box_and_arrow_drawn() {
        let f = Field::filled(40, 40, 128.0);
        let t = target(0.0, 0.05);
        let img = render_overlay(&f, std::slice::from_ref(&t), 200.0);
        assert_eq!(img.get(15, 20), BOX_COLOR);
        assert_eq!(img.get(25, 15), BOX_COLOR);
        assert_eq!(img.get(20, 20), ARROW_COLOR);
        assert_eq!(img.get(30, 20), ARROW_COLOR);
        assert_eq!(img.get(0, 0), [128; 3]);
    }

    #[test]
    fn arrow_endpoint_follows_phi() {
        let f = Field::filled(64, 64, 0.0);
        for k in 0..16 {
            let phi = k as f64 * std::f64::consts::PI / 8.0;
            let mut t = target(phi, 0.06);
            t.x = 32.0;
            t.y = 32.0;
            let img = render_overlay(&f, std::slice::from_ref(&t), 200.0);
            let tip = arrow_tip(&t, 200.0);
            let (ex, ey) = (tip.0.round() as usize, tip.1.round() as usize);
            assert!((32.0 + 12.0 * phi.cos() - tip.0).abs() < 1e-9);
            assert_eq!(img.get(ex, ey), ARROW_COLOR);
        }
    }

    #[test]
    fn line_is_connected() {
        let pts = line_points((0.0, 0.0), (7.0, 3.0));
        assert_eq!(pts.first(), Some(&(0, 0)));
        assert_eq!(pts.last(), Some(&(7, 3)));
        for w in pts.windows(2) {
            assert!((w[1].0 - w[0].0).abs() <= 1 && (w[1].1 - w[0].1).abs() <= 1);
        }
    }
}
