//! Synthetic test scenes: a looming disk, a translating bar, and a looming
//! disk over drifting stripes. Frames are raw gray levels in `[0, 255]`,
//! already quantized to integers so they survive an 8-bit round trip.
//!
//! Frames are numbered from 1. A phase window `(a, b)` means the motion
//! update is applied at every step `a..=b`, so its effect first shows in
//! frame `a + 1`.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::params::parse_document;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    LoomingDisk,
    TranslatingBar,
    LoomingOverStripes,
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScenarioKind::LoomingDisk => "looming_disk",
            ScenarioKind::TranslatingBar => "translating_bar",
            ScenarioKind::LoomingOverStripes => "looming_over_stripes",
        })
    }
}

impl FromStr for ScenarioKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "looming_disk" => Ok(ScenarioKind::LoomingDisk),
            "translating_bar" => Ok(ScenarioKind::TranslatingBar),
            "looming_over_stripes" => Ok(ScenarioKind::LoomingOverStripes),
            _ => Err(format!("unknown scenario kind {s:?}")),
        }
    }
}

/// Image directions; `y` grows downward.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Right,
    Left,
    Up,
    Down,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::Right,
        Direction::Left,
        Direction::Up,
        Direction::Down,
    ];

    pub fn unit(self) -> (i64, i64) {
        match self {
            Direction::Right => (1, 0),
            Direction::Left => (-1, 0),
            Direction::Up => (0, -1),
            Direction::Down => (0, 1),
        }
    }

    /// Angle of the unit vector in `[0, 2π)`.
    pub fn angle(self) -> f64 {
        use std::f64::consts::PI;
        match self {
            Direction::Right => 0.0,
            Direction::Down => PI / 2.0,
            Direction::Left => PI,
            Direction::Up => 1.5 * PI,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Right => "right",
            Direction::Left => "left",
            Direction::Up => "up",
            Direction::Down => "down",
        })
    }
}

impl FromStr for Direction {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "right" => Ok(Direction::Right),
            "left" => Ok(Direction::Left),
            "up" => Ok(Direction::Up),
            "down" => Ok(Direction::Down),
            _ => Err(format!("unknown direction {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub width: usize,
    pub height: usize,
    pub steps: usize,
    /// Target gray level.
    pub foreground: u8,
    pub background: u8,
    /// Rendering is followed by `F -> 255 - F`.
    pub inverted: bool,
    pub stimulus_k: f64,
    pub initial_radius: f64,
    pub bar_speed: usize,
    pub bar_direction: Direction,
    /// Extent along the motion.
    pub bar_thickness: usize,
    /// Extent across the motion.
    pub bar_length: usize,
    pub stripe_width: usize,
    pub stripe_spacing: usize,
    pub stripe_speed: usize,
    pub stripe_gray: u8,
    pub approach: (usize, usize),
    pub recede: (usize, usize),
}

impl Scenario {
    pub fn new(kind: ScenarioKind) -> Self {
        Self {
            kind,
            width: 128,
            height: 128,
            steps: 130,
            foreground: 0,
            background: 255,
            inverted: false,
            stimulus_k: 1.0,
            initial_radius: 5.0,
            bar_speed: 2,
            bar_direction: Direction::Right,
            bar_thickness: 8,
            bar_length: 48,
            stripe_width: 4,
            stripe_spacing: 12,
            stripe_speed: 2,
            stripe_gray: 0,
            approach: (10, 55),
            recede: (75, 120),
        }
    }

    pub fn looming_disk() -> Self {
        Self::new(ScenarioKind::LoomingDisk)
    }

    pub fn translating_bar(direction: Direction) -> Self {
        Self {
            bar_direction: direction,
            ..Self::new(ScenarioKind::TranslatingBar)
        }
    }

    pub fn looming_over_stripes() -> Self {
        Self::new(ScenarioKind::LoomingOverStripes)
    }

    /// Disk scene whose target has Weber contrast close to `c` against a
    /// white ground.
    pub fn with_contrast(mut self, c: f64) -> Self {
        self.background = 255;
        self.foreground = (255.0 - 255.0 * c).round().clamp(0.0, 255.0) as u8;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidScenario(m));
        if self.width == 0 || self.height == 0 {
            return bad("frame size must be positive".into());
        }
        if self.steps < 2 {
            return bad(format!("steps must be at least 2, got {}", self.steps));
        }
        let (a0, a1) = self.approach;
        let (r0, r1) = self.recede;
        if a0 < 1 || a0 > a1 || r0 > r1 || a1 >= r0 || r1 > self.steps {
            return bad(format!(
                "phase windows must be ordered, disjoint and within 1..={}: approach {a0}-{a1}, recede {r0}-{r1}",
                self.steps
            ));
        }
        if a1 - a0 != r1 - r0 {
            return bad("approach and recede windows must have equal length".into());
        }
        if !self.stimulus_k.is_finite() || self.stimulus_k < 0.0 {
            return bad(format!(
                "stimulus_k must be finite and >= 0, got {}",
                self.stimulus_k
            ));
        }
        if !self.initial_radius.is_finite() || self.initial_radius < 0.0 {
            return bad(format!(
                "initial_radius must be finite and >= 0, got {}",
                self.initial_radius
            ));
        }
        if self.stripe_width + self.stripe_spacing == 0 {
            return bad("stripe period must be positive".into());
        }
        Ok(())
    }

    /// Growth rate applied at step `t`.
    pub fn expansion_rate(&self, t: usize) -> f64 {
        self.stimulus_k * (0.001 * t as f64).exp()
    }

    /// Disk radius in frame `t` before clamping. The receding phase retraces
    /// the approach radii in reverse.
    pub fn unclamped_radius(&self, t: usize) -> f64 {
        let (a0, a1) = self.approach;
        let (r0, _) = self.recede;
        let len = a1 - a0 + 1;
        let grown = |t: usize| -> f64 {
            let last = t.min(a1 + 1);
            (a0..last).map(|i| self.expansion_rate(i)).sum::<f64>() + self.initial_radius
        };
        if t <= r0 {
            grown(t)
        } else {
            let j = (t - r0).min(len);
            grown(a1 + 1 - j)
        }
    }

    pub fn max_radius(&self) -> f64 {
        self.width.min(self.height) as f64 / 2.0
    }

    pub fn disk_radius(&self, t: usize) -> f64 {
        self.unclamped_radius(t).min(self.max_radius())
    }

    pub fn disk_center(&self) -> (f64, f64) {
        (self.width as f64 / 2.0, self.height as f64 / 2.0)
    }

    /// Net displacement in steps of motion at frame `t` (forward minus back).
    fn travelled(&self, t: usize) -> usize {
        let count = |(a, b): (usize, usize)| t.saturating_sub(a).min(b - a + 1);
        count(self.approach) - count(self.recede)
    }

    /// Half-open pixel rectangle `(x0, y0, x1, y1)` of the bar in frame `t`.
    /// The trajectory is centered in the frame.
    pub fn bar_rect(&self, t: usize) -> (i64, i64, i64, i64) {
        let span = (self.approach.1 - self.approach.0 + 1) * self.bar_speed;
        let (ux, uy) = self.bar_direction.unit();
        let offset = (self.travelled(t) * self.bar_speed) as i64 - span as i64 / 2;
        let (cx, cy) = (
            (self.width / 2) as i64 + ux * offset,
            (self.height / 2) as i64 + uy * offset,
        );
        let (th, len) = (self.bar_thickness as i64, self.bar_length as i64);
        let (hw, hh) = if ux != 0 { (th, len) } else { (len, th) };
        (cx - hw / 2, cy - hh / 2, cx - hw / 2 + hw, cy - hh / 2 + hh)
    }

    fn stripe_dark(&self, x: usize, t: usize) -> bool {
        let period = (self.stripe_width + self.stripe_spacing) as i64;
        let shift = (self.stripe_speed * (t - 1)) as i64;
        (x as i64 - shift).rem_euclid(period) < self.stripe_width as i64
    }

    /// Renders frame `t` (1-based).
    pub fn frame(&self, t: usize) -> Field {
        let (fg, bg) = (f64::from(self.foreground), f64::from(self.background));
        let mut f = Field::filled(self.width, self.height, bg);
        match self.kind {
            ScenarioKind::TranslatingBar => {
                let (x0, y0, x1, y1) = self.bar_rect(t);
                for y in y0.max(0)..y1.min(self.height as i64) {
                    for x in x0.max(0)..x1.min(self.width as i64) {
                        f.set(x as usize, y as usize, fg);
                    }
                }
            }
            ScenarioKind::LoomingDisk | ScenarioKind::LoomingOverStripes => {
                if self.kind == ScenarioKind::LoomingOverStripes {
                    let sg = f64::from(self.stripe_gray);
                    for x in (0..self.width).filter(|&x| self.stripe_dark(x, t)) {
                        for y in 0..self.height {
                            f.set(x, y, sg);
                        }
                    }
                }
                let r = self.disk_radius(t);
                let (cx, cy) = self.disk_center();
                for y in 0..self.height {
                    for x in 0..self.width {
                        let cov = disk_coverage(x, y, cx, cy, r);
                        if cov > 0.0 {
                            let under = f.get(x, y);
                            f.set(x, y, (under + cov * (fg - under)).round());
                        }
                    }
                }
            }
        }
        if self.inverted {
            f = f.map(|v| 255.0 - v);
        }
        f
    }

    pub fn generate(&self) -> Result<FrameSequence> {
        self.validate()?;
        let frames = (1..=self.steps).map(|t| self.frame(t)).collect();
        let clamped = (1..=self.steps).any(|t| self.unclamped_radius(t) > self.max_radius());
        let clamped = clamped && self.kind != ScenarioKind::TranslatingBar;
        Ok(FrameSequence { frames, clamped })
    }

    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        line("kind", self.kind.to_string());
        line("width", self.width.to_string());
        line("height", self.height.to_string());
        line("steps", self.steps.to_string());
        line("foreground", self.foreground.to_string());
        line("background", self.background.to_string());
        line("inverted", self.inverted.to_string());
        line("stimulus_k", format!("{:?}", self.stimulus_k));
        line("initial_radius", format!("{:?}", self.initial_radius));
        line("bar_speed", self.bar_speed.to_string());
        line("bar_direction", self.bar_direction.to_string());
        line("bar_thickness", self.bar_thickness.to_string());
        line("bar_length", self.bar_length.to_string());
        line("stripe_width", self.stripe_width.to_string());
        line("stripe_spacing", self.stripe_spacing.to_string());
        line("stripe_speed", self.stripe_speed.to_string());
        line("stripe_gray", self.stripe_gray.to_string());
        line(
            "approach",
            format!("{}-{}", self.approach.0, self.approach.1),
        );
        line("recede", format!("{}-{}", self.recede.0, self.recede.1));
        s
    }

    /// Parses a sidecar written by [`Scenario::to_config_string`]. `kind` is
    /// required; other keys default.
    pub fn load(text: &str) -> Result<Self> {
        let entries = parse_document(text)?;
        let kind = entries
            .iter()
            .find(|e| e.key == "kind")
            .ok_or_else(|| Error::InvalidScenario("missing kind".into()))?;
        let mut s = Scenario::new(kind.value.parse().map_err(|m| Error::Parse {
            line: kind.line,
            message: m,
        })?);
        for e in &entries {
            s.set(&e.key, &e.value).map_err(|message| Error::Parse {
                line: e.line,
                message,
            })?;
        }
        s.validate()?;
        Ok(s)
    }

    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn p<T: FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
            v.parse()
                .map_err(|_| format!("cannot parse {v:?} for {key}"))
        }
        fn window(key: &str, v: &str) -> std::result::Result<(usize, usize), String> {
            let (a, b) = v
                .split_once('-')
                .ok_or_else(|| format!("{key} expects start-end, got {v:?}"))?;
            Ok((p(key, a.trim())?, p(key, b.trim())?))
        }
        match key {
            "kind" => self.kind = value.parse()?,
            "width" => self.width = p(key, value)?,
            "height" => self.height = p(key, value)?,
            "steps" => self.steps = p(key, value)?,
            "foreground" => self.foreground = p(key, value)?,
            "background" => self.background = p(key, value)?,
            "inverted" => self.inverted = p(key, value)?,
            "stimulus_k" => self.stimulus_k = p(key, value)?,
            "initial_radius" => self.initial_radius = p(key, value)?,
            "bar_speed" => self.bar_speed = p(key, value)?,
            "bar_direction" => self.bar_direction = value.parse()?,
            "bar_thickness" => self.bar_thickness = p(key, value)?,
            "bar_length" => self.bar_length = p(key, value)?,
            "stripe_width" => self.stripe_width = p(key, value)?,
            "stripe_spacing" => self.stripe_spacing = p(key, value)?,
            "stripe_speed" => self.stripe_speed = p(key, value)?,
            "stripe_gray" => self.stripe_gray = p(key, value)?,
            "approach" => self.approach = window(key, value)?,
            "recede" => self.recede = window(key, value)?,
            _ => return Err(format!("unknown scenario key {key:?}")),
        }
        Ok(())
    }
}

/// Fraction of pixel `(x, y)` inside the disk; pixel centers sit at `+0.5`.
fn disk_coverage(x: usize, y: usize, cx: f64, cy: f64, r: f64) -> f64 {
    const SUB: usize = 16;
    let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
    let d = (px - cx).hypot(py - cy);
    if d <= r - 0.75 {
        return 1.0;
    }
    if d >= r + 0.75 {
        return 0.0;
    }
    let r2 = r * r;
    let mut inside = 0;
    for j in 0..SUB {
        for i in 0..SUB {
            let sx = x as f64 + (i as f64 + 0.5) / SUB as f64 - cx;
            let sy = y as f64 + (j as f64 + 0.5) / SUB as f64 - cy;
            if sx * sx + sy * sy <= r2 {
                inside += 1;
            }
        }
    }
    inside as f64 / (SUB * SUB) as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    pub frames: Vec<Field>,
    /// Set when the disk would have outgrown the frame.
    pub clamped: bool,
}

/// `|mean(target) - mean(surround)| / 255` over raw gray levels.
pub fn weber_contrast(
    frame: &Field,
    target: &[(usize, usize)],
    surround: &[(usize, usize)],
) -> Result<f64> {
    let mean = |r: &[(usize, usize)], what| -> Result<f64> {
        if r.is_empty() {
            return Err(Error::Empty(what));
        }
        Ok(r.iter().map(|&(x, y)| frame.get(x, y)).sum::<f64>() / r.len() as f64)
    };
    Ok((mean(target, "target region")? - mean(surround, "surround region")?).abs() / 255.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn static_phase_is_frame_constant() {
        let s = Scenario::looming_disk();
        assert_eq!(s.frame(5), s.frame(6));
        assert_eq!(s.frame(1), s.frame(10));
        assert_ne!(s.frame(10), s.frame(11));
        assert_eq!(s.frame(60), s.frame(75));
        assert_eq!(s.frame(121), s.frame(130));
    }

    #[test]
    fn total_growth_matches_rate_schedule() {
        let s = Scenario::looming_disk();
        let oracle: f64 = (10..=55).map(|t| (0.001 * t as f64).exp()).sum();
        let growth = s.unclamped_radius(56) - s.unclamped_radius(10);
        assert!((growth - oracle).abs() < 1e-9);
        assert!((growth - 47.52).abs() < 0.01);
        assert_eq!(s.unclamped_radius(121), s.initial_radius);
        for j in 0..=46 {
            assert_eq!(s.unclamped_radius(75 + j), s.unclamped_radius(56 - j));
        }
    }

    #[test]
    fn clamp_is_flagged() {
        let mut s = Scenario::looming_disk();
        assert!(!s.generate().unwrap().clamped);
        s.stimulus_k = 2.0;
        let seq = s.generate().unwrap();
        assert!(seq.clamped);
        assert_eq!(s.disk_radius(56), 64.0);
    }

    #[test]
    fn standard_shapes() {
        for s in [
            Scenario::looming_disk(),
            Scenario::translating_bar(Direction::Right),
            Scenario::looming_over_stripes(),
        ] {
            let seq = s.generate().unwrap();
            assert_eq!(seq.frames.len(), 130);
            assert_eq!(seq.frames[0].dims(), (128, 128));
            for f in &seq.frames {
                assert!(f
                    .as_slice()
                    .iter()
                    .all(|&v| (0.0..=255.0).contains(&v) && v.fract() == 0.0));
            }
        }
    }

    #[test]
    fn generation_is_deterministic_and_inversion_exact() {
        let s = Scenario::looming_over_stripes();
        assert_eq!(s.generate().unwrap(), s.generate().unwrap());
        let inv = Scenario {
            inverted: true,
            ..s.clone()
        };
        let (a, b) = (s.generate().unwrap(), inv.generate().unwrap());
        for (f, g) in a.frames.iter().zip(&b.frames) {
            assert_eq!(f.map(|v| 255.0 - v), *g);
        }
    }

    #[test]
    fn bar_moves_two_pixels_per_step_and_returns() {
        let s = Scenario::translating_bar(Direction::Right);
        let (x0, ..) = s.bar_rect(10);
        assert_eq!(s.bar_rect(11).0, x0 + 2);
        assert_eq!(s.bar_rect(56).0, x0 + 92);
        assert_eq!(s.bar_rect(121), s.bar_rect(1));
        let (x0, y0, x1, y1) = s.bar_rect(56);
        assert!(x0 >= 0 && x1 <= 128 && y0 >= 0 && y1 <= 128);
        assert_eq!((x1 - x0, y1 - y0), (8, 48));

        let up = Scenario::translating_bar(Direction::Up);
        assert_eq!(up.bar_rect(11).1, up.bar_rect(10).1 - 2);
        let (x0, y0, x1, y1) = up.bar_rect(10);
        assert_eq!((x1 - x0, y1 - y0), (48, 8));
    }

    #[test]
    fn stripes_drift_right() {
        let s = Scenario::looming_over_stripes();
        let f1 = s.frame(1);
        let f2 = s.frame(2);
        assert_eq!(f1.get(0, 0), 0.0);
        assert_eq!(f1.get(4, 0), 255.0);
        assert_eq!(f2.get(2, 0), 0.0);
        assert_eq!(f2.get(0, 0), 255.0);
    }

    #[test]
    fn disk_edge_is_antialiased() {
        let f = Scenario::looming_disk().frame(1);
        assert_eq!(f.get(64, 64), 0.0);
        assert_eq!(f.get(0, 0), 255.0);
        assert!(f.as_slice().iter().any(|&v| v > 0.0 && v < 255.0));
    }

    #[test]
    fn contrast_examples() {
        let f = Field::from_vec(2, 1, vec![0.0, 255.0]).unwrap();
        assert_eq!(weber_contrast(&f, &[(0, 0)], &[(1, 0)]).unwrap(), 1.0);
        assert_eq!(weber_contrast(&f, &[(0, 0)], &[(0, 0)]).unwrap(), 0.0);
        let g = Field::from_vec(2, 1, vec![64.0, 192.0]).unwrap();
        assert!((weber_contrast(&g, &[(0, 0)], &[(1, 0)]).unwrap() - 128.0 / 255.0).abs() < 1e-12);
        assert!(weber_contrast(&f, &[], &[(1, 0)]).is_err());
    }

    #[test]
    fn swept_contrast_is_close_to_request() {
        let s = Scenario::looming_disk().with_contrast(0.5);
        let f = s.frame(1);
        let c = weber_contrast(&f, &[(64, 64)], &[(0, 0)]).unwrap();
        assert!((c - 0.5).abs() < 1.0 / 255.0);
    }

    #[test]
    fn sidecar_round_trip_and_errors() {
        let mut s = Scenario::translating_bar(Direction::Up);
        s.stimulus_k = 1.5;
        s.inverted = true;
        assert_eq!(Scenario::load(&s.to_config_string()).unwrap(), s);
        assert!(Scenario::load("width = 5").is_err());
        assert!(Scenario::load("kind = looming_disk\nsteps = 1").is_err());
        assert!(Scenario::load("kind = looming_disk\nbogus = 1").is_err());
        assert!(Scenario::load("kind = looming_disk\napproach = 10-55\nrecede = 50-95").is_err());
    }
}
