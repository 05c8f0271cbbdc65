//! Model parameters: defaults, validation, and the `key = value` config format.
//!
//! A config file holds one parameter per line; `#` starts a comment. Keys
//! missing from a file keep their default value, unknown keys are rejected,
//! and the merged result must pass [`ModelParams::validate`].

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result, Violation};
use crate::kernels::BorderPolicy;

/// Gains of the six ON/OFF fusion channels, in config order
/// `[v+, v-, w1+, w2-, w1-, w2+]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelWeights {
    /// ON motion energy.
    pub v_plus: f64,
    /// OFF motion energy.
    pub v_minus: f64,
    /// ON slow excitation (`G1+`).
    pub w1_plus: f64,
    /// OFF fast, subtracted (`G2-`).
    pub w2_minus: f64,
    /// OFF slow excitation (`G1-`).
    pub w1_minus: f64,
    /// ON fast, subtracted (`G2+`).
    pub w2_plus: f64,
}

impl ChannelWeights {
    /// Dark looming disk, OFF-favouring.
    pub const LOOMING: ChannelWeights = ChannelWeights::from_array([1.0, 1.0, 1.0, 0.0, 0.5, 0.0]);
    /// Translating bar.
    pub const TRANSLATION: ChannelWeights =
        ChannelWeights::from_array([1.0, 1.0, 0.4, 1.0, 0.0, 0.0]);
    /// Tracked-robot recordings.
    pub const ROBOT: ChannelWeights = ChannelWeights::from_array([1.0, 1.0, 1.0, 0.4, 1.0, 0.4]);

    pub const fn from_array(w: [f64; 6]) -> Self {
        Self {
            v_plus: w[0],
            v_minus: w[1],
            w1_plus: w[2],
            w2_minus: w[3],
            w1_minus: w[4],
            w2_plus: w[5],
        }
    }

    pub fn to_array(self) -> [f64; 6] {
        [
            self.v_plus,
            self.v_minus,
            self.w1_plus,
            self.w2_minus,
            self.w1_minus,
            self.w2_plus,
        ]
    }

    /// Exchanges every ON weight with its OFF partner. Paired with an
    /// intensity-inverted input this leaves the model output unchanged.
    pub fn polarity_swapped(self) -> Self {
        Self {
            v_plus: self.v_minus,
            v_minus: self.v_plus,
            w1_plus: self.w1_minus,
            w1_minus: self.w1_plus,
            w2_plus: self.w2_minus,
            w2_minus: self.w2_plus,
        }
    }
}

/// Spike mapping and collision-warning constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpikeParams {
    pub scale: f64,
    pub threshold: f64,
    pub window: usize,
    pub warn_threshold: f64,
}

impl SpikeParams {
    /// Road-vehicle recordings.
    pub const VEHICLE: SpikeParams = SpikeParams {
        scale: 10.0,
        threshold: 0.7,
        window: 4,
        warn_threshold: 1.0,
    };
    /// Tracked robot.
    pub const ROBOT: SpikeParams = SpikeParams {
        scale: 20.0,
        threshold: 0.52,
        window: 4,
        warn_threshold: 1.0,
    };
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub frame_width: usize,
    pub frame_height: usize,
    /// Seconds per frame.
    pub dt: f64,
    /// Gain applied to normalized `[0, 1]` frames before the photoreceptor
    /// layer. The default restores 8-bit gray levels, the range the
    /// thresholds were tuned on.
    pub intensity_scale: f64,

    /// Frames of photoreceptor persistence memory.
    pub persistence_depth: usize,
    /// Decay exponent in `p_i = 1 / (1 + e^(u i))`.
    pub persistence_u: f64,

    pub dog_gain: f64,
    pub dog_sigma1: f64,
    pub dog_sigma2: f64,

    pub cascade_gain: f64,
    pub cascade_decay: f64,
    pub cascade_transmission: f64,
    pub cascade_tau: f64,
    pub n_fast: usize,
    pub n_slow: usize,

    pub gabor_lambda: f64,
    pub gabor_sigma: f64,
    pub orientation_count: usize,

    pub cs_lambda: f64,
    pub cs_sigma: f64,
    pub cs_psi: f64,

    pub attention_sigma: f64,
    pub gamma_a: f64,
    pub gamma_d: f64,

    pub weights: ChannelWeights,
    pub top_k: usize,

    pub spike: SpikeParams,

    pub cluster_eps: f64,
    pub cluster_min_pts: usize,

    pub kernel_size_small: usize,
    pub kernel_size_blur: usize,
    pub border_policy: BorderPolicy,

    /// Sigmoid normalizer; `None` means `frame_width * frame_height`.
    pub neuron_count: Option<usize>,
}

impl Default for ModelParams {
    fn default() -> Self {
        default_params()
    }
}

/// Published defaults for a 128×128, 20 Hz synthetic input.
pub fn default_params() -> ModelParams {
    ModelParams {
        frame_width: 128,
        frame_height: 128,
        dt: 0.05,
        intensity_scale: 255.0,
        persistence_depth: 3,
        persistence_u: 1.0,
        dog_gain: 5.0,
        dog_sigma1: 1.0,
        dog_sigma2: 3.0,
        cascade_gain: 5.0,
        cascade_decay: 60.0,
        cascade_transmission: 60.0,
        cascade_tau: 5.0,
        n_fast: 2,
        n_slow: 4,
        gabor_lambda: 4.0,
        gabor_sigma: 0.3,
        orientation_count: 8,
        cs_lambda: 4.0,
        cs_sigma: 0.3,
        cs_psi: 0.0,
        attention_sigma: 8.0,
        gamma_a: 0.005,
        gamma_d: 0.005,
        weights: ChannelWeights::LOOMING,
        top_k: 1,
        spike: SpikeParams::VEHICLE,
        cluster_eps: 5.0,
        cluster_min_pts: 8,
        kernel_size_small: 5,
        kernel_size_blur: 31,
        border_policy: BorderPolicy::Replicate,
        neuron_count: None,
    }
}

impl ModelParams {
    pub fn neuron_count(&self) -> usize {
        self.neuron_count
            .unwrap_or(self.frame_width * self.frame_height)
    }

    /// Filtering orientations `θ_j = 2πj / orientation_count`.
    pub fn orientations(&self) -> Vec<f64> {
        let m = self.orientation_count;
        (0..m).map(|j| 2.0 * PI * j as f64 / m as f64).collect()
    }

    pub fn cascade_depth(&self) -> usize {
        self.n_slow + 1
    }

    /// Every broken invariant; empty when the parameters are usable.
    pub fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let mut check = |ok: bool, key: &'static str, msg: String| {
            if !ok {
                v.push(Violation::new(key, msg));
            }
        };

        check(
            self.frame_width > 0 && self.frame_height > 0,
            "frame_width",
            "frame dimensions must be positive".into(),
        );
        check(
            self.dt.is_finite() && self.dt > 0.0,
            "dt",
            format!("time step must be positive, got {}", self.dt),
        );
        check(
            self.intensity_scale.is_finite() && self.intensity_scale > 0.0,
            "intensity_scale",
            format!(
                "intensity scale must be positive, got {}",
                self.intensity_scale
            ),
        );
        check(
            self.persistence_u.is_finite() && self.persistence_u > 0.0,
            "persistence_u",
            format!(
                "persistence exponent must be positive, got {}",
                self.persistence_u
            ),
        );
        check(
            self.dog_sigma1 > 0.0 && self.dog_sigma1 < self.dog_sigma2,
            "dog_sigma1",
            format!(
                "dog_sigma ordering requires 0 < sigma1 < sigma2, got {} and {}",
                self.dog_sigma1, self.dog_sigma2
            ),
        );
        check(
            self.dog_gain.is_finite() && self.cascade_gain.is_finite(),
            "dog_gain",
            "gains must be finite".into(),
        );
        check(
            self.cascade_tau > 0.0 && self.cascade_decay > 0.0 && self.cascade_transmission >= 0.0,
            "cascade_tau",
            "cascade needs tau > 0, decay > 0, transmission >= 0".into(),
        );
        let euler = self.dt * self.cascade_decay / self.cascade_tau;
        check(
            euler < 2.0,
            "dt",
            format!("explicit Euler stability requires dt*A/tau < 2, got {euler}"),
        );
        check(
            self.n_fast >= 1 && self.n_fast < self.n_slow,
            "n_fast",
            format!(
                "n_f < n_s required with n_f >= 1, got n_f = {} and n_s = {}",
                self.n_fast, self.n_slow
            ),
        );
        check(
            self.gabor_lambda > 0.0 && self.gabor_sigma > 0.0,
            "gabor_lambda",
            "gabor wavelength and width must be positive".into(),
        );
        check(
            self.cs_lambda > 0.0 && self.cs_sigma > 0.0 && self.cs_psi.is_finite(),
            "cs_lambda",
            "center-surround wavelength and width must be positive".into(),
        );
        check(
            self.orientation_count >= 4 && self.orientation_count % 4 == 0,
            "orientation_count",
            format!(
                "orientation_count must be a positive multiple of 4 so that 0 and pi/2 are sampled, got {}",
                self.orientation_count
            ),
        );
        check(
            self.top_k > 0 && self.top_k < self.orientation_count,
            "top_k",
            format!(
                "top_k must satisfy 0 < k < orientation_count, got {} with {} orientations",
                self.top_k, self.orientation_count
            ),
        );
        check(
            self.attention_sigma > 0.0,
            "attention_sigma",
            "attention blur width must be positive".into(),
        );
        check(
            self.gamma_a > 0.0 && self.gamma_d > 0.0,
            "gamma_a",
            "binarization thresholds must be positive".into(),
        );
        check(
            self.weights
                .to_array()
                .iter()
                .all(|w| w.is_finite() && *w >= 0.0),
            "channel_weights",
            format!(
                "channel weights must be >= 0, got {:?}",
                self.weights.to_array()
            ),
        );
        check(
            self.spike.scale.is_finite()
                && self.spike.threshold.is_finite()
                && self.spike.warn_threshold.is_finite(),
            "spike_scale",
            "spike parameters must be finite".into(),
        );
        check(
            self.spike.window >= 1,
            "spike_window",
            "spike window must hold at least one frame".into(),
        );
        check(
            self.cluster_eps > 0.0 && self.cluster_min_pts >= 1,
            "cluster_eps",
            "clustering needs eps > 0 and min_pts >= 1".into(),
        );
        for (key, size) in [
            ("kernel_size_small", self.kernel_size_small),
            ("kernel_size_blur", self.kernel_size_blur),
        ] {
            check(
                size >= 3 && size % 2 == 1,
                key,
                format!("odd kernel size >= 3 required, got {size}"),
            );
        }
        check(
            self.neuron_count != Some(0),
            "neuron_count",
            "neuron count must be positive".into(),
        );
        v
    }

    pub fn validated(self) -> Result<Self> {
        let v = self.validate();
        if v.is_empty() {
            Ok(self)
        } else {
            Err(Error::Invalid(v))
        }
    }

    /// Parses a config document on top of the defaults and validates it.
    pub fn load(text: &str) -> Result<Self> {
        let mut p = default_params();
        p.apply(text)?;
        p.validated()
    }

    /// Applies the entries of a config document over `self` without validating.
    pub fn apply(&mut self, text: &str) -> Result<()> {
        for entry in parse_document(text)? {
            self.set(&entry.key, &entry.value)
                .map_err(|message| Error::Parse {
                    line: entry.line,
                    message,
                })?;
        }
        Ok(())
    }

    /// Sets one parameter from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        match key {
            "frame_width" => self.frame_width = parse(key, value)?,
            "frame_height" => self.frame_height = parse(key, value)?,
            "dt" => self.dt = parse(key, value)?,
            "intensity_scale" => self.intensity_scale = parse(key, value)?,
            "persistence_depth" => self.persistence_depth = parse(key, value)?,
            "persistence_u" => self.persistence_u = parse(key, value)?,
            "dog_gain" => self.dog_gain = parse(key, value)?,
            "dog_sigma1" => self.dog_sigma1 = parse(key, value)?,
            "dog_sigma2" => self.dog_sigma2 = parse(key, value)?,
            "cascade_gain" => self.cascade_gain = parse(key, value)?,
            "cascade_decay" => self.cascade_decay = parse(key, value)?,
            "cascade_transmission" => self.cascade_transmission = parse(key, value)?,
            "cascade_tau" => self.cascade_tau = parse(key, value)?,
            "n_fast" => self.n_fast = parse(key, value)?,
            "n_slow" => self.n_slow = parse(key, value)?,
            "gabor_lambda" => self.gabor_lambda = parse(key, value)?,
            "gabor_sigma" => self.gabor_sigma = parse(key, value)?,
            "orientation_count" => self.orientation_count = parse(key, value)?,
            "cs_lambda" => self.cs_lambda = parse(key, value)?,
            "cs_sigma" => self.cs_sigma = parse(key, value)?,
            "cs_psi" => self.cs_psi = parse(key, value)?,
            "attention_sigma" => self.attention_sigma = parse(key, value)?,
            "gamma_a" => self.gamma_a = parse(key, value)?,
            "gamma_d" => self.gamma_d = parse(key, value)?,
            "channel_weights" => self.weights = ChannelWeights::from_array(parse_weights(value)?),
            "top_k" => self.top_k = parse(key, value)?,
            "spike_scale" => self.spike.scale = parse(key, value)?,
            "spike_threshold" => self.spike.threshold = parse(key, value)?,
            "spike_window" => self.spike.window = parse(key, value)?,
            "warn_threshold" => self.spike.warn_threshold = parse(key, value)?,
            "cluster_eps" => self.cluster_eps = parse(key, value)?,
            "cluster_min_pts" => self.cluster_min_pts = parse(key, value)?,
            "kernel_size_small" => self.kernel_size_small = parse(key, value)?,
            "kernel_size_blur" => self.kernel_size_blur = parse(key, value)?,
            "border_policy" => self.border_policy = value.parse()?,
            "neuron_count" => {
                self.neuron_count = if value == "auto" {
                    None
                } else {
                    Some(parse(key, value)?)
                }
            }
            other => return Err(format!("unknown key {other:?}")),
        }
        Ok(())
    }

    /// Writes every parameter in config form; [`ModelParams::load`] reads it back
    /// field for field.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let w = self.weights.to_array();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        line("frame_width", self.frame_width.to_string());
        line("frame_height", self.frame_height.to_string());
        line("dt", self.dt.to_string());
        line("intensity_scale", self.intensity_scale.to_string());
        line("persistence_depth", self.persistence_depth.to_string());
        line("persistence_u", self.persistence_u.to_string());
        line("dog_gain", self.dog_gain.to_string());
        line("dog_sigma1", self.dog_sigma1.to_string());
        line("dog_sigma2", self.dog_sigma2.to_string());
        line("cascade_gain", self.cascade_gain.to_string());
        line("cascade_decay", self.cascade_decay.to_string());
        line(
            "cascade_transmission",
            self.cascade_transmission.to_string(),
        );
        line("cascade_tau", self.cascade_tau.to_string());
        line("n_fast", self.n_fast.to_string());
        line("n_slow", self.n_slow.to_string());
        line("gabor_lambda", self.gabor_lambda.to_string());
        line("gabor_sigma", self.gabor_sigma.to_string());
        line("orientation_count", self.orientation_count.to_string());
        line("cs_lambda", self.cs_lambda.to_string());
        line("cs_sigma", self.cs_sigma.to_string());
        line("cs_psi", self.cs_psi.to_string());
        line("attention_sigma", self.attention_sigma.to_string());
        line("gamma_a", self.gamma_a.to_string());
        line("gamma_d", self.gamma_d.to_string());
        line(
            "channel_weights",
            w.iter().map(f64::to_string).collect::<Vec<_>>().join(", "),
        );
        line("top_k", self.top_k.to_string());
        line("spike_scale", self.spike.scale.to_string());
        line("spike_threshold", self.spike.threshold.to_string());
        line("spike_window", self.spike.window.to_string());
        line("warn_threshold", self.spike.warn_threshold.to_string());
        line("cluster_eps", self.cluster_eps.to_string());
        line("cluster_min_pts", self.cluster_min_pts.to_string());
        line("kernel_size_small", self.kernel_size_small.to_string());
        line("kernel_size_blur", self.kernel_size_blur.to_string());
        line("border_policy", self.border_policy.to_string());
        line(
            "neuron_count",
            self.neuron_count
                .map_or_else(|| "auto".to_string(), |n| n.to_string()),
        );
        s
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("cannot parse {value:?} for {key}"))
}

/// Six comma- or whitespace-separated reals.
pub fn parse_weights(value: &str) -> std::result::Result<[f64; 6], String> {
    let parts: Vec<&str> = value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .collect();
    if parts.len() != 6 {
        return Err(format!(
            "channel_weights needs 6 values, got {}",
            parts.len()
        ));
    }
    let mut out = [0.0; 6];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = parse("channel_weights", p)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

/// Splits a `key = value` document into entries. Blank lines and `#`
/// comments are skipped; duplicate keys are an error.
pub(crate) fn parse_document(text: &str) -> Result<Vec<Entry>> {
    let mut out: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
            line,
            message: format!("expected key = value, got {content:?}"),
        })?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() || value.is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty key or value".into(),
            });
        }
        if out.iter().any(|e| e.key == key) {
            return Err(Error::Parse {
                line,
                message: format!("duplicate key {key:?}"),
            });
        }
        out.push(Entry {
            line,
            key: key.to_string(),
            value: value.to_string(),
        });
    }
    Ok(out)
}
