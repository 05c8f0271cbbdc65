//! Photoreceptor and bipolar layers.
//!
//! Photoreceptors output the frame difference plus a decaying echo of their
//! own recent outputs. The bipolar layer rectifies that signal into ON and
//! OFF channels, bandpasses each with a difference of Gaussians, and feeds
//! the result through a cascade filter read at a shallow (fast) and a deep
//! (slow) level.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::kernels::{correlate, BorderPolicy, Kernel};
use crate::temporal::CascadeState;

/// `p_i = 1 / (1 + e^(u i))` for `i = 1..=depth`.
pub fn persistence_coefficients(depth: usize, u: f64) -> Vec<f64> {
    (1..=depth)
        .map(|i| 1.0 / (1.0 + (u * i as f64).exp()))
        .collect()
}

#[derive(Debug, Clone)]
pub struct PhotoreceptorState {
    previous: Option<Field>,
    /// Most recent output first.
    history: VecDeque<Field>,
    coefficients: Vec<f64>,
}

impl PhotoreceptorState {
    pub fn new(depth: usize, u: f64) -> Self {
        Self {
            previous: None,
            history: VecDeque::with_capacity(depth + 1),
            coefficients: persistence_coefficients(depth, u),
        }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn is_primed(&self) -> bool {
        self.previous.is_some()
    }

    pub fn history_len(&self) -> usize {
        self.history.len()
    }

    /// Records the first frame. Output begins with the second frame.
    pub fn prime(&mut self, frame: &Field) -> Result<()> {
        if self.previous.is_some() {
            return Err(Error::AlreadyPrimed);
        }
        frame.ensure_finite("frame")?;
        self.previous = Some(frame.clone());
        Ok(())
    }

    /// `P(t) = I(t) - I(t-1) + Σ p_i P(t-i)`.
    pub fn step(&mut self, frame: &Field) -> Result<Field> {
        let previous = self.previous.as_ref().ok_or(Error::NotPrimed)?;
        frame.ensure_dims(previous.width(), previous.height())?;
        frame.ensure_finite("frame")?;

        let mut p = frame.zip_map(previous, |cur, prev| cur - prev);
        for (coef, past) in self.coefficients.iter().zip(&self.history) {
            for (o, &h) in p.as_mut_slice().iter_mut().zip(past.as_slice()) {
                *o += coef * h;
            }
        }

        if !self.coefficients.is_empty() {
            self.history.push_front(p.clone());
            self.history.truncate(self.coefficients.len());
        }
        self.previous = Some(frame.clone());
        Ok(p)
    }
}

/// ON/OFF half-wave split: `(|P| + P) / 2` and `(|P| - P) / 2`.
pub fn half_wave_split(p: &Field) -> (Field, Field) {
    (
        p.map(|v| 0.5 * (v.abs() + v)),
        p.map(|v| 0.5 * (v.abs() - v)),
    )
}

pub fn bipolar_bandpass(b: &Field, dog: &Kernel, border: BorderPolicy) -> Result<Field> {
    correlate(b, dog, border)
}

/// Fast and slow responses of both bipolar channels.
#[derive(Debug, Clone, PartialEq)]
pub struct BipolarBundle {
    pub plus_fast: Field,
    pub plus_slow: Field,
    pub minus_fast: Field,
    pub minus_slow: Field,
}

impl BipolarBundle {
    pub fn zeros(width: usize, height: usize) -> Self {
        let z = Field::zeros(width, height);
        Self {
            plus_fast: z.clone(),
            plus_slow: z.clone(),
            minus_fast: z.clone(),
            minus_slow: z,
        }
    }

    /// ON and OFF channels exchanged.
    pub fn swapped(self) -> Self {
        Self {
            plus_fast: self.minus_fast,
            plus_slow: self.minus_slow,
            minus_fast: self.plus_fast,
            minus_slow: self.plus_slow,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemporalReads {
    pub n_fast: usize,
    pub n_slow: usize,
    pub gain: f64,
}

/// Steps both cascades once and reads each at the fast and slow depths.
pub fn bipolar_temporal(
    plus0: &Field,
    minus0: &Field,
    on: &mut CascadeState,
    off: &mut CascadeState,
    reads: TemporalReads,
) -> Result<BipolarBundle> {
    on.step(plus0)?;
    off.step(minus0)?;
    Ok(BipolarBundle {
        plus_fast: on.read_output(reads.n_fast, reads.gain)?,
        plus_slow: on.read_output(reads.n_slow, reads.gain)?,
        minus_fast: off.read_output(reads.n_fast, reads.gain)?,
        minus_slow: off.read_output(reads.n_slow, reads.gain)?,
    })
}
