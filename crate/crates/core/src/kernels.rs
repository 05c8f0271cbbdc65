//! Spatial kernels and the centered 2-D filtering primitive.
//!
//! Kernels are square with odd size; offsets are integers measured from the
//! center tap. [`correlate`] is the single filtering primitive. Every layer of
//! the model filters with [`convolve`], which is [`correlate`] against the
//! 180°-rotated kernel. For the symmetric kernels (DoG, center-surround,
//! Gaussian, even Gabor) the two are identical; for the odd-phase Gabor the
//! rotation fixes the sign of the opponent motion energy so that motion along
//! `+θ` is positive.
//!
//! Out-of-range samples replicate the nearest edge pixel. Kernels are used
//! exactly as evaluated on their truncated support; nothing is renormalized.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::Field;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BorderPolicy {
    #[default]
    Replicate,
}

impl std::str::FromStr for BorderPolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "replicate" => Ok(BorderPolicy::Replicate),
            other => Err(format!("unknown border policy {other:?}")),
        }
    }
}

impl std::fmt::Display for BorderPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BorderPolicy::Replicate => f.write_str("replicate"),
        }
    }
}

/// Square, odd-sized filter kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    size: usize,
    weights: Vec<f64>,
    /// 1-D factor `f` with `weight(i, j) == f(i) * f(j)` up to rounding, when
    /// the kernel is separable. Lets [`correlate`] take a two-pass route.
    factor: Option<Vec<f64>>,
}

impl Kernel {
    /// Builds a kernel by evaluating `f(dx, dy)` at every integer offset.
    pub fn from_fn(size: usize, mut f: impl FnMut(f64, f64) -> f64) -> Result<Self> {
        check_size(size)?;
        let r = (size / 2) as isize;
        let mut weights = Vec::with_capacity(size * size);
        for dy in -r..=r {
            for dx in -r..=r {
                weights.push(f(dx as f64, dy as f64));
            }
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidKernel("non-finite weight".into()));
        }
        Ok(Self {
            size,
            weights,
            factor: None,
        })
    }

    pub fn from_weights(size: usize, weights: Vec<f64>) -> Result<Self> {
        check_size(size)?;
        if weights.len() != size * size {
            return Err(Error::InvalidKernel(format!(
                "expected {} weights, got {}",
                size * size,
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidKernel("non-finite weight".into()));
        }
        Ok(Self {
            size,
            weights,
            factor: None,
        })
    }

    pub fn identity() -> Self {
        Self {
            size: 1,
            weights: vec![1.0],
            factor: None,
        }
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn radius(&self) -> usize {
        self.size / 2
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight at integer offset `(dx, dy)` from the center.
    pub fn at(&self, dx: isize, dy: isize) -> f64 {
        let r = self.radius() as isize;
        assert!(dx.abs() <= r && dy.abs() <= r, "offset outside kernel");
        self.weights[((dy + r) as usize) * self.size + (dx + r) as usize]
    }

    pub fn center(&self) -> f64 {
        self.at(0, 0)
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_separable(&self) -> bool {
        self.factor.is_some()
    }

    /// The kernel rotated by 180°: `flipped.at(dx, dy) == self.at(-dx, -dy)`.
    pub fn flipped(&self) -> Kernel {
        Kernel {
            size: self.size,
            weights: self.weights.iter().rev().copied().collect(),
            factor: self
                .factor
                .as_ref()
                .map(|f| f.iter().rev().copied().collect()),
        }
    }

    pub fn negated(&self) -> Kernel {
        Kernel {
            size: self.size,
            weights: self.weights.iter().map(|w| -w).collect(),
            factor: None,
        }
    }

    /// Same weights with the separable fast path disabled.
    pub fn dense(&self) -> Kernel {
        Kernel {
            factor: None,
            ..self.clone()
        }
    }
}

fn check_size(size: usize) -> Result<()> {
    if size % 2 == 1 {
        Ok(())
    } else {
        Err(Error::InvalidKernel(format!("size {size} is not odd")))
    }
}

/// Difference-of-Gaussians weight with the 1-D normalization `F / (√(2π) σ)`.
pub fn dog_weight(gain: f64, sigma1: f64, sigma2: f64, x: f64, y: f64) -> f64 {
    let r2 = x * x + y * y;
    let g = |s: f64| gain / ((2.0 * PI).sqrt() * s) * (-r2 / (2.0 * s * s)).exp();
    g(sigma1) - g(sigma2)
}

/// Bandpass kernel of the bipolar layer.
pub fn make_dog(gain: f64, sigma1: f64, sigma2: f64, size: usize) -> Result<Kernel> {
    if !(sigma1 > 0.0 && sigma1 < sigma2) {
        return Err(Error::InvalidKernel(format!(
            "dog_sigma ordering requires 0 < sigma1 < sigma2, got {sigma1} and {sigma2}"
        )));
    }
    Kernel::from_fn(size, |x, y| dog_weight(gain, sigma1, sigma2, x, y))
}

/// Oriented Gabor weight. `theta` rotates the carrier axis from `+x` toward `+y`.
pub fn gabor_weight(theta: f64, psi: f64, lambda: f64, sigma: f64, x: f64, y: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let xr = x * c + y * s;
    let yr = -x * s + y * c;
    (-(xr * xr + yr * yr) / (2.0 * sigma * sigma)).exp() * (2.0 * PI * xr / lambda + psi).cos()
}

pub fn make_gabor(theta: f64, psi: f64, lambda: f64, sigma: f64, size: usize) -> Result<Kernel> {
    if !(lambda > 0.0 && sigma > 0.0) {
        return Err(Error::InvalidKernel(format!(
            "gabor needs positive wavelength and width, got {lambda} and {sigma}"
        )));
    }
    Kernel::from_fn(size, |x, y| gabor_weight(theta, psi, lambda, sigma, x, y))
}

/// Antagonistic center-surround weight: zero at the center for `psi = 0`,
/// rising to one outside the envelope.
pub fn center_surround_weight(lambda: f64, sigma: f64, psi: f64, x: f64, y: f64) -> f64 {
    let r2 = x * x + y * y;
    1.0 - (-r2 / (2.0 * sigma * sigma)).exp() * (2.0 * PI * r2 / lambda + psi).cos()
}

pub fn make_center_surround(lambda: f64, sigma: f64, psi: f64, size: usize) -> Result<Kernel> {
    if !(lambda > 0.0 && sigma > 0.0) {
        return Err(Error::InvalidKernel(format!(
            "center-surround needs positive wavelength and width, got {lambda} and {sigma}"
        )));
    }
    Kernel::from_fn(size, |x, y| {
        center_surround_weight(lambda, sigma, psi, x, y)
    })
}

pub fn gaussian_weight(sigma: f64, x: f64, y: f64) -> f64 {
    (-(x * x + y * y) / (2.0 * sigma * sigma)).exp() / (2.0 * PI * sigma * sigma)
}

/// Normalized 2-D Gaussian (attention blur). Carries its separable factor.
pub fn make_gaussian(sigma: f64, size: usize) -> Result<Kernel> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidKernel(format!(
            "gaussian needs positive sigma, got {sigma}"
        )));
    }
    let mut k = Kernel::from_fn(size, |x, y| gaussian_weight(sigma, x, y))?;
    let r = (size / 2) as isize;
    let norm = 1.0 / ((2.0 * PI).sqrt() * sigma);
    k.factor = Some(
        (-r..=r)
            .map(|i| {
                let x = i as f64;
                norm * (-(x * x) / (2.0 * sigma * sigma)).exp()
            })
            .collect(),
    );
    Ok(k)
}

/// Replicate-padded copy of `field` with `pad` extra pixels on every side.
fn padded(field: &Field, pad: usize, _border: BorderPolicy) -> (Vec<f64>, usize) {
    let (w, h) = field.dims();
    let pw = w + 2 * pad;
    let ph = h + 2 * pad;
    let mut out = Vec::with_capacity(pw * ph);
    for py in 0..ph {
        let y = py.saturating_sub(pad).min(h - 1);
        let row = field.row(y);
        let first = row[0];
        let last = row[w - 1];
        out.extend(std::iter::repeat(first).take(pad));
        out.extend_from_slice(row);
        out.extend(std::iter::repeat(last).take(pad));
    }
    (out, pw)
}

/// Centered cross-correlation:
/// `out(x, y) = Σ field(x + i, y + j) · kernel(i, j)` over kernel offsets,
/// with out-of-range samples resolved by `border`.
pub fn correlate(field: &Field, kernel: &Kernel, border: BorderPolicy) -> Result<Field> {
    field.ensure_finite("correlation input")?;
    Ok(correlate_unchecked(field, kernel, border))
}

/// True convolution, `correlate` against the 180°-rotated kernel.
pub fn convolve(field: &Field, kernel: &Kernel, border: BorderPolicy) -> Result<Field> {
    field.ensure_finite("convolution input")?;
    Ok(correlate_unchecked(field, &kernel.flipped(), border))
}

pub(crate) fn correlate_unchecked(field: &Field, kernel: &Kernel, border: BorderPolicy) -> Field {
    let (w, h) = field.dims();
    if w == 0 || h == 0 {
        return field.clone();
    }
    if let Some(f) = &kernel.factor {
        return correlate_separable(field, f, border);
    }
    let size = kernel.size;
    let r = kernel.radius();
    let (src, pw) = padded(field, r, border);
    let mut out = vec![0.0; w * h];
    // Exactly-zero taps contribute nothing.
    let taps: Vec<(usize, f64)> = kernel
        .weights
        .iter()
        .enumerate()
        .filter(|(_, &k)| k != 0.0)
        .map(|(i, &k)| ((i / size) * pw + i % size, k))
        .collect();
    for y in 0..h {
        let out_row = &mut out[y * w..(y + 1) * w];
        let base = y * pw;
        for &(off, k) in &taps {
            let src_row = &src[base + off..base + off + w];
            for (o, &s) in out_row.iter_mut().zip(src_row) {
                *o += s * k;
            }
        }
    }
    Field::from_vec(w, h, out).expect("shape preserved")
}

fn correlate_separable(field: &Field, factor: &[f64], border: BorderPolicy) -> Field {
    let (w, h) = field.dims();
    let r = factor.len() / 2;
    let (src, pw) = padded(field, r, border);
    let ph = h + 2 * r;
    // Horizontal pass over every padded row, then vertical.
    let mut horiz = vec![0.0; w * ph];
    for py in 0..ph {
        let row = &src[py * pw..(py + 1) * pw];
        let out = &mut horiz[py * w..(py + 1) * w];
        for (i, &k) in factor.iter().enumerate() {
            for (o, &s) in out.iter_mut().zip(&row[i..i + w]) {
                *o += s * k;
            }
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        let o_row = &mut out[y * w..(y + 1) * w];
        for (j, &k) in factor.iter().enumerate() {
            let s_row = &horiz[(y + j) * w..(y + j + 1) * w];
            for (o, &s) in o_row.iter_mut().zip(s_row) {
                *o += s * k;
            }
        }
    }
    Field::from_vec(w, h, out).expect("shape preserved")
}
